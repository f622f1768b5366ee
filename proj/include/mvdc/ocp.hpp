#pragma once

#include <vector>

#include "mvdc/plant.hpp"

namespace mvdc {

struct OcpConfig {
  int n_p = 10;       // prediction horizon, controller samples
  double q = 1.0;     // squared bus-voltage tracking weight
  double r = 0.001;   // squared input-rate weight per dof
  SourceVec psi = SourceVec::Zero();  // economic weights on squared source currents
  double v_sp = 6000.0;               // bus voltage setpoint, V
  double u_bound = 150.0;             // |dv_i| box, V
  double du_bound = 0.0;              // per-step |du| limit, <= 0 disables
  double v_band_frac = 0.04;          // soft bus-voltage band, fraction of v_sp
  double rho_state = 1e3;             // soft state-constraint penalty weight
  SourceVec current_limits = (SourceVec() << 1500, 1500, 800, 800, 2000, 2000).finished();
  // RK4 substeps per controller sample in the prediction model. The plant's
  // ~960 rad/s bus mode needs substeps of ~2.5 ms or less for a stable map.
  int pred_substeps = 20;
  bool use_analytic_gradient = false;

  static SourceVec economic_psi() {
    return (SourceVec() << 0.002, 0.002, 0.005, 0.005, 0.005, 0.005).finished();
  }
  void validate() const;
};

// Stacked decision variables over the horizon: one dof per step centralized,
// four per step localized.
struct InputSequence {
  DvMode mode = DvMode::Centralized;
  int n_p = 0;
  Eigen::VectorXd dofs;

  static InputSequence constant(DvMode mode, int n_p, const ControlInput& u);
  static InputSequence zeros(DvMode mode, int n_p);

  int dofs_per_step() const { return mode == DvMode::Centralized ? 1 : kNumDroop; }
  int dof_count() const { return n_p * dofs_per_step(); }
  ControlInput input_at(int j) const;
  double max_abs() const { return dofs.size() ? dofs.cwiseAbs().maxCoeff() : 0.0; }
};

struct Rollout {
  Eigen::Matrix<double, kNumStates, Eigen::Dynamic> states;  // x(k+1)..x(k+N_p)
  Eigen::VectorXd stage_costs;
  double total_cost = 0.0;
};

// Single-shooting rollout: integrate the prediction model one controller
// sample per stage, accumulating tracking, rate, economic, and soft-bound
// penalties. Throws VoltageCollapse if the predicted bus voltage dies.
Rollout rollout(const StateVec& x0, const InputSequence& useq,
                const std::vector<Disturbance>& d_pred, const ControlInput& u_prev,
                const OcpConfig& cfg, const PlantParams& params, double t_s);

// rollout() cost with collapse mapped to +inf.
double rollout_cost(const StateVec& x0, const InputSequence& useq,
                    const std::vector<Disturbance>& d_pred, const ControlInput& u_prev,
                    const OcpConfig& cfg, const PlantParams& params, double t_s);

Eigen::VectorXd cost_gradient_fd(const StateVec& x0, const InputSequence& useq,
                                 const std::vector<Disturbance>& d_pred,
                                 const ControlInput& u_prev, const OcpConfig& cfg,
                                 const PlantParams& params, double t_s);

// Discrete adjoint through the RK4 prediction steps; matches the central-FD
// gradient to ~1e-6 relative.
Eigen::VectorXd cost_gradient_analytic(const StateVec& x0, const InputSequence& useq,
                                       const std::vector<Disturbance>& d_pred,
                                       const ControlInput& u_prev, const OcpConfig& cfg,
                                       const PlantParams& params, double t_s);

Eigen::VectorXd cost_gradient(const StateVec& x0, const InputSequence& useq,
                              const std::vector<Disturbance>& d_pred,
                              const ControlInput& u_prev, const OcpConfig& cfg,
                              const PlantParams& params, double t_s);

}  // namespace mvdc
