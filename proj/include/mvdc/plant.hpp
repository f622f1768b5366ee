#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace mvdc {

// State layout: [V_o, I_sga, I_sgb, I_ba, I_bb, I_sca, I_scb, V_ca, V_cb]
inline constexpr int kNumStates = 9;
inline constexpr int kNumDroop = 4;   // SGa, SGb, Ba, Bb
inline constexpr int kNumSc = 2;      // SCa, SCb
inline constexpr int kNumSources = kNumDroop + kNumSc;

enum StateIndex : int {
  kVo = 0,
  kIsga = 1,
  kIsgb = 2,
  kIba = 3,
  kIbb = 4,
  kIsca = 5,
  kIscb = 6,
  kVca = 7,
  kVcb = 8,
};

using StateVec = Eigen::Matrix<double, kNumStates, 1>;
using StateMat = Eigen::Matrix<double, kNumStates, kNumStates>;
using DroopVec = Eigen::Matrix<double, kNumDroop, 1>;
using ScVec = Eigen::Matrix<double, kNumSc, 1>;
using SourceVec = Eigen::Matrix<double, kNumSources, 1>;
using InputJacobian = Eigen::Matrix<double, kNumStates, kNumDroop>;

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& field, const std::string& what)
      : std::runtime_error(field + ": " + what), field(field) {}
  std::string field;
};

struct VoltageCollapse : std::runtime_error {
  explicit VoltageCollapse(double v_o, double t = -1.0)
      : std::runtime_error("bus voltage collapsed to " + std::to_string(v_o) + " V" +
                           (t >= 0.0 ? " at t=" + std::to_string(t) + " s" : "")),
        v_o(v_o),
        t(t) {}
  double v_o;
  double t;  // simulation time of the collapse, -1 if not in a closed-loop run
};

struct NoEquilibrium : std::runtime_error {
  NoEquilibrium() : std::runtime_error("load exceeds deliverable power, no equilibrium") {}
};

struct PlantParams {
  double c_eq = 0.01;     // bus capacitance, F
  double v_ref = 6000.0;  // droop reference voltage, V
  DroopVec r_droop;       // resistive droop gains, ohm
  DroopVec l_droop;       // droop-branch inductances, H
  ScVec r_sc;             // SC branch resistances, ohm
  ScVec l_sc;             // SC branch inductances, H
  ScVec c_sc;             // SC capacitive droop gains, F

  // 6 kV shipboard defaults: SGa/SGb 0.05/0.1 ohm, Ba/Bb 0.225/0.45 ohm,
  // L_SG 1 mH, L_B 0.8 mH, SC branches 0.05 ohm / 0.4 mH, C_SC 5/10 F.
  static PlantParams shipboard_defaults();

  void validate() const;  // throws ConfigError naming the offending field
  double droop_conductance_sum() const { return r_droop.cwiseInverse().sum(); }
};

enum class DvMode { Centralized, Localized };

// Restoration offsets for the four droop units. Centralized mode carries one
// scalar broadcast to all four; SCs never receive a restoration signal.
struct ControlInput {
  DvMode mode = DvMode::Centralized;
  DroopVec dv = DroopVec::Zero();  // volts

  static ControlInput centralized(double dv_common) {
    ControlInput u;
    u.mode = DvMode::Centralized;
    u.dv.setConstant(dv_common);
    return u;
  }
  static ControlInput localized(const DroopVec& dv) {
    ControlInput u;
    u.mode = DvMode::Localized;
    u.dv = dv;
    return u;
  }
};

struct Disturbance {
  double p_cpl_w = 0.0;
  double p_ppl_w = 0.0;
  double total_w() const { return p_cpl_w + p_ppl_w; }
};

inline constexpr double kVoltageFloor = 1.0;  // V, guard on the P/V_o term

// Continuous-time dynamics. Throws VoltageCollapse if x[kVo] <= v_floor.
StateVec rhs(const StateVec& x, const ControlInput& u, const Disturbance& d,
             const PlantParams& p, double v_floor = kVoltageFloor);

// df/dx at (x, d); only the (0,0) entry depends on the operating point.
StateMat rhs_state_jacobian(const StateVec& x, const Disturbance& d, const PlantParams& p);

// df/d(dv), constant: 1/L_i on the droop-current rows.
InputJacobian rhs_input_jacobian(const PlantParams& p);

// Classical RK4 with u, d held constant over the step.
StateVec step_rk4(const StateVec& x, const ControlInput& u, const Disturbance& d,
                  const PlantParams& p, double h);

// RK4 step plus exact discrete sensitivities A = dx+/dx, B = dx+/d(dv).
StateVec step_rk4_sens(const StateVec& x, const ControlInput& u, const Disturbance& d,
                       const PlantParams& p, double h, StateMat& a_out,
                       InputJacobian& b_out);

// n_substeps RK4 steps of h_total/n_substeps with u, d held. The shipboard
// parameters carry an underdamped ~960 rad/s bus-inductor mode, so single
// steps at the controller rate sit outside the RK4 stability region; callers
// pick substeps that resolve it.
StateVec integrate_rk4(const StateVec& x, const ControlInput& u, const Disturbance& d,
                       const PlantParams& p, double h_total, int n_substeps);

StateVec integrate_rk4_sens(const StateVec& x, const ControlInput& u,
                            const Disturbance& d, const PlantParams& p, double h_total,
                            int n_substeps, StateMat& a_out, InputJacobian& b_out);

// Analytic steady state: SC currents zero, V_Cj = v_ref - V_o, droop currents
// from the droop law, V_o the root of a*V^2 - b*V + P = 0 nearest v_ref.
StateVec equilibrium(const ControlInput& u, const Disturbance& d, const PlantParams& p);

}  // namespace mvdc
