#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mvdc/plant.hpp"
#include "mvdc/scenario.hpp"

namespace mvdc {

struct WindowTooShort : std::runtime_error {
  explicit WindowTooShort(const std::string& what) : std::runtime_error(what) {}
};

struct StepDiagnostics {
  int solver_iters = 0;
  double solver_kkt = 0.0;
  double solve_time_s = 0.0;
  double j_opt = 0.0;
  bool converged = true;
};

// Closed-loop run sampled at the controller rate. Row k carries the state at
// t_k, the input applied over [t_k, t_k + t_s), and the load measured at t_k;
// the final row holds the terminal state with the last input repeated.
struct Trajectory {
  double t_s = 0.0;
  std::vector<double> t;
  std::vector<StateVec> x;
  std::vector<ControlInput> u;
  std::vector<Disturbance> d;
  std::vector<StepDiagnostics> diag;
  std::uint64_t scenario_id = 0;

  size_t size() const { return t.size(); }
};

// P_i(t) = V_o(t) * I_i(t) for the six sources, row-per-source.
Eigen::Matrix<double, kNumSources, Eigen::Dynamic> source_powers(const Trajectory& traj);

// Componentwise time average over [t_a, t_b]. Window must span >= 10 samples.
StateVec steady_state_window(const Trajectory& traj, double t_a, double t_b);

// CSV schema (stable column order): t_s, v_o_v, i_sga_a, i_sgb_a, i_ba_a,
// i_bb_a, i_sca_a, i_scb_a, v_ca_v, v_cb_v, dv_sga_v, dv_sgb_v, dv_ba_v,
// dv_bb_v, p_cpl_w, p_ppl_w, solver_iters, solver_kkt, solve_time_s.
// Solve times are wall-clock and break bit-reproducibility, so they are
// written as 0 unless include_timing is set.
void write_csv(const Trajectory& traj, std::ostream& out, bool include_timing = false);
void write_csv_file(const Trajectory& traj, const std::string& path,
                    bool include_timing = false);

Trajectory read_csv(std::istream& in);
Trajectory read_csv_file(const std::string& path);

}  // namespace mvdc
