#pragma once

#include <vector>

#include "mvdc/ocp.hpp"

namespace mvdc {

struct SolverOptions {
  int max_iter = 50;
  double tol_kkt = 1e-6;      // scaled by (1 + |J|)
  double armijo_c1 = 1e-4;
  int max_backtracks = 30;
};

struct SolveResult {
  InputSequence useq_opt;
  double j_opt = 0.0;
  int iterations = 0;
  bool converged = false;
  bool diverged = false;       // line search stalled; best iterate returned
  double kkt_residual = 0.0;   // projected-gradient inf-norm
  double solve_time_s = 0.0;
};

// Projected quasi-Newton descent over the box |dof| <= cfg.u_bound:
// BFGS curvature, gradient projection, Armijo backtracking. Deterministic;
// always returns the best feasible iterate seen.
SolveResult solve(const StateVec& x0, const InputSequence& u_init,
                  const std::vector<Disturbance>& d_pred, const ControlInput& u_prev,
                  const OcpConfig& cfg, const PlantParams& params, double t_s,
                  const SolverOptions& opts = {});

// Receding-horizon shift: drop the first entry, duplicate the last.
InputSequence warm_start_shift(const InputSequence& prev);

}  // namespace mvdc
