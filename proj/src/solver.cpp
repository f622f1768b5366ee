#include "mvdc/solver.hpp"

#include <chrono>
#include <cmath>

namespace mvdc {

namespace {

Eigen::VectorXd project_box(const Eigen::VectorXd& v, double bound) {
  return v.cwiseMax(-bound).cwiseMin(bound);
}

}  // namespace

InputSequence warm_start_shift(const InputSequence& prev) {
  InputSequence out = prev;
  const int m = prev.dofs_per_step();
  if (prev.n_p > 1) {
    out.dofs.head((prev.n_p - 1) * m) = prev.dofs.tail((prev.n_p - 1) * m);
    out.dofs.tail(m) = prev.dofs.tail(m);
  }
  return out;
}

SolveResult solve(const StateVec& x0, const InputSequence& u_init,
                  const std::vector<Disturbance>& d_pred, const ControlInput& u_prev,
                  const OcpConfig& cfg, const PlantParams& params, double t_s,
                  const SolverOptions& opts) {
  const auto t_start = std::chrono::steady_clock::now();
  const int n = u_init.dof_count();

  InputSequence u = u_init;
  u.dofs = project_box(u.dofs, cfg.u_bound);

  auto cost = [&](const InputSequence& s) {
    return rollout_cost(x0, s, d_pred, u_prev, cfg, params, t_s);
  };
  auto grad = [&](const InputSequence& s) {
    return cost_gradient(x0, s, d_pred, u_prev, cfg, params, t_s);
  };

  SolveResult res;
  double j_cur = cost(u);
  res.useq_opt = u;
  res.j_opt = j_cur;

  Eigen::VectorXd g = grad(u);
  Eigen::MatrixXd h_inv = Eigen::MatrixXd::Identity(n, n);
  InputSequence trial = u;

  for (int it = 0; it < opts.max_iter; ++it) {
    const Eigen::VectorXd pg = u.dofs - project_box(u.dofs - g, cfg.u_bound);
    res.kkt_residual = pg.lpNorm<Eigen::Infinity>();
    if (res.kkt_residual < opts.tol_kkt * (1.0 + std::abs(j_cur))) {
      res.converged = true;
      break;
    }
    res.iterations = it + 1;

    Eigen::VectorXd dir = -(h_inv * g);
    if (dir.dot(g) >= 0.0) {
      h_inv.setIdentity();
      dir = -g;
    }

    double alpha = 1.0;
    bool accepted = false;
    Eigen::VectorXd step;
    double j_new = j_cur;
    for (int bt = 0; bt < opts.max_backtracks; ++bt) {
      trial.dofs = project_box(u.dofs + alpha * dir, cfg.u_bound);
      step = trial.dofs - u.dofs;
      const double slope = g.dot(step);
      if (step.lpNorm<Eigen::Infinity>() > 1e-14 && slope < 0.0) {
        j_new = cost(trial);
        if (j_new <= j_cur + opts.armijo_c1 * slope) {
          accepted = true;
          break;
        }
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      res.diverged = true;
      break;
    }

    const Eigen::VectorXd g_new = grad(trial);
    const Eigen::VectorXd y = g_new - g;
    const double sy = step.dot(y);
    if (sy > 1e-12 * step.norm() * y.norm()) {
      // BFGS inverse update.
      const Eigen::VectorXd hy = h_inv * y;
      const double yhy = y.dot(hy);
      h_inv += ((sy + yhy) / (sy * sy)) * (step * step.transpose()) -
               (hy * step.transpose() + step * hy.transpose()) / sy;
    }

    u = trial;
    j_cur = j_new;
    g = g_new;
    if (j_cur < res.j_opt) {
      res.j_opt = j_cur;
      res.useq_opt = u;
    }
  }

  res.solve_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return res;
}

}  // namespace mvdc
