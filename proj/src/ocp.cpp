#include "mvdc/ocp.hpp"

#include <cmath>
#include <limits>

namespace mvdc {

void OcpConfig::validate() const {
  if (n_p < 1) throw ConfigError("ocp.n_p", "horizon must be >= 1");
  if (q < 0.0) throw ConfigError("ocp.q", "must be >= 0");
  if (r < 0.0) throw ConfigError("ocp.r", "must be >= 0");
  if ((psi.array() < 0.0).any()) throw ConfigError("ocp.psi", "must be >= 0 elementwise");
  if (!(u_bound > 0.0)) throw ConfigError("ocp.u_bound_v", "must be > 0");
  if (!(v_sp > 0.0)) throw ConfigError("ocp.v_sp_v", "must be > 0");
  if (!(rho_state >= 0.0)) throw ConfigError("ocp.rho_state", "must be >= 0");
  if (pred_substeps < 1) throw ConfigError("ocp.pred_substeps", "must be >= 1");
}

InputSequence InputSequence::constant(DvMode mode, int n_p, const ControlInput& u) {
  InputSequence s;
  s.mode = mode;
  s.n_p = n_p;
  s.dofs.resize(s.dof_count());
  for (int j = 0; j < n_p; ++j) {
    if (mode == DvMode::Centralized) {
      s.dofs[j] = u.dv[0];
    } else {
      s.dofs.segment<kNumDroop>(j * kNumDroop) = u.dv;
    }
  }
  return s;
}

InputSequence InputSequence::zeros(DvMode mode, int n_p) {
  InputSequence s;
  s.mode = mode;
  s.n_p = n_p;
  s.dofs = Eigen::VectorXd::Zero(s.dof_count());
  return s;
}

ControlInput InputSequence::input_at(int j) const {
  if (mode == DvMode::Centralized) return ControlInput::centralized(dofs[j]);
  return ControlInput::localized(dofs.segment<kNumDroop>(j * kNumDroop));
}

namespace {

Eigen::VectorXd input_dofs(const ControlInput& u, DvMode mode) {
  if (mode == DvMode::Centralized) {
    Eigen::VectorXd v(1);
    v[0] = u.dv[0];
    return v;
  }
  return u.dv;
}

// State-dependent part of the stage cost at a predicted node.
double node_cost(const StateVec& x, const OcpConfig& cfg) {
  const double ev = x[kVo] - cfg.v_sp;
  double c = cfg.q * ev * ev;
  for (int s = 0; s < kNumSources; ++s) {
    const double i = x[kIsga + s];
    c += cfg.psi[s] * i * i;
    const double over = std::abs(i) - cfg.current_limits[s];
    if (over > 0.0) c += cfg.rho_state * over * over;
  }
  const double v_hi = cfg.v_sp * (1.0 + cfg.v_band_frac);
  const double v_lo = cfg.v_sp * (1.0 - cfg.v_band_frac);
  if (x[kVo] > v_hi) c += cfg.rho_state * (x[kVo] - v_hi) * (x[kVo] - v_hi);
  if (x[kVo] < v_lo) c += cfg.rho_state * (v_lo - x[kVo]) * (v_lo - x[kVo]);
  return c;
}

StateVec node_cost_gradient(const StateVec& x, const OcpConfig& cfg) {
  StateVec g = StateVec::Zero();
  g[kVo] = 2.0 * cfg.q * (x[kVo] - cfg.v_sp);
  for (int s = 0; s < kNumSources; ++s) {
    const double i = x[kIsga + s];
    g[kIsga + s] = 2.0 * cfg.psi[s] * i;
    const double over = std::abs(i) - cfg.current_limits[s];
    if (over > 0.0) g[kIsga + s] += 2.0 * cfg.rho_state * over * (i > 0 ? 1.0 : -1.0);
  }
  const double v_hi = cfg.v_sp * (1.0 + cfg.v_band_frac);
  const double v_lo = cfg.v_sp * (1.0 - cfg.v_band_frac);
  if (x[kVo] > v_hi) g[kVo] += 2.0 * cfg.rho_state * (x[kVo] - v_hi);
  if (x[kVo] < v_lo) g[kVo] -= 2.0 * cfg.rho_state * (v_lo - x[kVo]);
  return g;
}

// Rate-of-change cost over one step, du in dof space.
double rate_cost(const Eigen::VectorXd& du, const OcpConfig& cfg) {
  double c = cfg.r * du.squaredNorm();
  if (cfg.du_bound > 0.0) {
    for (int i = 0; i < du.size(); ++i) {
      const double over = std::abs(du[i]) - cfg.du_bound;
      if (over > 0.0) c += cfg.rho_state * over * over;
    }
  }
  return c;
}

Eigen::VectorXd rate_cost_gradient(const Eigen::VectorXd& du, const OcpConfig& cfg) {
  Eigen::VectorXd g = 2.0 * cfg.r * du;
  if (cfg.du_bound > 0.0) {
    for (int i = 0; i < du.size(); ++i) {
      const double over = std::abs(du[i]) - cfg.du_bound;
      if (over > 0.0) g[i] += 2.0 * cfg.rho_state * over * (du[i] > 0 ? 1.0 : -1.0);
    }
  }
  return g;
}

void check_rollout_args(const InputSequence& useq, const std::vector<Disturbance>& d_pred,
                        const OcpConfig& cfg) {
  if (useq.n_p != cfg.n_p) throw ConfigError("ocp.useq", "sequence length != horizon");
  if (static_cast<int>(d_pred.size()) != cfg.n_p) {
    throw ConfigError("ocp.d_pred", "forecast length != horizon");
  }
}

}  // namespace

Rollout rollout(const StateVec& x0, const InputSequence& useq,
                const std::vector<Disturbance>& d_pred, const ControlInput& u_prev,
                const OcpConfig& cfg, const PlantParams& params, double t_s) {
  check_rollout_args(useq, d_pred, cfg);
  Rollout out;
  out.states.resize(kNumStates, cfg.n_p);
  out.stage_costs.resize(cfg.n_p);

  StateVec x = x0;
  Eigen::VectorXd u_last = input_dofs(u_prev, useq.mode);
  const int m = useq.dofs_per_step();
  for (int j = 0; j < cfg.n_p; ++j) {
    const Eigen::VectorXd u_j = useq.dofs.segment(j * m, m);
    x = integrate_rk4(x, useq.input_at(j), d_pred[j], params, t_s, cfg.pred_substeps);
    out.states.col(j) = x;
    out.stage_costs[j] = node_cost(x, cfg) + rate_cost(u_j - u_last, cfg);
    u_last = u_j;
  }
  out.total_cost = out.stage_costs.sum();
  return out;
}

double rollout_cost(const StateVec& x0, const InputSequence& useq,
                    const std::vector<Disturbance>& d_pred, const ControlInput& u_prev,
                    const OcpConfig& cfg, const PlantParams& params, double t_s) {
  try {
    return rollout(x0, useq, d_pred, u_prev, cfg, params, t_s).total_cost;
  } catch (const VoltageCollapse&) {
    return std::numeric_limits<double>::infinity();
  }
}

Eigen::VectorXd cost_gradient_fd(const StateVec& x0, const InputSequence& useq,
                                 const std::vector<Disturbance>& d_pred,
                                 const ControlInput& u_prev, const OcpConfig& cfg,
                                 const PlantParams& params, double t_s) {
  check_rollout_args(useq, d_pred, cfg);
  Eigen::VectorXd grad(useq.dof_count());
  InputSequence pert = useq;
  for (int i = 0; i < useq.dof_count(); ++i) {
    const double h = 1e-4 * (1.0 + std::abs(useq.dofs[i]));
    pert.dofs[i] = useq.dofs[i] + h;
    const double jp = rollout_cost(x0, pert, d_pred, u_prev, cfg, params, t_s);
    pert.dofs[i] = useq.dofs[i] - h;
    const double jm = rollout_cost(x0, pert, d_pred, u_prev, cfg, params, t_s);
    pert.dofs[i] = useq.dofs[i];
    grad[i] = (jp - jm) / (2.0 * h);
  }
  return grad;
}

Eigen::VectorXd cost_gradient_analytic(const StateVec& x0, const InputSequence& useq,
                                       const std::vector<Disturbance>& d_pred,
                                       const ControlInput& u_prev, const OcpConfig& cfg,
                                       const PlantParams& params, double t_s) {
  check_rollout_args(useq, d_pred, cfg);
  const int n_p = cfg.n_p;
  const int m = useq.dofs_per_step();

  std::vector<StateVec> nodes(n_p);        // x(k+1)..x(k+N_p)
  std::vector<StateMat> a(n_p);            // dx(k+j+1)/dx(k+j)
  std::vector<InputJacobian> b(n_p);       // dx(k+j+1)/d(dv_j)
  StateVec x = x0;
  for (int j = 0; j < n_p; ++j) {
    x = integrate_rk4_sens(x, useq.input_at(j), d_pred[j], params, t_s,
                           cfg.pred_substeps, a[j], b[j]);
    nodes[j] = x;
  }

  Eigen::VectorXd grad = Eigen::VectorXd::Zero(useq.dof_count());

  // Rate terms couple neighboring steps only.
  Eigen::VectorXd u_last = input_dofs(u_prev, useq.mode);
  for (int j = 0; j < n_p; ++j) {
    const Eigen::VectorXd u_j = useq.dofs.segment(j * m, m);
    const Eigen::VectorXd g = rate_cost_gradient(u_j - u_last, cfg);
    grad.segment(j * m, m) += g;
    if (j > 0) grad.segment((j - 1) * m, m) -= g;
    u_last = u_j;
  }

  // Backward costate sweep for the state-dependent terms.
  StateVec lambda = node_cost_gradient(nodes[n_p - 1], cfg);
  for (int j = n_p - 1; j >= 0; --j) {
    const Eigen::Matrix<double, kNumDroop, 1> gu = b[j].transpose() * lambda;
    if (useq.mode == DvMode::Centralized) {
      grad[j] += gu.sum();
    } else {
      grad.segment<kNumDroop>(j * m) += gu;
    }
    if (j > 0) {
      lambda = node_cost_gradient(nodes[j - 1], cfg) + a[j].transpose() * lambda;
    }
  }
  return grad;
}

Eigen::VectorXd cost_gradient(const StateVec& x0, const InputSequence& useq,
                              const std::vector<Disturbance>& d_pred,
                              const ControlInput& u_prev, const OcpConfig& cfg,
                              const PlantParams& params, double t_s) {
  if (cfg.use_analytic_gradient) {
    return cost_gradient_analytic(x0, useq, d_pred, u_prev, cfg, params, t_s);
  }
  return cost_gradient_fd(x0, useq, d_pred, u_prev, cfg, params, t_s);
}

}  // namespace mvdc
