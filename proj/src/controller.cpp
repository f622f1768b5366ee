#include "mvdc/controller.hpp"

namespace mvdc {

namespace {

DvMode mode_for(ControllerKind kind) {
  return kind == ControllerKind::EnmpcLocalized ? DvMode::Localized
                                                : DvMode::Centralized;
}

}  // namespace

ControllerState ControllerState::initial(ControllerKind kind, const OcpConfig& cfg) {
  ControllerState cs;
  cs.kind = kind;
  const DvMode mode = mode_for(kind);
  cs.u_prev = mode == DvMode::Centralized ? ControlInput::centralized(0.0)
                                          : ControlInput::localized(DroopVec::Zero());
  cs.useq_warm = InputSequence::zeros(mode, cfg.n_p);
  return cs;
}

std::pair<ControlInput, ControllerState> control_step(
    const ControllerState& cs, const StateVec& x_meas, const Disturbance& d_meas,
    const OcpConfig& cfg, const PlantParams& params, double t_s,
    const std::vector<Disturbance>* d_forecast) {
  if (cs.kind == ControllerKind::PrimaryDroop) {
    return {cs.u_prev, cs};
  }

  const std::vector<Disturbance> d_pred =
      d_forecast ? *d_forecast : std::vector<Disturbance>(cfg.n_p, d_meas);

  const InputSequence u_init = warm_start_shift(cs.useq_warm);
  const SolveResult res = solve(x_meas, u_init, d_pred, cs.u_prev, cfg, params, t_s);

  ControllerState next = cs;
  next.u_prev = res.useq_opt.input_at(0);
  next.useq_warm = res.useq_opt;
  next.last_diag.solver_iters = res.iterations;
  next.last_diag.solver_kkt = res.kkt_residual;
  next.last_diag.solve_time_s = res.solve_time_s;
  next.last_diag.j_opt = res.j_opt;
  next.last_diag.converged = res.converged;
  return {next.u_prev, next};
}

CaseConfig with_controller(const CaseConfig& base, ControllerKind kind) {
  CaseConfig cfg = base;
  cfg.controller_kind = kind;
  if (kind == ControllerKind::EnmpcLocalized && cfg.ocp.psi.isZero()) {
    cfg.ocp.psi = OcpConfig::economic_psi();
  }
  return cfg;
}

Trajectory closed_loop(const CaseConfig& cfg, bool record_substeps) {
  cfg.validate();
  const int n_steps = cfg.num_steps();
  const double h = cfg.t_s / kPlantSubsteps;

  const DvMode mode = mode_for(cfg.controller_kind);
  const ControlInput u_zero = mode == DvMode::Centralized
                                  ? ControlInput::centralized(0.0)
                                  : ControlInput::localized(DroopVec::Zero());

  // Start from the dv=0 equilibrium under the t=0 load, SC virtual
  // capacitors discharged.
  StateVec x = equilibrium(u_zero, load_at(cfg.profile, 0.0), cfg.plant);
  x[kVca] = 0.0;
  x[kVcb] = 0.0;

  ControllerState cs = ControllerState::initial(cfg.controller_kind, cfg.ocp);

  Trajectory traj;
  traj.t_s = record_substeps ? h : cfg.t_s;
  traj.scenario_id = scenario_hash(cfg);
  traj.t.reserve(n_steps + 1);

  for (int k = 0; k < n_steps; ++k) {
    const double t_k = k * cfg.t_s;
    const Disturbance d_meas = load_at(cfg.profile, t_k);

    std::vector<Disturbance> forecast;
    const std::vector<Disturbance>* fc = nullptr;
    if (cfg.preview && cfg.controller_kind != ControllerKind::PrimaryDroop) {
      forecast.reserve(cfg.ocp.n_p);
      for (int j = 0; j < cfg.ocp.n_p; ++j) {
        forecast.push_back(load_at(cfg.profile, t_k + j * cfg.t_s));
      }
      fc = &forecast;
    }

    ControlInput u;
    std::tie(u, cs) = control_step(cs, x, d_meas, cfg.ocp, cfg.plant, cfg.t_s, fc);

    traj.t.push_back(t_k);
    traj.x.push_back(x);
    traj.u.push_back(u);
    traj.d.push_back(d_meas);
    traj.diag.push_back(cs.last_diag);

    try {
      for (int i = 0; i < kPlantSubsteps; ++i) {
        const Disturbance d_sub = load_at(cfg.profile, t_k + i * h);
        x = step_rk4(x, u, d_sub, cfg.plant, h);
        if (record_substeps && i + 1 < kPlantSubsteps) {
          traj.t.push_back(t_k + (i + 1) * h);
          traj.x.push_back(x);
          traj.u.push_back(u);
          traj.d.push_back(d_sub);
          traj.diag.push_back(cs.last_diag);
        }
      }
    } catch (const VoltageCollapse& e) {
      throw VoltageCollapse(e.v_o, t_k);
    }
  }

  traj.t.push_back(n_steps * cfg.t_s);
  traj.x.push_back(x);
  traj.u.push_back(traj.u.back());
  traj.d.push_back(load_at(cfg.profile, n_steps * cfg.t_s));
  traj.diag.push_back(StepDiagnostics{});
  return traj;
}

}  // namespace mvdc
