#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "mvdc/solver.hpp"

using namespace mvdc;

namespace {

const PlantParams kParams = PlantParams::shipboard_defaults();
constexpr double kTs = 0.05;

std::vector<Disturbance> hold(const Disturbance& d, int n) {
  return std::vector<Disturbance>(n, d);
}

double restoring_dv(double p) { return p / (kParams.droop_conductance_sum() * 6000.0); }

}  // namespace

TEST_CASE("warm_start_shift drops the head and repeats the tail") {
  InputSequence s = InputSequence::zeros(DvMode::Centralized, 3);
  s.dofs << 1.0, 2.0, 3.0;
  const InputSequence shifted = warm_start_shift(s);
  CHECK(shifted.dofs[0] == 2.0);
  CHECK(shifted.dofs[1] == 3.0);
  CHECK(shifted.dofs[2] == 3.0);

  InputSequence c = InputSequence::constant(DvMode::Centralized, 5,
                                            ControlInput::centralized(7.0));
  CHECK(warm_start_shift(c).dofs == c.dofs);

  InputSequence loc = InputSequence::zeros(DvMode::Localized, 2);
  loc.dofs << 1, 2, 3, 4, 5, 6, 7, 8;
  const InputSequence ls = warm_start_shift(loc);
  CHECK(ls.dofs[0] == 5.0);
  CHECK(ls.dofs[7] == 8.0);
}

TEST_CASE("solve is a fixed point at the optimum") {
  OcpConfig cfg;
  const double dv = restoring_dv(6e6);
  const ControlInput u = ControlInput::centralized(dv);
  const StateVec x0 = equilibrium(u, {6e6, 0.0}, kParams);
  const InputSequence warm = InputSequence::constant(DvMode::Centralized, cfg.n_p, u);

  const SolveResult res = solve(x0, warm, hold({6e6, 0.0}, cfg.n_p), u, cfg, kParams, kTs);
  CHECK(res.converged);
  CHECK(res.iterations <= 2);
  CHECK((res.useq_opt.dofs - warm.dofs).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("unconstrained rate quadratic converges to zero") {
  OcpConfig cfg;
  cfg.n_p = 1;
  cfg.q = 0.0;
  cfg.r = 1.0;
  const StateVec x0 = equilibrium(ControlInput::centralized(0.0), {}, kParams);
  InputSequence u_init = InputSequence::zeros(DvMode::Centralized, 1);
  u_init.dofs[0] = 42.0;

  const SolveResult res = solve(x0, u_init, hold({}, 1), ControlInput::centralized(0.0),
                                cfg, kParams, kTs);
  CHECK(res.converged);
  CHECK(res.useq_opt.dofs[0] == doctest::Approx(0.0).epsilon(1e-8));
  CHECK(res.j_opt == doctest::Approx(0.0).epsilon(1e-8));
}

TEST_CASE("box projection pins the optimum at the bound") {
  // minimize (u - 200)^2 over [-150, 150]: infeasible previous input pulls
  // the solution onto the upper bound exactly.
  OcpConfig cfg;
  cfg.n_p = 1;
  cfg.q = 0.0;
  cfg.r = 1.0;
  const StateVec x0 = equilibrium(ControlInput::centralized(0.0), {}, kParams);
  const InputSequence u_init = InputSequence::zeros(DvMode::Centralized, 1);

  const SolveResult res = solve(x0, u_init, hold({}, 1), ControlInput::centralized(200.0),
                                cfg, kParams, kTs);
  CHECK(res.converged);
  CHECK(res.useq_opt.dofs[0] == 150.0);
  CHECK(res.j_opt == doctest::Approx(2500.0).epsilon(1e-10));
}

TEST_CASE("re-solving from the shifted optimum converges immediately") {
  OcpConfig cfg;
  const Disturbance d{6e6, 0.0};
  const ControlInput u_prev = ControlInput::centralized(restoring_dv(6e6));
  const StateVec x0 = equilibrium(u_prev, d, kParams);

  const SolveResult first = solve(x0, InputSequence::zeros(DvMode::Centralized, cfg.n_p),
                                  hold(d, cfg.n_p), u_prev, cfg, kParams, kTs);
  CHECK(first.converged);
  const SolveResult second = solve(x0, warm_start_shift(first.useq_opt), hold(d, cfg.n_p),
                                   u_prev, cfg, kParams, kTs);
  CHECK(second.converged);
  CHECK(second.iterations <= 3);
}

TEST_CASE("solve properties over random problems") {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> v_dist(5850.0, 6150.0);
  std::uniform_real_distribution<double> i_dist(0.0, 500.0);
  std::uniform_real_distribution<double> u_dist(-150.0, 150.0);
  std::uniform_real_distribution<double> p_dist(0.0, 8e6);

  for (int trial = 0; trial < 15; ++trial) {
    OcpConfig cfg;
    if (trial % 3 == 0) cfg.psi = OcpConfig::economic_psi();
    const DvMode mode = trial % 2 ? DvMode::Localized : DvMode::Centralized;

    StateVec x0;
    x0[kVo] = v_dist(rng);
    for (int i = 0; i < kNumSources; ++i) x0[kIsga + i] = i_dist(rng);
    x0[kVca] = 0.0;
    x0[kVcb] = 0.0;
    InputSequence u_init = InputSequence::zeros(mode, cfg.n_p);
    for (int i = 0; i < u_init.dof_count(); ++i) u_init.dofs[i] = u_dist(rng);
    const ControlInput u_prev = ControlInput::centralized(u_dist(rng));
    const auto d_pred = hold({p_dist(rng), 0.0}, cfg.n_p);

    const double j_init = rollout_cost(x0, u_init, d_pred, u_prev, cfg, kParams, kTs);
    const SolveResult res = solve(x0, u_init, d_pred, u_prev, cfg, kParams, kTs);

    // Monotone acceptance and exact feasibility, converged or not.
    CHECK(res.j_opt <= j_init);
    CHECK(res.useq_opt.max_abs() <= cfg.u_bound);

    // Determinism: bitwise-identical re-solve.
    const SolveResult again = solve(x0, u_init, d_pred, u_prev, cfg, kParams, kTs);
    CHECK(again.j_opt == res.j_opt);
    CHECK(again.iterations == res.iterations);
    CHECK((again.useq_opt.dofs.array() == res.useq_opt.dofs.array()).all());
  }
}

TEST_CASE("analytic-gradient solve agrees with the finite-difference path") {
  OcpConfig cfg_fd;
  OcpConfig cfg_an;
  cfg_an.use_analytic_gradient = true;
  const Disturbance d{6e6, 0.0};
  const ControlInput u_prev = ControlInput::centralized(0.0);
  const StateVec x0 = equilibrium(u_prev, d, kParams);
  const InputSequence u_init = InputSequence::zeros(DvMode::Centralized, cfg_fd.n_p);

  const SolveResult a = solve(x0, u_init, hold(d, cfg_fd.n_p), u_prev, cfg_fd, kParams, kTs);
  const SolveResult b = solve(x0, u_init, hold(d, cfg_an.n_p), u_prev, cfg_an, kParams, kTs);
  CHECK(a.converged);
  CHECK(b.converged);
  CHECK((a.useq_opt.dofs - b.useq_opt.dofs).cwiseAbs().maxCoeff() < 1e-3);
}
