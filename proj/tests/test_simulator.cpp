#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "mvdc/controller.hpp"
#include "mvdc/simulator.hpp"

using namespace mvdc;

namespace {

const PlantParams kParams = PlantParams::shipboard_defaults();

CaseConfig droop_6mw() {
  CaseConfig cfg = with_controller(default_scenario(), ControllerKind::PrimaryDroop);
  cfg.profile.cpl_segments = {{0.0, 6e6}};
  cfg.profile.ppl_pulses.clear();
  return cfg;
}

}  // namespace

TEST_CASE("source powers are V_o * I_i") {
  Trajectory traj;
  traj.t_s = 0.05;
  StateVec x = StateVec::Zero();
  x[kVo] = 6000.0;
  traj.t = {0.0};
  traj.x = {x};
  traj.u = {ControlInput::centralized(0.0)};
  traj.d = {{}};
  traj.diag = {{}};
  CHECK(source_powers(traj).cwiseAbs().maxCoeff() == 0.0);

  x[kIsga] = 548.0;
  traj.x[0] = x;
  CHECK(source_powers(traj)(0, 0) == doctest::Approx(3.288e6));
}

TEST_CASE("generated power follows the load on a steady segment") {
  const Trajectory traj = closed_loop(droop_6mw());
  const auto p = source_powers(traj);
  const double total = p.col(traj.size() - 1).sum();
  CHECK(total == doctest::Approx(6e6).epsilon(0.005));
}

TEST_CASE("steady_state_window averages and guards") {
  const Trajectory traj = closed_loop(droop_6mw());
  const StateVec avg = steady_state_window(traj, 15.0, 20.0);
  const StateVec eq = equilibrium(ControlInput::centralized(0.0), {6e6, 0.0}, kParams);
  for (int i = 0; i < kNumStates; ++i) {
    CHECK(std::abs(avg[i] - eq[i]) <= 1e-3 * std::max(1.0, std::abs(eq[i])));
  }

  CHECK_THROWS_AS(steady_state_window(traj, 19.9, 20.0), WindowTooShort);
  CHECK_THROWS_AS(steady_state_window(traj, 18.0, 25.0), WindowTooShort);

  Trajectory constant;
  constant.t_s = 0.05;
  StateVec x = StateVec::Constant(3.0);
  for (int k = 0; k <= 100; ++k) {
    constant.t.push_back(k * 0.05);
    constant.x.push_back(x);
    constant.u.push_back(ControlInput::centralized(0.0));
    constant.d.push_back({});
    constant.diag.push_back({});
  }
  CHECK((steady_state_window(constant, 0.0, 5.0) - x).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("CSV round-trip preserves the trajectory") {
  CaseConfig cfg = droop_6mw();
  cfg.t_final_s = 2.0;
  const Trajectory traj = closed_loop(cfg);

  std::ostringstream out;
  write_csv(traj, out);
  std::istringstream in(out.str());
  const Trajectory back = read_csv(in);

  REQUIRE(back.size() == traj.size());
  for (size_t k = 0; k < traj.size(); ++k) {
    CHECK(back.t[k] == traj.t[k]);
    CHECK((back.x[k].array() == traj.x[k].array()).all());
    CHECK((back.u[k].dv.array() == traj.u[k].dv.array()).all());
    CHECK(back.d[k].p_cpl_w == traj.d[k].p_cpl_w);
  }
  // Re-serialization is bit-identical.
  std::ostringstream again;
  write_csv(back, again);
  CHECK(again.str() == out.str());
}

TEST_CASE("closed-loop runs are bit-reproducible") {
  CaseConfig cfg = with_controller(default_scenario(), ControllerKind::NmpcCentralized);
  cfg.t_final_s = 3.0;
  const Trajectory a = closed_loop(cfg);
  const Trajectory b = closed_loop(cfg);
  REQUIRE(a.size() == b.size());
  for (size_t k = 0; k < a.size(); ++k) {
    CHECK((a.x[k].array() == b.x[k].array()).all());
    CHECK((a.u[k].dv.array() == b.u[k].dv.array()).all());
  }
}

TEST_CASE("bus-capacitor discrete consistency over one substep") {
  // C_eq * dV_o over one RK4 substep equals h * (net current - load current)
  // evaluated at the midpoint state, with local error O(h^3).
  StateVec x = equilibrium(ControlInput::centralized(0.0), {4e6, 0.0}, kParams);
  x[kIsca] = 150.0;  // off-equilibrium so the derivative is nonzero
  const ControlInput u = ControlInput::centralized(10.0);
  const Disturbance d{4e6, 2e6};

  auto residual = [&](double h) {
    const StateVec x1 = step_rk4(x, u, d, kParams, h);
    const StateVec mid = 0.5 * (x + x1);
    const double net =
        mid.segment<kNumSources>(kIsga).sum() - d.total_w() / mid[kVo];
    return std::abs(kParams.c_eq * (x1[kVo] - x[kVo]) - h * net);
  };
  const double r1 = residual(5e-4);
  const double r2 = residual(2.5e-4);
  CHECK(r1 / r2 > 6.0);  // ~8 for O(h^3)
  CHECK(r1 / r2 < 10.0);
  CHECK(r1 < 1e-3 * kParams.c_eq * std::abs(x[kVo]));
}

TEST_CASE("substep recording refines the grid by the substep count") {
  CaseConfig cfg = droop_6mw();
  cfg.t_final_s = 1.0;
  const Trajectory coarse = closed_loop(cfg, false);
  const Trajectory fine = closed_loop(cfg, true);
  CHECK(coarse.size() == 21);
  CHECK(fine.size() == 20 * kPlantSubsteps + 1);
  CHECK(fine.t_s == doctest::Approx(0.05 / kPlantSubsteps));
  // Shared grid points agree exactly.
  CHECK((fine.x[kPlantSubsteps].array() == coarse.x[1].array()).all());
  CHECK((fine.x.back().array() == coarse.x.back().array()).all());
}
