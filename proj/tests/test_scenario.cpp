#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mvdc/scenario.hpp"

using namespace mvdc;

TEST_CASE("load_at with a single segment and no pulses") {
  LoadProfile p;
  p.cpl_segments = {{0.0, 4e6}};
  const Disturbance d = load_at(p, 7.0);
  CHECK(d.p_cpl_w == 4e6);
  CHECK(d.p_ppl_w == 0.0);
}

TEST_CASE("pulse intervals are half-open") {
  LoadProfile p;
  p.cpl_segments = {{0.0, 0.0}};
  p.ppl_pulses = {{3.0, 1.0, 2e6}};
  CHECK(load_at(p, 3.0).p_ppl_w == 2e6);
  CHECK(load_at(p, 3.999).p_ppl_w == 2e6);
  CHECK(load_at(p, 4.0).p_ppl_w == 0.0);
}

TEST_CASE("default scenario values") {
  const CaseConfig cfg = default_scenario();
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.t_final_s == 20.0);
  CHECK(cfg.t_s == 0.05);
  CHECK(cfg.ocp.n_p == 10);

  CHECK(load_at(cfg.profile, 12.5).p_cpl_w == 6e6);
  CHECK(load_at(cfg.profile, 12.5).p_ppl_w == 2e6);
  CHECK(load_at(cfg.profile, 3.2).total_w() == 6e6);
  CHECK(load_at(cfg.profile, 10.0).total_w() == 6e6);
}

TEST_CASE("load_at clamps before the first segment") {
  const CaseConfig cfg = default_scenario();
  CHECK(load_at(cfg.profile, -1.0).p_cpl_w == 4e6);
}

TEST_CASE("profile integral matches the segment/pulse sum") {
  const CaseConfig cfg = default_scenario();
  // Right-continuous piecewise-constant: the left-endpoint rule at h = t_s/10
  // is exact when edges sit on the grid.
  const double h = cfg.t_s / 10.0;
  const int n = static_cast<int>(std::lround(cfg.t_final_s / h));
  double integral = 0.0;
  for (int i = 0; i < n; ++i) integral += load_at(cfg.profile, i * h).total_w() * h;

  const double expected = 4e6 * 8.0 + 6e6 * 12.0  // CPL
                          + 2e6 * 1.0 + 2e6 * 0.5 + 2e6 * 1.0 + 1e6 * 1.0;  // PPL
  CHECK(integral == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("sweep_grid cardinality and rescaling") {
  const CaseConfig base = default_scenario();
  const auto single = sweep_grid(base, {3e6}, {0.75});
  REQUIRE(single.size() == 1);
  for (const auto& pulse : single[0].profile.ppl_pulses) {
    CHECK(pulse.p_w == 3e6);
    CHECK(pulse.duration_s == 0.75);
  }
  CHECK(single[0].profile.ppl_pulses[0].t_start_s == 3.0);

  const auto grid = sweep_grid(base, {1e6, 2e6, 4e6}, {0.25, 0.5, 1.0, 2.0});
  CHECK(grid.size() == 12);
}

TEST_CASE("sweep_grid rejects overlapping stretched pulses") {
  CHECK_THROWS_AS(sweep_grid(default_scenario(), {2e6}, {20.0}), RejectOverlap);
}

TEST_CASE("scenario JSON round-trip is lossless") {
  CaseConfig cfg = default_scenario();
  cfg.controller_kind = ControllerKind::EnmpcLocalized;
  cfg.ocp.psi = OcpConfig::economic_psi();
  cfg.ocp.r = 0.0012345678901234567;  // exercise shortest-round-trip printing
  const std::string text = serialize_case(cfg);
  const CaseConfig back = parse_case(text);
  CHECK(serialize_case(back) == text);
  CHECK(back.ocp.r == cfg.ocp.r);
  CHECK(back.controller_kind == cfg.controller_kind);
  CHECK(scenario_hash(back) == scenario_hash(cfg));
}

TEST_CASE("invalid scenarios report the offending field") {
  CaseConfig cfg = default_scenario();
  cfg.plant.r_droop[0] = -0.05;
  std::string json = serialize_case(cfg);
  try {
    parse_case(json);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field == "plant.r_sga_ohm");
  }

  CaseConfig bad_t = default_scenario();
  bad_t.t_final_s = 20.03;
  CHECK_THROWS_AS(parse_case(serialize_case(bad_t)), ConfigError);
}

TEST_CASE("overlapping pulses are rejected at validation") {
  CaseConfig cfg = default_scenario();
  cfg.profile.ppl_pulses.push_back({3.5, 1.0, 1e6});
  CHECK_THROWS_AS(cfg.profile.validate(), RejectOverlap);
}

TEST_CASE("scenario hash ignores the controller kind") {
  const CaseConfig a = default_scenario();
  CaseConfig b = a;
  b.controller_kind = ControllerKind::PrimaryDroop;
  CHECK(scenario_hash(a) == scenario_hash(b));
  CaseConfig c = a;
  c.profile.cpl_segments[0].p_w = 5e6;
  CHECK(scenario_hash(a) != scenario_hash(c));
}
