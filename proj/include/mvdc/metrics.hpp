#pragma once

#include <string>
#include <vector>

#include "mvdc/scenario.hpp"
#include "mvdc/simulator.hpp"

namespace mvdc {

struct ZeroReference : std::runtime_error {
  ZeroReference() : std::runtime_error("mape reference contains a zero entry") {}
};

struct ScenarioMismatch : std::runtime_error {
  ScenarioMismatch() : std::runtime_error("reports come from different scenarios") {}
};

// Mean absolute percentage error with the reference in the denominator.
double mape(const std::vector<double>& actual, const std::vector<double>& reference);

struct SettlingResult {
  double time_s = 0.0;
  bool settled = false;
};

// First time after event_t from which the series stays within
// +-band_frac * |final| of its final windowed value through end_t.
SettlingResult settling_time(const std::vector<double>& series, double t_s,
                             double event_t, double end_t, double band_frac = 0.02);

// First delay after event_t from which |series| stays below
// frac_of_peak * max|series| over [window_start, end_t). Used for the
// SC transient-power decay, whose final value is zero.
SettlingResult decay_time(const std::vector<double>& series, double t_s,
                          double window_start, double event_t, double end_t,
                          double frac_of_peak);

struct PulseReport {
  double t_start_s = 0.0;
  double t_end_s = 0.0;
  double sc_peak_power_w = 0.0;       // max |P_SCa + P_SCb| around the pulse
  SettlingResult sc_settling;          // decay to 1% of peak after pulse end
  double sc_residual_after_1s_w = 0.0; // |P_SC| one second past the pulse end
};

struct RunReport {
  std::string controller;
  std::uint64_t scenario_id = 0;
  double voltage_mape_pct = 0.0;
  double sharing_sg = 0.0;  // I_SGa / I_SGb on the steady window
  double sharing_b = 0.0;   // I_Ba / I_Bb on the steady window
  double sc_steady_power_w = 0.0;
  double generation_cost = 0.0;  // sum_k sum_i psi_i I_i(k)^2 t_s
  double max_voltage_dev_v = 0.0;
  int input_bound_violations = 0;
  std::vector<PulseReport> pulses;
  double steady_window_start_s = 0.0;
  double steady_window_end_s = 0.0;
};

RunReport evaluate_run(const Trajectory& traj, const CaseConfig& cfg);

// Savings of a relative to b in percent: 100 * (cost_b - cost_a) / cost_b.
double compare_cost(const RunReport& a, const RunReport& b);

std::string report_json(const RunReport& r);
std::string report_table(const std::vector<RunReport>& reports);

}  // namespace mvdc
