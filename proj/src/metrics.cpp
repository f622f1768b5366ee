#include "mvdc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace mvdc {

double mape(const std::vector<double>& actual, const std::vector<double>& reference) {
  if (actual.size() != reference.size() || actual.empty()) {
    throw std::invalid_argument("mape: series lengths differ or empty");
  }
  double acc = 0.0;
  for (size_t i = 0; i < actual.size(); ++i) {
    if (reference[i] == 0.0) throw ZeroReference();
    acc += std::abs(reference[i] - actual[i]) / std::abs(reference[i]);
  }
  return 100.0 * acc / static_cast<double>(actual.size());
}

namespace {

int index_at(double t, double t_s) { return static_cast<int>(std::ceil(t / t_s - 1e-9)); }

}  // namespace

SettlingResult settling_time(const std::vector<double>& series, double t_s,
                             double event_t, double end_t, double band_frac) {
  const int n = static_cast<int>(series.size());
  const int i_event = std::clamp(index_at(event_t, t_s), 0, n - 1);
  const int i_end = std::clamp(index_at(end_t, t_s), i_event + 1, n);

  // Final value: average of the trailing 10% of the window (at least one sample).
  const int tail = std::max(1, (i_end - i_event) / 10);
  double final_val = 0.0;
  for (int i = i_end - tail; i < i_end; ++i) final_val += series[i];
  final_val /= tail;

  const double band = band_frac * std::abs(final_val);
  int last_outside = i_event - 1;
  for (int i = i_event; i < i_end; ++i) {
    if (std::abs(series[i] - final_val) > band) last_outside = i;
  }
  if (last_outside >= i_end - 1) return {std::numeric_limits<double>::quiet_NaN(), false};
  return {(last_outside + 1) * t_s - event_t, true};
}

SettlingResult decay_time(const std::vector<double>& series, double t_s,
                          double window_start, double event_t, double end_t,
                          double frac_of_peak) {
  const int n = static_cast<int>(series.size());
  const int i_win = std::clamp(index_at(window_start, t_s), 0, n - 1);
  const int i_event = std::clamp(index_at(event_t, t_s), i_win, n - 1);
  const int i_end = std::clamp(index_at(end_t, t_s), i_event + 1, n);

  double peak = 0.0;
  for (int i = i_win; i < i_end; ++i) peak = std::max(peak, std::abs(series[i]));
  if (peak == 0.0) return {0.0, true};

  const double thr = frac_of_peak * peak;
  int last_above = i_event - 1;
  for (int i = i_event; i < i_end; ++i) {
    if (std::abs(series[i]) > thr) last_above = i;
  }
  if (last_above >= i_end - 1) return {std::numeric_limits<double>::quiet_NaN(), false};
  const double t_settle = std::max(0.0, (last_above + 1) * t_s - event_t);
  return {t_settle, true};
}

RunReport evaluate_run(const Trajectory& traj, const CaseConfig& cfg) {
  RunReport r;
  r.controller = to_string(cfg.controller_kind);
  r.scenario_id = traj.scenario_id ? traj.scenario_id : scenario_hash(cfg);

  const size_t n = traj.size();
  std::vector<double> v_o(n), v_ref(n, cfg.ocp.v_sp);
  for (size_t k = 0; k < n; ++k) v_o[k] = traj.x[k][kVo];
  r.voltage_mape_pct = mape(v_o, v_ref);
  for (double v : v_o) r.max_voltage_dev_v = std::max(r.max_voltage_dev_v,
                                                      std::abs(v - cfg.ocp.v_sp));

  // Steady window: clear of the last pulse, at the tail of the run.
  double window_start = cfg.t_final_s - 3.0;
  for (const auto& p : cfg.profile.ppl_pulses) {
    window_start = std::max(window_start, p.t_start_s + p.duration_s + 2.0);
  }
  window_start = std::min(window_start, cfg.t_final_s - 10.0 * cfg.t_s);
  r.steady_window_start_s = window_start;
  r.steady_window_end_s = cfg.t_final_s;
  const StateVec avg = steady_state_window(traj, window_start, cfg.t_final_s);
  r.sharing_sg = avg[kIsga] / avg[kIsgb];
  r.sharing_b = avg[kIba] / avg[kIbb];
  r.sc_steady_power_w =
      std::abs(avg[kVo] * avg[kIsca]) + std::abs(avg[kVo] * avg[kIscb]);

  const SourceVec psi = OcpConfig::economic_psi();
  for (size_t k = 0; k + 1 < n; ++k) {
    const auto currents = traj.x[k].segment<kNumSources>(kIsga);
    r.generation_cost += psi.dot(currents.cwiseAbs2()) * traj.t_s;
  }

  for (size_t k = 0; k < n; ++k) {
    if (traj.u[k].dv.cwiseAbs().maxCoeff() > cfg.ocp.u_bound + 1e-9) {
      ++r.input_bound_violations;
    }
  }

  // SC transient power around each pulse.
  std::vector<double> p_sc(n);
  for (size_t k = 0; k < n; ++k) {
    p_sc[k] = traj.x[k][kVo] * (traj.x[k][kIsca] + traj.x[k][kIscb]);
  }
  std::vector<PplPulse> pulses = cfg.profile.ppl_pulses;
  std::sort(pulses.begin(), pulses.end(),
            [](const PplPulse& a, const PplPulse& b) { return a.t_start_s < b.t_start_s; });
  for (size_t i = 0; i < pulses.size(); ++i) {
    PulseReport pr;
    pr.t_start_s = pulses[i].t_start_s;
    pr.t_end_s = pulses[i].t_start_s + pulses[i].duration_s;
    const double window_end =
        (i + 1 < pulses.size()) ? pulses[i + 1].t_start_s : cfg.t_final_s;
    const int i_a = index_at(pr.t_start_s, traj.t_s);
    const int i_b = std::min<int>(index_at(window_end, traj.t_s), n);
    for (int k = i_a; k < i_b; ++k) {
      pr.sc_peak_power_w = std::max(pr.sc_peak_power_w, std::abs(p_sc[k]));
    }
    pr.sc_settling =
        decay_time(p_sc, traj.t_s, pr.t_start_s, pr.t_end_s, window_end, 0.01);
    const int i_1s = index_at(pr.t_end_s + 1.0, traj.t_s);
    if (i_1s < static_cast<int>(n)) pr.sc_residual_after_1s_w = std::abs(p_sc[i_1s]);
    r.pulses.push_back(pr);
  }
  return r;
}

double compare_cost(const RunReport& a, const RunReport& b) {
  if (a.scenario_id != b.scenario_id) throw ScenarioMismatch();
  return 100.0 * (b.generation_cost - a.generation_cost) / b.generation_cost;
}

std::string report_json(const RunReport& r) {
  nlohmann::json pulses = nlohmann::json::array();
  for (const auto& p : r.pulses) {
    pulses.push_back({{"t_start_s", p.t_start_s},
                      {"t_end_s", p.t_end_s},
                      {"sc_peak_power_w", p.sc_peak_power_w},
                      {"sc_settling_s", p.sc_settling.settled ? p.sc_settling.time_s : -1.0},
                      {"sc_settled", p.sc_settling.settled},
                      {"sc_residual_after_1s_w", p.sc_residual_after_1s_w}});
  }
  nlohmann::json j{{"controller", r.controller},
                   {"scenario_id", r.scenario_id},
                   {"voltage_mape_pct", r.voltage_mape_pct},
                   {"sharing_sg", r.sharing_sg},
                   {"sharing_b", r.sharing_b},
                   {"sc_steady_power_w", r.sc_steady_power_w},
                   {"generation_cost", r.generation_cost},
                   {"max_voltage_dev_v", r.max_voltage_dev_v},
                   {"input_bound_violations", r.input_bound_violations},
                   {"steady_window_s", {r.steady_window_start_s, r.steady_window_end_s}},
                   {"pulses", pulses}};
  return j.dump(2) + "\n";
}

std::string report_table(const std::vector<RunReport>& reports) {
  std::ostringstream out;
  out << "controller          mape%     maxdev_V  share_SG  share_B   sc_W      cost      viol\n";
  for (const auto& r : reports) {
    char line[256];
    std::snprintf(line, sizeof(line), "%-19s %-9.4f %-9.2f %-9.4f %-9.4f %-9.1f %-9.1f %d\n",
                  r.controller.c_str(), r.voltage_mape_pct, r.max_voltage_dev_v,
                  r.sharing_sg, r.sharing_b, r.sc_steady_power_w, r.generation_cost,
                  r.input_bound_violations);
    out << line;
  }
  return out.str();
}

}  // namespace mvdc
