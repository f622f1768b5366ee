#include "mvdc/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace mvdc {

using nlohmann::json;

void LoadProfile::validate() const {
  if (cpl_segments.empty()) {
    throw ConfigError("profile.cpl_segments", "must contain at least one segment");
  }
  if (cpl_segments.front().t_start_s != 0.0) {
    throw ConfigError("profile.cpl_segments[0].t_start_s", "first segment must start at t=0");
  }
  for (size_t i = 0; i < cpl_segments.size(); ++i) {
    if (cpl_segments[i].p_w < 0.0) {
      throw ConfigError("profile.cpl_segments[" + std::to_string(i) + "].p_w",
                        "must be >= 0");
    }
    if (i > 0 && cpl_segments[i].t_start_s <= cpl_segments[i - 1].t_start_s) {
      throw ConfigError("profile.cpl_segments[" + std::to_string(i) + "].t_start_s",
                        "segments must be strictly increasing in t_start_s");
    }
  }
  std::vector<PplPulse> sorted = ppl_pulses;
  std::sort(sorted.begin(), sorted.end(),
            [](const PplPulse& a, const PplPulse& b) { return a.t_start_s < b.t_start_s; });
  for (size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i].duration_s <= 0.0) {
      throw ConfigError("profile.ppl_pulses.duration_s", "must be > 0");
    }
    if (sorted[i].p_w < 0.0) {
      throw ConfigError("profile.ppl_pulses.p_w", "must be >= 0");
    }
    if (i > 0 && sorted[i - 1].t_start_s + sorted[i - 1].duration_s > sorted[i].t_start_s) {
      throw RejectOverlap("pulses at t=" + std::to_string(sorted[i - 1].t_start_s) +
                          " s and t=" + std::to_string(sorted[i].t_start_s) + " s overlap");
    }
  }
}

Disturbance load_at(const LoadProfile& profile, double t) {
  Disturbance d;
  for (const auto& seg : profile.cpl_segments) {
    if (seg.t_start_s <= t) d.p_cpl_w = seg.p_w;
  }
  if (!profile.cpl_segments.empty() && t < profile.cpl_segments.front().t_start_s) {
    d.p_cpl_w = profile.cpl_segments.front().p_w;
  }
  for (const auto& pulse : profile.ppl_pulses) {
    if (t >= pulse.t_start_s && t < pulse.t_start_s + pulse.duration_s) {
      d.p_ppl_w = pulse.p_w;
      break;
    }
  }
  return d;
}

std::string to_string(ControllerKind k) {
  switch (k) {
    case ControllerKind::PrimaryDroop: return "primary_droop";
    case ControllerKind::NmpcCentralized: return "nmpc_centralized";
    case ControllerKind::EnmpcLocalized: return "enmpc_localized";
  }
  return "unknown";
}

ControllerKind controller_kind_from_string(const std::string& s) {
  if (s == "primary_droop") return ControllerKind::PrimaryDroop;
  if (s == "nmpc_centralized") return ControllerKind::NmpcCentralized;
  if (s == "enmpc_localized") return ControllerKind::EnmpcLocalized;
  throw ConfigError("controller_kind", "unknown kind '" + s + "'");
}

void CaseConfig::validate() const {
  plant.validate();
  profile.validate();
  if (!(t_s > 0.0)) throw ConfigError("t_s", "must be > 0");
  const double steps = t_final_s / t_s;
  if (!(t_final_s > 0.0) || std::abs(steps - std::lround(steps)) > 1e-9) {
    throw ConfigError("t_final_s", "must be a positive multiple of t_s");
  }
  if (controller_kind != ControllerKind::PrimaryDroop) ocp.validate();
}

CaseConfig default_scenario() {
  CaseConfig cfg;
  cfg.controller_kind = ControllerKind::NmpcCentralized;
  cfg.plant = PlantParams::shipboard_defaults();
  cfg.profile.cpl_segments = {{0.0, 4e6}, {8.0, 6e6}};
  cfg.profile.ppl_pulses = {
      {3.0, 1.0, 2e6}, {5.0, 0.5, 2e6}, {12.0, 1.0, 2e6}, {15.0, 1.0, 1e6}};
  cfg.ocp = OcpConfig{};
  cfg.t_final_s = 20.0;
  cfg.t_s = 0.05;
  return cfg;
}

std::vector<CaseConfig> sweep_grid(const CaseConfig& base,
                                   const std::vector<double>& magnitudes_w,
                                   const std::vector<double>& durations_s) {
  if (magnitudes_w.empty() || durations_s.empty()) {
    throw ConfigError("sweep", "magnitude and duration lists must be non-empty");
  }
  std::vector<CaseConfig> grid;
  grid.reserve(magnitudes_w.size() * durations_s.size());
  for (double mag : magnitudes_w) {
    for (double dur : durations_s) {
      CaseConfig variant = base;
      for (auto& pulse : variant.profile.ppl_pulses) {
        pulse.p_w = mag;
        pulse.duration_s = dur;
      }
      variant.profile.validate();  // throws RejectOverlap on collision
      grid.push_back(std::move(variant));
    }
  }
  return grid;
}

namespace {

json plant_to_json(const PlantParams& p) {
  return json{{"c_eq_f", p.c_eq},
              {"v_ref_v", p.v_ref},
              {"r_sga_ohm", p.r_droop[0]},
              {"r_sgb_ohm", p.r_droop[1]},
              {"r_ba_ohm", p.r_droop[2]},
              {"r_bb_ohm", p.r_droop[3]},
              {"l_sga_h", p.l_droop[0]},
              {"l_sgb_h", p.l_droop[1]},
              {"l_ba_h", p.l_droop[2]},
              {"l_bb_h", p.l_droop[3]},
              {"r_sca_ohm", p.r_sc[0]},
              {"r_scb_ohm", p.r_sc[1]},
              {"l_sca_h", p.l_sc[0]},
              {"l_scb_h", p.l_sc[1]},
              {"c_sca_f", p.c_sc[0]},
              {"c_scb_f", p.c_sc[1]}};
}

PlantParams plant_from_json(const json& j) {
  PlantParams p;
  p.c_eq = j.at("c_eq_f");
  p.v_ref = j.at("v_ref_v");
  p.r_droop << j.at("r_sga_ohm"), j.at("r_sgb_ohm"), j.at("r_ba_ohm"), j.at("r_bb_ohm");
  p.l_droop << j.at("l_sga_h"), j.at("l_sgb_h"), j.at("l_ba_h"), j.at("l_bb_h");
  p.r_sc << j.at("r_sca_ohm"), j.at("r_scb_ohm");
  p.l_sc << j.at("l_sca_h"), j.at("l_scb_h");
  p.c_sc << j.at("c_sca_f"), j.at("c_scb_f");
  return p;
}

json ocp_to_json(const OcpConfig& c) {
  return json{{"n_p", c.n_p},
              {"q", c.q},
              {"r", c.r},
              {"psi", std::vector<double>(c.psi.data(), c.psi.data() + kNumSources)},
              {"v_sp_v", c.v_sp},
              {"u_bound_v", c.u_bound},
              {"du_bound_v", c.du_bound},
              {"v_band_frac", c.v_band_frac},
              {"rho_state", c.rho_state},
              {"current_limits_a", std::vector<double>(c.current_limits.data(),
                                                       c.current_limits.data() + kNumSources)},
              {"pred_substeps", c.pred_substeps},
              {"use_analytic_gradient", c.use_analytic_gradient}};
}

OcpConfig ocp_from_json(const json& j) {
  OcpConfig c;
  c.n_p = j.at("n_p");
  c.q = j.at("q");
  c.r = j.at("r");
  const auto psi = j.at("psi").get<std::vector<double>>();
  const auto lim = j.at("current_limits_a").get<std::vector<double>>();
  if (psi.size() != kNumSources) throw ConfigError("ocp.psi", "expected 6 entries");
  if (lim.size() != kNumSources) {
    throw ConfigError("ocp.current_limits_a", "expected 6 entries");
  }
  for (int i = 0; i < kNumSources; ++i) {
    c.psi[i] = psi[i];
    c.current_limits[i] = lim[i];
  }
  c.v_sp = j.at("v_sp_v");
  c.u_bound = j.at("u_bound_v");
  c.du_bound = j.at("du_bound_v");
  c.v_band_frac = j.at("v_band_frac");
  c.rho_state = j.at("rho_state");
  c.pred_substeps = j.at("pred_substeps");
  c.use_analytic_gradient = j.at("use_analytic_gradient");
  return c;
}

json profile_to_json(const LoadProfile& p) {
  json segs = json::array();
  for (const auto& s : p.cpl_segments) {
    segs.push_back({{"t_start_s", s.t_start_s}, {"p_w", s.p_w}});
  }
  json pulses = json::array();
  for (const auto& pl : p.ppl_pulses) {
    pulses.push_back(
        {{"t_start_s", pl.t_start_s}, {"duration_s", pl.duration_s}, {"p_w", pl.p_w}});
  }
  return json{{"cpl_segments", segs}, {"ppl_pulses", pulses}};
}

LoadProfile profile_from_json(const json& j) {
  LoadProfile p;
  for (const auto& s : j.at("cpl_segments")) {
    p.cpl_segments.push_back({s.at("t_start_s"), s.at("p_w")});
  }
  for (const auto& pl : j.at("ppl_pulses")) {
    p.ppl_pulses.push_back({pl.at("t_start_s"), pl.at("duration_s"), pl.at("p_w")});
  }
  return p;
}

}  // namespace

std::string serialize_case(const CaseConfig& cfg) {
  json j{{"controller_kind", to_string(cfg.controller_kind)},
         {"t_final_s", cfg.t_final_s},
         {"t_s", cfg.t_s},
         {"preview", cfg.preview},
         {"plant", plant_to_json(cfg.plant)},
         {"profile", profile_to_json(cfg.profile)},
         {"ocp", ocp_to_json(cfg.ocp)}};
  return j.dump(2) + "\n";
}

CaseConfig parse_case(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError("scenario", std::string("invalid JSON: ") + e.what());
  }
  CaseConfig cfg;
  try {
    cfg.controller_kind = controller_kind_from_string(j.at("controller_kind"));
    cfg.t_final_s = j.at("t_final_s");
    cfg.t_s = j.at("t_s");
    cfg.preview = j.value("preview", false);
    cfg.plant = plant_from_json(j.at("plant"));
    cfg.profile = profile_from_json(j.at("profile"));
    cfg.ocp = ocp_from_json(j.at("ocp"));
  } catch (const json::exception& e) {
    throw ConfigError("scenario", std::string("missing or mistyped field: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

CaseConfig load_case_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("scenario", "cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_case(buf.str());
}

void save_case_file(const CaseConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("scenario", "cannot write '" + path + "'");
  out << serialize_case(cfg);
}

std::uint64_t scenario_hash(const CaseConfig& cfg) {
  json j{{"t_final_s", cfg.t_final_s},
         {"t_s", cfg.t_s},
         {"plant", plant_to_json(cfg.plant)},
         {"profile", profile_to_json(cfg.profile)}};
  const std::string s = j.dump();
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace mvdc
