#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mvdc/ocp.hpp"
#include "mvdc/plant.hpp"

namespace mvdc {

struct RejectOverlap : std::runtime_error {
  explicit RejectOverlap(const std::string& what) : std::runtime_error(what) {}
};

struct CplSegment {
  double t_start_s = 0.0;
  double p_w = 0.0;
};

struct PplPulse {
  double t_start_s = 0.0;
  double duration_s = 0.0;
  double p_w = 0.0;
};

// Piecewise-constant CPL schedule plus non-overlapping rectangular PPL pulses.
// Pulse intervals are half-open: [t_start, t_start + duration).
struct LoadProfile {
  std::vector<CplSegment> cpl_segments;
  std::vector<PplPulse> ppl_pulses;
  void validate() const;
};

Disturbance load_at(const LoadProfile& profile, double t);

enum class ControllerKind { PrimaryDroop, NmpcCentralized, EnmpcLocalized };

std::string to_string(ControllerKind k);
ControllerKind controller_kind_from_string(const std::string& s);

struct CaseConfig {
  ControllerKind controller_kind = ControllerKind::PrimaryDroop;
  PlantParams plant = PlantParams::shipboard_defaults();
  LoadProfile profile;
  OcpConfig ocp;
  double t_final_s = 20.0;
  double t_s = 0.05;
  bool preview = false;  // perfect load preview over the horizon (ablation)

  int num_steps() const { return static_cast<int>(std::lround(t_final_s / t_s)); }
  void validate() const;
};

// 20 s study: 4 MW CPL stepping to 6 MW at 8 s, four PPL strikes, Np=10
// centralized NMPC setup on the shipboard plant.
CaseConfig default_scenario();

// Cartesian product of pulse magnitude/duration rescalings of `base`.
// Throws RejectOverlap if a stretched duration makes pulses collide.
std::vector<CaseConfig> sweep_grid(const CaseConfig& base,
                                   const std::vector<double>& magnitudes_w,
                                   const std::vector<double>& durations_s);

// JSON scenario file, field-for-field with units in the names.
// Round-trip parse/serialize is lossless.
std::string serialize_case(const CaseConfig& cfg);
CaseConfig parse_case(const std::string& json_text);
CaseConfig load_case_file(const std::string& path);
void save_case_file(const CaseConfig& cfg, const std::string& path);

// Hash over plant + profile + timing (not the controller), used to refuse
// cost comparisons across different scenarios.
std::uint64_t scenario_hash(const CaseConfig& cfg);

}  // namespace mvdc
