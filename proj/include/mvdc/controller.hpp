#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "mvdc/ocp.hpp"
#include "mvdc/scenario.hpp"
#include "mvdc/simulator.hpp"
#include "mvdc/solver.hpp"

namespace mvdc {

struct ControllerState {
  ControllerKind kind = ControllerKind::PrimaryDroop;
  ControlInput u_prev;
  InputSequence useq_warm;
  StepDiagnostics last_diag;

  static ControllerState initial(ControllerKind kind, const OcpConfig& cfg);
};

// One receding-horizon step. For the droop baseline this is always dv = 0.
// NMPC kinds solve from the shifted warm start, apply the first entry, and
// keep the solved sequence for the next sample. d_forecast, when given,
// overrides the default zero-order hold of d_meas over the horizon.
std::pair<ControlInput, ControllerState> control_step(
    const ControllerState& cs, const StateVec& x_meas, const Disturbance& d_meas,
    const OcpConfig& cfg, const PlantParams& params, double t_s,
    const std::vector<Disturbance>* d_forecast = nullptr);

// Copy of `base` running under `kind`. Switching to the localized economic
// controller fills in the standard economic weights when psi is all-zero.
CaseConfig with_controller(const CaseConfig& base, ControllerKind kind);

// Full closed-loop run: plant truth integrated with 100 RK4 substeps per
// controller sample (0.5 ms at the default 50 ms rate, which resolves the
// ~960 rad/s bus mode). Throws VoltageCollapse annotated with the failure
// time. record_substeps switches the output grid to the substep rate (debug).
Trajectory closed_loop(const CaseConfig& cfg, bool record_substeps = false);

inline constexpr int kPlantSubsteps = 100;

}  // namespace mvdc
