#include "mvdc/plant.hpp"

#include <cmath>

namespace mvdc {

PlantParams PlantParams::shipboard_defaults() {
  PlantParams p;
  p.c_eq = 0.01;
  p.v_ref = 6000.0;
  p.r_droop << 0.05, 0.1, 0.225, 0.45;
  p.l_droop << 0.001, 0.001, 0.0008, 0.0008;
  p.r_sc << 0.05, 0.05;
  p.l_sc << 0.0004, 0.0004;
  p.c_sc << 5.0, 10.0;
  return p;
}

namespace {
void require_positive(double v, const char* field) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ConfigError(field, "must be strictly positive, got " + std::to_string(v));
  }
}
}  // namespace

void PlantParams::validate() const {
  require_positive(c_eq, "plant.c_eq_f");
  require_positive(v_ref, "plant.v_ref_v");
  static const char* droop_r[] = {"plant.r_sga_ohm", "plant.r_sgb_ohm",
                                  "plant.r_ba_ohm", "plant.r_bb_ohm"};
  static const char* droop_l[] = {"plant.l_sga_h", "plant.l_sgb_h",
                                  "plant.l_ba_h", "plant.l_bb_h"};
  for (int i = 0; i < kNumDroop; ++i) {
    require_positive(r_droop[i], droop_r[i]);
    require_positive(l_droop[i], droop_l[i]);
  }
  static const char* sc_r[] = {"plant.r_sca_ohm", "plant.r_scb_ohm"};
  static const char* sc_l[] = {"plant.l_sca_h", "plant.l_scb_h"};
  static const char* sc_c[] = {"plant.c_sca_f", "plant.c_scb_f"};
  for (int j = 0; j < kNumSc; ++j) {
    require_positive(r_sc[j], sc_r[j]);
    require_positive(l_sc[j], sc_l[j]);
    require_positive(c_sc[j], sc_c[j]);
  }
}

StateVec rhs(const StateVec& x, const ControlInput& u, const Disturbance& d,
             const PlantParams& p, double v_floor) {
  const double v_o = x[kVo];
  if (v_o <= v_floor) throw VoltageCollapse(v_o);

  StateVec dx;
  const double i_total = x.segment<kNumSources>(kIsga).sum();
  dx[kVo] = (i_total - d.total_w() / v_o) / p.c_eq;
  for (int i = 0; i < kNumDroop; ++i) {
    dx[kIsga + i] =
        (p.v_ref - p.r_droop[i] * x[kIsga + i] - v_o + u.dv[i]) / p.l_droop[i];
  }
  for (int j = 0; j < kNumSc; ++j) {
    dx[kIsca + j] =
        (p.v_ref - p.r_sc[j] * x[kIsca + j] - x[kVca + j] - v_o) / p.l_sc[j];
    dx[kVca + j] = x[kIsca + j] / p.c_sc[j];
  }
  return dx;
}

StateMat rhs_state_jacobian(const StateVec& x, const Disturbance& d, const PlantParams& p) {
  StateMat jac = StateMat::Zero();
  const double v_o = x[kVo];
  jac(kVo, kVo) = d.total_w() / (v_o * v_o * p.c_eq);
  for (int k = 0; k < kNumSources; ++k) jac(kVo, kIsga + k) = 1.0 / p.c_eq;
  for (int i = 0; i < kNumDroop; ++i) {
    jac(kIsga + i, kVo) = -1.0 / p.l_droop[i];
    jac(kIsga + i, kIsga + i) = -p.r_droop[i] / p.l_droop[i];
  }
  for (int j = 0; j < kNumSc; ++j) {
    jac(kIsca + j, kVo) = -1.0 / p.l_sc[j];
    jac(kIsca + j, kIsca + j) = -p.r_sc[j] / p.l_sc[j];
    jac(kIsca + j, kVca + j) = -1.0 / p.l_sc[j];
    jac(kVca + j, kIsca + j) = 1.0 / p.c_sc[j];
  }
  return jac;
}

InputJacobian rhs_input_jacobian(const PlantParams& p) {
  InputJacobian jac = InputJacobian::Zero();
  for (int i = 0; i < kNumDroop; ++i) jac(kIsga + i, i) = 1.0 / p.l_droop[i];
  return jac;
}

StateVec step_rk4(const StateVec& x, const ControlInput& u, const Disturbance& d,
                  const PlantParams& p, double h) {
  const StateVec k1 = rhs(x, u, d, p);
  const StateVec k2 = rhs(x + 0.5 * h * k1, u, d, p);
  const StateVec k3 = rhs(x + 0.5 * h * k2, u, d, p);
  const StateVec k4 = rhs(x + h * k3, u, d, p);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

StateVec step_rk4_sens(const StateVec& x, const ControlInput& u, const Disturbance& d,
                       const PlantParams& p, double h, StateMat& a_out,
                       InputJacobian& b_out) {
  const InputJacobian g = rhs_input_jacobian(p);

  const StateVec k1 = rhs(x, u, d, p);
  const StateVec x2 = x + 0.5 * h * k1;
  const StateVec k2 = rhs(x2, u, d, p);
  const StateVec x3 = x + 0.5 * h * k2;
  const StateVec k3 = rhs(x3, u, d, p);
  const StateVec x4 = x + h * k3;
  const StateVec k4 = rhs(x4, u, d, p);

  const StateMat j1 = rhs_state_jacobian(x, d, p);
  const StateMat j2 = rhs_state_jacobian(x2, d, p);
  const StateMat j3 = rhs_state_jacobian(x3, d, p);
  const StateMat j4 = rhs_state_jacobian(x4, d, p);

  const StateMat eye = StateMat::Identity();
  const StateMat dk1 = j1;
  const StateMat dk2 = j2 * (eye + 0.5 * h * dk1);
  const StateMat dk3 = j3 * (eye + 0.5 * h * dk2);
  const StateMat dk4 = j4 * (eye + h * dk3);
  a_out = eye + (h / 6.0) * (dk1 + 2.0 * dk2 + 2.0 * dk3 + dk4);

  const InputJacobian b1 = g;
  const InputJacobian b2 = g + j2 * (0.5 * h * b1);
  const InputJacobian b3 = g + j3 * (0.5 * h * b2);
  const InputJacobian b4 = g + j4 * (h * b3);
  b_out = (h / 6.0) * (b1 + 2.0 * b2 + 2.0 * b3 + b4);

  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

StateVec integrate_rk4(const StateVec& x, const ControlInput& u, const Disturbance& d,
                       const PlantParams& p, double h_total, int n_substeps) {
  const double h = h_total / n_substeps;
  StateVec out = x;
  for (int i = 0; i < n_substeps; ++i) out = step_rk4(out, u, d, p, h);
  return out;
}

StateVec integrate_rk4_sens(const StateVec& x, const ControlInput& u,
                            const Disturbance& d, const PlantParams& p, double h_total,
                            int n_substeps, StateMat& a_out, InputJacobian& b_out) {
  const double h = h_total / n_substeps;
  StateVec out = x;
  a_out.setIdentity();
  b_out.setZero();
  StateMat a_step;
  InputJacobian b_step;
  for (int i = 0; i < n_substeps; ++i) {
    out = step_rk4_sens(out, u, d, p, h, a_step, b_step);
    a_out = a_step * a_out;
    b_out = a_step * b_out + b_step;
  }
  return out;
}

StateVec equilibrium(const ControlInput& u, const Disturbance& d, const PlantParams& p) {
  // Power balance V_o * sum_i (v_ref + dv_i - V_o)/R_i = P collapses to
  // a*V^2 - b*V + P = 0 with a = sum 1/R_i, b = sum (v_ref + dv_i)/R_i.
  const double a = p.droop_conductance_sum();
  const double b = ((p.v_ref + u.dv.array()) / p.r_droop.array()).sum();
  const double disc = b * b - 4.0 * a * d.total_w();
  if (disc < 0.0) throw NoEquilibrium();
  const double v_o = (b + std::sqrt(disc)) / (2.0 * a);

  StateVec x = StateVec::Zero();
  x[kVo] = v_o;
  for (int i = 0; i < kNumDroop; ++i) {
    x[kIsga + i] = (p.v_ref - v_o + u.dv[i]) / p.r_droop[i];
  }
  for (int j = 0; j < kNumSc; ++j) {
    x[kIsca + j] = 0.0;
    x[kVca + j] = p.v_ref - v_o;
  }
  return x;
}

}  // namespace mvdc
