#include "mvdc/simulator.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

namespace mvdc {

Eigen::Matrix<double, kNumSources, Eigen::Dynamic> source_powers(const Trajectory& traj) {
  Eigen::Matrix<double, kNumSources, Eigen::Dynamic> p(kNumSources, traj.size());
  for (size_t k = 0; k < traj.size(); ++k) {
    p.col(k) = traj.x[k][kVo] * traj.x[k].segment<kNumSources>(kIsga);
  }
  return p;
}

StateVec steady_state_window(const Trajectory& traj, double t_a, double t_b) {
  if (traj.size() == 0 || t_a < traj.t.front() - 1e-9 || t_b > traj.t.back() + 1e-9 ||
      t_b <= t_a) {
    throw WindowTooShort("window outside run or empty");
  }
  if (t_b - t_a < 10.0 * traj.t_s - 1e-9) {
    throw WindowTooShort("window shorter than 10 samples");
  }
  StateVec acc = StateVec::Zero();
  int n = 0;
  for (size_t k = 0; k < traj.size(); ++k) {
    if (traj.t[k] >= t_a - 1e-9 && traj.t[k] <= t_b + 1e-9) {
      acc += traj.x[k];
      ++n;
    }
  }
  if (n < 10) throw WindowTooShort("fewer than 10 samples in window");
  return acc / n;
}

namespace {

void append_double(std::string& line, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  line.append(buf, res.ptr);
}

constexpr const char* kCsvHeader =
    "t_s,v_o_v,i_sga_a,i_sgb_a,i_ba_a,i_bb_a,i_sca_a,i_scb_a,v_ca_v,v_cb_v,"
    "dv_sga_v,dv_sgb_v,dv_ba_v,dv_bb_v,p_cpl_w,p_ppl_w,"
    "solver_iters,solver_kkt,solve_time_s";

}  // namespace

void write_csv(const Trajectory& traj, std::ostream& out, bool include_timing) {
  out << kCsvHeader << "\n";
  std::string line;
  for (size_t k = 0; k < traj.size(); ++k) {
    line.clear();
    append_double(line, traj.t[k]);
    for (int i = 0; i < kNumStates; ++i) {
      line.push_back(',');
      append_double(line, traj.x[k][i]);
    }
    for (int i = 0; i < kNumDroop; ++i) {
      line.push_back(',');
      append_double(line, traj.u[k].dv[i]);
    }
    line.push_back(',');
    append_double(line, traj.d[k].p_cpl_w);
    line.push_back(',');
    append_double(line, traj.d[k].p_ppl_w);
    line.push_back(',');
    line += std::to_string(traj.diag[k].solver_iters);
    line.push_back(',');
    append_double(line, traj.diag[k].solver_kkt);
    line.push_back(',');
    append_double(line, include_timing ? traj.diag[k].solve_time_s : 0.0);
    out << line << "\n";
  }
}

void write_csv_file(const Trajectory& traj, const std::string& path, bool include_timing) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  write_csv(traj, out, include_timing);
}

Trajectory read_csv(std::istream& in) {
  Trajectory traj;
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw std::runtime_error("unrecognized trajectory CSV header");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
    if (vals.size() != 19) throw std::runtime_error("bad trajectory CSV row");
    traj.t.push_back(vals[0]);
    StateVec x;
    for (int i = 0; i < kNumStates; ++i) x[i] = vals[1 + i];
    traj.x.push_back(x);
    DroopVec dv;
    for (int i = 0; i < kNumDroop; ++i) dv[i] = vals[10 + i];
    const bool common = (dv.array() == dv[0]).all();
    traj.u.push_back(common ? ControlInput::centralized(dv[0])
                            : ControlInput::localized(dv));
    traj.d.push_back({vals[14], vals[15]});
    StepDiagnostics diag;
    diag.solver_iters = static_cast<int>(vals[16]);
    diag.solver_kkt = vals[17];
    diag.solve_time_s = vals[18];
    traj.diag.push_back(diag);
  }
  if (traj.size() >= 2) traj.t_s = traj.t[1] - traj.t[0];
  return traj;
}

Trajectory read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return read_csv(in);
}

}  // namespace mvdc
