#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "mvdc/controller.hpp"
#include "mvdc/metrics.hpp"
#include "mvdc/scenario.hpp"
#include "mvdc/simulator.hpp"

namespace fs = std::filesystem;
using namespace mvdc;

namespace {

constexpr int kExitCollapse = 1;
constexpr int kExitConfig = 2;

std::uint64_t fnv64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

fs::path resolve_out(const std::string& out) {
  fs::path p(out);
  const char* root = std::getenv("MVDC_OUT_ROOT");
  if (root && p.is_relative()) p = fs::path(root) / p;
  return p;
}

CaseConfig resolve_scenario(const std::string& spec_path, const std::string& kind_override,
                            bool preview) {
  CaseConfig cfg =
      spec_path == "default" ? default_scenario() : load_case_file(spec_path);
  if (!kind_override.empty()) {
    cfg = with_controller(cfg, controller_kind_from_string(kind_override));
  }
  if (preview) cfg.preview = true;
  cfg.validate();
  return cfg;
}

// Artifact set built in memory so that --check can verify hashes without
// touching the output directory.
using ArtifactMap = std::map<std::string, std::string>;

std::string gnuplot_script() {
  return R"(set datafile separator whitespace
set grid
set term pngcairo size 900,500

set output 'voltage.png'
set ylabel 'bus voltage [V]'
set xlabel 't [s]'
plot 'voltage.dat' using 1:2 with lines title 'V_o'

set output 'power_balance.png'
set ylabel 'power [W]'
plot 'power_balance.dat' using 1:2 with lines title 'generated', \
     'power_balance.dat' using 1:3 with lines title 'load'

set output 'source_powers.png'
plot for [i=2:7] 'source_powers.dat' using 1:i with lines title columnheader(i)

set output 'dv.png'
set ylabel 'restoration signal [V]'
plot for [i=2:5] 'dv.dat' using 1:i with lines title columnheader(i)
)";
}

ArtifactMap build_artifacts(const CaseConfig& cfg, const Trajectory& traj,
                            bool include_timing) {
  ArtifactMap art;
  {
    std::ostringstream csv;
    write_csv(traj, csv, include_timing);
    art["trajectory.csv"] = csv.str();
  }
  art["scenario.json"] = serialize_case(cfg);
  const RunReport report = evaluate_run(traj, cfg);
  art["report.json"] = report_json(report);
  art["report.txt"] = report_table({report});

  std::ostringstream volt, balance, powers, dv;
  const auto p = source_powers(traj);
  volt << "# t_s v_o_v\n";
  balance << "# t_s p_gen_w p_load_w\n";
  powers << "t_s p_sga_w p_sgb_w p_ba_w p_bb_w p_sca_w p_scb_w\n";
  dv << "t_s dv_sga_v dv_sgb_v dv_ba_v dv_bb_v\n";
  for (size_t k = 0; k < traj.size(); ++k) {
    volt << traj.t[k] << ' ' << traj.x[k][kVo] << '\n';
    balance << traj.t[k] << ' ' << p.col(k).sum() << ' ' << traj.d[k].total_w() << '\n';
    powers << traj.t[k];
    for (int i = 0; i < kNumSources; ++i) powers << ' ' << p(i, k);
    powers << '\n';
    dv << traj.t[k];
    for (int i = 0; i < kNumDroop; ++i) dv << ' ' << traj.u[k].dv[i];
    dv << '\n';
  }
  art["voltage.dat"] = volt.str();
  art["power_balance.dat"] = balance.str();
  art["source_powers.dat"] = powers.str();
  art["dv.dat"] = dv.str();
  art["plots.gp"] = gnuplot_script();
  return art;
}

std::string manifest_for(const ArtifactMap& art) {
  nlohmann::json files;
  for (const auto& [name, content] : art) files[name] = hex64(fnv64(content));
  return nlohmann::json{{"files", files}}.dump(2) + "\n";
}

void write_artifacts(const ArtifactMap& art, const fs::path& dir) {
  fs::create_directories(dir);
  for (const auto& [name, content] : art) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw ConfigError("out", "cannot write " + (dir / name).string());
    out << content;
  }
  std::ofstream mf(dir / "manifest.json", std::ios::binary);
  mf << manifest_for(art);
}

int check_artifacts(const ArtifactMap& art, const fs::path& dir) {
  std::ifstream mf(dir / "manifest.json");
  if (!mf) {
    std::cerr << "no manifest.json in " << dir << "\n";
    return kExitCollapse;
  }
  nlohmann::json manifest = nlohmann::json::parse(mf);
  bool ok = true;
  for (const auto& [name, content] : art) {
    const std::string want = manifest["files"].value(name, "");
    const std::string got = hex64(fnv64(content));
    const bool match = want == got;
    std::cout << (match ? "ok       " : "MISMATCH ") << name << "\n";
    ok &= match;
  }
  return ok ? 0 : kExitCollapse;
}

int cmd_simulate(const std::string& scenario, const std::string& kind, bool preview,
                 bool timing, bool substeps, bool check, const std::string& out) {
  const CaseConfig cfg = resolve_scenario(scenario, kind, preview);
  const Trajectory traj = closed_loop(cfg, substeps);
  const ArtifactMap art = build_artifacts(cfg, traj, timing);
  const fs::path dir = resolve_out(out);
  if (check) return check_artifacts(art, dir);
  write_artifacts(art, dir);
  std::cout << art.at("report.txt");
  std::cout << "wrote " << art.size() + 1 << " files to " << dir << "\n";
  return 0;
}

int cmd_compare(const std::string& scenario, std::vector<std::string> kinds,
                bool preview, const std::string& out) {
  if (kinds.size() < 2) {
    std::cerr << "compare: need at least two controller kinds\n";
    return kExitConfig;
  }
  const CaseConfig base = resolve_scenario(scenario, "", preview);
  std::vector<RunReport> reports;
  bool any_failed = false;
  for (const auto& kind_name : kinds) {
    try {
      const CaseConfig cfg = with_controller(base, controller_kind_from_string(kind_name));
      reports.push_back(evaluate_run(closed_loop(cfg), cfg));
    } catch (const std::exception& e) {
      std::cerr << kind_name << ": run failed: " << e.what() << "\n";
      any_failed = true;
    }
  }
  std::cout << report_table(reports);
  nlohmann::json j;
  for (const auto& r : reports) j["runs"].push_back(nlohmann::json::parse(report_json(r)));
  for (size_t i = 0; i < reports.size(); ++i) {
    for (size_t k = 0; k < reports.size(); ++k) {
      if (i == k) continue;
      const double s = compare_cost(reports[i], reports[k]);
      j["cost_savings_pct"][reports[i].controller + "_vs_" + reports[k].controller] = s;
      std::cout << reports[i].controller << " vs " << reports[k].controller
                << ": cost savings " << s << "%\n";
    }
  }
  if (!out.empty()) {
    const fs::path dir = resolve_out(out);
    fs::create_directories(dir);
    std::ofstream f(dir / "compare.json");
    f << j.dump(2) << "\n";
  }
  return any_failed ? kExitCollapse : 0;
}

int cmd_sweep(const std::string& scenario, const std::string& kind,
              std::vector<double> magnitudes, std::vector<double> durations, int jobs,
              const std::string& out) {
  const CaseConfig base = resolve_scenario(scenario, kind, false);
  // Build grid point-by-point so an overlapping variant only skips its row.
  struct Row {
    double mag, dur;
    bool skipped = false;
    std::string note;
    RunReport report;
  };
  std::vector<Row> rows;
  std::vector<CaseConfig> configs;
  for (double mag : magnitudes) {
    for (double dur : durations) {
      Row row{mag, dur};
      try {
        auto grid = sweep_grid(base, {mag}, {dur});
        configs.push_back(grid.front());
      } catch (const RejectOverlap& e) {
        row.skipped = true;
        row.note = e.what();
        configs.push_back(base);  // placeholder, never run
      }
      rows.push_back(std::move(row));
    }
  }

  std::atomic<size_t> next{0};
  const int workers = std::max(1, jobs);
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (size_t i = next++; i < rows.size(); i = next++) {
        if (rows[i].skipped) continue;
        try {
          rows[i].report = evaluate_run(closed_loop(configs[i]), configs[i]);
        } catch (const std::exception& e) {
          rows[i].skipped = true;
          rows[i].note = e.what();
        }
      }
    });
  }
  for (auto& t : pool) t.join();

  std::ostringstream table;
  table << "magnitude_w,duration_s,max_voltage_dev_v,voltage_mape_pct,"
           "worst_sc_settling_s,status\n";
  for (const auto& row : rows) {
    table << row.mag << ',' << row.dur << ',';
    if (row.skipped) {
      table << ",,," << "skipped: " << row.note << "\n";
      continue;
    }
    double worst = 0.0;
    for (const auto& p : row.report.pulses) {
      worst = std::max(worst, p.sc_settling.settled ? p.sc_settling.time_s : 1e9);
    }
    table << row.report.max_voltage_dev_v << ',' << row.report.voltage_mape_pct << ','
          << worst << ",ok\n";
  }
  std::cout << table.str();
  if (!out.empty()) {
    const fs::path dir = resolve_out(out);
    fs::create_directories(dir);
    std::ofstream f(dir / "sweep.csv");
    f << table.str();
  }
  return 0;
}

int cmd_report(const std::string& trajectory_path, const std::string& scenario) {
  const CaseConfig cfg = resolve_scenario(scenario, "", false);
  const Trajectory traj = read_csv_file(trajectory_path);
  const RunReport r = evaluate_run(traj, cfg);
  std::cout << report_table({r});
  std::cout << report_json(r);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MVDC shipboard microgrid NMPC simulator"};
  app.require_subcommand(1);

  std::string scenario = "default", kind, out = "out", trajectory_path;
  std::vector<std::string> kinds;
  std::vector<double> magnitudes, durations;
  bool preview = false, timing = false, substeps = false, check = false;
  int jobs = 1;

  auto* sim = app.add_subcommand("simulate", "run one closed-loop scenario");
  sim->add_option("--scenario", scenario, "scenario JSON path, or 'default'");
  sim->add_option("--controller", kind, "override controller kind");
  sim->add_flag("--preview", preview, "perfect load preview over the horizon");
  sim->add_flag("--timing", timing, "record wall-clock solve times in the CSV");
  sim->add_flag("--substeps", substeps, "record at the plant substep rate");
  sim->add_flag("--check", check, "verify artifact hashes against manifest.json");
  sim->add_option("--out", out, "output directory");

  auto* cmp = app.add_subcommand("compare", "run several controllers on one profile");
  cmp->add_option("--scenario", scenario, "scenario JSON path, or 'default'");
  cmp->add_option("--kinds", kinds, "controller kinds to compare")
      ->expected(-1)
      ->delimiter(',');
  cmp->add_flag("--preview", preview, "perfect load preview over the horizon");
  cmp->add_option("--out", out, "output directory");

  auto* swp = app.add_subcommand("sweep", "pulse magnitude/duration grid");
  swp->add_option("--scenario", scenario, "scenario JSON path, or 'default'");
  swp->add_option("--controller", kind, "override controller kind");
  swp->add_option("--magnitudes", magnitudes, "pulse magnitudes, W")
      ->expected(-1)
      ->delimiter(',');
  swp->add_option("--durations", durations, "pulse durations, s")
      ->expected(-1)
      ->delimiter(',');
  swp->add_option("--jobs", jobs, "parallel workers");
  swp->add_option("--out", out, "output directory");

  auto* rep = app.add_subcommand("report", "metrics from a recorded trajectory CSV");
  rep->add_option("--trajectory", trajectory_path, "trajectory CSV")->required();
  rep->add_option("--scenario", scenario, "scenario JSON path, or 'default'");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (sim->parsed()) return cmd_simulate(scenario, kind, preview, timing, substeps,
                                           check, out);
    if (cmp->parsed()) return cmd_compare(scenario, kinds, preview, out);
    if (swp->parsed()) return cmd_sweep(scenario, kind, magnitudes, durations, jobs, out);
    if (rep->parsed()) return cmd_report(trajectory_path, scenario);
  } catch (const VoltageCollapse& e) {
    std::cerr << "simulation aborted: " << e.what() << "\n";
    return kExitCollapse;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const RejectOverlap& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCollapse;
  }
  return 0;
}
