#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "spoofres/config.hpp"
#include "spoofres/error.hpp"
#include "spoofres/export.hpp"
#include "spoofres/graph.hpp"
#include "spoofres/scenarios.hpp"
#include "spoofres/sim.hpp"

using namespace spoofres;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kViolations = 1;
constexpr int kInvalid = 2;
constexpr int kLedger = 3;

std::string set_text(const NodeSet& s) {
  std::ostringstream os;
  os << '{';
  bool first = true;
  for (NodeId v : s) {
    os << (first ? "" : ",") << v;
    first = false;
  }
  os << '}';
  return os.str();
}

int check_robustness(const std::string& path, std::optional<ModeIndex> only) {
  const RunConfig cfg = load_config(path);
  const PreflightReport rep = preflight(cfg);
  const DirectedGraph g = cfg.union_graph();
  std::cout << "beta " << rep.beta;
  if (rep.beta_prime) std::cout << " beta_prime " << *rep.beta_prime;
  std::cout << "\n";
  for (const auto& m : rep.modes) {
    if (only && *only != m.mode) continue;
    std::cout << "mode " << m.mode << " sources " << set_text(m.sources) << " checked " << set_text(m.checked_set)
              << "\n  r_star " << m.r_star << "\n  full " << m.full_threshold << (m.meets_full ? " met" : " not met")
              << "\n  construction " << m.construction_threshold
              << (m.meets_construction ? " met" : " not met") << "\n";
    if (m.randomized_threshold) {
      std::cout << "  randomized " << *m.randomized_threshold << (*m.meets_randomized ? " met" : " not met") << "\n";
    }
    if (m.first_joint_failure) std::cout << "  joint window fails at step " << *m.first_joint_failure << "\n";
    if (m.empty_sources || m.r_star < 1) continue;
    const auto cert = strongly_robust_peel(g, m.checked_set, m.r_star);
    std::cout << "  certificate order";
    for (NodeId v : cert.acceptance_order) std::cout << ' ' << v;
    std::cout << "\n";
    const auto next = strongly_robust_peel(g, m.checked_set, m.r_star + 1);
    std::cout << "  stuck set at r_star+1 " << set_text(next.residual) << "\n";
  }
  for (const auto& w : rep.warnings) std::cout << "warning: " << w << "\n";
  return kOk;
}

int report_medag(const MedagTraceFile& file) {
  const auto reports = verify_trace(file);
  std::cout << medag_reports_json(reports, file);
  for (const auto& r : reports) {
    if (!r.violations.empty() || !r.terminated) return kViolations;
  }
  return kOk;
}

int build_medag(const std::string& path) {
  const RunConfig cfg = load_config(path);
  return report_medag(medag_trace(run(cfg), cfg));
}

int motifs(const std::string& path) {
  const MedagTraceFile file = load_medag_trace(path);
  json out = json::array();
  for (ModeIndex j : file.modes) {
    for (const auto& m : trace_file_motifs(file, j)) {
      out.push_back({{"mode", m.mode}, {"center", m.center}, {"independent", m.independent},
                     {"common", m.common}, {"suspect", m.suspect}});
    }
  }
  std::cout << out.dump(2) << "\n";
  return kOk;
}

void print_summary(const SimTrace& trace, const RunConfig& cfg) {
  std::cout << summary_json(trace, snapshot_metrics(trace, cfg));
}

int simulate(const std::string& path, std::optional<Step> horizon, std::optional<std::uint64_t> seed,
             const std::string& out) {
  RunConfig cfg = load_config(path);
  if (horizon) cfg.params.horizon = *horizon;
  if (seed) cfg.seed = *seed;
  const SimTrace trace = run(cfg);
  const std::string dir = out.empty() ? cfg.output_dir : out;
  if (!dir.empty()) export_csv(trace, cfg, dir);
  print_summary(trace, cfg);
  return kOk;
}

int scenario(const std::string& name, std::optional<Step> horizon, const std::string& out,
             const std::string& config_out) {
  RunConfig cfg;
  if (name == "s1") {
    cfg = scenario_s1();
  } else if (name == "s2") {
    cfg = scenario_s2();
  } else {
    throw ValidationError("scenario", "unknown scenario " + name);
  }
  if (horizon) cfg.params.horizon = *horizon;
  if (!config_out.empty()) {
    std::ofstream file(config_out, std::ios::binary);
    if (!(file << serialize_config(cfg) << "\n")) throw Error(ErrorCode::IoError, "cannot write " + config_out);
  }
  const auto start = std::chrono::steady_clock::now();
  const SimTrace trace = run(cfg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!out.empty()) export_csv(trace, cfg, out);
  print_summary(trace, cfg);
  std::cerr << "ran " << cfg.name << " in " << secs << " s\n";
  return kOk;
}

std::pair<std::uint64_t, std::uint64_t> parse_seed_range(const std::string& text) {
  const auto dots = text.find("..");
  try {
    if (dots == std::string::npos) {
      const auto v = std::stoull(text);
      return {v, v};
    }
    const auto lo = std::stoull(text.substr(0, dots));
    const auto hi = std::stoull(text.substr(dots + 2));
    if (hi < lo) throw ValidationError("seeds", "empty range " + text);
    return {lo, hi};
  } catch (const std::logic_error&) {
    throw ValidationError("seeds", "expected a..b, got " + text);
  }
}

struct SweepRow {
  std::uint64_t seed = 0;
  std::vector<double> final_errors;
  std::size_t violations = 0;
  std::string error;
  int code = kOk;
};

int sweep(const std::string& path, const std::string& seeds, const std::string& out) {
  const RunConfig base = load_config(path);
  const auto [lo, hi] = parse_seed_range(seeds);
  auto one = [&base, &out](std::uint64_t s) {
    SweepRow row;
    row.seed = s;
    RunConfig cfg = base;
    cfg.seed = s;
    try {
      const SimTrace trace = run(cfg);
      for (ModeIndex j = 0; j < trace.modes; ++j) {
        row.final_errors.push_back(trace.z.empty() ? 0.0 : trace.max_error(trace.horizon - 1, j));
      }
      for (const auto& r : medag_reports(trace, cfg)) row.violations += r.violations.size();
      if (!out.empty()) export_csv(trace, cfg, (std::filesystem::path(out) / ("seed_" + std::to_string(s))).string());
    } catch (const Error& e) {
      row.error = e.what();
      row.code = e.code() == ErrorCode::CapacityExceeded ? kLedger : kInvalid;
    }
    return row;
  };
  const std::uint64_t workers = std::max(1u, std::thread::hardware_concurrency());
  std::vector<SweepRow> rows;
  for (std::uint64_t s = lo;;) {
    std::vector<std::future<SweepRow>> batch;
    for (std::uint64_t w = 0; w < workers; ++w) {
      batch.push_back(std::async(std::launch::async, one, s));
      if (s == hi) break;
      ++s;
    }
    for (auto& job : batch) rows.push_back(job.get());
    if (rows.back().seed == hi) break;
  }
  int code = kOk;
  std::cout << "seed,final_max_error,medag_violations,error\n";
  for (const auto& row : rows) {
    std::cout << row.seed << ',';
    for (std::size_t j = 0; j < row.final_errors.size(); ++j) {
      std::cout << (j ? ";" : "") << format_double(row.final_errors[j]);
    }
    std::cout << ',' << row.violations << ',' << row.error << "\n";
    if (row.code != kOk) code = std::max(code, row.code);
    if (row.violations && code == kOk) code = kViolations;
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Resilient distributed observers under smart spoofers"};
  app.require_subcommand(1);

  std::string config_path;
  std::string trace_path;
  std::string out_dir;
  std::string seeds;
  std::string scenario_name;
  std::string config_out;
  std::optional<ModeIndex> mode;
  std::optional<Step> horizon;
  std::optional<std::uint64_t> seed;

  auto* robust = app.add_subcommand("check-robustness", "Topology verdicts per unstable mode");
  robust->add_option("--config", config_path, "Run config (JSON)")->required();
  robust->add_option("--mode", mode, "Only this mode");

  auto* build = app.add_subcommand("build-medag", "Run a config and verify its construction");
  build->add_option("--config", config_path, "Run config (JSON)")->required();

  auto* verify = app.add_subcommand("verify-medag", "Re-check a recorded medag.json");
  verify->add_option("--trace", trace_path, "medag.json written by simulate")->required();

  auto* sim = app.add_subcommand("simulate", "Run a config and write CSV outputs");
  sim->add_option("--config", config_path, "Run config (JSON)")->required();
  sim->add_option("--horizon", horizon, "Override params.horizon");
  sim->add_option("--seed", seed, "Override seed");
  sim->add_option("--out", out_dir, "Output directory");

  auto* scen = app.add_subcommand("scenario", "Run a built-in scenario");
  scen->add_option("name", scenario_name, "s1 or s2")->required()->check(CLI::IsMember({"s1", "s2"}));
  scen->add_option("--horizon", horizon, "Override the horizon");
  scen->add_option("--out", out_dir, "Output directory");
  scen->add_option("--config-out", config_out, "Also write the scenario config as JSON");

  auto* mot = app.add_subcommand("motifs", "List motifs of a recorded construction");
  mot->add_option("--trace", trace_path, "medag.json written by simulate")->required();

  auto* sw = app.add_subcommand("sweep", "Run one config over a seed range");
  sw->add_option("--config", config_path, "Run config (JSON)")->required();
  sw->add_option("--seeds", seeds, "Inclusive range a..b")->required();
  sw->add_option("--out", out_dir, "Per-seed output root");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    if (*robust) return check_robustness(config_path, mode);
    if (*build) return build_medag(config_path);
    if (*verify) return report_medag(load_medag_trace(trace_path));
    if (*sim) return simulate(config_path, horizon, seed, out_dir);
    if (*scen) return scenario(scenario_name, horizon, out_dir, config_out);
    if (*mot) return motifs(trace_path);
    if (*sw) return sweep(config_path, seeds, out_dir);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::CapacityExceeded ? kLedger : kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  }
  return kInvalid;
}
