// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "spoofres/adversary.hpp"
#include "spoofres/config.hpp"
#include "spoofres/filter.hpp"
#include "spoofres/graph.hpp"
#include "spoofres/medag.hpp"
#include "spoofres/scenarios.hpp"
#include "spoofres/sim.hpp"

using namespace spoofres;
using Clock = std::chrono::steady_clock;

namespace {

// Pinned tolerances.
constexpr double kOmniscienceTol = 1e-6;
constexpr Step kOmniscienceBy = 150;
constexpr Step kTransientBefore = 20;
constexpr double kTransientMin = 1e-3;
constexpr double kScenarioSeconds = 1.0;
constexpr double kGrowth = 1.02;
constexpr double kGrowthIdentityTol = 1e-9;
constexpr double kGrowthRatioTol = 1e-3;
constexpr int kPeelCases = 500;
constexpr double kPeelSeconds = 10.0;
constexpr int kExpectedRStar = 5;
constexpr int kTerminationRuns = 100;
constexpr double kTerminationSeconds = 30.0;
constexpr int kFilterCases = 10000;
constexpr int kMonteCarloRuns = 50;
constexpr Step kMonteCarloHorizon = 300;
constexpr double kMonteCarloTol = 1e-4;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, const std::function<Outcome()>& body) {
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << ": " << title;
  if (!o.detail.empty()) std::cout << " (" << o.detail << ")";
  std::cout << std::endl;
}

Outcome scenario_one() {
  const RunConfig cfg = scenario_s1();
  const auto t0 = Clock::now();
  const SimTrace tr = run(cfg);
  const double secs = seconds_since(t0);
  Outcome o;
  double late = 0.0;
  for (Step k = kOmniscienceBy; k < tr.horizon; ++k) {
    for (ModeIndex j = 0; j < tr.modes; ++j) late = std::max(late, tr.max_error(k, j));
  }
  double early_r3 = 0.0;
  for (Step k = 1; k < kTransientBefore; ++k) {
    for (NodeId i : SampleNetwork::r3()) early_r3 = std::max(early_r3, std::abs(tr.error(k, i, 0)));
  }
  o.pass = tr.horizon == 200 && late < kOmniscienceTol && early_r3 > kTransientMin && secs < kScenarioSeconds;
  std::ostringstream os;
  os << "max error from step " << kOmniscienceBy << " = " << late << ", early R3 deviation = " << early_r3
     << ", " << secs << " s";
  o.detail = os.str();
  return o;
}

Outcome scenario_two() {
  const RunConfig cfg = scenario_s2();
  const auto t0 = Clock::now();
  const SimTrace tr = run(cfg);
  const double secs = seconds_since(t0);
  const Step from = cfg.params.kbar;
  std::size_t off_hold = 0;
  std::size_t identity_misses = 0;
  double worst_ratio_gap = 0.0;
  auto check = [&](const NodeSet& group, double held) {
    for (NodeId i : group) {
      for (Step k = from; k < tr.horizon; ++k) {
        if (tr.estimate(k, i, 0) != held) ++off_hold;
        if (k + 1 >= tr.horizon) continue;
        const double e0 = std::abs(tr.error(k, i, 0));
        const double e1 = std::abs(tr.error(k + 1, i, 0));
        // With the estimate frozen at h: |e'| - 1.02|e| = h(1.02 - 1) exactly.
        const double gap = e1 - kGrowth * e0 - held * (kGrowth - 1.0);
        if (std::abs(gap) > kGrowthIdentityTol * std::max(1.0, e1)) ++identity_misses;
        if (k >= tr.horizon - 50) worst_ratio_gap = std::max(worst_ratio_gap, std::abs(e1 / e0 - kGrowth));
      }
    }
  };
  check(SampleNetwork::r2(), 6.0);
  check(SampleNetwork::r3(), 7.0);
  Outcome o;
  o.pass = tr.horizon == 200 && off_hold == 0 && identity_misses == 0 && worst_ratio_gap < kGrowthRatioTol &&
           secs < kScenarioSeconds;
  std::ostringstream os;
  os << off_hold << " off-hold samples, " << identity_misses << " growth misses, late |ratio-1.02| = "
     << worst_ratio_gap << ", " << secs << " s";
  o.detail = os.str();
  return o;
}

Outcome peel_oracle() {
  std::mt19937_64 rng(20240501);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto t0 = Clock::now();
  int agree = 0;
  for (int c = 0; c < kPeelCases; ++c) {
    const int n = std::uniform_int_distribution<int>(2, 8)(rng);
    const double p = 0.2 + 0.7 * unit(rng);
    DirectedGraph g(n);
    for (NodeId a = 0; a < n; ++a) {
      for (NodeId b = 0; b < n; ++b) {
        if (a != b && unit(rng) < p) g.add_edge(a, b);
      }
    }
    NodeSet s;
    for (NodeId v = 0; v < n; ++v) {
      if (unit(rng) < 0.35) s.insert(v);
    }
    if (s.empty()) s.insert(std::uniform_int_distribution<int>(0, n - 1)(rng));
    const int r = std::uniform_int_distribution<int>(1, 4)(rng);
    if (strongly_robust_peel(g, s, r).robust == strongly_robust_bruteforce(g, s, r)) ++agree;
  }
  const double secs = seconds_since(t0);
  return {agree == kPeelCases && secs < kPeelSeconds,
          std::to_string(agree) + "/" + std::to_string(kPeelCases) + " agree, " + std::to_string(secs) + " s"};
}

Outcome sample_topology() {
  const RunConfig cfg = scenario_s1();
  const DirectedGraph g = cfg.union_graph();
  std::ostringstream os;
  bool ok = true;
  for (const NodeSet& sources : {SampleNetwork::r1(), SampleNetwork::r2()}) {
    NodeSet checked = sources;
    checked.insert(SampleNetwork::kSpoofer);
    const int r = max_strong_robustness(g, checked);
    const bool at5 = strongly_robust_peel(g, checked, 5).robust;
    const bool at6 = strongly_robust_peel(g, checked, 6).robust;
    ok = ok && r == kExpectedRStar && at5 && !at6;
    os << "r*=" << r << " ";
  }
  return {ok, os.str() + "w.r.t. each source group plus the spoofer"};
}

Outcome formulas() {
  int misses = 0;
  int cases = 0;
  for (int alpha = 1; alpha <= 5; ++alpha) {
    for (int kbar = 1; kbar <= 6; ++kbar) {
      ++cases;
      const int beta = alpha * kbar - 1;
      if (beta_from_capacity(alpha, kbar) != beta) ++misses;
      if (beta_prime(beta, kbar) != beta / kbar + 1) ++misses;
    }
  }
  // Closed form evaluated independently, with the eta clamp spelled out.
  auto oracle = [](int l, int kbar, int tau, int beta) -> long long {
    long long eta = 0;
    if (tau > kbar) eta = static_cast<long long>(beta) * ((tau - kbar) / kbar);
    return static_cast<long long>(l) * ((eta + 1) * kbar + tau + 1);
  };
  for (int l = 1; l <= 4; ++l) {
    for (int kbar = 1; kbar <= 6; ++kbar) {
      for (int tau = 0; tau <= 12; ++tau) {
        for (int beta = 0; beta <= 5; ++beta) {
          ++cases;
          if (kbar_bound(l, kbar, tau, beta) != oracle(l, kbar, tau, beta)) ++misses;
        }
      }
    }
  }
  const bool anchors = kbar_bound(2, 2, 3, 1) == 12 && kbar_bound(1, 3, 2, 5) == 6 && kbar_bound(1, 2, 6, 1) == 13 &&
                       beta_from_capacity(1, 2) == 1 && beta_prime(1, 2) == 1 && beta_prime(5, 3) == 2;
  return {misses == 0 && anchors, std::to_string(cases) + " grid points, " + std::to_string(misses) + " misses"};
}

RunConfig random_run(int index, Step horizon) {
  RandomScenarioOptions opt;
  opt.regular = 10 + index % 5;
  opt.unstable_modes = 1 + index % 2;
  opt.stable_modes = 1;
  opt.horizon = horizon;
  return random_robust_config(static_cast<std::uint64_t>(1000 + index), opt);
}

struct TerminationStats {
  int runs = 0;
  int late = 0;
  int unterminated = 0;
  int violations = 0;
  int motif_short = 0;
  int followers = 0;
  double secs = 0.0;
};

const TerminationStats& termination_stats() {
  static const TerminationStats stats = [] {
    TerminationStats s;
    const auto t0 = Clock::now();
    for (int i = 0; i < kTerminationRuns; ++i) {
      const RunConfig cfg = random_run(i, 200);
      const SimTrace tr = run(cfg);
      ++s.runs;
      const auto reports = medag_reports(tr, cfg);
      for (const auto& r : reports) {
        if (!r.terminated) ++s.unterminated;
        s.violations += static_cast<int>(r.violations.size());
        if (r.terminated &&
            *r.termination_step > kbar_bound(r.layers.longest_path, cfg.params.kbar, cfg.params.tau_bar, cfg.beta())) {
          ++s.late;
        }
        if (!r.terminated || !r.violations.empty()) continue;
        std::map<NodeId, int> per_center;
        for (const auto& m : trace_motifs(tr, cfg, r.mode)) ++per_center[m.center];
        for (NodeId v : tr.regular) {
          if (tr.sources.at(r.mode).count(v)) continue;
          ++s.followers;
          if (per_center[v] < (cfg.beta() + 1) * cfg.params.f) ++s.motif_short;
        }
      }
    }
    s.secs = seconds_since(t0);
    return s;
  }();
  return stats;
}

Outcome termination() {
  const auto& s = termination_stats();
  std::ostringstream os;
  os << s.runs << " runs, " << s.unterminated << " unterminated, " << s.late << " past bound, " << s.violations
     << " violations, " << s.secs << " s";
  return {s.unterminated == 0 && s.late == 0 && s.violations == 0 && s.secs < kTerminationSeconds, os.str()};
}

Outcome motif_bound() {
  const auto& s = termination_stats();
  return {s.followers > 0 && s.motif_short == 0 && s.unterminated == 0 && s.violations == 0,
          std::to_string(s.followers) + " followers checked, " + std::to_string(s.motif_short) + " short"};
}

Outcome filter_fuzz() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int violations = 0;
  for (int c = 0; c < kFilterCases; ++c) {
    const int f = std::uniform_int_distribution<int>(0, 2)(rng);
    const int beta = std::uniform_int_distribution<int>(0, 3)(rng);
    const int trim = (beta + 1) * f;
    const int bad = std::uniform_int_distribution<int>(0, trim)(rng);
    // Enough slots that trimming keeps at least one value.
    const int need = std::max(1, 2 * trim - bad + 1);
    const int good = std::uniform_int_distribution<int>(need, need + 8)(rng);
    const double lambda = -1.5 + 3.0 * unit(rng);
    std::vector<EstimateSlot> slots;
    double lo = 1e300;
    double hi = -1e300;
    NodeId id = 0;
    for (int q = 0; q < good; ++q) {
      const double v = 100.0 * unit(rng) - 50.0;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      slots.push_back({id++, v, 0, 0, 0, 0});
    }
    for (int q = 0; q < bad; ++q) {
      const double v = unit(rng) < 0.5 ? 1e6 * (unit(rng) - 0.5) : (unit(rng) < 0.5 ? lo : hi);
      slots.push_back({id++, v, 0, 0, 0, 0});
    }
    std::shuffle(slots.begin(), slots.end(), rng);
    const double out = filtered_update({f, beta, lambda, std::nullopt}, slots, 12345.0);
    const double a = lambda * lo;
    const double b = lambda * hi;
    const double tol = 1e-12 * std::max(1.0, std::max(std::abs(a), std::abs(b)));
    if (out < std::min(a, b) - tol || out > std::max(a, b) + tol) ++violations;
  }
  return {violations == 0, std::to_string(kFilterCases) + " instances, " + std::to_string(violations) + " violations"};
}

Outcome monte_carlo() {
  int bad_final = 0;
  int rising = 0;
  int flat = 0;
  int followers = 0;
  double worst = 0.0;
  for (int i = 0; i < kMonteCarloRuns; ++i) {
    const RunConfig cfg = random_run(500 + i, kMonteCarloHorizon);
    const SimTrace tr = run(cfg);
    double final_err = 0.0;
    for (ModeIndex j = 0; j < tr.modes; ++j) final_err = std::max(final_err, tr.max_error(tr.horizon - 1, j));
    worst = std::max(worst, final_err);
    if (!(final_err < kMonteCarloTol)) ++bad_final;
    for (const auto& r : medag_reports(tr, cfg)) {
      if (!r.terminated) {
        ++rising;
        continue;
      }
      for (const auto& [node, slope] : follower_slopes(tr, r.mode, *r.termination_step)) {
        ++followers;
        if (!slope) {
          ++flat;
        } else if (!(*slope < 0.0)) {
          ++rising;
        }
      }
    }
  }
  std::ostringstream os;
  os << kMonteCarloRuns << " runs, worst final error " << worst << ", " << followers << " follower slopes, "
     << rising << " non-negative, " << flat << " already below the noise floor";
  return {bad_final == 0 && rising == 0, os.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Outcome determinism() {
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / ("spoofres_det_" + std::to_string(::getpid()));
  fs::create_directories(root);
  const fs::path cfg = root / "random.json";
  {
    std::ofstream out(cfg, std::ios::binary);
    out << serialize_config(random_run(7, 150));
  }
  int identical = 0;
  int compared = 0;
  const std::vector<fs::path> configs = {fs::path(SPOOFRES_SCENARIO_DIR) / "s1.json", cfg};
  for (std::size_t c = 0; c < configs.size(); ++c) {
    std::vector<fs::path> outs;
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path out = root / ("run" + std::to_string(c) + "_" + std::to_string(rep));
      const std::string cmd = std::string("\"") + SPOOFRES_CLI + "\" simulate --config \"" + configs[c].string() +
                              "\" --horizon 150 --seed 11 --out \"" + out.string() + "\" > /dev/null";
      if (std::system(cmd.c_str()) != 0) return {false, "simulate failed: " + cmd};
      outs.push_back(out);
    }
    for (const char* name : {"estimates.csv", "events.csv"}) {
      ++compared;
      const std::string a = slurp(outs[0] / name);
      if (!a.empty() && a == slurp(outs[1] / name)) ++identical;
    }
  }
  fs::remove_all(root);
  return {identical == compared, std::to_string(identical) + "/" + std::to_string(compared) + " CSV pairs identical"};
}

}  // namespace

int main() {
  report(1, "scenario 1 reaches omniscience after a spoofing transient", scenario_one);
  report(2, "scenario 2 followers hold their initial estimates", scenario_two);
  report(3, "peeling test agrees with brute force", peel_oracle);
  report(4, "sample topology is strongly 5-robust and not 6-robust", sample_topology);
  report(5, "capacity, budget and time-bound formulas", formulas);
  report(6, "construction terminates within the time bound with no violations", termination);
  report(7, "every follower has at least (beta+1)f motifs", motif_bound);
  report(8, "trimmed update stays inside the scaled regular range", filter_fuzz);
  report(9, "random robust networks reach omniscience with decaying errors", monte_carlo);
  report(10, "simulate is byte-for-byte deterministic", determinism);
  std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " FAILED") << std::endl;
  return failures == 0 ? 0 : 1;
}
