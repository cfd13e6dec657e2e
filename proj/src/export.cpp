#include "spoofres/export.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "spoofres/error.hpp"

namespace spoofres {

using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string estimates_csv(const SimTrace& trace) {
  std::ostringstream os;
  os << "# config_hash=" << trace.config_hash << " seed=" << trace.seed << "\n";
  os << "step,node,mode,estimate_z,true_z,error\n";
  for (std::size_t k = 0; k < trace.estimates.size(); ++k) {
    for (NodeId i : trace.regular) {
      for (ModeIndex j = 0; j < trace.modes; ++j) {
        const double est = trace.estimate(static_cast<Step>(k), i, j);
        const double truth = trace.z[k][j];
        os << k << ',' << i << ',' << j << ',' << format_double(est) << ',' << format_double(truth) << ','
           << format_double(est - truth) << '\n';
      }
    }
  }
  return os.str();
}

std::string events_csv(const SimTrace& trace) {
  std::ostringstream os;
  os << "# config_hash=" << trace.config_hash << " seed=" << trace.seed << "\n";
  os << "step,kind,node,mode,other,value,detail\n";
  // Events and emissions interleave by step; emissions come last within a step.
  std::size_t e = 0;
  auto flush_events = [&](Step upto) {
    for (; e < trace.events.size() && trace.events[e].step <= upto; ++e) {
      const auto& ev = trace.events[e];
      os << ev.step << ',' << ev.kind << ',' << ev.node << ',' << ev.mode << ',' << ev.other << ",," << ev.detail
         << '\n';
    }
  };
  for (const auto& em : trace.emissions) {
    flush_events(em.step);
    os << em.step << ",emit," << em.target << ',' << em.mode << ',' << em.claimed << ','
       << format_double(em.value) << ',' << (em.kind == PacketKind::Chi ? (em.chi_valid ? "flag" : "bad_flag") : "estimate")
       << ";spoofer=" << em.spoofer << ";delay=" << em.delay << (em.delivered ? "" : ";dropped") << '\n';
  }
  flush_events(std::numeric_limits<Step>::max());
  return os.str();
}

std::string summary_json(const SimTrace& trace, const Summary& s) {
  json modes = json::array();
  for (const auto& m : s.modes) {
    modes.push_back({{"mode", m.mode},
                     {"eigenvalue", trace.eigenvalues[m.mode]},
                     {"final_max_error", m.final_max_error},
                     {"settle_step", m.settle_step ? json(*m.settle_step) : json(nullptr)},
                     {"decay_slope", m.decay_slope ? json(*m.decay_slope) : json(nullptr)},
                     {"medag_termination", m.medag_termination ? json(*m.medag_termination) : json(nullptr)},
                     {"medag_bound", m.medag_bound ? json(*m.medag_bound) : json(nullptr)}});
  }
  json out = {{"config_hash", trace.config_hash},
              {"seed", trace.seed},
              {"horizon", trace.horizon},
              {"modes", std::move(modes)},
              {"max_delay", s.max_delay},
              {"max_update_gap", s.max_update_gap},
              {"max_staleness", s.max_staleness},
              {"max_truth_residual", s.max_truth_residual},
              {"detections", s.detections},
              {"drops", s.drops},
              {"emissions", s.emissions}};
  return out.dump(2) + "\n";
}

MedagTraceFile medag_trace(const SimTrace& trace, const RunConfig& config) {
  MedagTraceFile f;
  f.graph = config.union_graph();
  f.regular = NodeSet(trace.regular.begin(), trace.regular.end());
  f.adversaries = trace.adversaries;
  f.f = config.params.f;
  f.beta = config.beta();
  f.kbar = config.params.kbar;
  f.tau_bar = config.params.tau_bar;
  f.modes = trace.medag_modes;
  f.sources = trace.sources;
  f.parents = trace.parents;
  f.impersonated = trace.impersonated;
  return f;
}

std::string medag_trace_json(const MedagTraceFile& f) {
  json edges = json::array();
  for (const auto& [a, b] : f.graph.edges()) edges.push_back({a, b});
  json modes = json::array();
  for (ModeIndex j : f.modes) {
    json records = json::array();
    for (const auto& [i, rec] : f.parents.at(j)) {
      records.push_back({{"node", i},
                         {"parents", rec.parents},
                         {"forged", rec.forged},
                         {"activation_step", rec.activation_step ? json(*rec.activation_step) : json(nullptr)}});
    }
    json imp = json::array();
    if (auto it = f.impersonated.find(j); it != f.impersonated.end()) {
      for (const auto& [i, ids] : it->second) imp.push_back({{"node", i}, {"identities", ids}});
    }
    modes.push_back({{"mode", j}, {"sources", f.sources.at(j)}, {"records", std::move(records)},
                     {"impersonated", std::move(imp)}});
  }
  json out = {{"node_count", f.graph.size()}, {"edges", std::move(edges)}, {"regular", f.regular},
              {"adversaries", f.adversaries}, {"f", f.f}, {"beta", f.beta}, {"kbar", f.kbar},
              {"tau_bar", f.tau_bar}, {"modes", std::move(modes)}};
  return out.dump(2) + "\n";
}

MedagTraceFile load_medag_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  try {
    MedagTraceFile f;
    f.graph = DirectedGraph(j.at("node_count").get<int>());
    for (const auto& e : j.at("edges")) f.graph.add_edge(e.at(0).get<NodeId>(), e.at(1).get<NodeId>());
    f.regular = j.at("regular").get<NodeSet>();
    f.adversaries = j.at("adversaries").get<NodeSet>();
    f.f = j.at("f").get<int>();
    f.beta = j.at("beta").get<int>();
    f.kbar = j.at("kbar").get<int>();
    f.tau_bar = j.at("tau_bar").get<int>();
    for (const auto& m : j.at("modes")) {
      const auto mode = m.at("mode").get<ModeIndex>();
      f.modes.push_back(mode);
      f.sources[mode] = m.at("sources").get<NodeSet>();
      auto& recs = f.parents[mode];
      for (const auto& r : m.at("records")) {
        ParentRecord rec;
        rec.parents = r.at("parents").get<NodeSet>();
        rec.forged = r.at("forged").get<NodeSet>();
        if (!r.at("activation_step").is_null()) rec.activation_step = r.at("activation_step").get<Step>();
        recs[r.at("node").get<NodeId>()] = rec;
      }
      for (const auto& r : m.at("impersonated")) {
        f.impersonated[mode][r.at("node").get<NodeId>()] = r.at("identities").get<NodeSet>();
      }
    }
    return f;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed trace: ") + e.what());
  }
}

std::vector<MedagReport> verify_trace(const MedagTraceFile& f) {
  std::vector<MedagReport> out;
  for (ModeIndex j : f.modes) {
    out.push_back(verify_srmedag(f.graph, f.parents.at(j), f.sources.at(j), f.regular, f.f, f.beta, j));
  }
  return out;
}

std::vector<Motif> trace_file_motifs(const MedagTraceFile& f, ModeIndex mode) {
  static const std::map<NodeId, NodeSet> kNone;
  auto it = f.impersonated.find(mode);
  return collect_motifs(f.parents.at(mode), f.sources.at(mode), f.regular,
                        it == f.impersonated.end() ? kNone : it->second, f.adversaries, f.f, f.beta, mode);
}

std::string medag_reports_json(const std::vector<MedagReport>& reports, const MedagTraceFile& f) {
  json out = json::array();
  for (const auto& r : reports) {
    json layers = json::array();
    for (const auto& layer : r.layers.layers) layers.push_back(layer);
    out.push_back({{"mode", r.mode},
                   {"terminated", r.terminated},
                   {"termination_step", r.termination_step ? json(*r.termination_step) : json(nullptr)},
                   {"longest_path", r.layers.longest_path},
                   {"bound", kbar_bound(r.layers.longest_path, f.kbar, f.tau_bar, f.beta)},
                   {"layers", std::move(layers)},
                   {"violations", r.violations}});
  }
  return out.dump(2) + "\n";
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

}  // namespace

void export_csv(const SimTrace& trace, const RunConfig& config, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir + ": " + ec.message());
  const std::filesystem::path base(dir);
  write_file(base / "estimates.csv", estimates_csv(trace));
  write_file(base / "events.csv", events_csv(trace));
  write_file(base / "summary.json", summary_json(trace, snapshot_metrics(trace, config)));
  write_file(base / "medag.json", medag_trace_json(medag_trace(trace, config)));
}

}  // namespace spoofres
