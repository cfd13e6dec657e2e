#pragma once

#include <map>
#include <string>
#include <vector>

#include "spoofres/config.hpp"
#include "spoofres/medag.hpp"
#include "spoofres/sim.hpp"

namespace spoofres {

/// Shortest round-trip decimal form.
std::string format_double(double v);

std::string estimates_csv(const SimTrace& trace);
std::string events_csv(const SimTrace& trace);
std::string summary_json(const SimTrace& trace, const Summary& summary);

/// Everything needed to re-check construction offline.
struct MedagTraceFile {
  DirectedGraph graph;
  NodeSet regular;
  NodeSet adversaries;
  int f = 0;
  int beta = 0;
  int kbar = 1;
  int tau_bar = 0;
  std::vector<ModeIndex> modes;
  std::map<ModeIndex, NodeSet> sources;
  std::map<ModeIndex, std::map<NodeId, ParentRecord>> parents;
  std::map<ModeIndex, std::map<NodeId, NodeSet>> impersonated;
};

MedagTraceFile medag_trace(const SimTrace& trace, const RunConfig& config);
std::string medag_trace_json(const MedagTraceFile& file);
MedagTraceFile load_medag_trace(const std::string& path);

std::vector<MedagReport> verify_trace(const MedagTraceFile& file);
std::vector<Motif> trace_file_motifs(const MedagTraceFile& file, ModeIndex mode);

/// Report as JSON, one object per mode.
std::string medag_reports_json(const std::vector<MedagReport>& reports, const MedagTraceFile& file);

/// Writes estimates.csv, events.csv, summary.json and medag.json into `dir`.
/// Throws IoError.
void export_csv(const SimTrace& trace, const RunConfig& config, const std::string& dir);

}  // namespace spoofres
