#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spoofres/adversary.hpp"
#include "spoofres/graph.hpp"
#include "spoofres/types.hpp"

namespace spoofres {

struct EdgeSpec {
  NodeId from = 0;
  NodeId to = 0;
  int delay = 0;

  bool operator==(const EdgeSpec&) const = default;
};

struct GraphInterval {
  Step start = 0;
  std::vector<EdgeSpec> edges;

  bool operator==(const GraphInterval&) const = default;
};

enum class DelayMode { Fixed, Random };

struct GraphSpec {
  /// Static topology; ignored when `intervals` is non-empty.
  std::vector<EdgeSpec> edges;
  std::vector<GraphInterval> intervals;
  int mu_bar = 0;
  /// Random: each packet's delay is drawn uniformly from [0, tau_bar].
  DelayMode delay_mode = DelayMode::Fixed;

  bool time_varying() const { return !intervals.empty(); }
  bool operator==(const GraphSpec&) const = default;
};

struct Tolerances {
  double eig = 1e-9;
  double diag = 1e-9;
  double pbh = 1e-9;
  /// Error level used by summaries for "settled".
  double settle = 1e-6;

  bool operator==(const Tolerances&) const = default;
};

struct Params {
  int f = 0;
  int alpha = 1;
  int kbar = 1;
  int tau_bar = 0;
  Step horizon = 100;
  std::optional<int> trim;
  /// Build construction DAGs and filter on stable modes too.
  bool medag_all_modes = false;
  /// Followers filter over the flags received so far before activating.
  bool eager_estimation = false;
  std::optional<Step> medag_broadcast_until;
  Tolerances tolerances;

  bool operator==(const Params&) const = default;
};

enum class ScheduleKind { Periodic, Randomized };

struct ScheduleSpec {
  ScheduleKind kind = ScheduleKind::Periodic;
  int period = 1;
  int offset = 0;
  double probability = 1.0;

  bool operator==(const ScheduleSpec&) const = default;
};

struct AdversarySpec {
  NodeId node = 0;
  int alpha = 1;
  PolicySpec policy;

  bool operator==(const AdversarySpec&) const = default;
};

struct ObserverSpec {
  double default_pole = 0.5;
  std::map<NodeId, Eigen::MatrixXd> gains;

  bool operator==(const ObserverSpec& o) const;
};

struct RunConfig {
  std::string name;
  Eigen::MatrixXd a;
  std::optional<Eigen::MatrixXd> psi;
  Eigen::VectorXd x0;
  int node_count = 0;
  /// Rows C_i per node; nodes not listed observe nothing.
  std::map<NodeId, Eigen::MatrixXd> observations;
  GraphSpec graph;
  Params params;
  ScheduleSpec default_schedule;
  std::map<NodeId, ScheduleSpec> schedules;
  std::vector<AdversarySpec> adversaries;
  ObserverSpec observers;
  /// Modal initial estimates per node; missing nodes start at zero.
  std::map<NodeId, Eigen::VectorXd> initial_estimates;
  std::uint64_t seed = 0;
  /// Optional named node groups, informational only.
  std::map<std::string, std::vector<NodeId>> groups;
  std::string output_dir;

  bool operator==(const RunConfig& o) const;

  int beta() const;
  NodeSet adversary_nodes() const;
  NodeSet regular_nodes() const;
  const ScheduleSpec& schedule_for(NodeId i) const;
  /// Static graph, or the interval active at step 0 for time-varying specs.
  DirectedGraph graph_at(Step k) const;
  TimeVaryingGraph time_varying_graph() const;
  /// Edge-union graph over every interval.
  DirectedGraph union_graph() const;
};

/// Throws ValidationError with the offending field path.
void validate(const RunConfig& config);

RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& json_text);
std::string serialize_config(const RunConfig& config);
/// FNV-1a over the canonical serialization, as 16 hex digits.
std::string config_hash(const RunConfig& config);

struct ModeVerdict {
  ModeIndex mode = 0;
  NodeSet sources;
  /// Sources plus adversary nodes, the set the topology is checked against.
  NodeSet checked_set;
  int r_star = 0;
  int full_threshold = 0;
  int construction_threshold = 0;
  std::optional<int> randomized_threshold;
  bool meets_full = false;
  bool meets_construction = false;
  std::optional<bool> meets_randomized;
  bool empty_sources = false;
  std::optional<Step> first_joint_failure;
};

struct PreflightReport {
  int beta = 0;
  std::optional<int> beta_prime;
  std::vector<ModeVerdict> modes;
  std::vector<std::string> warnings;
};

/// Topology verdicts per unstable mode; never throws on under-robust graphs.
PreflightReport preflight(const RunConfig& config);

}  // namespace spoofres
