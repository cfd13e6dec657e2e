#pragma once

#include <map>
#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "spoofres/config.hpp"
#include "spoofres/medag.hpp"
#include "spoofres/packet.hpp"

namespace spoofres {

/// Last-write-wins store keyed by (mode, kind, claimed sender).
class Mailbox {
 public:
  /// Stores `p` iff its arrival key exceeds the stored packet's. Returns
  /// true when stored.
  bool deliver(const Packet& p);
  const Packet* latest(NodeId claimed, PacketKind kind, ModeIndex mode) const;
  /// Every stored packet of one kind and mode, ordered by claimed sender.
  std::vector<const Packet*> all(PacketKind kind, ModeIndex mode) const;

 private:
  std::map<std::tuple<ModeIndex, int, NodeId>, Packet> slots_;
};

/// Awake test for one node. Randomized schedules draw from `rng` and are
/// forced awake once kbar steps have passed since `last_update`.
bool schedule_awake(const ScheduleSpec& schedule, Step step, Step last_update, int kbar, std::mt19937_64& rng);

struct SimEvent {
  Step step = 0;
  std::string kind;
  NodeId node = -1;
  ModeIndex mode = -1;
  NodeId other = -1;
  std::string detail;
};

struct EmissionRecord {
  Step step = 0;
  NodeId spoofer = 0;
  NodeId claimed = 0;
  NodeId target = 0;
  PacketKind kind = PacketKind::Estimate;
  ModeIndex mode = 0;
  double value = 0.0;
  bool chi_valid = true;
  int delay = 0;
  bool delivered = true;
};

struct SimTrace {
  std::string config_hash;
  std::uint64_t seed = 0;
  Step horizon = 0;
  int modes = 0;
  Eigen::VectorXd eigenvalues;
  std::vector<ModeIndex> medag_modes;
  std::vector<NodeId> regular;
  NodeSet adversaries;
  std::map<ModeIndex, NodeSet> sources;

  /// Row k holds the state at the start of step k.
  std::vector<Eigen::VectorXd> z;
  std::vector<Eigen::VectorXd> x;
  /// estimates[k][r * modes + j] for the r-th regular node.
  std::vector<std::vector<double>> estimates;

  std::vector<SimEvent> events;
  std::vector<EmissionRecord> emissions;
  std::map<ModeIndex, std::map<NodeId, ParentRecord>> parents;
  /// Identities impersonated toward each receiver, per mode.
  std::map<ModeIndex, std::map<NodeId, NodeSet>> impersonated;
  std::map<NodeId, std::vector<Step>> awake_steps;

  Step max_delay = 0;
  /// Largest read step minus send step over genuine slots used in a filter update.
  Step max_staleness = 0;
  double max_truth_residual = 0.0;

  double estimate(Step k, NodeId node, ModeIndex j) const;
  double error(Step k, NodeId node, ModeIndex j) const;
  /// Max over regular nodes of |error| at step k.
  double max_error(Step k, ModeIndex j) const;
  std::size_t regular_index(NodeId node) const;
};

/// Runs the configured scenario for params.horizon steps.
SimTrace run(const RunConfig& config);

/// Construction verification for every construction mode of a finished run.
std::vector<MedagReport> medag_reports(const SimTrace& trace, const RunConfig& config);

/// Motifs around every regular follower of `mode` in a finished run.
std::vector<Motif> trace_motifs(const SimTrace& trace, const RunConfig& config, ModeIndex mode);

struct ModeMetrics {
  ModeIndex mode = 0;
  double final_max_error = 0.0;
  std::optional<Step> settle_step;
  /// Least-squares slope of log max error after construction ends.
  std::optional<double> decay_slope;
  std::optional<Step> medag_termination;
  std::optional<Step> medag_bound;
};

struct Summary {
  std::vector<ModeMetrics> modes;
  Step max_delay = 0;
  Step max_update_gap = 0;
  Step max_staleness = 0;
  double max_truth_residual = 0.0;
  std::size_t detections = 0;
  std::size_t drops = 0;
  std::size_t emissions = 0;
};

/// Slope of log|e| over samples with |e| above 1e-10 * max(1, |z|); nullopt
/// with fewer than three samples.
std::optional<double> log_error_slope(const std::vector<double>& errors, const std::vector<double>& truth);

/// Per-follower slopes for `mode` over steps >= from.
std::map<NodeId, std::optional<double>> follower_slopes(const SimTrace& trace, ModeIndex mode, Step from);

Summary snapshot_metrics(const SimTrace& trace, const RunConfig& config);

}  // namespace spoofres
