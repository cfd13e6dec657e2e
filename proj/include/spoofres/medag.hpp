#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spoofres/graph.hpp"
#include "spoofres/types.hpp"

namespace spoofres {

/// 2(beta+1)f + 1 distinct parents.
inline int parent_threshold(int f, int beta) { return 2 * (beta + 1) * f + 1; }

/// Construction state of one node for one mode.
struct MedagModeState {
  bool is_source = false;
  bool active = false;
  std::optional<Step> activation_step;
  /// Identities that delivered a valid flag; value is true if at least one
  /// such delivery was genuine (simulator-side bookkeeping only).
  std::map<NodeId, bool> received;
  /// Frozen at activation; empty for sources.
  NodeSet parents;
  /// Parents whose flag was only ever delivered by an impersonator.
  NodeSet forged;
};

/// A construction flag as seen in a mailbox.
struct ChiObservation {
  NodeId claimed = 0;
  NodeId true_origin = 0;
  bool valid = true;
};

struct MedagNodeState {
  NodeId node = 0;
  std::map<ModeIndex, MedagModeState> modes;

  /// Sources start with parents empty and activate at their first awake step.
  static MedagNodeState create(NodeId node, const std::vector<ModeIndex>& modes,
                               const std::vector<ModeIndex>& source_modes);
};

struct MedagStepResult {
  std::vector<ModeIndex> activated;
  /// Invalid flags seen this step (claimed sender, mode).
  std::vector<std::pair<NodeId, ModeIndex>> rejected;
};

/// Sources for any mode activate at `step`. Returns the modes activated.
std::vector<ModeIndex> medag_activate_sources(MedagNodeState& state, Step step);

/// One awake step of a follower: count distinct valid identities and freeze
/// the parent set once the threshold is reached. Counters never reset.
MedagStepResult medag_node_step(MedagNodeState& state, Step step,
                                const std::map<ModeIndex, std::vector<ChiObservation>>& inbox, int f,
                                int beta);

/// Modes on which the node should send its flag at `step`.
std::vector<ModeIndex> medag_broadcast_modes(const MedagNodeState& state, Step step,
                                             std::optional<Step> broadcast_until);

/// Worst-case construction time: l_bar * ((eta+1) kbar + tau_bar + 1) with
/// eta = beta * max(0, floor((tau_bar - kbar) / kbar)).
Step kbar_bound(int l_bar, int kbar, int tau_bar, int beta);

struct LayerAssignment {
  std::map<NodeId, int> layer_of;
  std::vector<NodeSet> layers;
  int longest_path = 0;
};

/// Layer 0 is `sources`; every other node sits one past its deepest
/// parent. `parents` maps each follower to its regular, genuine parents.
/// Throws CycleDetected.
LayerAssignment assign_layers(const std::map<NodeId, NodeSet>& parents, const NodeSet& sources);

struct ParentRecord {
  NodeSet parents;
  NodeSet forged;
  std::optional<Step> activation_step;

  bool operator==(const ParentRecord&) const = default;
};

struct MedagReport {
  ModeIndex mode = 0;
  bool terminated = false;
  std::optional<Step> termination_step;
  LayerAssignment layers;
  std::vector<std::string> violations;
};

/// Checks the threshold on every regular follower, that parents are real
/// in-neighbours, acyclicity, and that regular parents sit in earlier layers.
MedagReport verify_srmedag(const DirectedGraph& g, const std::map<NodeId, ParentRecord>& records,
                           const NodeSet& sources, const NodeSet& regular, int f, int beta,
                           ModeIndex mode = 0);

struct Motif {
  NodeId center = 0;
  NodeId independent = 0;
  NodeId common = 0;
  NodeId suspect = 0;
  ModeIndex mode = 0;

  bool operator==(const Motif&) const = default;
};

/// Splits N_i into suspects (adversaries, then impersonable parents, then
/// worst-case filler up to (beta+1)f), one common parent and independent
/// parents, then pairs suspects with independents. Throws InsufficientParents.
std::vector<Motif> enumerate_motifs(NodeId center, const NodeSet& parents, const NodeSet& regular,
                                    const NodeSet& impersonable, const NodeSet& adversaries, int f,
                                    int beta, ModeIndex mode = 0);

/// Motifs around every activated follower in `records`. A parent counts as
/// impersonable if it was forged or impersonated toward that follower.
std::vector<Motif> collect_motifs(const std::map<NodeId, ParentRecord>& records, const NodeSet& sources,
                                  const NodeSet& regular, const std::map<NodeId, NodeSet>& impersonated,
                                  const NodeSet& adversaries, int f, int beta, ModeIndex mode = 0);

}  // namespace spoofres
