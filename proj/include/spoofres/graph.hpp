#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "spoofres/types.hpp"

namespace spoofres {

/// Directed graph over nodes {0..N-1}. An edge (from, to) means `from`
/// transmits to `to`; in_neighbors(to) is the neighbourhood N_to.
class DirectedGraph {
 public:
  DirectedGraph() = default;
  explicit DirectedGraph(int node_count);

  int size() const { return static_cast<int>(in_.size()); }

  /// Throws on self-loops and out-of-range ids. Duplicate edges are ignored.
  void add_edge(NodeId from, NodeId to);
  bool has_edge(NodeId from, NodeId to) const;

  const NodeSet& in_neighbors(NodeId i) const { return in_.at(static_cast<std::size_t>(i)); }
  const NodeSet& out_neighbors(NodeId i) const { return out_.at(static_cast<std::size_t>(i)); }

  int max_in_degree() const;
  std::vector<std::pair<NodeId, NodeId>> edges() const;

  /// Edge union over the same node set.
  DirectedGraph united(const DirectedGraph& other) const;

  bool operator==(const DirectedGraph&) const = default;

 private:
  std::vector<NodeSet> in_;
  std::vector<NodeSet> out_;
};

/// True iff some i in `subset` has at least r in-neighbours outside `subset`.
bool r_reachable(const DirectedGraph& g, const NodeSet& subset, int r);

struct RobustnessCertificate {
  bool robust = false;
  /// Nodes in the order they were accepted, starting with S.
  std::vector<NodeId> acceptance_order;
  /// Stalled set when not robust; this set is not r-reachable.
  NodeSet residual;
};

/// Closure check for strong r-robustness w.r.t. S: starting from S,
/// repeatedly accept any node with >= r accepted in-neighbours.
RobustnessCertificate strongly_robust_peel(const DirectedGraph& g, const NodeSet& sources, int r);

/// Enumerates every nonempty C subset of V\S. Limited to |V\S| <= 20.
bool strongly_robust_bruteforce(const DirectedGraph& g, const NodeSet& sources, int r);

/// Largest r with strongly_robust_peel true, 0 if not even 1-robust. When
/// S = V the scan ceiling (max in-degree) is returned.
int max_strong_robustness(const DirectedGraph& g, const NodeSet& sources);

/// Piecewise-constant topology: interval i is active from its start step
/// until the next interval's start.
struct TimeVaryingGraph {
  std::vector<std::pair<Step, DirectedGraph>> intervals;
  int mu_bar = 0;

  const DirectedGraph& at(Step k) const;
  int size() const { return intervals.empty() ? 0 : intervals.front().second.size(); }
  /// Throws unless intervals start at 0, increase strictly and share V.
  void validate() const;
  /// Edge union of G[k - mu_bar .. k].
  DirectedGraph window_union(Step k, int mu_bar) const;
};

struct JointRobustness {
  bool robust = false;
  /// First k whose window union fails, if any.
  std::optional<Step> first_failure;
  /// mu_bar <= kbar when kbar was supplied.
  std::optional<bool> window_within_kbar;
};

JointRobustness jointly_strongly_robust(const TimeVaryingGraph& tv, const NodeSet& sources, int r,
                                        int mu_bar, Step horizon,
                                        std::optional<int> kbar = std::nullopt);

}  // namespace spoofres
