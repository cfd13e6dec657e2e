#include "spoofres/graph.hpp"

#include <algorithm>
#include <cstdint>
#include <string>

#include "spoofres/error.hpp"

namespace spoofres {

DirectedGraph::DirectedGraph(int node_count)
    : in_(static_cast<std::size_t>(node_count)), out_(static_cast<std::size_t>(node_count)) {
  if (node_count < 0) throw Error(ErrorCode::DimensionMismatch, "negative node count");
}

void DirectedGraph::add_edge(NodeId from, NodeId to) {
  if (from < 0 || to < 0 || from >= size() || to >= size()) {
    throw Error(ErrorCode::NoSuchEdge,
                "edge (" + std::to_string(from) + "," + std::to_string(to) + ") out of range");
  }
  if (from == to) {
    throw Error(ErrorCode::NoSuchEdge, "self-loop at node " + std::to_string(from));
  }
  in_[static_cast<std::size_t>(to)].insert(from);
  out_[static_cast<std::size_t>(from)].insert(to);
}

bool DirectedGraph::has_edge(NodeId from, NodeId to) const {
  if (to < 0 || to >= size()) return false;
  return in_[static_cast<std::size_t>(to)].count(from) > 0;
}

int DirectedGraph::max_in_degree() const {
  std::size_t best = 0;
  for (const auto& s : in_) best = std::max(best, s.size());
  return static_cast<int>(best);
}

std::vector<std::pair<NodeId, NodeId>> DirectedGraph::edges() const {
  std::vector<std::pair<NodeId, NodeId>> out;
  for (NodeId from = 0; from < size(); ++from) {
    for (NodeId to : out_[static_cast<std::size_t>(from)]) out.emplace_back(from, to);
  }
  return out;
}

DirectedGraph DirectedGraph::united(const DirectedGraph& other) const {
  if (other.size() != size()) {
    throw Error(ErrorCode::DimensionMismatch, "graph union over different node sets");
  }
  DirectedGraph out = *this;
  for (const auto& [from, to] : other.edges()) out.add_edge(from, to);
  return out;
}

bool r_reachable(const DirectedGraph& g, const NodeSet& subset, int r) {
  if (subset.empty()) throw Error(ErrorCode::EmptySubset, "r-reachability needs a nonempty set");
  for (NodeId i : subset) {
    int outside = 0;
    for (NodeId j : g.in_neighbors(i)) {
      if (subset.count(j) == 0) ++outside;
    }
    if (outside >= r) return true;
  }
  return false;
}

RobustnessCertificate strongly_robust_peel(const DirectedGraph& g, const NodeSet& sources, int r) {
  if (sources.empty()) throw Error(ErrorCode::EmptySourceSet, "source set is empty");
  const auto n = static_cast<std::size_t>(g.size());
  std::vector<char> accepted(n, 0);
  std::vector<int> accepted_in(n, 0);
  RobustnessCertificate cert;
  std::vector<NodeId> frontier;

  auto accept = [&](NodeId v) {
    accepted[static_cast<std::size_t>(v)] = 1;
    cert.acceptance_order.push_back(v);
    frontier.push_back(v);
  };
  for (NodeId s : sources) {
    if (s < 0 || s >= g.size()) throw Error(ErrorCode::NoSuchEdge, "source id out of range");
    accept(s);
  }
  // Worklist closure: each acceptance bumps the counters of its out-neighbours.
  while (!frontier.empty()) {
    const NodeId v = frontier.back();
    frontier.pop_back();
    for (NodeId w : g.out_neighbors(v)) {
      const auto wi = static_cast<std::size_t>(w);
      if (accepted[wi]) continue;
      if (++accepted_in[wi] >= r) accept(w);
    }
  }
  for (NodeId v = 0; v < g.size(); ++v) {
    if (!accepted[static_cast<std::size_t>(v)]) cert.residual.insert(v);
  }
  cert.robust = cert.residual.empty();
  return cert;
}

bool strongly_robust_bruteforce(const DirectedGraph& g, const NodeSet& sources, int r) {
  if (sources.empty()) throw Error(ErrorCode::EmptySourceSet, "source set is empty");
  std::vector<NodeId> rest;
  for (NodeId v = 0; v < g.size(); ++v) {
    if (sources.count(v) == 0) rest.push_back(v);
  }
  if (rest.size() > 20) throw Error(ErrorCode::TooLarge, "|V \\ S| exceeds 20");
  const std::uint32_t limit = std::uint32_t{1} << rest.size();
  for (std::uint32_t mask = 1; mask < limit; ++mask) {
    NodeSet subset;
    for (std::size_t b = 0; b < rest.size(); ++b) {
      if (mask & (std::uint32_t{1} << b)) subset.insert(rest[b]);
    }
    if (!r_reachable(g, subset, r)) return false;
  }
  return true;
}

int max_strong_robustness(const DirectedGraph& g, const NodeSet& sources) {
  for (int r = g.max_in_degree(); r >= 1; --r) {
    if (strongly_robust_peel(g, sources, r).robust) return r;
  }
  return 0;
}

const DirectedGraph& TimeVaryingGraph::at(Step k) const {
  if (intervals.empty()) throw Error(ErrorCode::ConfigInvalid, "time-varying graph has no intervals");
  auto it = std::upper_bound(intervals.begin(), intervals.end(), k,
                             [](Step step, const auto& iv) { return step < iv.first; });
  if (it == intervals.begin()) return intervals.front().second;
  return std::prev(it)->second;
}

void TimeVaryingGraph::validate() const {
  if (intervals.empty()) throw ValidationError("graph.intervals", "no intervals");
  if (intervals.front().first != 0) throw ValidationError("graph.intervals", "first interval must start at 0");
  for (std::size_t i = 1; i < intervals.size(); ++i) {
    if (intervals[i].first <= intervals[i - 1].first) {
      throw ValidationError("graph.intervals", "interval starts must increase strictly");
    }
    if (intervals[i].second.size() != intervals.front().second.size()) {
      throw ValidationError("graph.intervals", "intervals use different node sets");
    }
  }
  if (mu_bar < 0) throw ValidationError("graph.mu_bar", "must be non-negative");
}

DirectedGraph TimeVaryingGraph::window_union(Step k, int window) const {
  DirectedGraph out = at(k);
  for (int mu = 1; mu <= window && k - mu >= 0; ++mu) out = out.united(at(k - mu));
  return out;
}

JointRobustness jointly_strongly_robust(const TimeVaryingGraph& tv, const NodeSet& sources, int r,
                                        int mu_bar, Step horizon, std::optional<int> kbar) {
  if (mu_bar < 0) throw Error(ErrorCode::WindowExceedsHorizon, "mu_bar must be non-negative");
  if (horizon < mu_bar) throw Error(ErrorCode::WindowExceedsHorizon, "horizon shorter than mu_bar");
  JointRobustness out;
  if (kbar) out.window_within_kbar = mu_bar <= *kbar;
  // The union only changes when a switching instant enters or leaves the
  // window, so checking at those instants covers every k in [mu_bar, horizon].
  std::set<Step> checkpoints{static_cast<Step>(mu_bar)};
  for (const auto& [start, _] : tv.intervals) {
    for (Step k : {start, start + mu_bar, start + mu_bar + 1}) {
      if (k >= mu_bar && k <= horizon) checkpoints.insert(k);
    }
  }
  for (Step k : checkpoints) {
    if (!strongly_robust_peel(tv.window_union(k, mu_bar), sources, r).robust) {
      out.first_failure = k;
      return out;
    }
  }
  out.robust = true;
  return out;
}

}  // namespace spoofres
