#include "spoofres/medag.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

#include "spoofres/error.hpp"

namespace spoofres {

MedagNodeState MedagNodeState::create(NodeId node, const std::vector<ModeIndex>& modes,
                                      const std::vector<ModeIndex>& source_modes) {
  MedagNodeState st;
  st.node = node;
  for (ModeIndex j : modes) {
    st.modes[j].is_source = std::find(source_modes.begin(), source_modes.end(), j) != source_modes.end();
  }
  return st;
}

std::vector<ModeIndex> medag_activate_sources(MedagNodeState& state, Step step) {
  std::vector<ModeIndex> out;
  for (auto& [j, m] : state.modes) {
    if (m.is_source && !m.active) {
      m.active = true;
      m.activation_step = step;
      out.push_back(j);
    }
  }
  return out;
}

MedagStepResult medag_node_step(MedagNodeState& state, Step step,
                                const std::map<ModeIndex, std::vector<ChiObservation>>& inbox, int f,
                                int beta) {
  MedagStepResult result;
  const auto threshold = static_cast<std::size_t>(parent_threshold(f, beta));
  for (const auto& [j, observations] : inbox) {
    auto it = state.modes.find(j);
    if (it == state.modes.end()) continue;
    MedagModeState& m = it->second;
    for (const auto& obs : observations) {
      if (!obs.valid) {
        result.rejected.emplace_back(obs.claimed, j);
        continue;
      }
      if (m.active || obs.claimed == state.node) continue;
      m.received[obs.claimed] = m.received[obs.claimed] || obs.claimed == obs.true_origin;
    }
    if (!m.active && !m.is_source && m.received.size() >= threshold) {
      m.active = true;
      m.activation_step = step;
      for (const auto& [id, genuine] : m.received) {
        m.parents.insert(id);
        if (!genuine) m.forged.insert(id);
      }
      result.activated.push_back(j);
    }
  }
  return result;
}

std::vector<ModeIndex> medag_broadcast_modes(const MedagNodeState& state, Step step,
                                             std::optional<Step> broadcast_until) {
  std::vector<ModeIndex> out;
  if (broadcast_until && step > *broadcast_until) return out;
  for (const auto& [j, m] : state.modes) {
    if (m.active) out.push_back(j);
  }
  return out;
}

Step kbar_bound(int l_bar, int kbar, int tau_bar, int beta) {
  if (l_bar < 0 || kbar < 1 || tau_bar < 0 || beta < 0) {
    throw Error(ErrorCode::ConfigInvalid, "kbar_bound arguments out of range");
  }
  const Step eta = static_cast<Step>(beta) * std::max<Step>(0, (tau_bar - kbar) / kbar);
  return static_cast<Step>(l_bar) * ((eta + 1) * kbar + tau_bar + 1);
}

LayerAssignment assign_layers(const std::map<NodeId, NodeSet>& parents, const NodeSet& sources) {
  LayerAssignment out;
  enum class Mark { Fresh, Open, Done };
  std::map<NodeId, Mark> mark;
  std::function<int(NodeId)> depth = [&](NodeId v) -> int {
    if (sources.count(v)) return 0;
    auto& state = mark[v];
    if (state == Mark::Done) return out.layer_of.at(v);
    if (state == Mark::Open) {
      throw Error(ErrorCode::CycleDetected, "parent cycle through node " + std::to_string(v));
    }
    state = Mark::Open;
    int best = 0;
    auto it = parents.find(v);
    if (it != parents.end()) {
      for (NodeId p : it->second) best = std::max(best, depth(p) + 1);
    }
    // A follower with no regular parent still sits past layer 0.
    best = std::max(best, 1);
    mark[v] = Mark::Done;
    out.layer_of[v] = best;
    return best;
  };
  for (NodeId s : sources) out.layer_of[s] = 0;
  for (const auto& [v, _] : parents) {
    if (!sources.count(v)) depth(v);
  }
  for (const auto& [v, layer] : out.layer_of) {
    if (static_cast<std::size_t>(layer) >= out.layers.size()) out.layers.resize(static_cast<std::size_t>(layer) + 1);
    out.layers[static_cast<std::size_t>(layer)].insert(v);
    out.longest_path = std::max(out.longest_path, layer);
  }
  return out;
}

MedagReport verify_srmedag(const DirectedGraph& g, const std::map<NodeId, ParentRecord>& records,
                           const NodeSet& sources, const NodeSet& regular, int f, int beta,
                           ModeIndex mode) {
  MedagReport report;
  report.mode = mode;
  const auto threshold = static_cast<std::size_t>(parent_threshold(f, beta));
  NodeSet regular_sources;
  std::map<NodeId, NodeSet> genuine;
  report.terminated = true;
  for (NodeId i : regular) {
    auto it = records.find(i);
    const bool active = it != records.end() && it->second.activation_step.has_value();
    if (!active) {
      report.terminated = false;
      report.violations.push_back("node " + std::to_string(i) + " never activated");
      continue;
    }
    const ParentRecord& rec = it->second;
    report.termination_step = std::max(report.termination_step.value_or(0), *rec.activation_step);
    if (sources.count(i)) {
      regular_sources.insert(i);
      continue;
    }
    if (rec.parents.size() < threshold) {
      std::ostringstream os;
      os << "node " << i << " has " << rec.parents.size() << " parents, needs " << threshold;
      report.violations.push_back(os.str());
    }
    for (NodeId p : rec.parents) {
      if (!g.has_edge(p, i)) {
        report.violations.push_back("node " + std::to_string(i) + " lists non-neighbour parent " +
                                    std::to_string(p));
      }
      if (regular.count(p) && !rec.forged.count(p)) genuine[i].insert(p);
    }
    genuine.try_emplace(i);
  }
  if (!report.terminated) report.termination_step.reset();
  try {
    report.layers = assign_layers(genuine, regular_sources);
  } catch (const Error& e) {
    report.violations.emplace_back(e.what());
    return report;
  }
  for (const auto& [i, ps] : genuine) {
    const int li = report.layers.layer_of.at(i);
    for (NodeId p : ps) {
      auto lp = report.layers.layer_of.find(p);
      if (lp == report.layers.layer_of.end() || lp->second >= li) {
        report.violations.push_back("parent " + std::to_string(p) + " of node " + std::to_string(i) +
                                    " is not in an earlier layer");
      }
    }
  }
  return report;
}

std::vector<Motif> enumerate_motifs(NodeId center, const NodeSet& parents, const NodeSet& regular,
                                    const NodeSet& impersonable, const NodeSet& adversaries, int f,
                                    int beta, ModeIndex mode) {
  if (parents.size() < static_cast<std::size_t>(parent_threshold(f, beta))) {
    throw Error(ErrorCode::InsufficientParents,
                "node " + std::to_string(center) + " has only " + std::to_string(parents.size()) + " parents");
  }
  const auto budget = static_cast<std::size_t>((beta + 1) * f);
  std::vector<NodeId> suspects;
  NodeSet taken;
  auto take = [&](NodeId v) {
    if (taken.insert(v).second) suspects.push_back(v);
  };
  for (NodeId p : parents) {
    if (adversaries.count(p) || !regular.count(p)) take(p);
  }
  for (NodeId p : parents) {
    if (impersonable.count(p)) take(p);
  }
  // Worst case: the adversaries spend their full budget on our parents.
  for (auto it = parents.rbegin(); it != parents.rend() && suspects.size() < budget; ++it) take(*it);

  std::vector<NodeId> clean;
  for (NodeId p : parents) {
    if (!taken.count(p)) clean.push_back(p);
  }
  std::vector<Motif> out;
  if (clean.empty()) return out;
  const NodeId common = clean.front();
  for (std::size_t r = 0; r < suspects.size() && r + 1 < clean.size(); ++r) {
    out.push_back({center, clean[r + 1], common, suspects[r], mode});
  }
  return out;
}

std::vector<Motif> collect_motifs(const std::map<NodeId, ParentRecord>& records, const NodeSet& sources,
                                  const NodeSet& regular, const std::map<NodeId, NodeSet>& impersonated,
                                  const NodeSet& adversaries, int f, int beta, ModeIndex mode) {
  std::vector<Motif> out;
  for (const auto& [i, rec] : records) {
    if (sources.count(i) || !regular.count(i) || !rec.activation_step) continue;
    NodeSet impersonable = rec.forged;
    if (auto it = impersonated.find(i); it != impersonated.end()) {
      for (NodeId h : it->second) {
        if (rec.parents.count(h)) impersonable.insert(h);
      }
    }
    auto motifs = enumerate_motifs(i, rec.parents, regular, impersonable, adversaries, f, beta, mode);
    out.insert(out.end(), motifs.begin(), motifs.end());
  }
  return out;
}

}  // namespace spoofres
