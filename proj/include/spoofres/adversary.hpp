#pragma once

#include <map>
#include <memory>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "spoofres/graph.hpp"
#include "spoofres/packet.hpp"
#include "spoofres/types.hpp"

namespace spoofres {

/// alpha * kbar - 1.
int beta_from_capacity(int alpha, int kbar);

/// Per-spoofer enforcement of the emission capacity. Identities are
/// charged once per step no matter how many receivers they reach.
class CapacityLedger {
 public:
  CapacityLedger(NodeId spoofer, int alpha, int kbar);

  /// Throws CapacityExceeded with step and window evidence. Steps must be
  /// charged in non-decreasing order.
  void charge(Step step, const std::vector<NodeId>& claimed);

  NodeId spoofer() const { return spoofer_; }
  int alpha() const { return alpha_; }
  int kbar() const { return kbar_; }
  int beta() const { return beta_from_capacity(alpha_, kbar_); }
  /// Step -> distinct identities emitted at that step.
  const std::map<Step, NodeSet>& history() const { return history_; }

 private:
  NodeId spoofer_;
  int alpha_;
  int kbar_;
  std::map<Step, NodeSet> history_;
};

/// True iff a spoofed packet overwrites the genuine one before the victim
/// reads it: spoof strictly after genuine and no later than the read step.
bool impersonation_feasible(const ArrivalKey& genuine, const ArrivalKey& spoof, Step victim_next_read);

/// One outgoing packet request from a spoofer. Empty targets means every
/// out-neighbour of the spoofer in the active graph.
struct Emission {
  NodeId claimed = 0;
  std::vector<NodeId> targets;
  PacketKind kind = PacketKind::Estimate;
  ModeIndex mode = 0;
  double value = 0.0;
  bool chi_valid = true;
  int delay = 0;

  bool operator==(const Emission&) const = default;
};

/// Read-only ground truth handed to policies each step.
struct GroundTruthView {
  Step step = 0;
  NodeId self = 0;
  int kbar = 1;
  int tau_bar = 0;
  const Eigen::VectorXd& z;
  const Eigen::VectorXd& eigenvalues;
  const std::vector<ModeIndex>& medag_modes;
  const DirectedGraph& graph;
  const NodeSet& regular;
};

enum class PolicyKind { Silent, Scripted, DualSequence, SuppressAndInject, Random };

std::string_view to_string(PolicyKind kind);
PolicyKind policy_kind_from_string(std::string_view name);

struct ScriptedEntry {
  Step step = 0;
  Emission emission;

  bool operator==(const ScriptedEntry&) const = default;
};

/// Parameters for every built-in policy; each kind reads the fields it needs.
struct PolicySpec {
  PolicyKind kind = PolicyKind::Silent;
  NodeId victim = -1;
  double own_value = 0.0;
  double victim_value = 0.0;
  int own_delay = 1;
  int victim_delay = 1;
  /// Modes whose estimates are falsified; empty means all construction modes.
  std::vector<ModeIndex> attacked_modes;
  std::vector<NodeId> targets;
  std::vector<ScriptedEntry> script;
  /// Random policy: values drawn from z +- spread * (1 + |z|).
  double spread = 10.0;

  bool operator==(const PolicySpec&) const = default;
};

class SpooferPolicy {
 public:
  virtual ~SpooferPolicy() = default;
  virtual std::vector<Emission> act(const GroundTruthView& view) = 0;
};

/// Builds the policy; `seed` feeds the random policy only.
std::unique_ptr<SpooferPolicy> make_policy(const PolicySpec& spec, std::uint64_t seed);

}  // namespace spoofres
