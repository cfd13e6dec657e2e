#include "spoofres/adversary.hpp"

#include <algorithm>
#include <sstream>

#include "spoofres/error.hpp"

namespace spoofres {

int beta_from_capacity(int alpha, int kbar) {
  if (alpha < 1 || kbar < 1) throw Error(ErrorCode::ConfigInvalid, "alpha >= 1 and kbar >= 1 required");
  return alpha * kbar - 1;
}

CapacityLedger::CapacityLedger(NodeId spoofer, int alpha, int kbar)
    : spoofer_(spoofer), alpha_(alpha), kbar_(kbar) {
  beta_from_capacity(alpha, kbar);
}

void CapacityLedger::charge(Step step, const std::vector<NodeId>& claimed) {
  if (!history_.empty() && step < history_.rbegin()->first) {
    throw Error(ErrorCode::CapacityExceeded, "ledger charged out of order");
  }
  NodeSet now = history_.count(step) ? history_.at(step) : NodeSet{};
  now.insert(claimed.begin(), claimed.end());
  if (static_cast<int>(now.size()) > alpha_) {
    std::ostringstream os;
    os << "spoofer " << spoofer_ << " emits " << now.size() << " identities at step " << step
       << " (alpha=" << alpha_ << ")";
    throw Error(ErrorCode::CapacityExceeded, os.str());
  }
  NodeSet window;
  for (auto it = history_.lower_bound(step - kbar_ + 1); it != history_.end() && it->first < step; ++it) {
    window.insert(it->second.begin(), it->second.end());
  }
  window.insert(now.begin(), now.end());
  window.erase(spoofer_);
  if (static_cast<int>(window.size()) > beta()) {
    std::ostringstream os;
    os << "spoofer " << spoofer_ << " impersonates " << window.size() << " identities in window ["
       << step - kbar_ + 1 << "," << step << "] (beta=" << beta() << "):";
    for (NodeId id : window) os << ' ' << id;
    throw Error(ErrorCode::CapacityExceeded, os.str());
  }
  if (!now.empty()) history_[step] = std::move(now);
}

bool impersonation_feasible(const ArrivalKey& genuine, const ArrivalKey& spoof, Step victim_next_read) {
  return genuine < spoof && spoof.step <= victim_next_read;
}

std::string_view to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::Silent: return "silent";
    case PolicyKind::Scripted: return "scripted";
    case PolicyKind::DualSequence: return "dual_sequence";
    case PolicyKind::SuppressAndInject: return "suppress_and_inject";
    case PolicyKind::Random: return "random";
  }
  return "silent";
}

PolicyKind policy_kind_from_string(std::string_view name) {
  for (auto k : {PolicyKind::Silent, PolicyKind::Scripted, PolicyKind::DualSequence,
                 PolicyKind::SuppressAndInject, PolicyKind::Random}) {
    if (to_string(k) == name) return k;
  }
  throw Error(ErrorCode::ConfigInvalid, "unknown policy '" + std::string(name) + "'");
}

namespace {

class SilentPolicy final : public SpooferPolicy {
 public:
  std::vector<Emission> act(const GroundTruthView&) override { return {}; }
};

class ScriptedPolicy final : public SpooferPolicy {
 public:
  explicit ScriptedPolicy(std::vector<ScriptedEntry> script) : script_(std::move(script)) {}

  std::vector<Emission> act(const GroundTruthView& view) override {
    std::vector<Emission> out;
    for (const auto& entry : script_) {
      if (entry.step == view.step) out.push_back(entry.emission);
    }
    return out;
  }

 private:
  std::vector<ScriptedEntry> script_;
};

// Alternates between the spoofer's own identity (steps k = m*kbar - 1) and
// the victim's identity (steps k = m*kbar). The suppressing variant also
// tampers with the victim's construction flag.
class AlternatingPolicy final : public SpooferPolicy {
 public:
  AlternatingPolicy(PolicySpec spec, bool suppress) : spec_(std::move(spec)), suppress_(suppress) {}

  std::vector<Emission> act(const GroundTruthView& view) override {
    std::vector<Emission> out;
    const auto& modes = attacked(view);
    const Step k = view.step;
    if (k % view.kbar == view.kbar - 1) {
      for (ModeIndex j : view.medag_modes) {
        out.push_back({view.self, spec_.targets, PacketKind::Chi, j, 1.0, true, spec_.own_delay});
      }
      for (ModeIndex j = 0; j < view.z.size(); ++j) {
        const bool hit = std::find(modes.begin(), modes.end(), j) != modes.end();
        out.push_back({view.self, spec_.targets, PacketKind::Estimate, j,
                       hit ? spec_.own_value : view.z[j], true, spec_.own_delay});
      }
    } else if (k % view.kbar == 0 && view.kbar > 1 && spec_.victim >= 0) {
      for (ModeIndex j : modes) {
        if (suppress_) {
          out.push_back({spec_.victim, spec_.targets, PacketKind::Chi, j, 0.0, false, spec_.victim_delay});
        }
        out.push_back({spec_.victim, spec_.targets, PacketKind::Estimate, j, spec_.victim_value, true,
                       spec_.victim_delay});
      }
    }
    return out;
  }

 private:
  const std::vector<ModeIndex>& attacked(const GroundTruthView& view) const {
    return spec_.attacked_modes.empty() ? view.medag_modes : spec_.attacked_modes;
  }

  PolicySpec spec_;
  bool suppress_;
};

// Emits at most one identity per step: its own or a single fixed victim,
// so the ledger holds for any alpha >= 1 and kbar >= 2.
class RandomPolicy final : public SpooferPolicy {
 public:
  RandomPolicy(PolicySpec spec, std::uint64_t seed) : spec_(std::move(spec)), rng_(seed) {}

  std::vector<Emission> act(const GroundTruthView& view) override {
    if (victim_ < 0) victim_ = pick_victim(view);
    std::vector<NodeId> targets(view.graph.out_neighbors(view.self).begin(),
                                view.graph.out_neighbors(view.self).end());
    std::vector<Emission> out;
    if (targets.empty()) return out;
    std::bernoulli_distribution coin(0.5);
    const bool impersonate = victim_ >= 0 && view.kbar > 1 && coin(rng_);
    const NodeId identity = impersonate ? victim_ : view.self;
    std::uniform_int_distribution<int> delay(0, view.tau_bar);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_int_distribution<int> chi_choice(0, 2);
    for (NodeId target : targets) {
      if (!coin(rng_)) continue;
      for (ModeIndex j : view.medag_modes) {
        const int choice = chi_choice(rng_);
        if (choice == 2) continue;
        out.push_back({identity, {target}, PacketKind::Chi, j, choice == 0 ? 1.0 : 0.0, choice == 0,
                       delay(rng_)});
      }
      for (ModeIndex j = 0; j < view.z.size(); ++j) {
        const double z = view.z[j];
        const double value = z + spec_.spread * (1.0 + std::abs(z)) * unit(rng_);
        out.push_back({identity, {target}, PacketKind::Estimate, j, value, true, delay(rng_)});
      }
    }
    return out;
  }

 private:
  NodeId pick_victim(const GroundTruthView& view) {
    if (spec_.victim >= 0) return spec_.victim;
    NodeSet candidates;
    for (NodeId t : view.graph.out_neighbors(view.self)) {
      for (NodeId p : view.graph.in_neighbors(t)) {
        if (view.regular.count(p)) candidates.insert(p);
      }
    }
    if (candidates.empty()) return -1;
    std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
    return *std::next(candidates.begin(), static_cast<std::ptrdiff_t>(pick(rng_)));
  }

  PolicySpec spec_;
  std::mt19937_64 rng_;
  NodeId victim_ = -1;
};

}  // namespace

std::unique_ptr<SpooferPolicy> make_policy(const PolicySpec& spec, std::uint64_t seed) {
  switch (spec.kind) {
    case PolicyKind::Silent: return std::make_unique<SilentPolicy>();
    case PolicyKind::Scripted: return std::make_unique<ScriptedPolicy>(spec.script);
    case PolicyKind::DualSequence: return std::make_unique<AlternatingPolicy>(spec, false);
    case PolicyKind::SuppressAndInject: return std::make_unique<AlternatingPolicy>(spec, true);
    case PolicyKind::Random: return std::make_unique<RandomPolicy>(spec, seed);
  }
  return std::make_unique<SilentPolicy>();
}

}  // namespace spoofres
