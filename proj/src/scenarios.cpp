#include "spoofres/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "spoofres/error.hpp"

namespace spoofres {

namespace {

NodeSet range_set(NodeId first, NodeId last_exclusive) {
  NodeSet out;
  for (NodeId i = first; i < last_exclusive; ++i) out.insert(i);
  return out;
}

Eigen::MatrixXd row(std::initializer_list<double> values) {
  Eigen::MatrixXd m(1, static_cast<Eigen::Index>(values.size()));
  Eigen::Index c = 0;
  for (double v : values) m(0, c++) = v;
  return m;
}

}  // namespace

NodeSet SampleNetwork::r1() { return range_set(kR1First, kR2First); }
NodeSet SampleNetwork::r2() { return range_set(kR2First, kR3First); }
NodeSet SampleNetwork::r3() { return range_set(kR3First, kSpoofer); }

RunConfig sample_network() {
  using S = SampleNetwork;
  RunConfig c;
  c.name = "sample_network";
  c.a.resize(2, 2);
  c.a << 0.98, 0.02, -0.04, 1.04;
  Eigen::MatrixXd psi(2, 2);
  psi << 0.1, 1.0, 0.2, 1.0;
  c.psi = psi;
  c.x0.resize(2);
  c.x0 << 2.0, 5.0;
  c.node_count = S::kNodes;

  for (NodeId i : S::r1()) c.observations[i] = row({-10.0, 10.0});
  for (NodeId i : S::r2()) c.observations[i] = row({2.0, -1.0});
  for (NodeId i : S::r3()) c.observations[i] = row({0.0, 0.0});

  // No links between R1 and R2 are listed, so none exist.
  auto& edges = c.graph.edges;
  for (NodeId a : S::r1()) {
    for (NodeId b : S::r3()) {
      edges.push_back({a, b, 2});
      edges.push_back({b, a, 1});
    }
  }
  for (NodeId a : S::r2()) {
    for (NodeId b : S::r3()) {
      edges.push_back({a, b, 3});
      edges.push_back({b, a, 2});
    }
  }
  for (NodeId b : S::r3()) edges.push_back({S::kSpoofer, b, 1});
  for (NodeId a : S::r1()) edges.push_back({a, S::kSpoofer, 0});
  for (NodeId a : S::r2()) edges.push_back({a, S::kSpoofer, 0});

  c.params.f = 1;
  c.params.alpha = 1;
  c.params.kbar = 2;
  c.params.tau_bar = 3;
  c.params.horizon = 200;

  c.default_schedule = {ScheduleKind::Periodic, 1, 0, 1.0};
  for (NodeId i : S::r1()) c.schedules[i] = {ScheduleKind::Periodic, 2, 0, 1.0};
  for (NodeId i : S::r2()) c.schedules[i] = {ScheduleKind::Periodic, 2, 0, 1.0};

  for (NodeId i : S::r1()) c.observers.gains[i] = Eigen::MatrixXd::Constant(1, 1, 0.5);
  for (NodeId i : S::r2()) c.observers.gains[i] = Eigen::MatrixXd::Constant(1, 1, 0.5);

  auto ids = [](const NodeSet& s) { return std::vector<NodeId>(s.begin(), s.end()); };
  c.groups["R1"] = ids(S::r1());
  c.groups["R2"] = ids(S::r2());
  c.groups["R3"] = ids(S::r3());
  c.groups["spoofers"] = {S::kSpoofer};

  AdversarySpec adv;
  adv.node = S::kSpoofer;
  adv.alpha = 1;
  c.adversaries.push_back(adv);
  return c;
}

RunConfig scenario_s1() {
  using S = SampleNetwork;
  RunConfig c = sample_network();
  c.name = "s1";
  for (NodeId i = 0; i < S::kSpoofer; ++i) c.initial_estimates[i] = Eigen::VectorXd::Zero(2);
  c.initial_estimates[0][0] = 100.0;
  c.initial_estimates[1][0] = 100.0;

  auto& p = c.adversaries.front().policy;
  p.kind = PolicyKind::DualSequence;
  p.victim = 0;
  p.own_value = 60.0;
  p.victim_value = 30.0;
  p.own_delay = 1;
  p.victim_delay = 1;
  p.attacked_modes = {0};
  const NodeSet r3 = S::r3();
  p.targets.assign(r3.begin(), r3.end());
  return c;
}

RunConfig scenario_s2() {
  using S = SampleNetwork;
  RunConfig c = sample_network();
  c.name = "s2";
  c.params.eager_estimation = true;
  for (NodeId i = 0; i < S::kSpoofer; ++i) c.initial_estimates[i] = Eigen::VectorXd::Zero(2);
  c.initial_estimates[1][0] = 10.0;
  for (NodeId i : S::r2()) c.initial_estimates[i][0] = 6.0;
  for (NodeId i : S::r3()) c.initial_estimates[i][0] = 7.0;

  auto& p = c.adversaries.front().policy;
  p.kind = PolicyKind::SuppressAndInject;
  p.victim = 0;
  p.own_value = 8.0;
  p.victim_value = 9.0;
  p.own_delay = 1;
  // Same-step arrival lets the tampered flag land after the genuine one.
  p.victim_delay = 0;
  p.attacked_modes = {0};
  const NodeSet r3 = S::r3();
  p.targets.assign(r3.begin(), r3.end());
  return c;
}

namespace {

std::vector<double> distinct_values(std::mt19937_64& rng, int count, double lo, double hi, double gap) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> out;
  while (static_cast<int>(out.size()) < count) {
    const double v = u(rng);
    if (std::all_of(out.begin(), out.end(), [&](double w) { return std::abs(v - w) > gap; })) out.push_back(v);
  }
  return out;
}

template <typename T>
T pick(std::mt19937_64& rng, const std::vector<T>& items) {
  std::uniform_int_distribution<std::size_t> d(0, items.size() - 1);
  return items[d(rng)];
}

}  // namespace

RunConfig random_robust_config(std::uint64_t seed, const RandomScenarioOptions& opt) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  RunConfig c;
  c.name = "random_" + std::to_string(seed);
  c.seed = seed;
  c.params.f = opt.spoofers > 0 ? 1 : 0;
  c.params.alpha = 1;
  c.params.kbar = 2;
  c.params.tau_bar = 3;
  c.params.horizon = opt.horizon;
  const int beta = c.beta();
  const int robustness = opt.robustness > 0 ? opt.robustness : 3 * (beta + 1) * c.params.f + 1;

  const int n = opt.unstable_modes + opt.stable_modes;
  const int regular = opt.regular;
  c.node_count = regular + opt.spoofers;

  // Modal form first, then A = psi diag(lambda) psi^-1.
  std::vector<double> lambda = distinct_values(rng, opt.unstable_modes, 1.0, 1.04, 2e-3);
  for (double v : distinct_values(rng, opt.stable_modes, -0.9, 0.9, 1e-2)) lambda.push_back(v);
  Eigen::MatrixXd psi;
  do {
    psi = Eigen::MatrixXd::Identity(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) psi(i, j) += 0.3 * (2.0 * unit(rng) - 1.0);
    }
  } while (std::abs(psi.determinant()) < 0.3);
  Eigen::VectorXd lam(n);
  for (int j = 0; j < n; ++j) lam[j] = lambda[static_cast<std::size_t>(j)];
  const Eigen::MatrixXd psi_inv = psi.inverse();
  c.a = psi * lam.asDiagonal() * psi_inv;
  c.psi = psi;
  c.x0.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) c.x0[i] = 10.0 * unit(rng) - 5.0;

  std::vector<NodeId> regular_ids(static_cast<std::size_t>(regular));
  for (NodeId i = 0; i < regular; ++i) regular_ids[static_cast<std::size_t>(i)] = i;
  std::vector<NodeSet> detects(static_cast<std::size_t>(regular));
  std::vector<NodeSet> sources(static_cast<std::size_t>(opt.unstable_modes));
  for (int j = 0; j < opt.unstable_modes; ++j) {
    std::uniform_int_distribution<int> count(std::min(robustness, regular), std::min(robustness + 2, regular));
    std::vector<NodeId> order = regular_ids;
    std::shuffle(order.begin(), order.end(), rng);
    const int k = count(rng);
    for (int q = 0; q < k; ++q) {
      sources[static_cast<std::size_t>(j)].insert(order[static_cast<std::size_t>(q)]);
      detects[static_cast<std::size_t>(order[static_cast<std::size_t>(q)])].insert(j);
    }
  }
  for (int j = opt.unstable_modes; j < n; ++j) {
    for (NodeId i = 0; i < regular; ++i) {
      if (unit(rng) < 0.3) detects[static_cast<std::size_t>(i)].insert(j);
    }
  }
  for (NodeId i = 0; i < regular; ++i) {
    const auto& d = detects[static_cast<std::size_t>(i)];
    if (d.empty()) continue;
    Eigen::MatrixXd c_bar = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d.size()), n);
    Eigen::Index r = 0;
    for (int j : d) {
      const double mag = 0.5 + 1.5 * unit(rng);
      c_bar(r++, j) = unit(rng) < 0.5 ? -mag : mag;
    }
    c.observations[i] = c_bar * psi_inv;
  }

  NodeSet adversaries;
  for (int s = 0; s < opt.spoofers; ++s) adversaries.insert(regular + s);
  std::uniform_int_distribution<int> delay(0, c.params.tau_bar);
  bool accepted = false;
  for (int attempt = 0; attempt < opt.max_attempts && !accepted; ++attempt) {
    DirectedGraph g(c.node_count);
    std::vector<EdgeSpec> edges;
    auto add = [&](NodeId a, NodeId b) {
      g.add_edge(a, b);
      edges.push_back({a, b, delay(rng)});
    };
    for (NodeId a = 0; a < regular; ++a) {
      for (NodeId b = 0; b < regular; ++b) {
        if (a != b && unit(rng) < opt.edge_probability) add(a, b);
      }
    }
    // Each regular node hears at most one spoofer.
    std::vector<NodeId> free_targets = regular_ids;
    std::shuffle(free_targets.begin(), free_targets.end(), rng);
    for (NodeId s : adversaries) {
      std::uniform_int_distribution<std::size_t> take(1, std::max<std::size_t>(1, free_targets.size() / adversaries.size()));
      const std::size_t t = std::min(take(rng), free_targets.size());
      for (std::size_t q = 0; q < t; ++q) add(s, free_targets.back()), free_targets.pop_back();
      for (NodeId a = 0; a < regular; ++a) {
        if (unit(rng) < 0.5) add(a, s);
      }
    }
    bool ok = true;
    for (const auto& src : sources) {
      NodeSet checked = src;
      checked.insert(adversaries.begin(), adversaries.end());
      if (!strongly_robust_peel(g, checked, robustness).robust) {
        ok = false;
        break;
      }
    }
    if (ok) {
      c.graph.edges = std::move(edges);
      accepted = true;
    }
  }
  if (!accepted) throw Error(ErrorCode::ConfigInvalid, "no robust graph found for seed " + std::to_string(seed));
  c.graph.delay_mode = unit(rng) < 0.25 ? DelayMode::Random : DelayMode::Fixed;

  c.default_schedule = {ScheduleKind::Periodic, 1, 0, 1.0};
  for (NodeId i = 0; i < regular; ++i) {
    ScheduleSpec s;
    if (unit(rng) < 0.5) {
      s.kind = ScheduleKind::Periodic;
      s.period = unit(rng) < 0.5 ? 1 : 2;
      s.offset = s.period == 2 && unit(rng) < 0.5 ? 1 : 0;
    } else {
      s.kind = ScheduleKind::Randomized;
      s.probability = 0.2 + 0.8 * unit(rng);
    }
    c.schedules[i] = s;
  }

  const DirectedGraph g = c.union_graph();
  for (NodeId s : adversaries) {
    AdversarySpec adv;
    adv.node = s;
    adv.alpha = 1;
    auto& p = adv.policy;
    const double roll = unit(rng);
    p.kind = roll < 0.4   ? PolicyKind::Random
             : roll < 0.65 ? PolicyKind::DualSequence
             : roll < 0.9  ? PolicyKind::SuppressAndInject
                           : PolicyKind::Silent;
    std::vector<NodeId> victims;
    for (NodeId t : g.out_neighbors(s)) {
      for (NodeId v : g.in_neighbors(t)) {
        if (!adversaries.count(v)) victims.push_back(v);
      }
    }
    std::sort(victims.begin(), victims.end());
    victims.erase(std::unique(victims.begin(), victims.end()), victims.end());
    if (!victims.empty()) p.victim = pick(rng, victims);
    p.own_value = 200.0 * unit(rng) - 100.0;
    p.victim_value = 200.0 * unit(rng) - 100.0;
    p.own_delay = delay(rng);
    p.victim_delay = delay(rng);
    p.spread = 1.0 + 20.0 * unit(rng);
    c.adversaries.push_back(adv);
  }

  for (NodeId i = 0; i < c.node_count; ++i) {
    Eigen::VectorXd v(n);
    for (Eigen::Index j = 0; j < n; ++j) v[j] = 40.0 * unit(rng) - 20.0;
    c.initial_estimates[i] = v;
  }
  validate(c);
  return c;
}

}  // namespace spoofres
