#include "spoofres/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

#include "spoofres/adversary.hpp"
#include "spoofres/error.hpp"
#include "spoofres/filter.hpp"
#include "spoofres/lti.hpp"
#include "spoofres/observer.hpp"

namespace spoofres {

bool Mailbox::deliver(const Packet& p) {
  const auto key = std::make_tuple(p.mode, static_cast<int>(p.kind), p.claimed_sender);
  auto it = slots_.find(key);
  if (it != slots_.end() && !(it->second.arrival < p.arrival)) return false;
  slots_[key] = p;
  return true;
}

const Packet* Mailbox::latest(NodeId claimed, PacketKind kind, ModeIndex mode) const {
  auto it = slots_.find(std::make_tuple(mode, static_cast<int>(kind), claimed));
  return it == slots_.end() ? nullptr : &it->second;
}

std::vector<const Packet*> Mailbox::all(PacketKind kind, ModeIndex mode) const {
  std::vector<const Packet*> out;
  const int k = static_cast<int>(kind);
  for (auto it = slots_.lower_bound(std::make_tuple(mode, k, std::numeric_limits<NodeId>::min()));
       it != slots_.end() && std::get<0>(it->first) == mode && std::get<1>(it->first) == k; ++it) {
    out.push_back(&it->second);
  }
  return out;
}

bool schedule_awake(const ScheduleSpec& schedule, Step step, Step last_update, int kbar, std::mt19937_64& rng) {
  if (schedule.kind == ScheduleKind::Periodic) {
    return step % schedule.period == schedule.offset;
  }
  // Draw every step so the random stream does not depend on forcing.
  std::bernoulli_distribution coin(schedule.probability);
  const bool drawn = coin(rng);
  return drawn || step - last_update >= kbar;
}

double SimTrace::estimate(Step k, NodeId node, ModeIndex j) const {
  return estimates.at(static_cast<std::size_t>(k)).at(regular_index(node) * static_cast<std::size_t>(modes) +
                                                      static_cast<std::size_t>(j));
}

double SimTrace::error(Step k, NodeId node, ModeIndex j) const {
  return estimate(k, node, j) - z.at(static_cast<std::size_t>(k))[j];
}

double SimTrace::max_error(Step k, ModeIndex j) const {
  double out = 0.0;
  for (NodeId i : regular) out = std::max(out, std::abs(error(k, i, j)));
  return out;
}

std::size_t SimTrace::regular_index(NodeId node) const {
  auto it = std::lower_bound(regular.begin(), regular.end(), node);
  if (it == regular.end() || *it != node) throw Error(ErrorCode::NoSuchEdge, "node is not regular");
  return static_cast<std::size_t>(it - regular.begin());
}

namespace {

std::uint64_t derive_seed(std::uint64_t seed, std::uint32_t stream, std::uint32_t node) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream, node};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

struct NodeRuntime {
  NodeId id = 0;
  Eigen::VectorXd zhat;
  Eigen::MatrixXd c;
  ModeSplit split;
  std::optional<LuenbergerObserver> observer;
  MedagNodeState medag;
  Mailbox mailbox;
  ScheduleSpec schedule;
  std::mt19937_64 rng;
  Step last_update = -1;
  Step last_read = -1;
};

using DelayMap = std::map<std::pair<NodeId, NodeId>, int>;

class Engine {
 public:
  explicit Engine(const RunConfig& config) : cfg_(config) {
    validate(cfg_);
    const auto& p = cfg_.params;
    beta_ = cfg_.beta();
    diag_ = diagonalize({cfg_.a, cfg_.x0}, cfg_.psi, {p.tolerances.eig, p.tolerances.diag});
    n_ = diag_.dimension();
    regular_ = cfg_.regular_nodes();
    adversaries_ = cfg_.adversary_nodes();
    for (ModeIndex j = 0; j < n_; ++j) {
      if (p.medag_all_modes || diag_.is_unstable(j)) medag_modes_.push_back(j);
    }
    tv_ = cfg_.time_varying_graph();
    if (cfg_.graph.time_varying()) {
      for (const auto& iv : cfg_.graph.intervals) delays_.emplace_back(iv.start, delay_map(iv.edges));
    } else {
      delays_.emplace_back(0, delay_map(cfg_.graph.edges));
    }
    delay_rng_.seed(derive_seed(cfg_.seed, 2, 0));

    std::map<NodeId, ModeSplit> splits;
    for (NodeId i : regular_) {
      NodeRuntime rt;
      rt.id = i;
      auto obs_it = cfg_.observations.find(i);
      rt.c = obs_it == cfg_.observations.end() ? Eigen::MatrixXd::Zero(1, n_) : obs_it->second;
      rt.split = detectable_modes(make_observation(i, rt.c, diag_), p.tolerances.pbh);
      splits[i] = rt.split;
      auto init_it = cfg_.initial_estimates.find(i);
      rt.zhat = init_it == cfg_.initial_estimates.end() ? Eigen::VectorXd::Zero(n_) : init_it->second;
      if (!rt.split.detectable.empty()) rt.observer = make_observer(rt);
      std::vector<ModeIndex> source_modes;
      for (ModeIndex j : medag_modes_) {
        if (rt.split.detects(j)) source_modes.push_back(j);
      }
      rt.medag = MedagNodeState::create(i, medag_modes_, source_modes);
      rt.schedule = cfg_.schedule_for(i);
      rt.rng.seed(derive_seed(cfg_.seed, 1, static_cast<std::uint32_t>(i)));
      nodes_.push_back(std::move(rt));
    }
    for (const auto& a : cfg_.adversaries) {
      policies_.push_back(make_policy(a.policy, derive_seed(cfg_.seed, 3, static_cast<std::uint32_t>(a.node))));
      ledgers_.emplace_back(a.node, a.alpha, p.kbar);
    }

    trace_.config_hash = config_hash(cfg_);
    trace_.seed = cfg_.seed;
    trace_.horizon = p.horizon;
    trace_.modes = n_;
    trace_.eigenvalues = diag_.eigenvalues;
    trace_.medag_modes = medag_modes_;
    trace_.regular.assign(regular_.begin(), regular_.end());
    trace_.adversaries = adversaries_;
    trace_.sources = source_sets(splits, medag_modes_);
    z_ = diag_.z0;
    x_ = cfg_.x0;
  }

  SimTrace run() {
    for (Step k = 0; k < cfg_.params.horizon; ++k) step(k);
    for (ModeIndex j : medag_modes_) {
      auto& records = trace_.parents[j];
      for (const auto& rt : nodes_) {
        const auto& m = rt.medag.modes.at(j);
        records[rt.id] = {m.parents, m.forged, m.activation_step};
      }
    }
    return std::move(trace_);
  }

 private:
  static DelayMap delay_map(const std::vector<EdgeSpec>& edges) {
    DelayMap out;
    for (const auto& e : edges) out[{e.from, e.to}] = e.delay;
    return out;
  }

  LuenbergerObserver make_observer(const NodeRuntime& rt) const {
    const auto& d = rt.split.detectable;
    Eigen::VectorXd lambda(static_cast<Eigen::Index>(d.size()));
    Eigen::MatrixXd c_bar = rt.c * diag_.psi;
    Eigen::MatrixXd c_bar_d(c_bar.rows(), static_cast<Eigen::Index>(d.size()));
    Eigen::VectorXd init(static_cast<Eigen::Index>(d.size()));
    for (std::size_t k = 0; k < d.size(); ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      lambda[kk] = diag_.eigenvalues[d[k]];
      c_bar_d.col(kk) = c_bar.col(d[k]);
      init[kk] = rt.zhat[d[k]];
    }
    std::optional<Eigen::MatrixXd> given;
    if (auto it = cfg_.observers.gains.find(rt.id); it != cfg_.observers.gains.end()) given = it->second;
    Eigen::MatrixXd gain = design_gain(lambda, c_bar_d, cfg_.observers.default_pole, given);
    return LuenbergerObserver(rt.id, d, lambda, c_bar_d, gain, init);
  }

  const DelayMap& delays_at(Step k) const {
    const DelayMap* out = &delays_.front().second;
    for (const auto& [start, m] : delays_) {
      if (start <= k) out = &m;
    }
    return *out;
  }

  int regular_delay(Step k, NodeId from, NodeId to) {
    if (cfg_.graph.delay_mode == DelayMode::Random) {
      std::uniform_int_distribution<int> d(0, cfg_.params.tau_bar);
      return d(delay_rng_);
    }
    return delays_at(k).at({from, to});
  }

  void enqueue(Packet p, int delay, bool adversary) {
    p.arrival.step = p.send_step + delay;
    if (delay == 0) {
      p.arrival.phase = adversary ? kImmediateAdversary : kImmediateRegular;
    } else {
      p.arrival.phase = adversary ? kInFlightAdversary : kInFlightRegular;
    }
    p.arrival.seq = seq_++;
    pending_[p.arrival.step].push_back(p);
  }

  void event(Step k, std::string kind, NodeId node, ModeIndex mode, NodeId other, std::string detail) {
    trace_.events.push_back({k, std::move(kind), node, mode, other, std::move(detail)});
  }

  NodeRuntime& runtime(NodeId i) {
    return *std::find_if(nodes_.begin(), nodes_.end(), [i](const NodeRuntime& r) { return r.id == i; });
  }

  void record(Step k) {
    trace_.z.push_back(z_);
    trace_.x.push_back(x_);
    std::vector<double> row;
    row.reserve(nodes_.size() * static_cast<std::size_t>(n_));
    for (const auto& rt : nodes_) {
      for (ModeIndex j = 0; j < n_; ++j) row.push_back(rt.zhat[j]);
    }
    trace_.estimates.push_back(std::move(row));
    (void)k;
  }

  void broadcast(Step k, const DirectedGraph& g, NodeRuntime& rt) {
    for (ModeIndex j : medag_activate_sources(rt.medag, k)) event(k, "activate", rt.id, j, -1, "source");
    const auto chi_modes = medag_broadcast_modes(rt.medag, k, cfg_.params.medag_broadcast_until);
    for (NodeId to : g.out_neighbors(rt.id)) {
      if (adversaries_.count(to)) continue;
      const int delay = regular_delay(k, rt.id, to);
      Packet p;
      p.claimed_sender = p.true_origin = rt.id;
      p.receiver = to;
      p.send_step = k;
      for (ModeIndex j : chi_modes) {
        p.kind = PacketKind::Chi;
        p.mode = j;
        p.value = 1.0;
        enqueue(p, delay, false);
      }
      for (ModeIndex j = 0; j < n_; ++j) {
        p.kind = PacketKind::Estimate;
        p.mode = j;
        p.value = rt.zhat[j];
        enqueue(p, delay, false);
      }
    }
  }

  void adversary_phase(Step k, const DirectedGraph& g) {
    for (std::size_t a = 0; a < cfg_.adversaries.size(); ++a) {
      const NodeId self = cfg_.adversaries[a].node;
      const GroundTruthView view{k, self, cfg_.params.kbar, cfg_.params.tau_bar, z_, diag_.eigenvalues,
                                 medag_modes_, g, regular_};
      const auto emissions = policies_[a]->act(view);
      std::vector<NodeId> ids;
      for (const auto& e : emissions) ids.push_back(e.claimed);
      ledgers_[a].charge(k, ids);
      for (const auto& e : emissions) {
        if (e.delay < 0 || e.delay > cfg_.params.tau_bar) {
          throw Error(ErrorCode::ConfigInvalid, "adversary delay outside [0, tau_bar]");
        }
        std::vector<NodeId> targets = e.targets;
        if (targets.empty()) targets.assign(g.out_neighbors(self).begin(), g.out_neighbors(self).end());
        for (NodeId to : targets) {
          EmissionRecord rec{k, self, e.claimed, to, e.kind, e.mode, e.value, e.chi_valid, e.delay, false};
          if (!g.has_edge(self, to) || adversaries_.count(to)) {
            event(k, "drop", to, e.mode, e.claimed, "no link from spoofer");
          } else if (e.claimed != self && !g.has_edge(e.claimed, to)) {
            event(k, "drop", to, e.mode, e.claimed, "claimed sender is not an in-neighbour");
          } else {
            Packet p;
            p.claimed_sender = e.claimed;
            p.true_origin = self;
            p.receiver = to;
            p.kind = e.kind;
            p.mode = e.mode;
            p.value = e.value;
            p.chi_valid = e.chi_valid;
            p.send_step = k;
            enqueue(p, e.delay, true);
            rec.delivered = true;
            if (e.claimed != self) trace_.impersonated[e.mode][to].insert(e.claimed);
          }
          trace_.emissions.push_back(rec);
        }
      }
    }
  }

  void deliver(Step k) {
    auto it = pending_.find(k);
    if (it == pending_.end()) return;
    auto& batch = it->second;
    std::sort(batch.begin(), batch.end(), [](const Packet& l, const Packet& r) { return l.arrival < r.arrival; });
    for (const auto& p : batch) {
      trace_.max_delay = std::max(trace_.max_delay, p.arrival.step - p.send_step);
      runtime(p.receiver).mailbox.deliver(p);
    }
    pending_.erase(it);
  }

  void update(Step k, NodeRuntime& rt, bool awake) {
    const auto& p = cfg_.params;
    Eigen::VectorXd next = rt.zhat;
    const Step prev_read = rt.last_read;
    if (rt.observer) {
      const Eigen::VectorXd y = rt.c * x_;
      const Eigen::VectorXd& est = rt.observer->step(y);
      for (std::size_t q = 0; q < rt.split.detectable.size(); ++q) {
        next[rt.split.detectable[q]] = est[static_cast<Eigen::Index>(q)];
      }
    }
    if (awake) {
      std::map<ModeIndex, std::vector<ChiObservation>> inbox;
      for (ModeIndex j : medag_modes_) {
        auto& obs = inbox[j];
        for (const Packet* pk : rt.mailbox.all(PacketKind::Chi, j)) {
          obs.push_back({pk->claimed_sender, pk->true_origin, pk->chi_valid});
          if (!pk->chi_valid && pk->arrival.step > rt.last_read) {
            event(k, "detect_invalid_flag", rt.id, j, pk->claimed_sender, "identity sent a wrong flag");
          }
        }
      }
      const auto result = medag_node_step(rt.medag, k, inbox, p.f, beta_);
      for (ModeIndex j : result.activated) {
        std::ostringstream os;
        os << "parents=";
        bool first = true;
        for (NodeId q : rt.medag.modes.at(j).parents) {
          os << (first ? "" : ";") << q;
          first = false;
        }
        event(k, "activate", rt.id, j, -1, os.str());
      }
      rt.last_read = k;
    }
    for (ModeIndex j = 0; j < n_; ++j) {
      if (rt.split.detects(j)) continue;
      const double lambda = diag_.eigenvalues[j];
      const bool constructed = std::find(medag_modes_.begin(), medag_modes_.end(), j) != medag_modes_.end();
      if (!constructed) {
        next[j] = lambda * rt.zhat[j];
        continue;
      }
      const auto& m = rt.medag.modes.at(j);
      if (!awake) {
        if (m.active) next[j] = lambda * rt.zhat[j];
        continue;
      }
      NodeSet pool;
      if (m.active) {
        pool = m.parents;
      } else if (p.eager_estimation) {
        for (const auto& [id, _] : m.received) pool.insert(id);
      } else {
        continue;
      }
      for (const Packet* pk : rt.mailbox.all(PacketKind::Estimate, j)) {
        if (pk->true_origin != pk->claimed_sender || adversaries_.count(pk->true_origin)) {
          if (!pool.count(pk->claimed_sender) && pk->arrival.step > prev_read) {
            event(k, "drop", rt.id, j, pk->claimed_sender, "spoofed estimate outside the parent set");
          }
        }
      }
      std::vector<EstimateSlot> slots;
      for (NodeId q : pool) {
        const Packet* pk = rt.mailbox.latest(q, PacketKind::Estimate, j);
        if (!pk) continue;
        const Step age = k - pk->send_step;
        // Values are rolled forward to the read step along the mode.
        slots.push_back({q, std::pow(lambda, static_cast<double>(age)) * pk->value, pk->send_step,
                         pk->arrival.step, k - pk->arrival.step, pk->arrival.step - pk->send_step});
        if (!pk->spoofed()) trace_.max_staleness = std::max(trace_.max_staleness, age);
      }
      FilterParams fp{p.f, beta_, lambda, p.trim};
      next[j] = filtered_update(fp, slots, rt.zhat[j]);
    }
    rt.zhat = next;
  }

  void step(Step k) {
    record(k);
    const DirectedGraph& g = tv_.at(k);
    std::vector<char> awake(nodes_.size(), 0);
    for (std::size_t r = 0; r < nodes_.size(); ++r) {
      auto& rt = nodes_[r];
      awake[r] = schedule_awake(rt.schedule, k, rt.last_update, cfg_.params.kbar, rt.rng) ? 1 : 0;
      if (awake[r]) {
        rt.last_update = k;
        trace_.awake_steps[rt.id].push_back(k);
      }
    }
    for (std::size_t r = 0; r < nodes_.size(); ++r) {
      if (awake[r]) broadcast(k, g, nodes_[r]);
    }
    adversary_phase(k, g);
    deliver(k);
    for (std::size_t r = 0; r < nodes_.size(); ++r) update(k, nodes_[r], awake[r] != 0);
    z_ = step_truth(z_, diag_);
    x_ = cfg_.a * x_;
    trace_.max_truth_residual =
        std::max(trace_.max_truth_residual, (x_ - diag_.psi * z_).cwiseAbs().maxCoeff() / std::max(1.0, x_.cwiseAbs().maxCoeff()));
  }

  RunConfig cfg_;
  int beta_ = 0;
  DiagonalizedSystem diag_;
  int n_ = 0;
  NodeSet regular_;
  NodeSet adversaries_;
  std::vector<ModeIndex> medag_modes_;
  TimeVaryingGraph tv_;
  std::vector<std::pair<Step, DelayMap>> delays_;
  std::mt19937_64 delay_rng_;
  std::vector<NodeRuntime> nodes_;
  std::vector<std::unique_ptr<SpooferPolicy>> policies_;
  std::vector<CapacityLedger> ledgers_;
  std::map<Step, std::vector<Packet>> pending_;
  std::int64_t seq_ = 0;
  Eigen::VectorXd z_;
  Eigen::VectorXd x_;
  SimTrace trace_;
};

}  // namespace

SimTrace run(const RunConfig& config) { return Engine(config).run(); }

std::vector<MedagReport> medag_reports(const SimTrace& trace, const RunConfig& config) {
  std::vector<MedagReport> out;
  const DirectedGraph g = config.union_graph();
  const NodeSet regular(trace.regular.begin(), trace.regular.end());
  for (ModeIndex j : trace.medag_modes) {
    out.push_back(verify_srmedag(g, trace.parents.at(j), trace.sources.at(j), regular, config.params.f,
                                 config.beta(), j));
  }
  return out;
}

std::vector<Motif> trace_motifs(const SimTrace& trace, const RunConfig& config, ModeIndex mode) {
  const NodeSet regular(trace.regular.begin(), trace.regular.end());
  static const std::map<NodeId, NodeSet> kNone;
  const auto imp = trace.impersonated.find(mode);
  return collect_motifs(trace.parents.at(mode), trace.sources.at(mode), regular,
                        imp == trace.impersonated.end() ? kNone : imp->second, trace.adversaries,
                        config.params.f, config.beta(), mode);
}

std::optional<double> log_error_slope(const std::vector<double>& errors, const std::vector<double>& truth) {
  std::vector<std::pair<double, double>> pts;
  for (std::size_t k = 0; k < errors.size(); ++k) {
    const double e = std::abs(errors[k]);
    if (e > 1e-10 * std::max(1.0, std::abs(truth[k]))) pts.emplace_back(static_cast<double>(k), std::log(e));
  }
  if (pts.size() < 3) return std::nullopt;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [x, y] : pts) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double m = static_cast<double>(pts.size());
  const double denom = m * sxx - sx * sx;
  if (denom == 0.0) return std::nullopt;
  return (m * sxy - sx * sy) / denom;
}

std::map<NodeId, std::optional<double>> follower_slopes(const SimTrace& trace, ModeIndex mode, Step from) {
  std::map<NodeId, std::optional<double>> out;
  const auto& sources = trace.sources.count(mode) ? trace.sources.at(mode) : NodeSet{};
  for (NodeId i : trace.regular) {
    if (sources.count(i)) continue;
    std::vector<double> errors;
    std::vector<double> truth;
    for (Step k = std::max<Step>(from, 0); k < static_cast<Step>(trace.z.size()); ++k) {
      errors.push_back(trace.error(k, i, mode));
      truth.push_back(trace.z[static_cast<std::size_t>(k)][mode]);
    }
    out[i] = log_error_slope(errors, truth);
  }
  return out;
}

Summary snapshot_metrics(const SimTrace& trace, const RunConfig& config) {
  Summary s;
  s.max_delay = trace.max_delay;
  s.max_staleness = trace.max_staleness;
  s.max_truth_residual = trace.max_truth_residual;
  s.emissions = trace.emissions.size();
  for (const auto& e : trace.events) {
    if (e.kind == "drop") ++s.drops;
    if (e.kind == "detect_invalid_flag") ++s.detections;
  }
  for (const auto& [node, steps] : trace.awake_steps) {
    Step prev = -1;
    for (Step k : steps) {
      s.max_update_gap = std::max(s.max_update_gap, k - prev);
      prev = k;
    }
  }
  const auto reports = medag_reports(trace, config);
  const Step steps = static_cast<Step>(trace.z.size());
  for (ModeIndex j = 0; j < trace.modes; ++j) {
    ModeMetrics m;
    m.mode = j;
    if (steps > 0) m.final_max_error = trace.max_error(steps - 1, j);
    for (Step k = steps - 1; k >= 0 && trace.max_error(k, j) < config.params.tolerances.settle; --k) m.settle_step = k;
    Step from = 0;
    for (const auto& r : reports) {
      if (r.mode != j) continue;
      m.medag_termination = r.termination_step;
      m.medag_bound = kbar_bound(r.layers.longest_path, config.params.kbar, config.params.tau_bar, config.beta());
      from = r.termination_step.value_or(steps);
    }
    std::vector<double> errors;
    std::vector<double> truth;
    for (Step k = from; k < steps; ++k) {
      errors.push_back(trace.max_error(k, j));
      truth.push_back(trace.z[static_cast<std::size_t>(k)][j]);
    }
    m.decay_slope = log_error_slope(errors, truth);
    s.modes.push_back(m);
  }
  return s;
}

}  // namespace spoofres
