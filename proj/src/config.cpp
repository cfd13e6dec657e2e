#include "spoofres/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "spoofres/error.hpp"
#include "spoofres/filter.hpp"
#include "spoofres/lti.hpp"
#include "spoofres/medag.hpp"

namespace spoofres {

using nlohmann::json;

namespace {

bool same_matrix(const Eigen::MatrixXd& l, const Eigen::MatrixXd& r) {
  return l.rows() == r.rows() && l.cols() == r.cols() && l == r;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Eigen::MatrixXd matrix_from_json(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) throw ValidationError(field, "expected a non-empty array of rows");
  const std::size_t cols = j.front().is_array() ? j.front().size() : 0;
  Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols) throw ValidationError(field, "ragged matrix");
    for (std::size_t c = 0; c < cols; ++c) {
      if (!j[r][c].is_number()) throw ValidationError(field, "matrix entries must be numbers");
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
    }
  }
  return m;
}

Eigen::VectorXd vector_from_json(const json& j, const std::string& field) {
  if (!j.is_array()) throw ValidationError(field, "expected an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ValidationError(field, "entries must be numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

template <typename T>
T get_or(const json& j, const char* key, T fallback, const std::string& path) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(path + "." + key, "wrong type");
  }
}

const json& require(const json& j, const char* key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) throw ValidationError(path + "." + key, "missing");
  return j.at(key);
}

json edges_to_json(const std::vector<EdgeSpec>& edges) {
  json out = json::array();
  for (const auto& e : edges) out.push_back({{"from", e.from}, {"to", e.to}, {"delay", e.delay}});
  return out;
}

std::vector<EdgeSpec> edges_from_json(const json& j, const std::string& path) {
  if (!j.is_array()) throw ValidationError(path, "expected an array of edges");
  std::vector<EdgeSpec> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    out.push_back({require(j[i], "from", p).get<NodeId>(), require(j[i], "to", p).get<NodeId>(),
                   get_or<int>(j[i], "delay", 0, p)});
  }
  return out;
}

json schedule_to_json(const ScheduleSpec& s) {
  if (s.kind == ScheduleKind::Periodic) {
    return {{"kind", "periodic"}, {"period", s.period}, {"offset", s.offset}};
  }
  return {{"kind", "randomized"}, {"probability", s.probability}};
}

ScheduleSpec schedule_from_json(const json& j, const std::string& path) {
  ScheduleSpec s;
  const auto kind = get_or<std::string>(j, "kind", "periodic", path);
  if (kind == "periodic") {
    s.kind = ScheduleKind::Periodic;
    s.period = get_or<int>(j, "period", 1, path);
    s.offset = get_or<int>(j, "offset", 0, path);
  } else if (kind == "randomized") {
    s.kind = ScheduleKind::Randomized;
    s.probability = get_or<double>(j, "probability", 1.0, path);
  } else {
    throw ValidationError(path + ".kind", "expected periodic or randomized");
  }
  return s;
}

json emission_to_json(const Emission& e) {
  return {{"claimed", e.claimed},
          {"targets", e.targets},
          {"kind", e.kind == PacketKind::Chi ? "chi" : "estimate"},
          {"mode", e.mode},
          {"value", e.value},
          {"chi_valid", e.chi_valid},
          {"delay", e.delay}};
}

Emission emission_from_json(const json& j, const std::string& path) {
  Emission e;
  e.claimed = require(j, "claimed", path).get<NodeId>();
  e.targets = get_or<std::vector<NodeId>>(j, "targets", {}, path);
  const auto kind = get_or<std::string>(j, "kind", "estimate", path);
  if (kind != "chi" && kind != "estimate") throw ValidationError(path + ".kind", "expected chi or estimate");
  e.kind = kind == "chi" ? PacketKind::Chi : PacketKind::Estimate;
  e.mode = get_or<ModeIndex>(j, "mode", 0, path);
  e.value = get_or<double>(j, "value", 0.0, path);
  e.chi_valid = get_or<bool>(j, "chi_valid", true, path);
  e.delay = get_or<int>(j, "delay", 0, path);
  return e;
}

json policy_to_json(const PolicySpec& p) {
  json script = json::array();
  for (const auto& entry : p.script) {
    json e = emission_to_json(entry.emission);
    e["step"] = entry.step;
    script.push_back(std::move(e));
  }
  return {{"name", std::string(to_string(p.kind))},
          {"victim", p.victim},
          {"own_value", p.own_value},
          {"victim_value", p.victim_value},
          {"own_delay", p.own_delay},
          {"victim_delay", p.victim_delay},
          {"attacked_modes", p.attacked_modes},
          {"targets", p.targets},
          {"script", std::move(script)},
          {"spread", p.spread}};
}

PolicySpec policy_from_json(const json& j, const std::string& path) {
  PolicySpec p;
  try {
    p.kind = policy_kind_from_string(get_or<std::string>(j, "name", "silent", path));
  } catch (const Error& e) {
    throw ValidationError(path + ".name", e.what());
  }
  p.victim = get_or<NodeId>(j, "victim", -1, path);
  p.own_value = get_or<double>(j, "own_value", 0.0, path);
  p.victim_value = get_or<double>(j, "victim_value", 0.0, path);
  p.own_delay = get_or<int>(j, "own_delay", 1, path);
  p.victim_delay = get_or<int>(j, "victim_delay", 1, path);
  p.attacked_modes = get_or<std::vector<ModeIndex>>(j, "attacked_modes", {}, path);
  p.targets = get_or<std::vector<NodeId>>(j, "targets", {}, path);
  p.spread = get_or<double>(j, "spread", 10.0, path);
  if (j.contains("script")) {
    const auto& s = j.at("script");
    for (std::size_t i = 0; i < s.size(); ++i) {
      const std::string sp = path + ".script[" + std::to_string(i) + "]";
      p.script.push_back({require(s[i], "step", sp).get<Step>(), emission_from_json(s[i], sp)});
    }
  }
  return p;
}

json to_json(const RunConfig& c) {
  json j;
  j["name"] = c.name;
  j["system"] = {{"A", matrix_to_json(c.a)}, {"x0", vector_to_json(c.x0)}};
  if (c.psi) j["system"]["psi"] = matrix_to_json(*c.psi);
  j["nodes"] = {{"count", c.node_count}};
  json obs = json::array();
  for (const auto& [node, m] : c.observations) obs.push_back({{"node", node}, {"C", matrix_to_json(m)}});
  j["observations"] = std::move(obs);
  json graph = {{"mu_bar", c.graph.mu_bar},
                {"delay_mode", c.graph.delay_mode == DelayMode::Fixed ? "fixed" : "random"},
                {"edges", edges_to_json(c.graph.edges)}};
  json intervals = json::array();
  for (const auto& iv : c.graph.intervals) {
    intervals.push_back({{"start", iv.start}, {"edges", edges_to_json(iv.edges)}});
  }
  graph["intervals"] = std::move(intervals);
  j["graph"] = std::move(graph);
  const auto& p = c.params;
  j["params"] = {{"f", p.f},
                 {"alpha", p.alpha},
                 {"kbar", p.kbar},
                 {"tau_bar", p.tau_bar},
                 {"horizon", p.horizon},
                 {"trim", p.trim ? json(*p.trim) : json(nullptr)},
                 {"medag_all_modes", p.medag_all_modes},
                 {"eager_estimation", p.eager_estimation},
                 {"medag_broadcast_until",
                  p.medag_broadcast_until ? json(*p.medag_broadcast_until) : json(nullptr)},
                 {"tolerances",
                  {{"eig", p.tolerances.eig},
                   {"diag", p.tolerances.diag},
                   {"pbh", p.tolerances.pbh},
                   {"settle", p.tolerances.settle}}}};
  json per_node = json::array();
  for (const auto& [node, s] : c.schedules) {
    json e = schedule_to_json(s);
    e["node"] = node;
    per_node.push_back(std::move(e));
  }
  j["schedule"] = {{"default", schedule_to_json(c.default_schedule)}, {"nodes", std::move(per_node)}};
  json adv = json::array();
  for (const auto& a : c.adversaries) {
    adv.push_back({{"node", a.node}, {"alpha", a.alpha}, {"policy", policy_to_json(a.policy)}});
  }
  j["adversaries"] = std::move(adv);
  json gains = json::array();
  for (const auto& [node, g] : c.observers.gains) gains.push_back({{"node", node}, {"L", matrix_to_json(g)}});
  j["observers"] = {{"default_pole", c.observers.default_pole}, {"gains", std::move(gains)}};
  json init = json::array();
  for (const auto& [node, v] : c.initial_estimates) init.push_back({{"node", node}, {"z", vector_to_json(v)}});
  j["initial_estimates"] = std::move(init);
  j["seed"] = c.seed;
  j["groups"] = c.groups;
  j["output"] = {{"dir", c.output_dir}};
  return j;
}

RunConfig from_json(const json& j) {
  RunConfig c;
  if (!j.is_object()) throw ValidationError("$", "config must be a JSON object");
  c.name = get_or<std::string>(j, "name", "", "$");
  const auto& sys = require(j, "system", "$");
  c.a = matrix_from_json(require(sys, "A", "system"), "system.A");
  c.x0 = vector_from_json(require(sys, "x0", "system"), "system.x0");
  if (sys.contains("psi") && !sys.at("psi").is_null()) c.psi = matrix_from_json(sys.at("psi"), "system.psi");
  c.node_count = require(require(j, "nodes", "$"), "count", "nodes").get<int>();
  if (j.contains("observations")) {
    const auto& obs = j.at("observations");
    for (std::size_t i = 0; i < obs.size(); ++i) {
      const std::string p = "observations[" + std::to_string(i) + "]";
      c.observations[require(obs[i], "node", p).get<NodeId>()] = matrix_from_json(require(obs[i], "C", p), p + ".C");
    }
  }
  const auto& g = require(j, "graph", "$");
  c.graph.mu_bar = get_or<int>(g, "mu_bar", 0, "graph");
  const auto delay_mode = get_or<std::string>(g, "delay_mode", "fixed", "graph");
  if (delay_mode != "fixed" && delay_mode != "random") {
    throw ValidationError("graph.delay_mode", "expected fixed or random");
  }
  c.graph.delay_mode = delay_mode == "fixed" ? DelayMode::Fixed : DelayMode::Random;
  if (g.contains("edges")) c.graph.edges = edges_from_json(g.at("edges"), "graph.edges");
  if (g.contains("intervals")) {
    const auto& ivs = g.at("intervals");
    for (std::size_t i = 0; i < ivs.size(); ++i) {
      const std::string p = "graph.intervals[" + std::to_string(i) + "]";
      c.graph.intervals.push_back({require(ivs[i], "start", p).get<Step>(),
                                   edges_from_json(require(ivs[i], "edges", p), p + ".edges")});
    }
  }
  const auto& pj = require(j, "params", "$");
  auto& p = c.params;
  p.f = get_or<int>(pj, "f", 0, "params");
  p.alpha = get_or<int>(pj, "alpha", 1, "params");
  p.kbar = get_or<int>(pj, "kbar", 1, "params");
  p.tau_bar = get_or<int>(pj, "tau_bar", 0, "params");
  p.horizon = get_or<Step>(pj, "horizon", 100, "params");
  if (pj.contains("trim") && !pj.at("trim").is_null()) p.trim = pj.at("trim").get<int>();
  p.medag_all_modes = get_or<bool>(pj, "medag_all_modes", false, "params");
  p.eager_estimation = get_or<bool>(pj, "eager_estimation", false, "params");
  if (pj.contains("medag_broadcast_until") && !pj.at("medag_broadcast_until").is_null()) {
    p.medag_broadcast_until = pj.at("medag_broadcast_until").get<Step>();
  }
  if (pj.contains("tolerances")) {
    const auto& t = pj.at("tolerances");
    p.tolerances.eig = get_or<double>(t, "eig", 1e-9, "params.tolerances");
    p.tolerances.diag = get_or<double>(t, "diag", 1e-9, "params.tolerances");
    p.tolerances.pbh = get_or<double>(t, "pbh", 1e-9, "params.tolerances");
    p.tolerances.settle = get_or<double>(t, "settle", 1e-6, "params.tolerances");
  }
  if (j.contains("schedule")) {
    const auto& s = j.at("schedule");
    if (s.contains("default")) c.default_schedule = schedule_from_json(s.at("default"), "schedule.default");
    if (s.contains("nodes")) {
      const auto& nodes = s.at("nodes");
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        const std::string sp = "schedule.nodes[" + std::to_string(i) + "]";
        c.schedules[require(nodes[i], "node", sp).get<NodeId>()] = schedule_from_json(nodes[i], sp);
      }
    }
  }
  if (j.contains("adversaries")) {
    const auto& adv = j.at("adversaries");
    for (std::size_t i = 0; i < adv.size(); ++i) {
      const std::string ap = "adversaries[" + std::to_string(i) + "]";
      AdversarySpec a;
      a.node = require(adv[i], "node", ap).get<NodeId>();
      a.alpha = get_or<int>(adv[i], "alpha", 1, ap);
      if (adv[i].contains("policy")) a.policy = policy_from_json(adv[i].at("policy"), ap + ".policy");
      c.adversaries.push_back(std::move(a));
    }
  }
  if (j.contains("observers")) {
    const auto& o = j.at("observers");
    c.observers.default_pole = get_or<double>(o, "default_pole", 0.5, "observers");
    if (o.contains("gains")) {
      const auto& gains = o.at("gains");
      for (std::size_t i = 0; i < gains.size(); ++i) {
        const std::string gp = "observers.gains[" + std::to_string(i) + "]";
        c.observers.gains[require(gains[i], "node", gp).get<NodeId>()] =
            matrix_from_json(require(gains[i], "L", gp), gp + ".L");
      }
    }
  }
  if (j.contains("initial_estimates")) {
    const auto& init = j.at("initial_estimates");
    for (std::size_t i = 0; i < init.size(); ++i) {
      const std::string ip = "initial_estimates[" + std::to_string(i) + "]";
      c.initial_estimates[require(init[i], "node", ip).get<NodeId>()] =
          vector_from_json(require(init[i], "z", ip), ip + ".z");
    }
  }
  c.seed = get_or<std::uint64_t>(j, "seed", 0, "$");
  c.groups = get_or<std::map<std::string, std::vector<NodeId>>>(j, "groups", {}, "$");
  if (j.contains("output")) c.output_dir = get_or<std::string>(j.at("output"), "dir", "", "output");
  return c;
}

void check_node(NodeId id, int count, const std::string& field) {
  if (id < 0 || id >= count) throw ValidationError(field, "node " + std::to_string(id) + " out of range");
}

void validate_edges(const std::vector<EdgeSpec>& edges, const RunConfig& c, const std::string& path) {
  std::set<std::pair<NodeId, NodeId>> seen;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const auto& e = edges[i];
    const std::string p = path + "[" + std::to_string(i) + "]";
    check_node(e.from, c.node_count, p + ".from");
    check_node(e.to, c.node_count, p + ".to");
    if (e.from == e.to) throw ValidationError(p, "self-loop");
    if (!seen.insert({e.from, e.to}).second) throw ValidationError(p, "duplicate edge");
    if (e.delay < 0 || e.delay > c.params.tau_bar) throw ValidationError(p + ".delay", "must lie in [0, tau_bar]");
  }
}

void validate_schedule(const ScheduleSpec& s, int kbar, const std::string& path) {
  if (s.kind == ScheduleKind::Periodic) {
    if (s.period < 1 || s.period > kbar) throw ValidationError(path + ".period", "must lie in [1, kbar]");
    if (s.offset < 0 || s.offset >= s.period) throw ValidationError(path + ".offset", "must lie in [0, period)");
  } else if (!(s.probability > 0.0 && s.probability <= 1.0)) {
    throw ValidationError(path + ".probability", "must lie in (0, 1]");
  }
}

DirectedGraph build_graph(int n, const std::vector<EdgeSpec>& edges) {
  DirectedGraph g(n);
  for (const auto& e : edges) g.add_edge(e.from, e.to);
  return g;
}

}  // namespace

bool ObserverSpec::operator==(const ObserverSpec& o) const {
  if (default_pole != o.default_pole || gains.size() != o.gains.size()) return false;
  return std::equal(gains.begin(), gains.end(), o.gains.begin(), [](const auto& l, const auto& r) {
    return l.first == r.first && same_matrix(l.second, r.second);
  });
}

bool RunConfig::operator==(const RunConfig& o) const {
  auto same_map = [](const auto& l, const auto& r) {
    return l.size() == r.size() && std::equal(l.begin(), l.end(), r.begin(), [](const auto& a, const auto& b) {
             return a.first == b.first && same_matrix(a.second, b.second);
           });
  };
  const bool psi_same = psi.has_value() == o.psi.has_value() && (!psi || same_matrix(*psi, *o.psi));
  return name == o.name && same_matrix(a, o.a) && psi_same && same_matrix(x0, o.x0) &&
         node_count == o.node_count && same_map(observations, o.observations) && graph == o.graph &&
         params == o.params && default_schedule == o.default_schedule && schedules == o.schedules &&
         adversaries == o.adversaries && observers == o.observers &&
         same_map(initial_estimates, o.initial_estimates) && seed == o.seed && groups == o.groups &&
         output_dir == o.output_dir;
}

int RunConfig::beta() const { return beta_from_capacity(params.alpha, params.kbar); }

NodeSet RunConfig::adversary_nodes() const {
  NodeSet out;
  for (const auto& a : adversaries) out.insert(a.node);
  return out;
}

NodeSet RunConfig::regular_nodes() const {
  const NodeSet adv = adversary_nodes();
  NodeSet out;
  for (NodeId i = 0; i < node_count; ++i) {
    if (!adv.count(i)) out.insert(i);
  }
  return out;
}

const ScheduleSpec& RunConfig::schedule_for(NodeId i) const {
  auto it = schedules.find(i);
  return it == schedules.end() ? default_schedule : it->second;
}

DirectedGraph RunConfig::graph_at(Step k) const {
  if (!graph.time_varying()) return build_graph(node_count, graph.edges);
  const GraphInterval* active = &graph.intervals.front();
  for (const auto& iv : graph.intervals) {
    if (iv.start <= k) active = &iv;
  }
  return build_graph(node_count, active->edges);
}

TimeVaryingGraph RunConfig::time_varying_graph() const {
  TimeVaryingGraph tv;
  tv.mu_bar = graph.mu_bar;
  if (!graph.time_varying()) {
    tv.intervals.emplace_back(0, build_graph(node_count, graph.edges));
  } else {
    for (const auto& iv : graph.intervals) tv.intervals.emplace_back(iv.start, build_graph(node_count, iv.edges));
  }
  return tv;
}

DirectedGraph RunConfig::union_graph() const {
  DirectedGraph out(node_count);
  for (const auto& [_, g] : time_varying_graph().intervals) out = out.united(g);
  return out;
}

void validate(const RunConfig& c) {
  const auto n = c.a.rows();
  if (n == 0 || c.a.cols() != n) throw ValidationError("system.A", "must be a non-empty square matrix");
  if (!c.a.allFinite()) throw ValidationError("system.A", "entries must be finite");
  if (c.x0.size() != n) throw ValidationError("system.x0", "length must match A");
  if (c.psi && (c.psi->rows() != n || c.psi->cols() != n)) throw ValidationError("system.psi", "must be n x n");
  if (c.node_count < 1) throw ValidationError("nodes.count", "must be positive");

  const auto& p = c.params;
  if (p.f < 0) throw ValidationError("params.f", "must be non-negative");
  if (p.alpha < 1) throw ValidationError("params.alpha", "must be at least 1");
  if (p.kbar < 1) throw ValidationError("params.kbar", "must be at least 1");
  if (p.tau_bar < 0) throw ValidationError("params.tau_bar", "must be non-negative");
  if (p.horizon < 0) throw ValidationError("params.horizon", "must be non-negative");
  if (p.trim && *p.trim < 0) throw ValidationError("params.trim", "must be non-negative");
  if (p.medag_broadcast_until && *p.medag_broadcast_until < 0) {
    throw ValidationError("params.medag_broadcast_until", "must be non-negative");
  }

  for (const auto& [node, m] : c.observations) {
    check_node(node, c.node_count, "observations.node");
    if (m.cols() != n) throw ValidationError("observations[" + std::to_string(node) + "].C", "column count must equal n");
  }
  if (c.graph.time_varying()) {
    Step last = -1;
    for (std::size_t i = 0; i < c.graph.intervals.size(); ++i) {
      const auto& iv = c.graph.intervals[i];
      const std::string ip = "graph.intervals[" + std::to_string(i) + "]";
      if ((i == 0 && iv.start != 0) || (i > 0 && iv.start <= last)) {
        throw ValidationError(ip + ".start", "intervals must start at 0 and increase strictly");
      }
      last = iv.start;
      validate_edges(iv.edges, c, ip + ".edges");
    }
    if (c.graph.mu_bar < 0) throw ValidationError("graph.mu_bar", "must be non-negative");
    if (c.graph.mu_bar > p.kbar) throw ValidationError("graph.mu_bar", "window mu_bar must not exceed kbar");
  } else {
    validate_edges(c.graph.edges, c, "graph.edges");
  }

  validate_schedule(c.default_schedule, p.kbar, "schedule.default");
  for (const auto& [node, s] : c.schedules) {
    check_node(node, c.node_count, "schedule.nodes.node");
    validate_schedule(s, p.kbar, "schedule.nodes[" + std::to_string(node) + "]");
  }

  NodeSet adv;
  for (std::size_t i = 0; i < c.adversaries.size(); ++i) {
    const auto& a = c.adversaries[i];
    const std::string ap = "adversaries[" + std::to_string(i) + "]";
    check_node(a.node, c.node_count, ap + ".node");
    if (!adv.insert(a.node).second) throw ValidationError(ap + ".node", "duplicate adversary");
    if (a.alpha < 1 || a.alpha > p.alpha) throw ValidationError(ap + ".alpha", "must lie in [1, params.alpha]");
    const auto& pol = a.policy;
    if (pol.victim >= 0) check_node(pol.victim, c.node_count, ap + ".policy.victim");
    for (int d : {pol.own_delay, pol.victim_delay}) {
      if (d < 0 || d > p.tau_bar) throw ValidationError(ap + ".policy", "delays must lie in [0, tau_bar]");
    }
    for (ModeIndex j : pol.attacked_modes) {
      if (j < 0 || j >= n) throw ValidationError(ap + ".policy.attacked_modes", "mode out of range");
    }
    for (NodeId t : pol.targets) check_node(t, c.node_count, ap + ".policy.targets");
    for (const auto& entry : pol.script) {
      check_node(entry.emission.claimed, c.node_count, ap + ".policy.script.claimed");
      if (entry.emission.delay < 0 || entry.emission.delay > p.tau_bar) {
        throw ValidationError(ap + ".policy.script.delay", "must lie in [0, tau_bar]");
      }
      if (entry.emission.mode < 0 || entry.emission.mode >= n) {
        throw ValidationError(ap + ".policy.script.mode", "mode out of range");
      }
    }
  }
  for (const auto& a : c.adversaries) {
    if (a.policy.victim >= 0 && adv.count(a.policy.victim)) {
      throw ValidationError("adversaries.policy.victim", "victim must be a regular node");
    }
  }

  const DirectedGraph g = c.union_graph();
  for (NodeId i = 0; i < c.node_count; ++i) {
    if (adv.count(i)) continue;
    int bad = 0;
    for (NodeId j : g.in_neighbors(i)) bad += adv.count(j) ? 1 : 0;
    if (bad > p.f) {
      throw ValidationError("adversaries", "node " + std::to_string(i) + " has " + std::to_string(bad) +
                                               " adversarial in-neighbours, more than f = " + std::to_string(p.f));
    }
  }

  if (c.observers.default_pole < 0.0 || c.observers.default_pole >= 1.0) {
    throw ValidationError("observers.default_pole", "must lie in [0, 1)");
  }
  for (const auto& [node, _] : c.observers.gains) check_node(node, c.node_count, "observers.gains.node");
  for (const auto& [node, v] : c.initial_estimates) {
    check_node(node, c.node_count, "initial_estimates.node");
    if (v.size() != n) throw ValidationError("initial_estimates[" + std::to_string(node) + "]", "length must equal n");
  }
}

RunConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  RunConfig c;
  try {
    c = from_json(j);
  } catch (const json::exception& e) {
    throw ValidationError("$", e.what());
  }
  validate(c);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const RunConfig& config) { return to_json(config).dump(2); }

std::string config_hash(const RunConfig& config) {
  const std::string text = to_json(config).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char out[17];
  std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
  return out;
}

PreflightReport preflight(const RunConfig& config) {
  PreflightReport report;
  const auto& p = config.params;
  report.beta = config.beta();
  const bool randomized = config.default_schedule.kind == ScheduleKind::Randomized ||
                          std::any_of(config.schedules.begin(), config.schedules.end(),
                                      [](const auto& e) { return e.second.kind == ScheduleKind::Randomized; });
  if (randomized) report.beta_prime = beta_prime(report.beta, p.kbar);

  const DiagonalizedSystem diag =
      diagonalize({config.a, config.x0}, config.psi, {p.tolerances.eig, p.tolerances.diag});
  const NodeSet regular = config.regular_nodes();
  const NodeSet adv = config.adversary_nodes();
  std::map<NodeId, ModeSplit> splits;
  for (NodeId i : regular) {
    auto it = config.observations.find(i);
    if (it == config.observations.end()) continue;
    splits[i] = detectable_modes(make_observation(i, it->second, diag), p.tolerances.pbh);
  }
  const auto sources = source_sets(splits, diag.unstable_modes);
  const DirectedGraph g = config.union_graph();
  const TimeVaryingGraph tv = config.time_varying_graph();

  for (ModeIndex j : diag.unstable_modes) {
    ModeVerdict v;
    v.mode = j;
    v.sources = sources.at(j);
    v.full_threshold = 3 * (report.beta + 1) * p.f + 1;
    v.construction_threshold = parent_threshold(p.f, report.beta);
    if (report.beta_prime) v.randomized_threshold = 3 * (*report.beta_prime + 1) * p.f + 1;
    if (v.sources.empty()) {
      v.empty_sources = true;
      report.warnings.push_back("mode " + std::to_string(j) + " has no source node");
      report.modes.push_back(v);
      continue;
    }
    v.checked_set = v.sources;
    v.checked_set.insert(adv.begin(), adv.end());
    v.r_star = max_strong_robustness(g, v.checked_set);
    if (config.graph.time_varying()) {
      const auto joint = jointly_strongly_robust(tv, v.checked_set, v.full_threshold, config.graph.mu_bar,
                                                 std::max<Step>(p.horizon, config.graph.mu_bar), p.kbar);
      v.first_joint_failure = joint.first_failure;
      v.meets_full = joint.robust;
      v.meets_construction = jointly_strongly_robust(tv, v.checked_set, v.construction_threshold,
                                                     config.graph.mu_bar,
                                                     std::max<Step>(p.horizon, config.graph.mu_bar))
                                 .robust;
      if (v.randomized_threshold) {
        v.meets_randomized = jointly_strongly_robust(tv, v.checked_set, *v.randomized_threshold,
                                                     config.graph.mu_bar,
                                                     std::max<Step>(p.horizon, config.graph.mu_bar))
                                 .robust;
      }
    } else {
      v.meets_full = v.r_star >= v.full_threshold;
      v.meets_construction = v.r_star >= v.construction_threshold;
      if (v.randomized_threshold) v.meets_randomized = v.r_star >= *v.randomized_threshold;
    }
    if (!v.meets_full) {
      report.warnings.push_back("mode " + std::to_string(j) + ": r* = " + std::to_string(v.r_star) +
                                " below the full-guarantee threshold " + std::to_string(v.full_threshold));
    }
    report.modes.push_back(v);
  }
  return report;
}

}  // namespace spoofres
