#include <gtest/gtest.h>

#include "spoofres/error.hpp"
#include "spoofres/medag.hpp"
#include "spoofres/scenarios.hpp"

using namespace spoofres;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::IoError;
}

std::map<ModeIndex, std::vector<ChiObservation>> flags(std::initializer_list<NodeId> ids) {
  std::map<ModeIndex, std::vector<ChiObservation>> inbox;
  for (NodeId v : ids) inbox[0].push_back({v, v, true});
  return inbox;
}

ParentRecord record(NodeSet parents, Step at) { return {std::move(parents), {}, at}; }

// Hand-built construction for the sample network on mode 0.
std::map<NodeId, ParentRecord> sample_records() {
  using S = SampleNetwork;
  std::map<NodeId, ParentRecord> out;
  for (NodeId v : S::r1()) out[v] = record({}, 0);
  NodeSet r3_parents = S::r1();
  r3_parents.insert(S::kSpoofer);
  for (NodeId v : S::r3()) out[v] = record(r3_parents, 3);
  for (NodeId v : S::r2()) out[v] = record(S::r3(), 6);
  return out;
}

}  // namespace

TEST(ParentThreshold, Values) {
  EXPECT_EQ(parent_threshold(1, 1), 5);
  EXPECT_EQ(parent_threshold(0, 4), 1);
  EXPECT_EQ(parent_threshold(2, 0), 5);
}

TEST(MedagNodeStep, ActivatesAtThreshold) {
  auto st = MedagNodeState::create(8, {0}, {});
  auto r = medag_node_step(st, 1, flags({0, 1, 2, 3}), 1, 1);
  EXPECT_TRUE(r.activated.empty());
  EXPECT_FALSE(st.modes[0].active);
  r = medag_node_step(st, 2, flags({13}), 1, 1);
  EXPECT_EQ(r.activated, std::vector<ModeIndex>{0});
  EXPECT_EQ(st.modes[0].activation_step, std::optional<Step>(2));
  EXPECT_EQ(st.modes[0].parents, (NodeSet{0, 1, 2, 3, 13}));
  // Frozen once active.
  medag_node_step(st, 3, flags({4, 5}), 1, 1);
  EXPECT_EQ(st.modes[0].parents.size(), 5u);
}

TEST(MedagNodeStep, DuplicatesCountOnce) {
  auto st = MedagNodeState::create(8, {0}, {});
  medag_node_step(st, 1, flags({0, 0, 1, 1, 2}), 1, 1);
  medag_node_step(st, 2, flags({2, 1, 0, 8}), 1, 1);
  EXPECT_FALSE(st.modes[0].active);
  EXPECT_EQ(st.modes[0].received.size(), 3u);
}

TEST(MedagNodeStep, InvalidFlagRejected) {
  auto st = MedagNodeState::create(8, {0}, {});
  std::map<ModeIndex, std::vector<ChiObservation>> inbox;
  inbox[0] = {{0, 13, false}};
  const auto r = medag_node_step(st, 1, inbox, 0, 0);
  ASSERT_EQ(r.rejected.size(), 1u);
  EXPECT_EQ(r.rejected[0], std::make_pair(NodeId{0}, ModeIndex{0}));
  EXPECT_FALSE(st.modes[0].active);
}

TEST(MedagNodeStep, ImpersonatedOnlyParentIsForged) {
  auto st = MedagNodeState::create(8, {0}, {});
  std::map<ModeIndex, std::vector<ChiObservation>> inbox;
  inbox[0] = {{0, 13, true}, {1, 1, true}, {2, 2, true}, {3, 3, true}, {13, 13, true}};
  medag_node_step(st, 1, inbox, 1, 1);
  ASSERT_TRUE(st.modes[0].active);
  EXPECT_EQ(st.modes[0].forged, NodeSet{0});
}

TEST(MedagSources, ActivateWithEmptyParents) {
  auto st = MedagNodeState::create(0, {0, 1}, {0});
  EXPECT_EQ(medag_activate_sources(st, 4), std::vector<ModeIndex>{0});
  EXPECT_TRUE(st.modes[0].parents.empty());
  EXPECT_EQ(st.modes[0].activation_step, std::optional<Step>(4));
  EXPECT_TRUE(medag_activate_sources(st, 5).empty());
  EXPECT_EQ(medag_broadcast_modes(st, 5, std::nullopt), std::vector<ModeIndex>{0});
  EXPECT_TRUE(medag_broadcast_modes(st, 5, 4).empty());
}

TEST(KbarBound, Examples) {
  // eta = 1 * floor((3 - 2) / 2) = 0, so 2 * (2 + 3 + 1).
  EXPECT_EQ(kbar_bound(2, 2, 3, 1), 12);
  EXPECT_EQ(kbar_bound(1, 2, 3, 1), 6);
  // eta = 1 * floor((6 - 3) / 3) = 1, so (2 * 3 + 6 + 1).
  EXPECT_EQ(kbar_bound(1, 3, 6, 1), 13);
  EXPECT_EQ(kbar_bound(0, 3, 6, 1), 0);
  EXPECT_EQ(code_of([] { kbar_bound(1, 0, 0, 0); }), ErrorCode::ConfigInvalid);
}

TEST(AssignLayers, SampleConstruction) {
  std::map<NodeId, NodeSet> parents;
  for (const auto& [v, rec] : sample_records()) {
    NodeSet regular_parents;
    for (NodeId p : rec.parents) {
      if (p != SampleNetwork::kSpoofer) regular_parents.insert(p);
    }
    parents[v] = regular_parents;
  }
  const auto layers = assign_layers(parents, SampleNetwork::r1());
  EXPECT_EQ(layers.longest_path, 2);
  ASSERT_EQ(layers.layers.size(), 3u);
  EXPECT_EQ(layers.layers[0], SampleNetwork::r1());
  EXPECT_EQ(layers.layers[1], SampleNetwork::r3());
  EXPECT_EQ(layers.layers[2], SampleNetwork::r2());
}

TEST(AssignLayers, AllSourcesAndChain) {
  EXPECT_EQ(assign_layers({}, {0, 1, 2}).longest_path, 0);
  const auto chain = assign_layers({{1, {0}}, {2, {1}}}, {0});
  EXPECT_EQ(chain.longest_path, 2);
  EXPECT_EQ(chain.layer_of.at(2), 2);
}

TEST(AssignLayers, CycleDetected) {
  EXPECT_EQ(code_of([] { assign_layers({{1, {2}}, {2, {1}}}, {0}); }), ErrorCode::CycleDetected);
}

TEST(VerifySrmedag, SampleConstructionIsClean) {
  const auto cfg = sample_network();
  const auto report =
      verify_srmedag(cfg.union_graph(), sample_records(), SampleNetwork::r1(), cfg.regular_nodes(), 1, 1);
  EXPECT_TRUE(report.violations.empty());
  EXPECT_TRUE(report.terminated);
  EXPECT_EQ(report.termination_step, std::optional<Step>(6));
  EXPECT_EQ(report.layers.longest_path, 2);
}

TEST(VerifySrmedag, TooFewParents) {
  const auto cfg = sample_network();
  auto records = sample_records();
  records[4].parents = {8, 9, 10, 11};
  const auto report =
      verify_srmedag(cfg.union_graph(), records, SampleNetwork::r1(), cfg.regular_nodes(), 1, 1);
  ASSERT_EQ(report.violations.size(), 1u);
  EXPECT_NE(report.violations[0].find("needs 5"), std::string::npos);
}

TEST(VerifySrmedag, ParentCycle) {
  DirectedGraph g(3);
  g.add_edge(0, 1);
  g.add_edge(0, 2);
  g.add_edge(1, 2);
  g.add_edge(2, 1);
  std::map<NodeId, ParentRecord> records{{0, record({}, 0)}, {1, record({2}, 1)}, {2, record({1}, 1)}};
  const auto report = verify_srmedag(g, records, {0}, {0, 1, 2}, 0, 0);
  EXPECT_FALSE(report.violations.empty());
}

TEST(VerifySrmedag, NonNeighbourAndInactive) {
  const auto cfg = sample_network();
  auto records = sample_records();
  records[4].parents = {0, 1, 2, 3, 8};
  records.erase(12);
  const auto report =
      verify_srmedag(cfg.union_graph(), records, SampleNetwork::r1(), cfg.regular_nodes(), 1, 1);
  EXPECT_FALSE(report.terminated);
  EXPECT_FALSE(report.termination_step.has_value());
  int non_neighbour = 0;
  for (const auto& v : report.violations) non_neighbour += v.find("non-neighbour") != std::string::npos;
  EXPECT_EQ(non_neighbour, 4);
}

TEST(EnumerateMotifs, SpooferAndImpersonableParent) {
  const NodeSet regular{0, 1, 2, 3, 4, 5, 6, 7};
  const auto motifs = enumerate_motifs(8, {0, 1, 2, 3, 13}, regular, {0}, {13}, 1, 1);
  ASSERT_EQ(motifs.size(), 2u);
  EXPECT_EQ(motifs[0].common, motifs[1].common);
  EXPECT_EQ(motifs[0].suspect, 13);
  EXPECT_EQ(motifs[1].suspect, 0);
  NodeSet used{motifs[0].common, motifs[0].independent, motifs[1].independent, 13, 0};
  EXPECT_EQ(used.size(), 5u);
}

TEST(EnumerateMotifs, NoAdversaryBudget) {
  EXPECT_TRUE(enumerate_motifs(8, {0, 1, 2}, {0, 1, 2}, {}, {}, 0, 0).empty());
}

TEST(EnumerateMotifs, InsufficientParents) {
  EXPECT_EQ(code_of([] { enumerate_motifs(8, {0, 1, 2, 3}, {0, 1, 2, 3}, {}, {}, 1, 1); }),
            ErrorCode::InsufficientParents);
}

TEST(CollectMotifs, SampleConstruction) {
  const auto cfg = sample_network();
  const auto motifs =
      collect_motifs(sample_records(), SampleNetwork::r1(), cfg.regular_nodes(), {}, {13}, 1, 1);
  // Two motifs per follower of R2 and R3.
  EXPECT_EQ(motifs.size(), 18u);
  for (const auto& m : motifs) {
    EXPECT_NE(m.independent, m.common);
    EXPECT_NE(m.suspect, m.common);
  }
}
