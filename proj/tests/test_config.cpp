#include <gtest/gtest.h>

#include "spoofres/config.hpp"
#include "spoofres/error.hpp"
#include "spoofres/scenarios.hpp"

using namespace spoofres;

namespace {

std::string validation_field(const RunConfig& c) {
  try {
    validate(c);
  } catch (const ValidationError& e) {
    return e.field();
  }
  ADD_FAILURE() << "config accepted";
  return {};
}

}  // namespace

TEST(Config, SerializeRoundTrip) {
  for (const auto& cfg : {sample_network(), scenario_s1(), scenario_s2(), random_robust_config(7)}) {
    const auto back = parse_config(serialize_config(cfg));
    EXPECT_TRUE(back == cfg) << cfg.name;
    EXPECT_EQ(config_hash(back), config_hash(cfg));
  }
}

TEST(Config, ShippedScenarioFilesMatchBuiltins) {
  const std::string dir = SPOOFRES_SCENARIO_DIR;
  EXPECT_TRUE(load_config(dir + "/s1.json") == scenario_s1());
  EXPECT_TRUE(load_config(dir + "/s2.json") == scenario_s2());
}

TEST(Config, HashIsStableAndSensitive) {
  const auto a = scenario_s1();
  EXPECT_EQ(config_hash(a), config_hash(scenario_s1()));
  EXPECT_EQ(config_hash(a).size(), 16u);
  auto b = a;
  b.seed = 1;
  EXPECT_NE(config_hash(a), config_hash(b));
}

TEST(Config, WindowLongerThanKbarRejected) {
  auto c = sample_network();
  c.graph.intervals = {{0, c.graph.edges}};
  c.graph.mu_bar = 3;
  EXPECT_EQ(validation_field(c), "graph.mu_bar");
}

TEST(Config, TooManyAdversarialNeighboursRejected) {
  auto c = sample_network();
  AdversarySpec second;
  // R3 then hears from both 0 and the spoofer.
  second.node = 0;
  c.adversaries.push_back(second);
  EXPECT_EQ(validation_field(c), "adversaries");
}

TEST(Config, FieldLevelErrors) {
  auto c = sample_network();
  c.graph.edges.front().delay = 4;
  EXPECT_EQ(validation_field(c), "graph.edges[0].delay");
  c = sample_network();
  c.schedules[0].period = 3;
  EXPECT_NE(validation_field(c).find("period"), std::string::npos);
  c = sample_network();
  c.observers.default_pole = 1.0;
  EXPECT_EQ(validation_field(c), "observers.default_pole");
  EXPECT_THROW(parse_config("{"), Error);
  EXPECT_THROW(parse_config("[]"), ValidationError);
  EXPECT_THROW(load_config("/nonexistent/config.json"), Error);
}

TEST(Preflight, SampleNetworkThresholds) {
  const auto report = preflight(sample_network());
  EXPECT_EQ(report.beta, 1);
  ASSERT_EQ(report.modes.size(), 2u);
  for (const auto& v : report.modes) {
    EXPECT_EQ(v.r_star, 5);
    EXPECT_EQ(v.construction_threshold, 5);
    EXPECT_EQ(v.full_threshold, 7);
    EXPECT_TRUE(v.meets_construction);
    EXPECT_FALSE(v.meets_full);
    EXPECT_TRUE(v.checked_set.count(SampleNetwork::kSpoofer));
  }
  EXPECT_EQ(report.modes[0].sources, SampleNetwork::r1());
  EXPECT_EQ(report.modes[1].sources, SampleNetwork::r2());
}

TEST(Preflight, EmptySourcesWarns) {
  auto c = sample_network();
  for (NodeId i : SampleNetwork::r2()) c.observations[i] = Eigen::MatrixXd::Zero(1, 2);
  const auto report = preflight(c);
  ASSERT_EQ(report.modes.size(), 2u);
  EXPECT_TRUE(report.modes[1].empty_sources);
  EXPECT_FALSE(report.warnings.empty());
}

TEST(Preflight, NoAdversariesGivesUnitThreshold) {
  auto c = sample_network();
  c.adversaries.clear();
  c.params.f = 0;
  const auto report = preflight(c);
  for (const auto& v : report.modes) {
    EXPECT_EQ(v.construction_threshold, 1);
    EXPECT_EQ(v.full_threshold, 1);
    EXPECT_TRUE(v.meets_full);
  }
}
