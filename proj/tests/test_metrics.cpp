#include <gtest/gtest.h>

#include "support.hpp"
#include "teamsim/engine.hpp"
#include "teamsim/error.hpp"
#include "teamsim/llm.hpp"
#include "teamsim/metrics.hpp"

using namespace teamsim;
using teamsim::testing::load_fixture;

TEST(Metrics, EmptyRunIsAllZero) {
  const auto s = load_fixture("rescue.scn");
  Engine engine(s, scripted_policies(s));
  const auto m = compute_metrics(engine.log());
  EXPECT_EQ(m.outcome, "time_limit");
  EXPECT_EQ(m.steps, 0);
  EXPECT_EQ(m.messages_sent, 0);
  EXPECT_EQ(m.entities_rescued, 0);
  EXPECT_EQ(m.entities_manipulated, 0);
  EXPECT_EQ(m.conversations, 0);
  EXPECT_EQ(m.mean_conversation_length, "0.000000");
  ASSERT_EQ(m.agents.size(), 3u);
  for (const auto& [name, a] : m.agents) {
    EXPECT_TRUE(a.actions.empty()) << name;
    EXPECT_EQ(a.messages_sent, 0);
  }
}

TEST(Metrics, RescueCountsEveryVictim) {
  const auto s = load_fixture("rescue.scn");
  Engine engine(s, scripted_policies(s));
  engine.run();
  const auto m = compute_metrics(engine.log());
  long victims = 0;
  for (const auto& e : s.entities) victims += e.kind == "victim";
  EXPECT_EQ(victims, 5);
  EXPECT_EQ(m.entities_rescued, victims);
  EXPECT_EQ(m.rescued, (std::vector<std::string>{"victim-1", "victim-2", "victim-3", "victim-4", "victim-5"}));
  EXPECT_EQ(m.outcome, "success");
  EXPECT_EQ(m.steps, engine.outcome()->step);
  // each victim is carried once, critical ones are also stabilized; rubble is cleared
  EXPECT_GE(m.entities_manipulated, 6);
  EXPECT_EQ(m.agents.at("Sam").actions.at("use_on"), 2);
  EXPECT_GE(m.agents.at("Jordan").actions.at("use_on"), 1);
  long put_downs = 0;
  for (const auto& [n, a] : m.agents)
    if (a.actions.count("put_down")) put_downs += a.actions.at("put_down");
  EXPECT_EQ(put_downs, 5);
  EXPECT_EQ(metrics_to_json(m), engine.log().metrics);
}

TEST(Metrics, RegionsVisitedBeginAtStart) {
  const auto s = load_fixture("rescue.scn");
  const auto r = run_scenario(s, scripted_policies(s));
  const auto m = compute_metrics(r.log);
  for (const auto& [name, a] : m.agents) {
    ASSERT_FALSE(a.regions_visited.empty()) << name;
    EXPECT_EQ(a.regions_visited.front(), "Hospital");
    std::set<std::string> unique(a.regions_visited.begin(), a.regions_visited.end());
    EXPECT_EQ(unique.size(), a.regions_visited.size());
  }
}

TEST(Metrics, SurveyMeansAndFlags) {
  const auto s = load_fixture("rescue.scn");
  Engine engine(s, scripted_policies(s));
  engine.run();
  llm::TemplateBackend backend;
  engine.administer_survey(backend, default_survey_items());
  const auto m = compute_metrics(engine.log());
  ASSERT_EQ(m.survey_means.size(), 6u);
  for (const auto& [item, mean] : m.survey_means) EXPECT_EQ(mean, "5.000000") << item;
  EXPECT_EQ(m.survey_flags, 0);
}

TEST(Metrics, GapIsMalformed) {
  const auto s = load_fixture("trace.scn");
  auto log = run_scenario(s, scripted_policies(s)).log;
  log.records.erase(log.records.begin() + 1);
  EXPECT_THROW(compute_metrics(log), MalformedLog);
}

TEST(Metrics, Fixed6) {
  EXPECT_EQ(fixed6(2.0 / 3.0), "0.666667");
  EXPECT_EQ(fixed6(0), "0.000000");
}
