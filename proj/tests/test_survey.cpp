#include <gtest/gtest.h>

#include <random>

#include "support.hpp"
#include "teamsim/agent.hpp"
#include "teamsim/error.hpp"
#include "teamsim/llm.hpp"
#include "teamsim/survey.hpp"

using namespace teamsim;
using teamsim::testing::load_fixture;

namespace {

std::vector<AgentState> rescue_agents() {
  const auto s = load_fixture("rescue.scn");
  std::vector<AgentState> agents;
  for (std::size_t i = 0; i < s.members.size(); ++i) {
    agents.push_back(make_agent_state(s.members[i], static_cast<int>(i)));
    seed_knowledge(agents.back(), s);
  }
  return agents;
}

std::vector<const AgentState*> pointers(const std::vector<AgentState>& agents) {
  std::vector<const AgentState*> out;
  for (const auto& a : agents) out.push_back(&a);
  return out;
}

}  // namespace

TEST(Survey, DefaultItemsCoverSixDimensions) {
  std::vector<std::string> ids;
  for (const auto& i : default_survey_items()) {
    ids.push_back(i.id);
    EXPECT_EQ(i.scale_min, 0);
    EXPECT_EQ(i.scale_max, 10);
    EXPECT_FALSE(i.prompt.empty());
  }
  EXPECT_EQ(ids, (std::vector<std::string>{"communication", "coordination", "trust_in_bot", "emerging_leadership",
                                           "collective_self_efficacy", "team_processes"}));
  EXPECT_FALSE(theory_of_mind_items().empty());
}

TEST(Survey, MockGivesEighteenMidScaleResponses) {
  const auto agents = rescue_agents();
  llm::TemplateBackend backend;
  const auto r = administer_survey(pointers(agents), default_survey_items(), backend);
  ASSERT_EQ(r.responses.size(), 18u);
  EXPECT_TRUE(r.flags.empty());
  for (const auto& resp : r.responses) {
    EXPECT_EQ(resp.value, 5);
    EXPECT_FALSE(resp.clamped);
    EXPECT_FALSE(llm::cited_memory_ids(resp.rationale).empty());
  }
}

TEST(Survey, OutOfRangeIsClampedAndFlagged) {
  const auto agents = rescue_agents();
  llm::FunctionBackend twelve([](const llm::CompletionRequest&) { return std::string("12"); });
  const auto r = administer_survey({&agents[0]}, {default_survey_items()[0]}, twelve);
  ASSERT_EQ(r.responses.size(), 1u);
  EXPECT_EQ(r.responses[0].value, 10);
  EXPECT_TRUE(r.responses[0].clamped);
  ASSERT_EQ(r.flags.size(), 1u);
  EXPECT_EQ(r.flags[0].reason, "clamped");
  EXPECT_EQ(r.flags[0].raw, "12");
}

TEST(Survey, UnparseableAndFailuresAreOmittedAndFlagged) {
  const auto agents = rescue_agents();
  llm::FunctionBackend words([](const llm::CompletionRequest&) { return std::string("quite good"); });
  auto r = administer_survey({&agents[0]}, {default_survey_items()[0]}, words);
  EXPECT_TRUE(r.responses.empty());
  ASSERT_EQ(r.flags.size(), 1u);
  EXPECT_EQ(r.flags[0].reason, "unparseable");

  llm::FunctionBackend down([](const llm::CompletionRequest&) -> std::string { throw AdapterError("down"); });
  r = administer_survey({&agents[0], &agents[1]}, {default_survey_items()[0]}, down);
  EXPECT_TRUE(r.responses.empty());
  ASSERT_EQ(r.flags.size(), 2u);
  EXPECT_EQ(r.flags[1].reason, "policy_failure");
}

TEST(Survey, ParseValue) {
  EXPECT_EQ(parse_survey_value("7 because"), 7);
  EXPECT_EQ(parse_survey_value("Rating: -3"), -3);
  EXPECT_EQ(parse_survey_value("none"), std::nullopt);
  EXPECT_EQ(parse_survey_value("a 10/10"), 10);
  EXPECT_GT(*parse_survey_value("99999999999999999999999"), 10);
}

TEST(Survey, RandomRepliesStayInBoundsWithEveryClampFlagged) {
  std::mt19937_64 rng(17);
  const auto agents = rescue_agents();
  const auto items = default_survey_items();
  std::vector<std::string> replies;
  for (int i = 0; i < 10000; ++i) {
    switch (rng() % 5) {
      case 0:
        replies.push_back(std::to_string(static_cast<long>(rng() % 41) - 20));
        break;
      case 1:
        replies.push_back("I'd say " + std::to_string(rng() % 1000000) + " overall");
        break;
      case 2:
        replies.push_back("no idea");
        break;
      case 3:
        replies.push_back(std::to_string(rng()) + std::to_string(rng()));
        break;
      default:
        replies.push_back(std::to_string(rng() % 11) + ", fine");
    }
  }
  std::size_t next = 0;
  llm::FunctionBackend backend([&](const llm::CompletionRequest&) { return replies[next++ % replies.size()]; });
  std::size_t served = 0;
  while (served < replies.size()) {
    const auto before = next;
    const auto r = administer_survey({&agents[served % 3]}, {items[served % 6]}, backend);
    const auto& reply = replies[before];
    const auto raw = parse_survey_value(reply);
    if (!raw) {
      ASSERT_TRUE(r.responses.empty());
      ASSERT_EQ(r.flags.at(0).reason, "unparseable");
    } else {
      ASSERT_EQ(r.responses.size(), 1u);
      const auto& resp = r.responses[0];
      ASSERT_GE(resp.value, 0);
      ASSERT_LE(resp.value, 10);
      const bool out = *raw < 0 || *raw > 10;
      ASSERT_EQ(resp.clamped, out) << reply;
      ASSERT_EQ(r.flags.size(), out ? 1u : 0u) << reply;
      if (!out) ASSERT_EQ(resp.value, *raw);
    }
    served = next;
  }
}

TEST(Survey, JsonRoundTrip) {
  const SurveyResponse r{"Sam", "coordination", 7, "ok m3", true};
  EXPECT_EQ(survey_response_from_json(survey_response_to_json(r)), r);
  const SurveyFlag f{"Sam", "coordination", "clamped", "12"};
  EXPECT_EQ(survey_flag_from_json(survey_flag_to_json(f)), f);
}
