#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "support.hpp"
#include "teamsim/error.hpp"
#include "teamsim/generator.hpp"
#include "teamsim/llm.hpp"

using namespace teamsim;
using namespace teamsim::llm;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Replies with fixed drafts in order; records every request.
struct Scripted final : CompletionBackend {
  std::vector<std::string> replies;
  std::vector<CompletionRequest> seen;
  CompletionReply complete(const CompletionRequest& r) override {
    seen.push_back(r);
    const auto& text = replies[std::min(seen.size() - 1, replies.size() - 1)];
    return {text, 0, "scripted"};
  }
  std::string id() const override { return "scripted"; }
};

}  // namespace

TEST(Generator, FencedFixtureComesBackIntact) {
  const auto doc = read_file(teamsim::testing::fixture("rescue.scn"));
  Scripted b;
  b.replies = {"Here you go:\n```yaml\n" + doc + "```\n"};
  const auto s = generate_scenario_draft("a rescue", b);
  EXPECT_EQ(s, parse_scenario(doc));
  ASSERT_EQ(b.seen.size(), 1u);
  EXPECT_EQ(b.seen[0].tag, Purpose::Generator);
  EXPECT_NE(b.seen[0].user.find("a rescue"), std::string::npos);
}

TEST(Generator, StripFence) {
  EXPECT_EQ(strip_code_fence("plain"), "plain");
  EXPECT_EQ(strip_code_fence("```\na: 1\n```"), "a: 1\n");
  EXPECT_EQ(strip_code_fence("x ```yaml\nb: 2\n"), "b: 2\n");
}

TEST(Generator, MalformedTwiceIsAdapterError) {
  Scripted b;
  b.replies = {"members: [unclosed"};
  EXPECT_THROW(generate_scenario_draft("anything", b, 1), AdapterError);
  EXPECT_EQ(b.seen.size(), 2u);
  EXPECT_NE(b.seen[1].user.find("[previous draft problems]"), std::string::npos);
}

TEST(Generator, RepairsAfterFeedback) {
  const auto doc = read_file(teamsim::testing::fixture("minimal.scn"));
  Scripted b;
  b.replies = {"members: [unclosed", doc};
  EXPECT_NO_THROW(generate_scenario_draft("anything", b, 1));
  EXPECT_EQ(b.seen.size(), 2u);
}

TEST(Generator, InvalidDraftIsSemanticError) {
  const auto doc = read_file(teamsim::testing::fixture("broken.scn"));
  Scripted b;
  b.replies = {doc};
  EXPECT_THROW(generate_scenario_draft("anything", b, 0), SemanticError);
  EXPECT_THROW(generate_scenario_draft("anything", b, -1), InvalidState);
}

TEST(Generator, TemplateCountsFromPrompt) {
  TemplateBackend t;
  const auto s = generate_scenario_draft("two searchers, two missing people", t);
  ASSERT_EQ(s.members.size(), 2u);
  EXPECT_EQ(s.members[0].role, "Searcher");
  int victims = 0;
  for (const auto& e : s.entities) victims += e.kind == "victim";
  EXPECT_EQ(victims, 2);
  EXPECT_TRUE(validate_scenario(s).empty());

  const auto three = generate_scenario_draft("three medics and one victim", t);
  EXPECT_EQ(three.members.size(), 3u);
  EXPECT_EQ(three.members[0].role, "Medic");
  EXPECT_EQ(three.entities.size(), 1u);
}
