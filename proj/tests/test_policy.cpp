#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "support.hpp"
#include "teamsim/error.hpp"
#include "teamsim/llm.hpp"
#include "teamsim/policy.hpp"

using namespace teamsim;
using teamsim::testing::load_fixture;
using teamsim::testing::oracle_distance;

namespace {

struct Rig {
  Scenario scenario;
  World world;
  std::vector<AgentState> agents;
  std::unique_ptr<ScriptedPolicy> policy;

  explicit Rig(const std::string& file = "rescue.scn", std::optional<std::uint64_t> seed = std::nullopt) {
    scenario = load_fixture(file);
    if (seed) scenario.seed = *seed;
    world = build_world(scenario);
    for (std::size_t i = 0; i < scenario.members.size(); ++i) {
      agents.push_back(make_agent_state(scenario.members[i], static_cast<int>(i)));
      seed_knowledge(agents.back(), scenario);
    }
    policy = std::make_unique<ScriptedPolicy>(scenario.goal.predicate);
  }

  AgentState& agent(const std::string& n) {
    return *std::find_if(agents.begin(), agents.end(), [&](const AgentState& a) { return a.name() == n; });
  }

  // Observes, learns, and marks everything learnt as already shared.
  Observation look(AgentState& a) {
    a.cell = world.agent(a.name())->cell;
    a.carrying = world.agent(a.name())->carrying;
    auto obs = build_observation(world, a, scenario.max_steps, scenario.goal.statement);
    absorb_observation(a.knowledge, obs);
    for (const auto& f : unshared_facts(a, delivery_targets(scenario.goal.predicate))) a.knowledge.offered.insert(f.signature());
    return obs;
  }

  Decision decide(const std::string& name) {
    auto& a = agent(name);
    const auto obs = look(a);
    return policy->decide(obs, a);
  }

  void carry(const std::string& agent_name, const std::string& entity) {
    auto& e = *world.entity(entity);
    auto& b = *world.agent(agent_name);
    e.cell.reset();
    e.carried_by = agent_name;
    b.carrying = entity;
  }
};

template <class T>
const T* action_of(const Decision& d) {
  const auto* a = std::get_if<Act>(&d.choice);
  return a ? std::get_if<T>(&a->action) : nullptr;
}

// Minimum oracle distance from `from` to any cell of region r.
int region_distance(const World& w, Cell from, RegionId r) {
  const auto blocked = w.blocked_mask();
  int best = -1;
  for (const Cell c : w.grid().open_cells()) {
    if (w.region_at(c) != r) continue;
    const int d = oracle_distance(w.grid(), from, c, &blocked);
    if (d >= 0 && (best < 0 || d < best)) best = d;
  }
  return best;
}

}  // namespace

TEST(ScriptedPolicy, PicksUpVictimOnSameCell) {
  Rig s;
  s.world.agent("Riley")->cell = *s.world.entity("victim-2")->cell;  // minor
  const auto d = s.decide("Riley");
  const auto* p = action_of<PickUp>(d);
  ASSERT_NE(p, nullptr) << decision_to_json(d).dump();
  EXPECT_EQ(p->entity, "victim-2");
}

TEST(ScriptedPolicy, PutsDownInHospital) {
  Rig s;
  s.carry("Riley", "victim-2");
  ASSERT_EQ(s.world.region_name(s.world.region_at(s.world.agent("Riley")->cell)), "Hospital");
  const auto d = s.decide("Riley");
  const auto* p = action_of<PutDown>(d);
  ASSERT_NE(p, nullptr) << decision_to_json(d).dump();
  EXPECT_EQ(p->entity, "victim-2");
}

TEST(ScriptedPolicy, CarriesTowardHospitalFromElsewhere) {
  Rig s;
  const Cell away = *s.world.entity("victim-2")->cell;
  s.world.agent("Riley")->cell = away;
  s.carry("Riley", "victim-2");
  const auto d = s.decide("Riley");
  const auto* m = action_of<MoveTo>(d);
  ASSERT_NE(m, nullptr);
  const RegionId hospital = s.world.tree().find("Hospital")->id;
  const int before = region_distance(s.world, away, hospital);
  const int after = region_distance(s.world, m->path.back(), hospital);
  EXPECT_EQ(after, before - static_cast<int>(m->path.size() - 1));
  EXPECT_LE(m->path.size(), static_cast<std::size_t>(kMaxLeg + 1));
}

TEST(ScriptedPolicy, MedicStabilizesAdjacentCriticalVictim) {
  Rig s;
  s.world.agent("Sam")->cell = *s.world.entity("victim-1")->cell;
  const auto d = s.decide("Sam");
  const auto* u = action_of<UseOn>(d);
  ASSERT_NE(u, nullptr) << decision_to_json(d).dump();
  EXPECT_EQ(u->entity, "victim-1");
  EXPECT_EQ(u->verb, "stabilize");
}

TEST(ScriptedPolicy, TransporterWaitsOnUnstabilizedCriticalVictim) {
  Rig s;
  s.world.agent("Riley")->cell = *s.world.entity("victim-1")->cell;
  auto& riley = s.agent("Riley");
  // every region already seen, so waiting is the only task left
  for (const auto& r : s.world.tree().regions) riley.knowledge.visited.insert(r.id);
  const auto d = s.decide("Riley");
  ASSERT_TRUE(std::holds_alternative<Idle>(d.choice)) << decision_to_json(d).dump();
  s.world.entity("victim-1")->attributes["stabilized"] = "true";
  const auto after = s.decide("Riley");
  ASSERT_NE(action_of<PickUp>(after), nullptr) << decision_to_json(after).dump();
}

TEST(ScriptedPolicy, ExploresNearestUnvisitedRegionByPathDistance) {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    Rig s("rescue.scn", seed);
    // hide all entities so nothing is visible
    for (auto& e : s.world.entities) e.removed = true;
    std::mt19937_64 rng(seed);
    auto& riley = s.agent("Riley");
    const auto open = s.world.grid().open_cells();
    s.world.agent("Riley")->cell = open[rng() % open.size()];
    for (const auto& r : s.world.tree().regions)
      if (rng() % 3 == 0) riley.knowledge.visited.insert(r.id);
    const auto d = s.decide("Riley");
    const Cell from = s.world.agent("Riley")->cell;

    RegionId expect = kNoRegion;
    int best = -1;
    for (const auto& r : s.world.tree().regions) {
      if (riley.knowledge.visited.count(r.id)) continue;
      const int dist = region_distance(s.world, from, r.id);
      if (dist >= 0 && (best < 0 || dist < best)) {
        best = dist;
        expect = r.id;
      }
    }
    if (expect == kNoRegion) {
      EXPECT_TRUE(std::holds_alternative<Idle>(d.choice)) << seed;
      continue;
    }
    const auto* m = action_of<MoveTo>(d);
    ASSERT_NE(m, nullptr) << "seed " << seed << " " << decision_to_json(d).dump();
    EXPECT_EQ(d.rationale, "explore " + s.world.region_name(expect)) << seed;
    EXPECT_EQ(m->path.front(), from);
    const int after = region_distance(s.world, m->path.back(), expect);
    EXPECT_EQ(after, best - static_cast<int>(m->path.size() - 1)) << seed;
  }
}

TEST(ScriptedPolicy, SharesDiscoveriesWhenTrusting) {
  Rig s;
  s.world.agent("Riley")->cell = *s.world.entity("victim-2")->cell;
  auto& riley = s.agent("Riley");
  const auto obs = build_observation(s.world, riley, 2000, "");
  absorb_observation(riley.knowledge, obs);
  const auto d = s.policy->decide(obs, riley);
  const auto* c = std::get_if<Communicate>(&d.choice);
  ASSERT_NE(c, nullptr);
  EXPECT_EQ(c->targets.size(), 2u);
  EXPECT_FALSE(c->facts.empty());
}

TEST(ScriptedPolicy, PureFunctionOfInputs) {
  Rig s;
  std::mt19937_64 rng(3);
  const auto open = s.world.grid().open_cells();
  for (int i = 0; i < 100; ++i) {
    for (const auto& name : {"Riley", "Sam", "Jordan"}) {
      s.world.agent(name)->cell = open[rng() % open.size()];
      auto& a = s.agent(name);
      const auto obs = build_observation(s.world, a, 2000, "");
      absorb_observation(a.knowledge, obs);
      const AgentState copy = a;
      ScriptedPolicy other(s.scenario.goal.predicate);
      EXPECT_EQ(s.policy->decide(obs, a), other.decide(obs, copy));
      EXPECT_EQ(s.policy->decide(obs, a), s.policy->decide(obs, a));
    }
  }
}

TEST(ScriptedPolicy, NeverCommunicatesWithSelfOrStrangers) {
  Rig s;
  std::mt19937_64 rng(4);
  const auto open = s.world.grid().open_cells();
  std::set<std::string> names;
  for (const auto& m : s.scenario.members) names.insert(m.name);
  for (int i = 0; i < 300; ++i) {
    const std::string name = s.scenario.members[rng() % 3].name;
    s.world.agent(name)->cell = open[rng() % open.size()];
    auto& a = s.agent(name);
    const auto obs = build_observation(s.world, a, 2000, "");
    absorb_observation(a.knowledge, obs);
    const auto d = s.policy->decide(obs, a);
    if (const auto* c = std::get_if<Communicate>(&d.choice)) {
      for (const auto& t : c->targets) {
        EXPECT_NE(t, name);
        EXPECT_TRUE(names.count(t));
      }
      for (const auto& f : c->facts) a.knowledge.offered.insert(f.signature());
    }
  }
}

TEST(ReplyGrammar, ParsesEveryForm) {
  Rig s;
  auto& riley = s.agent("Riley");
  const auto obs = s.look(riley);
  auto parse = [&](const std::string& t) { return parse_decision_reply(t, obs, riley); };

  auto r = parse("ACTION MOVE_TO Kitchen\nRATIONALE: check the kitchen");
  ASSERT_TRUE(r.decision) << r.error;
  EXPECT_EQ(r.decision->rationale, "check the kitchen");
  const auto* m = action_of<MoveTo>(*r.decision);
  ASSERT_NE(m, nullptr);
  EXPECT_EQ(s.world.region_name(s.world.region_at(m->path.back())), "Kitchen");

  const Cell here = obs.cell;
  Cell next = here;
  for (const auto step : kSteps) {
    const Cell c{here.x + step.x, here.y + step.y};
    if (s.world.grid().open(c)) {
      next = c;
      break;
    }
  }
  r = parse("ACTION MOVE_TO " + std::to_string(next.x) + "," + std::to_string(next.y));
  ASSERT_TRUE(r.decision) << r.error;
  EXPECT_EQ(action_of<MoveTo>(*r.decision)->path, (std::vector<Cell>{here, next}));

  r = parse("  \nACTION PICK_UP victim-1\n");
  ASSERT_TRUE(r.decision);
  EXPECT_EQ(action_of<PickUp>(*r.decision)->entity, "victim-1");
  r = parse("ACTION PUT_DOWN victim-1");
  EXPECT_EQ(action_of<PutDown>(*r.decision)->entity, "victim-1");
  r = parse("ACTION USE_ON rubble-1 clear");
  EXPECT_EQ(*action_of<UseOn>(*r.decision), (UseOn{"rubble-1", "clear"}));
  r = parse("COMMUNICATE Sam, Jordan :: meet at the gym");
  ASSERT_TRUE(r.decision);
  const auto& c = std::get<Communicate>(r.decision->choice);
  EXPECT_EQ(c.targets, (std::vector<std::string>{"Sam", "Jordan"}));
  EXPECT_EQ(c.opening, "meet at the gym");
  r = parse("IDLE 4");
  EXPECT_EQ(std::get<Idle>(r.decision->choice).duration, 4);
  r = parse("IDLE");
  EXPECT_EQ(std::get<Idle>(r.decision->choice).duration, 1);
}

TEST(ReplyGrammar, RejectsWithReasons) {
  Rig s;
  auto& riley = s.agent("Riley");
  const auto obs = s.look(riley);
  auto error_of = [&](const std::string& t) {
    auto r = parse_decision_reply(t, obs, riley);
    EXPECT_FALSE(r.decision.has_value()) << t;
    return r.error;
  };
  EXPECT_EQ(error_of(""), "empty reply");
  EXPECT_EQ(error_of("ACTION MOVE_TO Attic"), "unknown region 'Attic'");
  EXPECT_EQ(error_of("ACTION MOVE_TO Hospital"), "already in Hospital");
  EXPECT_EQ(error_of("ACTION MOVE_TO 0,0"), "cell (0,0) is not open");
  EXPECT_FALSE(error_of("COMMUNICATE Riley :: me").empty());
  EXPECT_FALSE(error_of("COMMUNICATE :: nobody").empty());
  EXPECT_EQ(error_of("COMMUNICATE Sam hello"), "COMMUNICATE needs '::' before the message");
  EXPECT_EQ(error_of("IDLE 0"), "IDLE needs a positive step count");
  EXPECT_EQ(error_of("action pick_up x"), "unrecognised reply 'action pick_up x'");
}

TEST(AllowedActions, EveryLineParses) {
  Rig s;
  s.world.agent("Riley")->cell = *s.world.entity("victim-2")->cell;
  auto& riley = s.agent("Riley");
  const auto obs = s.look(riley);
  const auto lines = allowed_actions(obs, riley);
  EXPECT_NE(std::find(lines.begin(), lines.end(), "ACTION PICK_UP victim-2"), lines.end());
  EXPECT_EQ(lines.back(), "IDLE 1");
  for (const auto& l : lines) EXPECT_TRUE(parse_decision_reply(l, obs, riley).decision) << l;
}

TEST(LlmPolicy, PromptCarriesVersionAndSections) {
  Rig s;
  std::string seen;
  auto backend = std::make_shared<llm::FunctionBackend>([&](const llm::CompletionRequest& r) {
    seen = r.user;
    return std::string("IDLE 2");
  });
  LlmPolicy policy(backend);
  auto& riley = s.agent("Riley");
  const auto d = policy.decide(s.look(riley), riley);
  EXPECT_EQ(std::get<Idle>(d.choice).duration, 2);
  EXPECT_EQ(seen.rfind(kPromptVersion, 0), 0u);
  for (const char* section : {"[profile]", "[goal]", "[observation]", "[memories]", "[allowed actions]"}) {
    EXPECT_NE(seen.find(section), std::string::npos) << section;
  }
}

TEST(LlmPolicy, OneRetryThenIdle) {
  Rig s;
  auto& riley = s.agent("Riley");
  const auto obs = s.look(riley);
  int calls = 0;
  auto garbage = std::make_shared<llm::FunctionBackend>([&](const llm::CompletionRequest&) {
    ++calls;
    return std::string("I think I will go north");
  });
  const auto d = LlmPolicy(garbage).decide(obs, riley);
  EXPECT_EQ(calls, 2);
  EXPECT_EQ(std::get<Idle>(d.choice).duration, 1);

  calls = 0;
  std::string second_prompt;
  auto fixes = std::make_shared<llm::FunctionBackend>([&](const llm::CompletionRequest& r) {
    second_prompt = r.user;
    return std::string(++calls == 1 ? "nonsense" : "IDLE 3");
  });
  const auto fixed = LlmPolicy(fixes).decide(obs, riley);
  EXPECT_EQ(std::get<Idle>(fixed.choice).duration, 3);
  EXPECT_NE(second_prompt.find("[error]"), std::string::npos);
}

TEST(LlmPolicy, AdapterFailureIsPolicyFailure) {
  Rig s;
  auto& riley = s.agent("Riley");
  const auto obs = s.look(riley);
  auto down = std::make_shared<llm::FunctionBackend>([](const llm::CompletionRequest&) -> std::string { throw AdapterTimeout("slow"); });
  EXPECT_THROW(LlmPolicy(down).decide(obs, riley), PolicyFailure);
}
