#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <random>

#include "support.hpp"
#include "teamsim/engine.hpp"
#include "teamsim/error.hpp"
#include "teamsim/llm.hpp"
#include "teamsim/runlog.hpp"
#include "teamsim/snapshot.hpp"

using namespace teamsim;
using nlohmann::json;
using teamsim::testing::load_fixture;
using teamsim::testing::oracle_distance;

namespace {

// Test policy built from lambdas; defaults idle, listen and end the turn.
struct Lambda final : DecisionPolicy {
  std::function<Decision(const Observation&, const AgentState&)> on_decide = [](const Observation&, const AgentState&) {
    return idle(1);
  };
  std::function<bool(const Observation&, const AgentState&)> on_listen = [](const Observation&, const AgentState&) {
    return true;
  };
  std::function<Utterance(const Conversation&, const AgentState&)> on_speak = [](const Conversation&, const AgentState&) {
    return Utterance{"bye", {}, true};
  };
  Decision decide(const Observation& obs, const AgentState& a) override { return on_decide(obs, a); }
  bool listen(const Observation& obs, const AgentState& a, const Invitation&) override { return on_listen(obs, a); }
  Utterance speak(const Conversation& c, const Observation&, const AgentState& a) override { return on_speak(c, a); }
  std::string id() const override { return "lambda"; }
};

Scenario minimal(long max_steps = 10) {
  auto s = load_fixture("minimal.scn");
  s.max_steps = max_steps;
  return s;
}

Scenario with_members(Scenario s, int n) {
  s.members.clear();
  for (int i = 0; i < n; ++i) {
    AgentProfileSpec m;
    m.name = std::string(1, static_cast<char>('A' + i));
    m.role = "Searcher";
    m.skills = {"carry"};
    s.members.push_back(m);
  }
  return s;
}

std::vector<LogRecord> of_kind(const RunLog& log, RecordKind k) {
  std::vector<LogRecord> out;
  for (const auto& r : log.records)
    if (r.kind == k) out.push_back(r);
  return out;
}

RunResult run_rescue(std::optional<std::uint64_t> seed = std::nullopt) {
  auto s = load_fixture("rescue.scn");
  if (seed) s.seed = *seed;
  return run_scenario(s, scripted_policies(s));
}

}  // namespace

TEST(Engine, AlwaysTrueSucceedsAtStepOne) {
  auto s = minimal();
  s.goal.predicate = pred::always(true);
  const auto r = run_scenario(s, scripted_policies(s));
  EXPECT_EQ(r.outcome.kind, Outcome::Kind::Success);
  EXPECT_EQ(r.outcome.step, 1);
}

TEST(Engine, AlwaysFalseHitsTimeLimit) {
  const auto s = minimal(10);
  Engine engine(s, scripted_policies(s));
  const auto r = engine.run();
  EXPECT_EQ(r.outcome.kind, Outcome::Kind::TimeLimit);
  EXPECT_EQ(r.outcome.step, 10);
  EXPECT_EQ(engine.step(), 10);
  EXPECT_THROW(engine.tick(), InvalidState);
  EXPECT_EQ(r.log.records.back().kind, RecordKind::RunEnded);
}

TEST(Engine, OptionsOverrideMaxSteps) {
  const auto s = minimal(10);
  EngineOptions o;
  o.max_steps = 3;
  EXPECT_EQ(run_scenario(s, scripted_policies(s), o).outcome.step, 3);
}

TEST(Engine, MissingPolicyThrows) { EXPECT_THROW(Engine(minimal(), {}), InvalidState); }

TEST(Engine, ClockAdvancesByOneWithNoDeltasWhileBusy) {
  auto s = minimal(50);
  auto p = std::make_shared<Lambda>();
  p->on_decide = [](const Observation&, const AgentState&) { return idle(20); };
  Engine engine(s, uniform_policies(s, p));
  engine.start();
  for (long t = 1; t < 20; ++t) {
    const auto r = engine.tick();
    EXPECT_EQ(r.step, t);
    EXPECT_EQ(r.deltas, 0u);
    EXPECT_EQ(r.resolved, 0u);
    EXPECT_EQ(r.decisions, 0u);
  }
  const auto r = engine.tick();
  EXPECT_EQ(r.resolved, 1u);
  EXPECT_EQ(r.decisions, 1u);
}

TEST(Engine, MoveOfSixStepsLandsExactlyAtStepSix) {
  auto s = minimal(50);
  std::vector<Cell> planned;
  auto p = std::make_shared<Lambda>();
  p->on_decide = [&](const Observation& obs, const AgentState&) {
    if (!planned.empty()) return idle(1);
    const auto& g = obs.env->grid;
    const auto dist = distance_field(g, obs.cell);
    for (std::size_t i = 0; i < dist.size(); ++i) {
      if (dist[i] == 6) {
        planned = *shortest_path(g, obs.cell, g.cell_at(i));
        break;
      }
    }
    return act(MoveTo{planned});
  };
  Engine engine(s, uniform_policies(s, p));
  engine.start();
  ASSERT_EQ(planned.size(), 7u);
  const Cell start = planned.front();
  for (long t = 1; t <= 5; ++t) {
    engine.tick();
    EXPECT_EQ(engine.world().agents[0].cell, start) << "step " << t;
  }
  const auto r = engine.tick();
  EXPECT_EQ(engine.world().agents[0].cell, planned.back());
  EXPECT_EQ(r.deltas, 1u);
}

TEST(Engine, SameStepEventsResolveInSequenceOrder) {
  // Find a seed where both agents can reach the single victim.
  auto base = with_members(minimal(20), 2);
  base.env_spec = {3, 3, 1, {}};
  base.entities = {{"v", "victim", true, std::nullopt, {}}};
  std::optional<Scenario> chosen;
  for (std::uint64_t seed = 0; seed < 500 && !chosen; ++seed) {
    base.seed = seed;
    const World w = build_world(base);
    const Cell v = *w.entities[0].cell;
    if (manhattan(w.agents[0].cell, v) <= 1 && manhattan(w.agents[1].cell, v) <= 1) chosen = base;
  }
  ASSERT_TRUE(chosen.has_value());

  for (const bool b_first : {false, true}) {
    Engine engine(*chosen, uniform_policies(*chosen, std::make_shared<Lambda>()));
    const World initial = engine.world();
    const int first = b_first ? 1 : 0;
    const int second = 1 - first;
    engine.schedule(engine.make_action_event(first, PickUp{"v"}, ""));
    engine.schedule(engine.make_action_event(second, PickUp{"v"}, ""));
    engine.tick();

    // sequential-application oracle
    World oracle = initial;
    for (const int who : {first, second}) {
      const WorldChange c = PickUpEntity{initial.agents[who].name, "v"};
      if (!change_problem(oracle, c)) oracle = applied(oracle, c);
    }
    oracle.step = 1;
    EXPECT_EQ(engine.world(), oracle);
    EXPECT_EQ(engine.world().entity("v")->carried_by, std::optional<std::string>(initial.agents[first].name));

    const auto resolved = of_kind(engine.log(), RecordKind::EventResolved);
    ASSERT_GE(resolved.size(), 2u);
    EXPECT_LT(resolved[0].payload["event"].get<long>(), resolved[1].payload["event"].get<long>());
    EXPECT_TRUE(resolved[0].payload["ok"].get<bool>());
    EXPECT_FALSE(resolved[1].payload["ok"].get<bool>());
    EXPECT_FALSE(resolved[1].payload["reason"].get<std::string>().empty());
  }
}

TEST(Engine, ScheduleRejectsBusyParticipant) {
  const auto s = minimal();
  Engine engine(s, uniform_policies(s, std::make_shared<Lambda>()));
  engine.schedule(engine.make_action_event(0, IdleFor{3}, ""));
  EXPECT_TRUE(engine.busy("solo"));
  EXPECT_THROW(engine.schedule(engine.make_action_event(0, IdleFor{1}, "")), ParticipantBusy);
}

TEST(Engine, InvalidDecisionIsRepromptedWithReason) {
  const auto s = minimal(3);
  auto p = std::make_shared<Lambda>();
  std::vector<std::optional<EventResult>> seen;
  p->on_decide = [&](const Observation& obs, const AgentState&) {
    seen.push_back(obs.last_result);
    return seen.size() == 1 ? act(PickUp{"ghost"}) : idle(5);
  };
  Engine engine(s, uniform_policies(s, p));
  engine.start();
  ASSERT_EQ(seen.size(), 2u);
  EXPECT_FALSE(seen[0].has_value());
  ASSERT_TRUE(seen[1].has_value());
  const auto rejected = of_kind(engine.log(), RecordKind::EventRejected);
  ASSERT_EQ(rejected.size(), 1u);
  EXPECT_EQ(seen[1]->reason, rejected[0].payload["reason"].get<std::string>());
  EXPECT_FALSE(seen[1]->reason.empty());
  EXPECT_TRUE(engine.busy("solo"));
}

TEST(Engine, SecondInvalidDecisionForcesIdle) {
  const auto s = minimal(3);
  auto p = std::make_shared<Lambda>();
  int calls = 0;
  p->on_decide = [&](const Observation&, const AgentState&) {
    ++calls;
    return act(IdleFor{0});
  };
  Engine engine(s, uniform_policies(s, p));
  engine.start();
  EXPECT_EQ(calls, 2);
  EXPECT_EQ(of_kind(engine.log(), RecordKind::EventRejected).size(), 2u);
  ASSERT_EQ(of_kind(engine.log(), RecordKind::Warning).size(), 1u);
  const auto scheduled = of_kind(engine.log(), RecordKind::EventScheduled);
  ASSERT_EQ(scheduled.size(), 1u);
  EXPECT_EQ(scheduled[0].payload["duration_steps"], 1);
  EXPECT_EQ(scheduled[0].payload["action"]["type"], "idle");
}

TEST(Engine, PolicyErrorIsLoggedAndAgentIdles) {
  const auto s = minimal(4);
  auto p = std::make_shared<Lambda>();
  p->on_decide = [](const Observation&, const AgentState&) -> Decision { throw PolicyFailure("backend down"); };
  const auto r = run_scenario(s, uniform_policies(s, p));
  EXPECT_EQ(r.outcome.kind, Outcome::Kind::TimeLimit);
  // prompted at steps 0..3, never scheduled
  EXPECT_EQ(of_kind(r.log, RecordKind::PolicyFailure).size(), 4u);
  EXPECT_TRUE(of_kind(r.log, RecordKind::EventScheduled).empty());
}

TEST(Engine, CassetteMissIsFatal) {
  const auto s = minimal(4);
  auto strict = std::make_shared<llm::ReplayBackend>(llm::Cassette{});
  EXPECT_THROW(run_scenario(s, uniform_policies(s, std::make_shared<LlmPolicy>(strict))), CassetteMiss);
}

TEST(Engine, JudgeVetoRejects) {
  struct NoMoves final : ValidatorPolicy {
    std::optional<std::string> veto(const Event& e, const World&) override {
      if (e.action && std::holds_alternative<MoveTo>(*e.action)) return "judge says stay";
      return std::nullopt;
    }
  };
  auto s = load_fixture("trace.scn");
  EngineOptions o;
  o.judge = std::make_shared<NoMoves>();
  o.max_steps = 5;
  const auto r = run_scenario(s, scripted_policies(s), o);
  const auto rejected = of_kind(r.log, RecordKind::EventRejected);
  ASSERT_FALSE(rejected.empty());
  EXPECT_EQ(rejected[0].payload["reason"], "judge says stay");
}

// The trace fixture is a single transporter in a two-room map. By hand the
// scripted run is: walk to the nearest Ward cell, walk to the victim, pick it
// up (1), walk to the nearest Hospital cell, put it down (1). Distances come
// from the oracle BFS; the engine must finish exactly then.
TEST(Engine, TraceFixtureSucceedsAtHandComputedStep) {
  auto nearest_of = [](const World& w, Cell from, const std::string& region, std::vector<Cell>* ties) {
    const RegionId r = w.tree().find(region)->id;
    int best = -1;
    for (const Cell c : w.grid().open_cells()) {
      if (w.region_at(c) != r) continue;
      const int d = oracle_distance(w.grid(), from, c);
      if (d < 0) continue;
      if (best < 0 || d < best) {
        best = d;
        ties->clear();
      }
      if (d == best) ties->push_back(c);
    }
    return best;
  };
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    auto s = load_fixture("trace.scn");
    s.seed = seed;
    const World w = build_world(s);
    const Cell start = w.agents[0].cell;
    const Cell victim = *w.entities[0].cell;
    std::vector<Cell> ward_cells, hospital_cells;
    const int d1 = nearest_of(w, start, "Ward", &ward_cells);
    ASSERT_EQ(ward_cells.size(), 1u);
    const int d2 = oracle_distance(w.grid(), ward_cells[0], victim);
    const int d3 = nearest_of(w, victim, "Hospital", &hospital_cells);
    ASSERT_TRUE(d1 <= kMaxLeg && d2 <= kMaxLeg && d3 <= kMaxLeg);
    const long expected = d1 + d2 + 1 + d3 + 1;

    const auto r = run_scenario(s, scripted_policies(s));
    ASSERT_EQ(r.outcome.kind, Outcome::Kind::Success) << seed;
    EXPECT_EQ(r.outcome.step, expected) << "seed " << seed;
    const auto deltas = of_kind(r.log, RecordKind::StateDelta);
    ASSERT_FALSE(deltas.empty());
    EXPECT_EQ(deltas.back().payload["change"]["op"], "put_down");
    EXPECT_EQ(deltas.back().step, r.outcome.step);
    ++checked;
  }
  EXPECT_EQ(checked, 40);
}

TEST(Engine, TraceFixtureSeedFiveIsEighteenSteps) {
  // frozen from the hand trace: 7 to the Ward, 4 to the victim, 1 + 5 + 1 back
  const auto s = load_fixture("trace.scn");
  EXPECT_EQ(run_scenario(s, scripted_policies(s)).outcome.step, 18);
}

TEST(Engine, RescueSucceedsBeforeCapWithMedicFirst) {
  const auto r = run_rescue();
  ASSERT_EQ(r.outcome.kind, Outcome::Kind::Success);
  EXPECT_LT(r.outcome.step, 2000);
  const auto s = load_fixture("rescue.scn");
  const World initial = world_from_json(r.log.initial_world);
  const RegionId hospital = initial.tree().find("Hospital")->id;
  int critical = 0;
  for (const auto& e : s.entities) {
    if (e.attributes.count("severity") == 0 || e.attributes.at("severity") != "critical") continue;
    ++critical;
    std::optional<long> stabilized, delivered;
    std::optional<std::string> by;
    World w = initial;
    for (const auto& rec : r.log.records) {
      if (rec.kind != RecordKind::StateDelta) continue;
      const auto change = change_from_json(rec.payload["change"]);
      apply_world_change(w, change);
      if (const auto* a = std::get_if<SetAttribute>(&change); a && a->entity == e.name && a->key == "stabilized") {
        stabilized = rec.step;
        by = rec.agent;
      }
      if (const auto* p = std::get_if<PutDownEntity>(&change); p && p->entity == e.name && !delivered) {
        if (w.region_at(*w.entity(e.name)->cell) == hospital) delivered = rec.step;
      }
    }
    ASSERT_TRUE(stabilized.has_value()) << e.name;
    ASSERT_TRUE(delivered.has_value()) << e.name;
    EXPECT_LT(*stabilized, *delivered) << e.name;
    const auto medic = std::find_if(s.members.begin(), s.members.end(), [&](const auto& m) { return m.name == *by; });
    EXPECT_EQ(medic->role, "Medic");
  }
  EXPECT_EQ(critical, 2);
}

TEST(Engine, SuccessLatches) {
  const auto s = load_fixture("rescue.scn");
  Engine engine(s, scripted_policies(s));
  engine.run();
  const auto& recs = engine.log().records;
  ASSERT_GE(recs.size(), 2u);
  EXPECT_EQ(recs[recs.size() - 2].kind, RecordKind::SuccessDetected);
  EXPECT_EQ(recs.back().kind, RecordKind::RunEnded);
  EXPECT_EQ(of_kind(engine.log(), RecordKind::SuccessDetected).size(), 1u);
  EXPECT_THROW(engine.tick(), InvalidState);
  EXPECT_TRUE(evaluate_predicate(s.goal.predicate, engine.world()));
}

TEST(Engine, RunsAreByteIdenticalAndReplay) {
  for (std::uint64_t seed : {7ULL, 1ULL, 42ULL}) {
    const auto a = run_rescue(seed);
    const auto b = run_rescue(seed);
    EXPECT_EQ(export_log(a.log), export_log(b.log)) << seed;
    const auto report = verify_replay(a.log);
    EXPECT_TRUE(report.ok) << report.message;
    EXPECT_GT(report.deltas, 0u);
  }
}

TEST(Engine, BusyExclusivityAndClockMonotonicity) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto r = run_rescue(seed);
    std::map<std::string, long> free_at;
    long last_step = 0;
    for (const auto& rec : r.log.records) {
      ASSERT_GE(rec.step, last_step);
      ASSERT_LE(rec.step, 2000);
      last_step = rec.step;
      if (rec.kind != RecordKind::EventScheduled) continue;
      const long start = rec.payload["start_step"];
      const long due = rec.payload["due_step"];
      ASSERT_EQ(start, rec.step);
      ASSERT_GE(due, start + 1);
      for (const auto& p : rec.payload["participants"]) {
        const auto name = p.get<std::string>();
        ASSERT_GE(start, free_at[name]) << name << " double-booked at step " << start;
        free_at[name] = due;
      }
    }
  }
}

TEST(Engine, CarryingRespectsOneAtATime) {
  const auto r = run_rescue();
  World w = world_from_json(r.log.initial_world);
  for (const auto& rec : r.log.records) {
    if (rec.kind != RecordKind::StateDelta) continue;
    apply_world_change(w, change_from_json(rec.payload["change"]));
    for (const auto& a : w.agents) {
      const long carried = std::count_if(w.entities.begin(), w.entities.end(),
                                         [&](const EntityState& e) { return e.carried_by == a.name; });
      ASSERT_LE(carried, 1);
    }
  }
}

TEST(Engine, AdversarialTalkersAlwaysClose) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    auto s = with_members(minimal(120), 2 + trial % 3);
    auto p = std::make_shared<Lambda>();
    std::vector<std::string> names;
    for (const auto& m : s.members) names.push_back(m.name);
    p->on_decide = [&](const Observation&, const AgentState& a) {
      std::vector<std::string> others;
      for (const auto& n : names)
        if (n != a.name()) others.push_back(n);
      return communicate(a, others, "talk to me " + std::to_string(rng() % 3));
    };
    p->on_speak = [&](const Conversation& c, const AgentState&) {
      // mention the last speaker to bait a repeat, never end voluntarily
      return Utterance{c.transcript.back().speaker + " " + std::to_string(rng()), {}, false};
    };
    struct Stubborn final : SpeakerSelector {
      std::optional<std::string> choose(const Conversation& c) override { return c.transcript.back().speaker; }
    };
    EngineOptions o;
    if (trial % 2) o.speaker_selector = std::make_shared<Stubborn>();
    Engine engine(s, uniform_policies(s, p), o);
    engine.run();
    ASSERT_FALSE(engine.conversations().empty());
    for (const auto& [id, c] : engine.conversations()) {
      if (c.state != ConversationState::Closed) continue;  // still pending when the run ended
      EXPECT_LE(c.transcript.size(), static_cast<std::size_t>(kDefaultMaxTurns));
      for (std::size_t i = 1; i < c.transcript.size(); ++i) {
        ASSERT_NE(c.transcript[i].speaker, c.transcript[i - 1].speaker);
      }
    }
    for (const auto& rec : of_kind(engine.log(), RecordKind::ConversationClosed)) {
      EXPECT_LE(rec.payload["turns"].get<long>(), kDefaultMaxTurns);
    }
    if (trial % 2) EXPECT_FALSE(of_kind(engine.log(), RecordKind::Warning).empty());
  }
}

TEST(Engine, ConversationsOpenOnListenAndDeliverOnlyToListeners) {
  auto s = with_members(minimal(40), 3);
  auto p = std::make_shared<Lambda>();
  bool asked = false;
  p->on_decide = [&](const Observation&, const AgentState& a) {
    if (a.name() == "A" && !asked) {
      asked = true;
      return communicate(a, {"B", "C"}, "B and C, report");
    }
    return idle(1);
  };
  p->on_listen = [](const Observation&, const AgentState& a) { return a.name() == "B"; };
  int spoken = 0;
  p->on_speak = [&](const Conversation&, const AgentState& a) {
    ++spoken;
    return Utterance{a.name() + " says " + std::to_string(spoken), {}, spoken >= 3};
  };
  Engine engine(s, uniform_policies(s, p));
  engine.run();
  ASSERT_EQ(engine.conversations().size(), 1u);
  const auto& c = engine.conversations().begin()->second;
  EXPECT_EQ(c.participants, (std::vector<std::string>{"A", "B"}));
  EXPECT_EQ(c.close_reason, "ended");
  for (const auto& rec : of_kind(engine.log(), RecordKind::MessageDelivered)) EXPECT_NE(rec.agent, "C");
  const auto ignored = of_kind(engine.log(), RecordKind::MessageIgnored);
  ASSERT_EQ(ignored.size(), 1u);
  EXPECT_EQ(ignored[0].agent, "C");
  // message memory only for listeners
  for (const auto& a : engine.agents()) {
    const bool has = std::any_of(a.memory.records().begin(), a.memory.records().end(),
                                 [](const MemoryRecord& m) { return m.kind == MemoryKind::Message; });
    EXPECT_EQ(has, a.name() != "C") << a.name();
  }
  // every transcript turn costs two steps
  for (std::size_t i = 1; i < c.transcript.size(); ++i) EXPECT_EQ(c.transcript[i].step - c.transcript[i - 1].step, kTurnSteps);
}

TEST(Engine, NobodyListensClosesUnanswered) {
  auto s = with_members(minimal(20), 2);
  auto p = std::make_shared<Lambda>();
  bool asked = false;
  p->on_decide = [&](const Observation&, const AgentState& a) {
    if (a.name() == "A" && !asked) {
      asked = true;
      return communicate(a, {"B"}, "hello");
    }
    return idle(1);
  };
  p->on_listen = [](const Observation&, const AgentState&) { return false; };
  Engine engine(s, uniform_policies(s, p));
  engine.run();
  EXPECT_EQ(engine.conversations().at(0).close_reason, "unanswered");
}

TEST(Engine, BusyTargetInvitationExpires) {
  auto s = with_members(minimal(30), 2);
  auto p = std::make_shared<Lambda>();
  bool asked = false;
  p->on_decide = [&](const Observation&, const AgentState& a) {
    if (a.name() == "A") return idle(25);  // A decides first, so it is already busy when invited
    if (!asked) {
      asked = true;
      return communicate(a, {"A"}, "hello");
    }
    return idle(1);
  };
  Engine engine(s, uniform_policies(s, p));
  engine.run();
  const auto& c = engine.conversations().at(0);
  EXPECT_EQ(c.close_reason, "unanswered");
  const auto ignored = of_kind(engine.log(), RecordKind::MessageIgnored);
  ASSERT_EQ(ignored.size(), 1u);
  EXPECT_EQ(ignored[0].payload["reason"], "expired");
  EXPECT_EQ(ignored[0].step, kInvitationTtl);
}

TEST(Engine, ListenerRecordsShowInMetrics) {
  const auto r = run_rescue();
  EXPECT_EQ(r.log.metrics["entities_rescued"], 5);
  EXPECT_EQ(r.log.metrics["outcome"], "success");
}

TEST(Engine, SurveyOnlyAfterFinish) {
  const auto s = load_fixture("rescue.scn");
  Engine engine(s, scripted_policies(s));
  llm::TemplateBackend backend;
  EXPECT_THROW(engine.administer_survey(backend, default_survey_items()), InvalidState);
  engine.run();
  const auto result = engine.administer_survey(backend, default_survey_items());
  EXPECT_EQ(result.responses.size(), 18u);
  EXPECT_EQ(engine.log().surveys.size(), 18u);
}

TEST(Engine, AbortEndsWithFlag) {
  const auto s = load_fixture("rescue.scn");
  Engine engine(s, scripted_policies(s));
  for (int i = 0; i < 10; ++i) engine.tick();
  engine.abort();
  ASSERT_TRUE(engine.outcome());
  EXPECT_TRUE(engine.outcome()->aborted);
  EXPECT_EQ(engine.outcome()->step, 10);
  EXPECT_EQ(engine.log().records.back().payload["aborted"], true);
}

TEST(ValidateEvent, RuleChecks) {
  const auto s = load_fixture("rescue.scn");
  const World w = build_world(s);
  const auto& riley = s.members[0];
  auto verdict = [&](ActionPayload a, int who = 0) {
    Event e;
    e.id = 0;
    e.action = a;
    e.duration_steps = action_duration(a);
    e.participants = {s.members[who].name};
    return validate_event(e, w, s.members);
  };
  const Cell here = w.agent(riley.name)->cell;
  // all-open single move
  Cell next = here;
  for (const auto st : kSteps) {
    const Cell c{here.x + st.x, here.y + st.y};
    if (w.grid().open(c)) {
      next = c;
      break;
    }
  }
  EXPECT_TRUE(verdict(MoveTo{{here, next}}).valid);
  EXPECT_FALSE(verdict(MoveTo{{here, Cell{0, 0}}}).valid);
  EXPECT_FALSE(verdict(MoveTo{{here}}).valid);

  const auto far = verdict(PickUp{"victim-1"});
  EXPECT_FALSE(far.valid);
  EXPECT_NE(far.reason.find("out of reach"), std::string::npos);

  World moved = w;
  moved.agent(riley.name)->cell = *w.entity("notice-board")->cell;
  Event e;
  e.action = UseOn{"notice-board", "clear"};
  e.duration_steps = kUseOnSteps;
  e.participants = {"Jordan"};
  moved.agent("Jordan")->cell = *w.entity("notice-board")->cell;
  const auto v = validate_event(e, moved, s.members);
  EXPECT_FALSE(v.valid);
  EXPECT_NE(v.reason.find("not interactive"), std::string::npos);

  EXPECT_EQ(action_duration(UseOn{"x", "y"}), 3);
  EXPECT_EQ(action_duration(PickUp{"x"}), 1);
  EXPECT_EQ(action_duration(MoveTo{{here, next}}), 1);
  EXPECT_EQ(action_duration(IdleFor{4}), 4);
}
