#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "support.hpp"
#include "teamsim/engine.hpp"
#include "teamsim/error.hpp"
#include "teamsim/runlog.hpp"
#include "teamsim/snapshot.hpp"

using namespace teamsim;
using nlohmann::json;
using teamsim::testing::load_fixture;

namespace {

json random_payload(std::mt19937_64& rng, int depth = 0) {
  json j = json::object();
  const int n = static_cast<int>(rng() % 4);
  for (int i = 0; i < n; ++i) {
    const std::string key = std::string(1, static_cast<char>('a' + rng() % 26)) + std::to_string(rng() % 9);
    switch (depth > 1 ? rng() % 4 : rng() % 6) {
      case 0:
        j[key] = static_cast<long>(rng() % 100000) - 50000;
        break;
      case 1:
        j[key] = "text \"" + std::to_string(rng()) + "\"\n\xc3\xa9";
        break;
      case 2:
        j[key] = rng() % 2 == 0;
        break;
      case 3:
        j[key] = nullptr;
        break;
      case 4:
        j[key] = json::array({random_payload(rng, depth + 1), static_cast<long>(rng() % 7)});
        break;
      default:
        j[key] = random_payload(rng, depth + 1);
    }
  }
  return j;
}

RunLog random_log(std::mt19937_64& rng, const json& world) {
  RunLog log;
  log.header.scenario_id = "gen-" + std::to_string(rng() % 100);
  log.header.seed = rng();
  log.header.max_steps = 1 + static_cast<long>(rng() % 3000);
  log.header.goal = "goal " + std::to_string(rng() % 10);
  log.header.predicate = predicate_to_json(pred::all_in_region("victim", "Hospital"));
  log.header.agents = json::array({{{"name", "A"}, {"policy", "scripted"}, {"role", "Medic"}}});
  log.initial_world = world;
  long step = 0;
  const int n = static_cast<int>(rng() % 60);
  for (int i = 0; i < n; ++i) {
    step += static_cast<long>(rng() % 3);
    LogRecord r;
    r.seq = i;
    r.step = step;
    r.kind = static_cast<RecordKind>(rng() % 13);
    r.agent = rng() % 2 ? "A" : "";
    r.payload = random_payload(rng);
    r.rationale = rng() % 2 ? "because " + std::to_string(rng() % 50) : "";
    log.records.push_back(r);
  }
  const int s = static_cast<int>(rng() % 4);
  for (int i = 0; i < s; ++i) log.surveys.push_back({"A", "item" + std::to_string(i), static_cast<int>(rng() % 11), "r", rng() % 2 == 0});
  if (rng() % 2) log.survey_flags.push_back({"A", "item0", "clamped", "12"});
  if (rng() % 3) log.outcome = Outcome{rng() % 2 ? Outcome::Kind::Success : Outcome::Kind::TimeLimit, step, rng() % 2 == 0};
  log.final_world = world;
  if (rng() % 2) log.metrics = json{{"steps", step}};
  return log;
}

RunLog rescue_log() {
  const auto s = load_fixture("rescue.scn");
  return run_scenario(s, scripted_policies(s)).log;
}

}  // namespace

TEST(RunLog, RecordKindNamesRoundTrip) {
  for (int k = 0; k < 13; ++k) {
    const auto kind = static_cast<RecordKind>(k);
    EXPECT_EQ(record_kind_from_string(to_string(kind)), kind);
  }
  EXPECT_FALSE(record_kind_from_string("Nope").has_value());
}

TEST(RunLog, RoundTripOnGeneratedLogs) {
  std::mt19937_64 rng(23);
  const json world = world_to_json(build_world(load_fixture("trace.scn")));
  for (int i = 0; i < 300; ++i) {
    const auto log = random_log(rng, world);
    const auto doc = export_log(log);
    const auto back = import_log(doc);
    ASSERT_EQ(back, log);
    ASSERT_EQ(export_log(back), doc);
  }
}

TEST(RunLog, ExportIsCanonical) {
  const auto log = rescue_log();
  const auto doc = export_log(log);
  EXPECT_EQ(doc.back(), '\n');
  EXPECT_EQ(doc, json::parse(doc).dump(1) + "\n");
  // no floating point numbers anywhere in the document
  std::function<void(const json&)> walk = [&](const json& j) {
    ASSERT_FALSE(j.is_number_float()) << j.dump();
    if (j.is_structured())
      for (const auto& x : j) walk(x);
  };
  walk(json::parse(doc));
}

TEST(RunLog, FutureVersionRejected) {
  auto j = run_log_to_json(rescue_log());
  j["format_version"] = kRunLogFormatVersion + 1;
  EXPECT_THROW(import_log(j.dump()), VersionMismatch);
}

TEST(RunLog, SyntaxErrorCarriesPosition) {
  try {
    import_log("{\n  \"header\": {\n    \"seed\": 1,,\n  }\n}");
    FAIL();
  } catch (const SyntaxError& e) {
    EXPECT_EQ(e.line(), 3);
    EXPECT_GT(e.column(), 1);
  }
}

TEST(RunLog, SequenceGapIsMalformed) {
  auto log = rescue_log();
  ASSERT_GT(log.records.size(), 5u);
  log.records.erase(log.records.begin() + 3);
  EXPECT_THROW(check_integrity(log), MalformedLog);
  EXPECT_THROW(import_log(export_log(log)), MalformedLog);
  auto backwards = rescue_log();
  backwards.records[4].step = backwards.records.back().step + 1;
  EXPECT_THROW(check_integrity(backwards), MalformedLog);
}

TEST(RunLog, MissingFieldsAreMalformed) {
  auto j = run_log_to_json(rescue_log());
  j.erase("records");
  EXPECT_THROW(run_log_from_json(j), MalformedLog);
  auto k = run_log_to_json(rescue_log());
  k["records"][0]["kind"] = "Teleport";
  EXPECT_THROW(run_log_from_json(k), MalformedLog);
}

TEST(RunLog, ReplayReproducesFinalWorld) {
  for (const char* f : {"rescue.scn", "trace.scn", "two_searchers.scn"}) {
    const auto s = load_fixture(f);
    Engine engine(s, scripted_policies(s));
    engine.run();
    const World replayed = replay_world(engine.log());
    World expect = engine.world();
    EXPECT_EQ(replayed.entities, expect.entities) << f;
    EXPECT_EQ(replayed.agents, expect.agents) << f;
    EXPECT_TRUE(verify_replay(engine.log()).ok) << f;
    // and through the document
    EXPECT_TRUE(verify_replay(import_log(export_log(engine.log()))).ok) << f;
  }
}

TEST(RunLog, TamperedDeltaFailsReplay) {
  auto log = rescue_log();
  // the last move decides where that agent ends up
  for (auto it = log.records.rbegin(); it != log.records.rend(); ++it) {
    auto& r = *it;
    if (r.kind == RecordKind::StateDelta && r.payload["change"]["op"] == "move") {
      r.payload["change"]["to"] = cell_to_json(world_from_json(log.initial_world).agents[0].cell);
      break;
    }
  }
  const auto report = verify_replay(log);
  EXPECT_FALSE(report.ok);
  EXPECT_FALSE(report.message.empty());
}

TEST(RunLog, SaveAndLoad) {
  const auto log = rescue_log();
  const auto path = std::filesystem::temp_directory_path() / "teamsim-runlog-test.json";
  save_log(log, path.string());
  EXPECT_EQ(load_log(path.string()), log);
  std::filesystem::remove(path);
  EXPECT_THROW(load_log("/nonexistent/dir/x.json"), NotFound);
}
