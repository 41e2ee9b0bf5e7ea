// Prints one PASS/FAIL line per acceptance criterion; exit 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "../tests/support.hpp"
#include "teamsim/engine.hpp"
#include "teamsim/event_queue.hpp"
#include "teamsim/llm.hpp"
#include "teamsim/memory.hpp"
#include "teamsim/runlog.hpp"
#include "teamsim/snapshot.hpp"
#include "teamsim/survey.hpp"
#include "teamsim/world.hpp"

using namespace teamsim;
using Clock = std::chrono::steady_clock;

namespace {

// tolerances
constexpr double kEnvBudgetSeconds = 10.0;
constexpr double kRescueBudgetSeconds = 5.0;
constexpr long kRescueCap = 2000;
constexpr double kTieEpsilon = 1e-12;

int failures = 0;

void report(const char* name, bool ok, const std::string& detail) {
  std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
  std::fflush(stdout);
  failures += !ok;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

void environment_generation() {
  const auto t0 = Clock::now();
  long cases = 0, bad = 0;
  std::string first;
  for (int size : {16, 32, 64}) {
    for (int n : {2, 4, 8, 16}) {
      for (std::uint64_t seed = 0; seed < 100; ++seed) {
        ++cases;
        std::string problem;
        try {
          problem = testing::environment_problem(generate_environment(EnvSpec{size, size, n, {}}, seed), n);
        } catch (const std::exception& e) {
          problem = e.what();
        }
        if (!problem.empty()) {
          ++bad;
          if (first.empty()) first = std::to_string(size) + "/" + std::to_string(n) + "/" + std::to_string(seed) + " " + problem;
        }
      }
    }
  }
  const double t = seconds_since(t0);
  report("environment-generation", bad == 0 && t < kEnvBudgetSeconds,
         std::to_string(cases - bad) + "/" + std::to_string(cases) + " valid in " + fmt("%.2f s", t) +
             (first.empty() ? "" : ", first: " + first));
}

// Array-backed breadth-first distance, written against the grid accessors.
int bfs_distance(const TraversabilityGrid& g, Cell from, Cell to) {
  const int w = g.width(), h = g.height();
  std::vector<int> dist(static_cast<std::size_t>(w) * h, -1);
  std::deque<Cell> q{from};
  dist[static_cast<std::size_t>(from.y) * w + from.x] = 0;
  while (!q.empty()) {
    const Cell c = q.front();
    q.pop_front();
    const int d = dist[static_cast<std::size_t>(c.y) * w + c.x];
    if (c == to) return d;
    for (const Cell n : {Cell{c.x + 1, c.y}, Cell{c.x - 1, c.y}, Cell{c.x, c.y + 1}, Cell{c.x, c.y - 1}}) {
      if (n.x < 0 || n.y < 0 || n.x >= w || n.y >= h || g.at(n) != CellState::Open) continue;
      auto& slot = dist[static_cast<std::size_t>(n.y) * w + n.x];
      if (slot >= 0) continue;
      slot = d + 1;
      q.push_back(n);
    }
  }
  return -1;
}

void pathfinding() {
  std::mt19937_64 rng(4242);
  long pairs = 0, mismatches = 0;
  for (int map = 0; map < 100; ++map) {
    const int size = (int[]){16, 32, 64}[map % 3];
    const int regions = 1 + static_cast<int>(rng() % 16);
    const auto env = generate_environment(EnvSpec{size, size, regions, {}}, rng());
    const auto open = env.grid.open_cells();
    for (int k = 0; k < 1000; ++k) {
      const Cell a = open[rng() % open.size()];
      const Cell b = open[rng() % open.size()];
      ++pairs;
      const auto path = shortest_path(env.grid, a, b);
      const int expect = bfs_distance(env.grid, a, b);
      bool ok = path && static_cast<int>(path->size()) - 1 == expect && path->front() == a && path->back() == b;
      for (std::size_t i = 1; ok && i < path->size(); ++i) {
        ok = manhattan((*path)[i - 1], (*path)[i]) == 1 && env.grid.open((*path)[i]);
      }
      mismatches += !ok;
    }
  }
  report("pathfinding-oracle", mismatches == 0,
         std::to_string(mismatches) + " mismatches over " + std::to_string(pairs) + " pairs on 100 maps");
}

Event queued(long id, long start, long duration) {
  Event e;
  e.id = id;
  e.start_step = start;
  e.duration_steps = duration;
  e.participants = {"a"};
  return e;
}

void queue_ordering() {
  std::mt19937_64 rng(99);
  long violations = 0, pops = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    EventQueue q;
    std::vector<std::pair<long, long>> pending;  // (due, seq) oracle
    long seq = 0, now = 0, last_due = -1, last_seq = -1;
    auto check = [&](const QueuedEvent& e) {
      ++pops;
      const auto best = std::min_element(pending.begin(), pending.end());
      violations += e.due < last_due || (e.due == last_due && e.seq <= last_seq) || best == pending.end() ||
                    *best != std::make_pair(e.due, e.seq);
      if (best != pending.end()) pending.erase(best);
      last_due = e.due;
      last_seq = e.seq;
      now = std::max(now, e.due);
    };
    const int ops = 5 + static_cast<int>(rng() % 40);
    for (int op = 0; op < ops; ++op) {
      if (rng() % 3 != 0) {
        const long due = now + static_cast<long>(rng() % 6);
        const long s = seq++;
        q.push(due, s, queued(s, now, std::max(1L, due - now)));
        pending.emplace_back(due, s);
      } else if (auto e = q.pop()) {
        check(*e);
      }
    }
    while (auto e = q.pop()) check(*e);
    violations += !pending.empty();
  }
  report("queue-ordering", violations == 0,
         std::to_string(violations) + " violations over 10000 interleavings, " + std::to_string(pops) + " pops");
}

void determinism(const Scenario& rescue) {
  const auto a = run_scenario(rescue, scripted_policies(rescue));
  const auto b = run_scenario(rescue, scripted_policies(rescue));
  const auto doc_a = export_log(a.log), doc_b = export_log(b.log);
  const auto replay = verify_replay(import_log(doc_a));
  report("determinism-replay", doc_a == doc_b && replay.ok,
         std::string(doc_a == doc_b ? "identical" : "different") + " logs (" + std::to_string(doc_a.size()) +
             " bytes), " + replay.message + " over " + std::to_string(replay.deltas) + " deltas");
}

void reference_rescue(const Scenario& s) {
  int victims = 0, critical = 0;
  std::set<std::string> roles;
  for (const auto& m : s.members) roles.insert(m.role);
  for (const auto& e : s.entities) {
    victims += e.kind == "victim";
    critical += e.attributes.count("severity") && e.attributes.at("severity") == "critical";
  }
  const bool shape = roles.size() == 3 && victims == 5 && critical >= 1 && s.env_spec.num_regions == 8 &&
                     s.env_spec.width == 32 && s.env_spec.height == 32;

  const auto t0 = Clock::now();
  const auto r = run_scenario(s, scripted_policies(s));
  const double t = seconds_since(t0);

  const World initial = world_from_json(r.log.initial_world);
  const RegionId hospital = initial.tree().find("Hospital")->id;
  auto role_of = [&](const std::string& name) {
    for (const auto& m : s.members)
      if (m.name == name) return m.role;
    return std::string();
  };
  int precedence_ok = 0;
  for (const auto& e : s.entities) {
    if (!(e.attributes.count("severity") && e.attributes.at("severity") == "critical")) continue;
    std::optional<long> stabilized, delivered;
    std::string stabilizer;
    World w = initial;
    for (const auto& rec : r.log.records) {
      if (rec.kind != RecordKind::StateDelta) continue;
      const auto change = change_from_json(rec.payload.at("change"));
      apply_world_change(w, change);
      if (const auto* a = std::get_if<SetAttribute>(&change); a && a->entity == e.name && a->key == "stabilized" && !stabilized) {
        stabilized = rec.step;
        stabilizer = rec.agent;
      }
      if (const auto* p = std::get_if<PutDownEntity>(&change); p && p->entity == e.name && !delivered &&
                                                                 w.region_at(*w.entity(e.name)->cell) == hospital) {
        delivered = rec.step;
      }
    }
    precedence_ok += stabilized && delivered && *stabilized < *delivered && role_of(stabilizer) == "Medic";
  }
  const bool success = r.outcome.kind == Outcome::Kind::Success && r.outcome.step < kRescueCap;
  report("reference-rescue", shape && success && precedence_ok == critical && t < kRescueBudgetSeconds,
         "outcome " + to_string(r.outcome.kind) + " at step " + std::to_string(r.outcome.step) + ", medic first for " +
             std::to_string(precedence_ok) + "/" + std::to_string(critical) + " critical, " + fmt("%.3f s", t));
}

void memory_retrieval() {
  static const char* words[] = {"victim", "kitchen", "rubble", "hospital", "medic",  "carry",  "door", "library",
                                "stable", "critical", "gym",    "fire",     "clear",  "route",  "team", "found",
                                "stairs", "smoke",    "blocked", "north",   "radio",  "leader", "help", "wall"};
  std::mt19937_64 rng(31337);
  auto sentence = [&] {
    std::string s;
    const int n = 1 + static_cast<int>(rng() % 7);
    for (int i = 0; i < n; ++i) s += std::string(i ? " " : "") + words[rng() % 24];
    return s;
  };
  long queries = 0, mismatches = 0;
  for (int store_no = 0; store_no < 200; ++store_no) {
    MemoryStore store;
    const int n = static_cast<int>(rng() % 1001);
    for (int i = 0; i < n; ++i) store.add(i, sentence(), MemoryKind::Observation);
    for (int qi = 0; qi < 5; ++qi) {
      const auto text = sentence();
      const std::size_t k = rng() % 16;
      const auto q = store.embedder().embed(text);
      std::vector<std::pair<long double, long>> scored;
      for (const auto& rec : store.records()) {
        long double dot = 0, nq = 0, nr = 0;
        for (std::size_t i = 0; i < q.size(); ++i) {
          dot += static_cast<long double>(q[i]) * rec.embedding[i];
          nq += static_cast<long double>(q[i]) * q[i];
          nr += static_cast<long double>(rec.embedding[i]) * rec.embedding[i];
        }
        scored.emplace_back(nq == 0 || nr == 0 ? 0.0L : dot / std::sqrt(nq * nr), rec.id);
      }
      std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (std::fabs(static_cast<double>(a.first - b.first)) > kTieEpsilon) return a.first > b.first;
        return a.second < b.second;
      });
      std::vector<long> want, got;
      for (std::size_t i = 0; i < std::min(k, scored.size()); ++i) want.push_back(scored[i].second);
      for (const auto& rec : store.retrieve(text, k)) got.push_back(rec.id);
      ++queries;
      mismatches += want != got;
    }
  }
  report("memory-retrieval", mismatches == 0,
         std::to_string(mismatches) + " mismatches over " + std::to_string(queries) + " queries on 200 stores");
}

// Never-ending talkers: always open conversations, never end a turn.
struct Talker final : DecisionPolicy {
  std::vector<std::string> names;
  std::mt19937_64* rng;
  Decision decide(const Observation&, const AgentState& a) override {
    std::vector<std::string> others;
    for (const auto& n : names)
      if (n != a.name()) others.push_back(n);
    return communicate(a, others, "listen to me " + std::to_string((*rng)() % 3));
  }
  bool listen(const Observation&, const AgentState&, const Invitation&) override { return true; }
  Utterance speak(const Conversation& c, const Observation&, const AgentState&) override {
    return Utterance{c.transcript.back().speaker + " again " + std::to_string((*rng)() % 4), {}, false};
  }
  std::string id() const override { return "talker"; }
};

struct Stubborn final : SpeakerSelector {
  std::optional<std::string> choose(const Conversation& c) override { return c.transcript.back().speaker; }
};

void conversation_termination() {
  std::mt19937_64 rng(5);
  long closed = 0, violations = 0;
  for (int trial = 0; trial < 60; ++trial) {
    Scenario s = testing::load_fixture("minimal.scn");
    s.max_steps = 200;
    s.members.clear();
    for (int i = 0; i < 2 + trial % 4; ++i) {
      AgentProfileSpec m;
      m.name = std::string("T") + static_cast<char>('0' + i);
      m.role = "Searcher";
      m.skills = {"carry"};
      s.members.push_back(m);
    }
    auto talker = std::make_shared<Talker>();
    for (const auto& m : s.members) talker->names.push_back(m.name);
    talker->rng = &rng;
    EngineOptions o;
    if (trial % 2) o.speaker_selector = std::make_shared<Stubborn>();
    Engine engine(s, uniform_policies(s, talker), o);
    engine.run();
    for (const auto& [id, c] : engine.conversations()) {
      for (std::size_t i = 1; i < c.transcript.size(); ++i) violations += c.transcript[i].speaker == c.transcript[i - 1].speaker;
      if (c.state != ConversationState::Closed) continue;
      ++closed;
      violations += c.transcript.size() > static_cast<std::size_t>(kDefaultMaxTurns);
    }
    for (const auto& rec : engine.log().records) {
      if (rec.kind == RecordKind::ConversationClosed) violations += rec.payload.at("turns").get<long>() > kDefaultMaxTurns;
    }
  }
  report("conversation-termination", violations == 0 && closed > 0,
         std::to_string(violations) + " violations over " + std::to_string(closed) + " closed conversations");
}

void survey_bounds(const Scenario& rescue) {
  std::vector<AgentState> agents;
  for (std::size_t i = 0; i < rescue.members.size(); ++i) {
    agents.push_back(make_agent_state(rescue.members[i], static_cast<int>(i)));
    seed_knowledge(agents.back(), rescue);
  }
  std::mt19937_64 rng(1010);
  std::string reply;
  llm::FunctionBackend backend([&](const llm::CompletionRequest&) { return reply; });
  const auto items = default_survey_items();
  long stored = 0, clamps = 0, unparseable = 0, violations = 0;
  for (int i = 0; i < 10000; ++i) {
    switch (rng() % 5) {
      case 0:
        reply = std::to_string(static_cast<long>(rng() % 61) - 30);
        break;
      case 1:
        reply = "about " + std::to_string(rng() % 100000) + " I think";
        break;
      case 2:
        reply = std::to_string(rng() % 11) + " because";
        break;
      case 3:
        reply = "no idea";
        break;
      default:
        reply = std::to_string(rng()) + "9";
    }
    const auto raw = parse_survey_value(reply);
    const auto r = administer_survey({&agents[i % agents.size()]}, {items[i % items.size()]}, backend);
    if (!raw) {
      ++unparseable;
      violations += !r.responses.empty() || r.flags.size() != 1;
      continue;
    }
    const bool outside = *raw < 0 || *raw > 10;
    if (r.responses.size() != 1) {
      ++violations;
      continue;
    }
    const auto& v = r.responses[0];
    ++stored;
    clamps += outside;
    violations += v.value < 0 || v.value > 10 || v.clamped != outside || r.flags.size() != (outside ? 1u : 0u) ||
                  (!outside && v.value != *raw);
  }
  report("survey-bounds", violations == 0,
         std::to_string(violations) + " violations, " + std::to_string(stored) + " stored, " + std::to_string(clamps) +
             " clamped and flagged, " +
             std::to_string(unparseable) + " unparseable");
}

void strict_replay(const Scenario& rescue) {
  EngineOptions o;
  o.max_steps = 400;
  auto recorder = std::make_shared<llm::RecordingBackend>(std::make_shared<llm::TemplateBackend>());
  Engine recorded(rescue, uniform_policies(rescue, std::make_shared<LlmPolicy>(recorder)), o);
  recorded.run();
  recorded.administer_survey(*recorder, default_survey_items());
  const auto cassette = llm::Cassette::from_json(recorder->cassette().to_json());

  // no fallback: any request the cassette cannot answer throws
  auto replay = std::make_shared<llm::ReplayBackend>(cassette);
  std::string outcome;
  bool same = false;
  try {
    Engine replayed(rescue, uniform_policies(rescue, std::make_shared<LlmPolicy>(replay)), o);
    replayed.run();
    replayed.administer_survey(*replay, default_survey_items());
    same = export_log(replayed.log()) == export_log(recorded.log());
    outcome = same ? "identical run log" : "run logs differ";
  } catch (const std::exception& e) {
    outcome = std::string("replay failed: ") + e.what();
  }
  report("strict-replay", same && replay->remaining() == 0,
         outcome + ", " + std::to_string(cassette.entries().size()) + " recorded completions, " +
             std::to_string(replay->remaining()) + " unused");
}

}  // namespace

int main() {
  const Scenario rescue = testing::load_fixture("rescue.scn");
  environment_generation();
  pathfinding();
  queue_ordering();
  determinism(rescue);
  reference_rescue(rescue);
  memory_retrieval();
  conversation_termination();
  survey_bounds(rescue);
  strict_replay(rescue);
  return failures == 0 ? 0 : 1;
}
