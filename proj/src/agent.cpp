#include "teamsim/agent.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "teamsim/error.hpp"
#include "teamsim/llm.hpp"
#include "teamsim/snapshot.hpp"

namespace teamsim {

using json = nlohmann::json;

std::string EntityFact::attribute(const std::string& key) const {
  auto it = attributes.find(key);
  return it == attributes.end() ? std::string{} : it->second;
}

std::string EntityFact::signature() const {
  std::string s = name + "@" + std::to_string(cell.x) + "," + std::to_string(cell.y);
  for (const auto& [k, v] : attributes) s += "|" + k + "=" + v;
  return s;
}

json fact_to_json(const EntityFact& f) {
  return {{"name", f.name},     {"kind", f.kind},         {"interactive", f.interactive},
          {"blocking", f.blocking}, {"attributes", f.attributes}, {"cell", cell_to_json(f.cell)},
          {"region", f.region}, {"seen_step", f.seen_step}};
}

EntityFact fact_from_json(const json& j) {
  try {
    EntityFact f;
    f.name = j.at("name").get<std::string>();
    f.kind = j.at("kind").get<std::string>();
    f.interactive = j.at("interactive").get<bool>();
    f.blocking = j.at("blocking").get<bool>();
    f.attributes = j.at("attributes").get<std::map<std::string, std::string>>();
    f.cell = cell_from_json(j.at("cell"));
    f.region = j.at("region").get<RegionId>();
    f.seen_step = j.at("seen_step").get<long>();
    return f;
  } catch (const json::exception& e) {
    throw MalformedLog(std::string("bad entity fact: ") + e.what());
  }
}

bool Knowledge::merge(const EntityFact& fact) {
  if (auto g = gone.find(fact.name); g != gone.end() && g->second >= fact.seen_step) return false;
  auto it = entities.find(fact.name);
  if (it == entities.end()) {
    entities.emplace(fact.name, fact);
    return true;
  }
  if (it->second.seen_step > fact.seen_step) return false;
  const bool changed = it->second.signature() != fact.signature();
  it->second = fact;
  return changed;
}

void Knowledge::forget(const std::string& entity, long step) {
  entities.erase(entity);
  auto& g = gone[entity];
  g = std::max(g, step);
}

namespace {

std::vector<Cell> door_cells_of(const Environment& env, RegionId region) {
  std::vector<Cell> cells;
  auto it = env.adjacency.edges.find(region);
  if (it == env.adjacency.edges.end()) return cells;
  for (const auto& [other, cell] : it->second) cells.push_back(cell);
  return cells;
}

}  // namespace

Observation build_observation(const World& world, const AgentState& agent, long max_steps, const std::string& goal) {
  const AgentBody* body = world.agent(agent.name());
  if (!body) throw UnknownAgent("unknown agent '" + agent.name() + "'");

  Observation obs;
  obs.agent = agent.name();
  obs.cell = body->cell;
  obs.region = world.region_at(body->cell);
  obs.region_name = obs.region == kNoRegion ? std::string{} : world.region_name(obs.region);
  obs.carrying = body->carrying;
  if (body->carrying) {
    if (const auto* e = world.entity(*body->carrying)) obs.carrying_kind = e->kind;
  }
  obs.step = world.step;
  obs.remaining = std::max(0L, max_steps - world.step);
  obs.goal = goal;
  obs.env = world.env;
  obs.blocked = world.blocked_mask();
  obs.last_result = agent.last_result;
  obs.messages.assign(agent.pending_messages.begin(), agent.pending_messages.end());
  obs.invitations.assign(agent.invitations.begin(), agent.invitations.end());

  const auto doors = door_cells_of(*world.env, obs.region);
  for (const auto& e : world.entities) {
    if (!e.lying()) continue;
    const RegionId r = world.region_at(*e.cell);
    const bool on_door = std::find(doors.begin(), doors.end(), *e.cell) != doors.end();
    if (r != obs.region && !on_door) continue;
    obs.entities.push_back({e.name, e.kind, e.interactive, e.blocking, e.attributes, *e.cell, r});
  }
  std::sort(obs.entities.begin(), obs.entities.end(),
            [](const VisibleEntity& a, const VisibleEntity& b) { return a.name < b.name; });

  for (const auto& other : world.agents) {
    if (other.name == agent.name()) continue;
    if (world.region_at(other.cell) == obs.region) obs.agents.push_back({other.name, other.cell, other.carrying});
  }
  return obs;
}

bool absorb_observation(Knowledge& k, const Observation& obs) {
  bool changed = k.visited.insert(obs.region).second;
  std::set<std::string> seen;
  for (const auto& v : obs.entities) {
    seen.insert(v.name);
    changed |= k.merge({v.name, v.kind, v.interactive, v.blocking, v.attributes, v.cell, v.region, obs.step});
  }
  std::vector<Cell> doors;
  if (obs.env) doors = door_cells_of(*obs.env, obs.region);
  std::vector<std::string> missing;
  for (const auto& [name, fact] : k.entities) {
    if (seen.count(name)) continue;
    const bool in_view =
        fact.region == obs.region || std::find(doors.begin(), doors.end(), fact.cell) != doors.end();
    if (in_view || (obs.carrying && *obs.carrying == name)) missing.push_back(name);
  }
  for (const auto& name : missing) k.forget(name, obs.step);
  return changed || !missing.empty();
}

// --- actions --------------------------------------------------------------

std::string action_name(const ActionPayload& a) {
  struct V {
    std::string operator()(const MoveTo&) const { return "move_to"; }
    std::string operator()(const PickUp&) const { return "pick_up"; }
    std::string operator()(const PutDown&) const { return "put_down"; }
    std::string operator()(const UseOn&) const { return "use_on"; }
    std::string operator()(const IdleFor&) const { return "idle"; }
  };
  return std::visit(V{}, a);
}

json action_to_json(const ActionPayload& a) {
  json j = {{"type", action_name(a)}};
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, MoveTo>) {
          json path = json::array();
          for (auto c : x.path) path.push_back(cell_to_json(c));
          j["path"] = path;
        } else if constexpr (std::is_same_v<T, PickUp> || std::is_same_v<T, PutDown>) {
          j["entity"] = x.entity;
        } else if constexpr (std::is_same_v<T, UseOn>) {
          j["entity"] = x.entity;
          j["verb"] = x.verb;
        } else {
          j["steps"] = x.steps;
        }
      },
      a);
  return j;
}

ActionPayload action_from_json(const json& j) {
  try {
    const auto type = j.at("type").get<std::string>();
    if (type == "move_to") {
      MoveTo m;
      for (const auto& c : j.at("path")) m.path.push_back(cell_from_json(c));
      return m;
    }
    if (type == "pick_up") return PickUp{j.at("entity").get<std::string>()};
    if (type == "put_down") return PutDown{j.at("entity").get<std::string>()};
    if (type == "use_on") return UseOn{j.at("entity").get<std::string>(), j.at("verb").get<std::string>()};
    if (type == "idle") return IdleFor{j.at("steps").get<long>()};
    throw MalformedLog("unknown action type '" + type + "'");
  } catch (const json::exception& e) {
    throw MalformedLog(std::string("bad action: ") + e.what());
  }
}

Decision act(ActionPayload a, std::string rationale) { return {Act{std::move(a)}, std::move(rationale)}; }

Decision idle(long duration, std::string rationale) { return {Idle{duration}, std::move(rationale)}; }

Decision communicate(const AgentState& self, std::vector<std::string> targets, std::string opening,
                     std::vector<EntityFact> facts, std::string rationale) {
  if (targets.empty()) throw NoTargets("conversation needs at least one target");
  for (const auto& t : targets) {
    if (t == self.name()) throw UnknownAgent("agent cannot address itself");
    const auto& mates = self.knowledge.teammates;
    if (std::none_of(mates.begin(), mates.end(), [&](const Teammate& m) { return m.name == t; })) {
      throw UnknownAgent("unknown target '" + t + "'");
    }
  }
  return {Communicate{std::move(targets), std::move(opening), std::move(facts)}, std::move(rationale)};
}

json decision_to_json(const Decision& d) {
  json j;
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Act>) {
          j = {{"type", "act"}, {"action", action_to_json(x.action)}};
        } else if constexpr (std::is_same_v<T, Communicate>) {
          json facts = json::array();
          for (const auto& f : x.facts) facts.push_back(fact_to_json(f));
          j = {{"type", "communicate"}, {"targets", x.targets}, {"opening", x.opening}, {"facts", facts}};
        } else {
          j = {{"type", "idle"}, {"duration", x.duration}};
        }
      },
      d.choice);
  return j;
}

// --- seeding --------------------------------------------------------------

std::string role_duty(const std::string& role) {
  std::string r;
  for (char c : role) r += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (r == "medic") return "assess and stabilize any victim marked critical before anyone moves them";
  if (r == "transporter") return "carry victims to safety, one at a time, once they are safe to move";
  if (r == "engineer") return "clear obstacles that block the way for the team";
  if (r == "searcher") return "search every room and report what I find";
  return {};
}

AgentState make_agent_state(const AgentProfileSpec& profile, int index, std::shared_ptr<const Embedder> embedder) {
  AgentState a{profile, index, {}, std::nullopt, MemoryStore(std::move(embedder)), {}, {}, std::nullopt, {}};
  return a;
}

namespace {

std::string join(const std::vector<std::string>& xs, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? sep : "") + xs[i];
  return out;
}

}  // namespace

void seed_knowledge(AgentState& agent, const Scenario& scenario) {
  const auto& p = agent.profile;
  std::string identity = "I am " + p.name + ", the " + p.role + ".";
  if (!p.skills.empty()) identity += " My skills: " + join(p.skills, ", ") + ".";
  agent.memory.add(0, identity, MemoryKind::Seed);

  if (auto duty = role_duty(p.role); !duty.empty()) {
    agent.memory.add(0, "As " + p.role + " my duty is to " + duty + ".", MemoryKind::Seed);
  }
  agent.memory.add(0, "Team goal: " + scenario.goal.statement, MemoryKind::Seed);

  agent.knowledge.teammates.clear();
  for (const auto& m : scenario.members) {
    if (m.name == p.name) continue;
    agent.knowledge.teammates.push_back({m.name, m.role, m.skills});
    agent.memory.add(0, "Teammate " + m.name + " is the " + m.role + ".", MemoryKind::Seed);
  }

  const auto names = region_names(scenario.env_spec);
  const std::string start = scenario.start_region.value_or(names.empty() ? std::string{} : names.front());
  if (!start.empty()) agent.memory.add(0, "We start in " + start + ".", MemoryKind::Seed);

  for (const auto& entry : p.backstory) agent.memory.add(0, entry, MemoryKind::Seed);
}

// --- interviews -----------------------------------------------------------

std::string render_memories(const std::vector<MemoryRecord>& records) {
  std::string out;
  for (const auto& r : records) out += "[m" + std::to_string(r.id) + "] " + r.text + "\n";
  return out;
}

Answer interview(AgentState& agent, const std::string& question, llm::CompletionBackend& backend, long step,
                 std::size_t k) {
  const auto memories = agent.memory.retrieve(question, k);
  llm::CompletionRequest req;
  req.tag = llm::Purpose::Interview;
  req.system = "You are " + agent.name() + ", the " + agent.profile.role +
               " of a simulated team. Answer in character from the listed memories only and cite them as m<id>.";
  req.user = "[profile]\nname: " + agent.name() + "\nrole: " + agent.profile.role + "\n[memories]\n" +
             render_memories(memories) + "[question]\nquestion: " + question + "\n";

  Answer answer;
  try {
    answer.text = backend.complete(req).text;
  } catch (const Error& e) {
    throw PolicyFailure(std::string("interview backend failed: ") + e.what());
  }
  for (const auto& m : memories) answer.retrieved.push_back(m.id);
  for (long id : llm::cited_memory_ids(answer.text)) {
    if (std::find(answer.retrieved.begin(), answer.retrieved.end(), id) != answer.retrieved.end()) {
      answer.cited.push_back(id);
    }
  }
  agent.memory.add(step, "Q: " + question + " A: " + answer.text, MemoryKind::Message);
  return answer;
}

}  // namespace teamsim
