#include "teamsim/policy.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <sstream>

#include "teamsim/error.hpp"
#include "teamsim/llm.hpp"

namespace teamsim {

namespace {

const Delivery* delivery_for(const std::string& name, const std::string& kind, const std::vector<Delivery>& ds) {
  for (const auto& d : ds) {
    if (!d.name.empty() && d.name == name) return &d;
  }
  for (const auto& d : ds) {
    if (d.name.empty() && !d.kind.empty() && d.kind == kind) return &d;
  }
  return nullptr;
}

std::vector<Cell> leg(std::vector<Cell> path) {
  if (path.size() > static_cast<std::size_t>(kMaxLeg) + 1) path.resize(kMaxLeg + 1);
  return path;
}

std::string region_label(const Environment& env, RegionId r) {
  return r >= 0 && r < static_cast<RegionId>(env.tree.regions.size()) ? env.tree.regions[r].name : "?";
}

std::string describe_fact(const EntityFact& f, const Environment& env) {
  std::string s = f.name + " (" + f.kind;
  for (const auto& [k, v] : f.attributes) s += ", " + k + "=" + v;
  return s + ") in " + region_label(env, f.region) + " at " + to_string(f.cell);
}

std::string describe_facts(const std::vector<EntityFact>& facts, const Environment& env) {
  std::string s;
  for (const auto& f : facts) s += (s.empty() ? "" : "; ") + describe_fact(f, env);
  return s;
}

std::vector<std::string> teammate_names(const AgentState& agent) {
  std::vector<std::string> names;
  for (const auto& t : agent.knowledge.teammates) names.push_back(t.name);
  return names;
}

// Distance to the nearest cell from which `target` is in reach, or -1.
int reach_distance(const TraversabilityGrid& grid, const std::vector<int>& dist, Cell target, Cell* stand) {
  int best = -1;
  const Cell candidates[] = {target, {target.x, target.y - 1}, {target.x + 1, target.y},
                             {target.x, target.y + 1}, {target.x - 1, target.y}};
  for (const auto& c : candidates) {
    if (!grid.in_bounds(c)) continue;
    const int d = dist[grid.index(c)];
    if (d >= 0 && (best < 0 || d < best)) {
      best = d;
      if (stand) *stand = c;
    }
  }
  return best;
}

}  // namespace

bool needs_stabilizing(const EntityFact& f) {
  return f.interactive && f.attribute("severity") == "critical" && f.attribute("stabilized") != "true";
}

bool deliverable_to(const EntityFact& f, const std::vector<Delivery>& deliveries, const Environment& env,
                    std::string* region) {
  if (f.blocking || !f.interactive) return false;
  const Delivery* d = delivery_for(f.name, f.kind, deliveries);
  if (!d || region_label(env, f.region) == d->region) return false;
  if (region) *region = d->region;
  return true;
}

std::vector<EntityFact> unshared_facts(const AgentState& agent, const std::vector<Delivery>& deliveries) {
  std::vector<EntityFact> out;
  for (const auto& [name, f] : agent.knowledge.entities) {
    if (agent.knowledge.offered.count(f.signature())) continue;
    const bool relevant = needs_stabilizing(f) || (f.blocking && f.interactive) ||
                          (!f.blocking && f.interactive && delivery_for(f.name, f.kind, deliveries));
    if (relevant) out.push_back(f);
  }
  return out;
}

// --- scripted policy ------------------------------------------------------

Decision ScriptedPolicy::decide(const Observation& obs, const AgentState& agent) {
  const auto& env = *obs.env;
  const auto& grid = env.grid;
  const auto& k = agent.knowledge;
  const auto& skills = agent.profile;
  const auto dist = distance_field(grid, obs.cell, &obs.blocked);
  auto dist_to = [&](Cell c) { return grid.in_bounds(c) ? dist[grid.index(c)] : -1; };
  auto move_along = [&](Cell to, const std::string& why) {
    auto path = shortest_path(grid, obs.cell, to, &obs.blocked);
    return act(MoveTo{leg(std::move(*path))}, why);
  };

  // 1. share
  if (agent.profile.trust_level != TrustLevel::Low && !k.teammates.empty()) {
    auto facts = unshared_facts(agent, deliveries_);
    if (!facts.empty()) {
      auto text = "Update from " + agent.name() + ": " + describe_facts(facts, env) + ".";
      return communicate(agent, teammate_names(agent), text, facts, "share new findings");
    }
  }

  // 2. deliver what is carried
  if (obs.carrying) {
    const Delivery* d = delivery_for(*obs.carrying, obs.carrying_kind, deliveries_);
    if (!d || obs.region_name == d->region) {
      return act(PutDown{*obs.carrying}, d ? "deliver " + *obs.carrying + " to " + d->region : "set down load");
    }
    const Region* target = env.tree.find(d->region);
    if (!target) return act(PutDown{*obs.carrying}, "destination unknown");
    try {
      auto plan = directions_to_region(grid, env.adjacency, obs.cell, target->id, &obs.blocked);
      return act(MoveTo{leg(std::move(plan.path))}, "carry " + *obs.carrying + " to " + d->region);
    } catch (const NoRoute&) {
      return idle(1, "no route to " + d->region);
    }
  }

  // Nearest known fact matching `want`, by distance to `stand`-able cells.
  auto nearest = [&](auto want, bool exact, Cell* stand) -> const EntityFact* {
    const EntityFact* best = nullptr;
    int best_d = std::numeric_limits<int>::max();
    for (const auto& [name, f] : k.entities) {
      if (!want(f)) continue;
      Cell s = f.cell;
      const int d = exact ? dist_to(f.cell) : reach_distance(grid, dist, f.cell, &s);
      if (d < 0 || d >= best_d) continue;
      best = &f;
      best_d = d;
      if (stand) *stand = s;
    }
    return best;
  };

  // 3. stabilize
  if (skills.has_skill("stabilize")) {
    Cell stand;
    if (const auto* f = nearest(needs_stabilizing, false, &stand)) {
      if (manhattan(obs.cell, f->cell) <= 1) return act(UseOn{f->name, "stabilize"}, "stabilize " + f->name);
      return move_along(stand, "reach " + f->name + " to stabilize");
    }
  }

  // 4. clear obstacles
  if (skills.has_skill("clear")) {
    Cell stand;
    auto obstacle = [](const EntityFact& f) { return f.blocking && f.interactive; };
    if (const auto* f = nearest(obstacle, false, &stand)) {
      if (manhattan(obs.cell, f->cell) <= 1) return act(UseOn{f->name, "clear"}, "clear " + f->name);
      return move_along(stand, "reach " + f->name + " to clear it");
    }
  }

  // 5. fetch
  const bool carrier = skills.has_skill("carry");
  if (carrier) {
    auto fetchable = [&](const EntityFact& f) { return !needs_stabilizing(f) && deliverable_to(f, deliveries_, env); };
    if (const auto* f = nearest(fetchable, true, nullptr)) {
      if (obs.cell == f->cell) return act(PickUp{f->name}, "pick up " + f->name);
      return move_along(f->cell, "fetch " + f->name);
    }
  }

  // 6. explore
  {
    std::vector<int> region_dist(env.tree.regions.size(), -1);
    for (std::size_t i = 0; i < dist.size(); ++i) {
      if (dist[i] < 0) continue;
      const RegionId r = grid.region_of(grid.cell_at(i));
      if (r == kNoRegion) continue;
      auto& rd = region_dist[static_cast<std::size_t>(r)];
      if (rd < 0 || dist[i] < rd) rd = dist[i];
    }
    RegionId best = kNoRegion;
    for (RegionId r = 0; r < static_cast<RegionId>(region_dist.size()); ++r) {
      if (k.visited.count(r) || region_dist[r] < 0) continue;
      if (best == kNoRegion || region_dist[r] < region_dist[best]) best = r;
    }
    if (best != kNoRegion) {
      auto plan = directions_to_region(grid, env.adjacency, obs.cell, best, &obs.blocked);
      return act(MoveTo{leg(std::move(plan.path))}, "explore " + env.tree.regions[best].name);
    }
  }

  // 7. wait for the medic
  if (carrier) {
    auto pending = [&](const EntityFact& f) { return needs_stabilizing(f) && deliverable_to(f, deliveries_, env); };
    if (const auto* f = nearest(pending, true, nullptr)) {
      if (obs.cell == f->cell) return idle(1, "wait for " + f->name + " to be stabilized");
      return move_along(f->cell, "wait beside " + f->name);
    }
  }

  // 8. ask
  if (agent.profile.trust_level == TrustLevel::Low && !k.teammates.empty() &&
      obs.step - k.last_initiated >= kAskCooldown) {
    return communicate(agent, teammate_names(agent), agent.name() + " here. Has anyone found anything?", {},
                       "ask for news");
  }

  return idle(1, "nothing to do");
}

bool ScriptedPolicy::listen(const Observation& obs, const AgentState&, const Invitation&) {
  return !obs.carrying.has_value();
}

Utterance ScriptedPolicy::speak(const Conversation&, const Observation& obs, const AgentState& agent) {
  auto facts = unshared_facts(agent, deliveries_);
  if (facts.empty()) return {"Nothing new from " + agent.name() + ".", {}, true};
  return {agent.name() + " reporting: " + describe_facts(facts, *obs.env) + ".", std::move(facts), false};
}

// --- prompts --------------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

const std::vector<std::string>& known_verbs() {
  static const std::vector<std::string> verbs{"stabilize", "clear"};
  return verbs;
}

}  // namespace

std::vector<std::string> allowed_actions(const Observation& obs, const AgentState& agent) {
  std::vector<std::string> lines;
  const auto& env = *obs.env;
  for (const auto& r : env.tree.regions) {
    if (r.id != obs.region) lines.push_back("ACTION MOVE_TO " + r.name);
  }
  for (const auto& e : obs.entities) {
    if (manhattan(obs.cell, e.cell) > 1 || !e.interactive) continue;
    if (!obs.carrying && !e.blocking) lines.push_back("ACTION PICK_UP " + e.name);
    for (const auto& verb : known_verbs()) {
      if (agent.profile.has_skill(verb)) lines.push_back("ACTION USE_ON " + e.name + " " + verb);
    }
  }
  if (obs.carrying) lines.push_back("ACTION PUT_DOWN " + *obs.carrying);
  if (!agent.knowledge.teammates.empty()) {
    std::string names;
    for (const auto& t : agent.knowledge.teammates) names += (names.empty() ? "" : ",") + t.name;
    lines.push_back("COMMUNICATE " + names + " :: " + agent.name() + " here, in " + obs.region_name + ".");
  }
  lines.push_back("IDLE 1");
  return lines;
}

std::string decision_system_text(const AgentState& agent) {
  return "You are " + agent.name() + ", the " + agent.profile.role +
         " in a simulated team. Choose your next move. Reply in the exact grammar described under [reply format].";
}

std::string decision_prompt(const Observation& obs, const AgentState& agent, const std::vector<MemoryRecord>& memories) {
  const auto& p = agent.profile;
  std::ostringstream out;
  out << "[profile]\n"
      << "name: " << p.name << "\nrole: " << p.role << "\n";
  out << "skills:";
  for (const auto& s : p.skills) out << " " << s;
  out << "\ntrust: " << to_string(p.trust_level) << "\n";
  if (!p.personality.empty()) {
    out << "personality:";
    for (const auto& [trait, score] : p.personality) out << " " << trait << "=" << fixed2(score);
    out << "\n";
  }
  for (const auto& [key, value] : p.demographics) out << key << ": " << value << "\n";

  out << "[goal]\n" << obs.goal << "\n";

  out << "[observation]\n"
      << "step: " << obs.step << " (" << obs.remaining << " remaining)\n"
      << "location: " << obs.region_name << " " << to_string(obs.cell) << "\n"
      << "carrying: " << (obs.carrying ? *obs.carrying : std::string("nothing")) << "\n";
  out << "entities:\n";
  for (const auto& e : obs.entities) {
    out << "- " << e.name << " " << e.kind << " at " << to_string(e.cell);
    for (const auto& [k2, v] : e.attributes) out << " " << k2 << "=" << v;
    if (!e.interactive) out << " non-interactive";
    out << "\n";
  }
  out << "agents:\n";
  for (const auto& a : obs.agents) out << "- " << a.name << " at " << to_string(a.cell) << "\n";
  if (obs.last_result) {
    out << "last result: " << (obs.last_result->ok ? "ok" : "failed") << ": " << obs.last_result->summary;
    if (!obs.last_result->reason.empty()) out << " (" << obs.last_result->reason << ")";
    out << "\n";
  }
  out << "messages:\n";
  for (const auto& m : obs.messages) out << "- " << (m.from.empty() ? "engine" : m.from) << ": " << m.text << "\n";

  out << "[memories]\n" << render_memories(memories);
  out << "[allowed actions]\n";
  for (const auto& line : allowed_actions(obs, agent)) out << line << "\n";
  out << "[reply format]\n"
      << "One line: ACTION MOVE_TO <region>|<x>,<y> ; ACTION PICK_UP <entity> ; ACTION PUT_DOWN <entity> ; "
         "ACTION USE_ON <entity> <verb> ; COMMUNICATE <name>[,<name>] :: <message> ; IDLE <steps>\n"
      << "Optional second line: RATIONALE: <text>\n";
  return out.str();
}

ParsedReply parse_decision_reply(const std::string& text, const Observation& obs, const AgentState& agent) {
  std::istringstream in(text);
  std::string line;
  std::string head;
  std::string rationale;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    if (line.rfind("RATIONALE:", 0) == 0) {
      rationale = trim(line.substr(10));
    } else if (head.empty()) {
      head = line;
    }
  }
  if (head.empty()) return {std::nullopt, "empty reply"};

  const auto& env = *obs.env;
  auto word_after = [&](const std::string& prefix) -> std::optional<std::string> {
    if (head.rfind(prefix, 0) != 0) return std::nullopt;
    return trim(head.substr(prefix.size()));
  };

  try {
    if (auto rest = word_after("ACTION MOVE_TO ")) {
      int x = 0, y = 0;
      char tail = 0;
      if (std::sscanf(rest->c_str(), "%d,%d%c", &x, &y, &tail) == 2) {
        const Cell to{x, y};
        if (!env.grid.open(to) || obs.blocked[env.grid.index(to)]) return {std::nullopt, "cell " + to_string(to) + " is not open"};
        auto path = shortest_path(env.grid, obs.cell, to, &obs.blocked);
        if (!path) return {std::nullopt, "no path to " + to_string(to)};
        if (path->size() < 2) return {std::nullopt, "already at " + to_string(to)};
        return {act(MoveTo{std::move(*path)}, rationale), {}};
      }
      const Region* r = env.tree.find(*rest);
      if (!r) return {std::nullopt, "unknown region '" + *rest + "'"};
      auto plan = directions_to_region(env.grid, env.adjacency, obs.cell, r->id, &obs.blocked);
      if (plan.empty()) return {std::nullopt, "already in " + r->name};
      return {act(MoveTo{std::move(plan.path)}, rationale), {}};
    }
    if (auto rest = word_after("ACTION PICK_UP ")) return {act(PickUp{*rest}, rationale), {}};
    if (auto rest = word_after("ACTION PUT_DOWN ")) return {act(PutDown{*rest}, rationale), {}};
    if (auto rest = word_after("ACTION USE_ON ")) {
      const auto space = rest->find_last_of(' ');
      if (space == std::string::npos) return {std::nullopt, "USE_ON needs an entity and a verb"};
      return {act(UseOn{trim(rest->substr(0, space)), rest->substr(space + 1)}, rationale), {}};
    }
    if (auto rest = word_after("COMMUNICATE ")) {
      const auto sep = rest->find("::");
      if (sep == std::string::npos) return {std::nullopt, "COMMUNICATE needs '::' before the message"};
      std::vector<std::string> targets;
      std::istringstream names(rest->substr(0, sep));
      std::string name;
      while (std::getline(names, name, ',')) {
        name = trim(name);
        if (!name.empty()) targets.push_back(name);
      }
      return {communicate(agent, targets, trim(rest->substr(sep + 2)), {}, rationale), {}};
    }
    if (auto rest = word_after("IDLE ")) {
      long n = 0;
      char tail = 0;
      if (std::sscanf(rest->c_str(), "%ld%c", &n, &tail) != 1 || n < 1) return {std::nullopt, "IDLE needs a positive step count"};
      return {idle(n, rationale), {}};
    }
    if (head == "IDLE") return {idle(1, rationale), {}};
  } catch (const NoRoute& e) {
    return {std::nullopt, e.what()};
  } catch (const NoTargets& e) {
    return {std::nullopt, e.what()};
  } catch (const UnknownAgent& e) {
    return {std::nullopt, e.what()};
  }
  return {std::nullopt, "unrecognised reply '" + head.substr(0, 80) + "'"};
}

// --- model-backed policy --------------------------------------------------

namespace {

std::string memory_query(const Observation& obs) {
  std::string q = obs.region_name + " " + obs.goal;
  for (const auto& e : obs.entities) q += " " + e.name + " " + e.kind;
  return q;
}

std::string complete_or_fail(llm::CompletionBackend& backend, const llm::CompletionRequest& req) {
  try {
    return backend.complete(req).text;
  } catch (const AdapterError& e) {
    throw PolicyFailure(std::string("model backend failed: ") + e.what());
  }
}

}  // namespace

Decision LlmPolicy::decide(const Observation& obs, const AgentState& agent) {
  const auto memories = agent.memory.retrieve(memory_query(obs), k_);
  llm::CompletionRequest req;
  req.tag = llm::Purpose::Decision;
  req.system = decision_system_text(agent);
  req.user = std::string(kPromptVersion) + "\n" + decision_prompt(obs, agent, memories);

  auto parsed = parse_decision_reply(complete_or_fail(*backend_, req), obs, agent);
  if (parsed.decision) return *parsed.decision;

  req.user += "[error]\n" + parsed.error + "\nReply again using the grammar.\n";
  parsed = parse_decision_reply(complete_or_fail(*backend_, req), obs, agent);
  if (parsed.decision) return *parsed.decision;
  return idle(1, "unparseable reply: " + parsed.error);
}

bool LlmPolicy::listen(const Observation& obs, const AgentState&, const Invitation&) {
  return !obs.carrying.has_value();
}

Utterance LlmPolicy::speak(const Conversation& c, const Observation& obs, const AgentState& agent) {
  llm::CompletionRequest req;
  req.tag = llm::Purpose::Decision;
  req.max_reply_chars = 600;
  req.system = decision_system_text(agent);
  std::ostringstream user;
  user << kPromptVersion << "\n[profile]\nname: " << agent.name() << "\nrole: " << agent.profile.role << "\n"
       << "[goal]\n" << obs.goal << "\n[conversation]\n";
  for (const auto& e : c.transcript) user << e.speaker << ": " << e.text << "\n";
  user << "[memories]\n" << render_memories(agent.memory.retrieve(c.transcript.back().text, k_))
       << "[allowed actions]\n"
       << "SAY " << agent.name() << " in " << obs.region_name << ", nothing else to report.\n"
       << "END\n"
       << "[reply format]\nOne line: SAY <message> or END\n";
  req.user = user.str();

  const auto reply = trim(complete_or_fail(*backend_, req));
  const auto first = trim(reply.substr(0, reply.find('\n')));
  if (first == "END") return {agent.name() + " leaves the conversation.", {}, true};
  if (first.rfind("SAY ", 0) == 0) return {trim(first.substr(4)), {}, false};
  return {first.empty() ? "..." : first, {}, false};
}

}  // namespace teamsim
