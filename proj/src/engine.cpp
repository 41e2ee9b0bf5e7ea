#include "teamsim/engine.hpp"

#include <algorithm>

#include "teamsim/error.hpp"
#include "teamsim/evaluation.hpp"
#include "teamsim/llm.hpp"
#include "teamsim/metrics.hpp"
#include "teamsim/snapshot.hpp"

namespace teamsim {

using json = nlohmann::json;

// --- rules ----------------------------------------------------------------

long action_duration(const ActionPayload& a) {
  struct V {
    long operator()(const MoveTo& m) const { return std::max<long>(1, static_cast<long>(m.path.size()) - 1); }
    long operator()(const PickUp&) const { return kPickUpSteps; }
    long operator()(const PutDown&) const { return kPutDownSteps; }
    long operator()(const UseOn&) const { return kUseOnSteps; }
    long operator()(const IdleFor& i) const { return std::max<long>(1, i.steps); }
  };
  return std::visit(V{}, a);
}

namespace {

const std::map<std::string, std::string>& verb_attribute() {
  static const std::map<std::string, std::string> m{{"stabilize", "stabilized"}};
  return m;
}

struct RuleVisitor {
  const World& w;
  const AgentProfileSpec& profile;
  const AgentBody& body;

  std::optional<std::string> operator()(const MoveTo& m) const {
    if (m.path.size() < 2) return "path has no moves";
    if (m.path.front() != body.cell) return "path does not start at " + to_string(body.cell);
    const auto blocked = w.blocked_mask();
    for (std::size_t i = 0; i < m.path.size(); ++i) {
      const Cell c = m.path[i];
      if (!w.grid().open(c)) return "path crosses a wall at " + to_string(c);
      if (blocked[w.grid().index(c)]) return "path is blocked at " + to_string(c);
      if (i > 0 && manhattan(m.path[i - 1], c) != 1) return "path is not contiguous at " + to_string(c);
    }
    return std::nullopt;
  }

  const EntityState* lying(const std::string& name, std::optional<std::string>& problem) const {
    const EntityState* e = w.entity(name);
    if (!e || e->removed) {
      problem = "no entity named '" + name + "'";
      return nullptr;
    }
    if (!e->lying()) {
      problem = name + " is carried by " + e->carried_by.value_or("someone");
      return nullptr;
    }
    return e;
  }

  std::optional<std::string> operator()(const PickUp& p) const {
    std::optional<std::string> problem;
    const EntityState* e = lying(p.entity, problem);
    if (!e) return problem;
    if (!e->interactive) return p.entity + " is not interactive";
    if (manhattan(*e->cell, body.cell) > 1) return p.entity + " is out of reach";
    if (e->blocking) return p.entity + " cannot be carried";
    if (body.carrying) return "already carrying " + *body.carrying;
    if (e->attribute("severity") == "critical" && e->attribute("stabilized") != "true") {
      return p.entity + " is critical and must be stabilized before it is moved";
    }
    return std::nullopt;
  }

  std::optional<std::string> operator()(const PutDown& p) const {
    if (body.carrying != p.entity) return "not carrying " + p.entity;
    return std::nullopt;
  }

  std::optional<std::string> operator()(const UseOn& u) const {
    std::optional<std::string> problem;
    const EntityState* e = lying(u.entity, problem);
    if (!e) return problem;
    if (!e->interactive) return u.entity + " is not interactive";
    if (manhattan(*e->cell, body.cell) > 1) return u.entity + " is out of reach";
    if (u.verb.empty()) return "no verb given";
    if (!profile.has_skill(u.verb)) return profile.name + " lacks the skill '" + u.verb + "'";
    if (u.verb == "clear" && !e->blocking) return u.entity + " does not block anything";
    if (u.verb == "stabilize" && e->attribute("stabilized") == "true") return u.entity + " is already stabilized";
    return std::nullopt;
  }

  std::optional<std::string> operator()(const IdleFor& i) const {
    if (i.steps < 1) return "idle needs at least one step";
    return std::nullopt;
  }
};

}  // namespace

std::optional<std::string> action_problem(const World& world, const AgentProfileSpec& agent, const ActionPayload& a) {
  const AgentBody* body = world.agent(agent.name);
  if (!body) return "unknown agent '" + agent.name + "'";
  return std::visit(RuleVisitor{world, agent, *body}, a);
}

std::optional<WorldChange> action_change(const std::string& agent, const ActionPayload& a) {
  if (const auto* m = std::get_if<MoveTo>(&a)) return MoveAgent{agent, m->path.back()};
  if (const auto* p = std::get_if<PickUp>(&a)) return PickUpEntity{agent, p->entity};
  if (const auto* p = std::get_if<PutDown>(&a)) return PutDownEntity{agent, p->entity};
  if (const auto* u = std::get_if<UseOn>(&a)) {
    if (u->verb == "clear") return RemoveEntity{u->entity};
    auto it = verb_attribute().find(u->verb);
    return SetAttribute{u->entity, it == verb_attribute().end() ? u->verb : it->second, "true"};
  }
  return std::nullopt;
}

ValidationVerdict validate_event(const Event& e, const World& world, const std::vector<AgentProfileSpec>& members,
                                 ValidatorPolicy* judge, const std::set<std::string>* busy) {
  if (e.duration_steps < 1) return ValidationVerdict::invalid("duration must be at least one step");
  for (const auto& p : e.participants) {
    if (!world.agent(p)) return ValidationVerdict::invalid("unknown participant '" + p + "'");
    if (busy && busy->count(p)) return ValidationVerdict::invalid(p + " is busy");
  }
  if (e.kind == EventKind::Action) {
    if (e.participants.size() != 1) return ValidationVerdict::invalid("an action has exactly one participant");
    if (!e.action) return ValidationVerdict::invalid("action event without an action");
    const auto it = std::find_if(members.begin(), members.end(),
                                 [&](const AgentProfileSpec& m) { return m.name == e.participants.front(); });
    if (it == members.end()) return ValidationVerdict::invalid("unknown participant '" + e.participants.front() + "'");
    if (auto problem = action_problem(world, *it, *e.action)) return ValidationVerdict::invalid(*problem);
  } else {
    if (e.participants.size() < 2) return ValidationVerdict::invalid("a conversation needs at least two participants");
  }
  if (judge) {
    if (auto veto = judge->veto(e, world)) {
      return ValidationVerdict::invalid(veto->empty() ? std::string("vetoed by judge") : *veto);
    }
  }
  return ValidationVerdict::ok();
}

json event_to_json(const Event& e) {
  json j = {{"id", e.id},
            {"kind", e.kind == EventKind::Action ? "action" : "communication"},
            {"start_step", e.start_step},
            {"duration_steps", e.duration_steps},
            {"due_step", e.due_step()},
            {"participants", e.participants}};
  if (e.action) j["action"] = action_to_json(*e.action);
  if (e.kind == EventKind::Communication) j["conversation"] = e.conversation;
  return j;
}

// --- engine ---------------------------------------------------------------

PolicyBinding scripted_policies(const Scenario& scenario) {
  return uniform_policies(scenario, std::make_shared<ScriptedPolicy>(scenario.goal.predicate));
}

PolicyBinding uniform_policies(const Scenario& scenario, std::shared_ptr<DecisionPolicy> policy) {
  PolicyBinding b;
  for (const auto& m : scenario.members) b[m.name] = policy;
  return b;
}

Engine::Engine(Scenario scenario, PolicyBinding policies, EngineOptions options)
    : scenario_(std::move(scenario)), policies_(std::move(policies)), options_(std::move(options)) {
  max_steps_ = options_.max_steps.value_or(scenario_.max_steps);
  if (max_steps_ < 1) throw InvalidState("max_steps must be at least 1");
  world_ = build_world(scenario_);
  auto embedder = options_.embedder ? options_.embedder : std::make_shared<HashEmbedder>();

  log_.header.scenario_id = scenario_.id;
  log_.header.seed = scenario_.seed;
  log_.header.max_steps = max_steps_;
  log_.header.goal = scenario_.goal.statement;
  log_.header.predicate = predicate_to_json(scenario_.goal.predicate);

  for (std::size_t i = 0; i < scenario_.members.size(); ++i) {
    const auto& m = scenario_.members[i];
    auto it = policies_.find(m.name);
    if (it == policies_.end() || !it->second) throw InvalidState("no policy bound for member '" + m.name + "'");
    policy_of_.push_back(it->second);
    agents_.push_back(make_agent_state(m, static_cast<int>(i), embedder));
    seed_knowledge(agents_.back(), scenario_);
    log_.header.agents.push_back({{"name", m.name}, {"role", m.role}, {"policy", it->second->id()}});
  }
  busy_.assign(agents_.size(), std::nullopt);
  held_.assign(agents_.size(), std::nullopt);
  sync_agents();
  log_.initial_world = world_to_json(world_);
}

AgentState& Engine::agent(const std::string& name) {
  for (auto& a : agents_) {
    if (a.name() == name) return a;
  }
  throw UnknownAgent("unknown agent '" + name + "'");
}

bool Engine::busy(const std::string& agent) const {
  const int i = world_.agent_index(agent);
  return i >= 0 && (busy_[i].has_value() || held_[i].has_value());
}

const LogRecord& Engine::emit(RecordKind kind, const std::string& agent, json payload, std::string rationale) {
  log_.records.push_back({static_cast<long>(log_.records.size()), world_.step, kind, agent, std::move(payload),
                          std::move(rationale)});
  const auto& r = log_.records.back();
  for (const auto& l : listeners_) l(r);
  return r;
}

void Engine::sync_agents() {
  for (auto& a : agents_) {
    const AgentBody* b = world_.agent(a.name());
    a.cell = b->cell;
    a.carrying = b->carrying;
  }
}

ValidationVerdict Engine::validate(const Event& e) const {
  std::set<std::string> busy;
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    if (busy_[i]) busy.insert(agents_[i].name());
  }
  return validate_event(e, world_, scenario_.members, options_.judge.get(), &busy);
}

Event Engine::make_action_event(int agent, ActionPayload action, std::string context) {
  Event e;
  e.id = next_event_id_++;
  e.kind = EventKind::Action;
  e.duration_steps = action_duration(action);
  e.action = std::move(action);
  e.start_step = world_.step;
  e.participants = {agents_[agent].name()};
  e.context = std::move(context);
  return e;
}

void Engine::schedule(Event e) {
  for (const auto& p : e.participants) {
    const int i = world_.agent_index(p);
    if (i < 0) throw UnknownAgent("unknown participant '" + p + "'");
    if (busy_[i]) throw ParticipantBusy(p + " is already committed to event " + std::to_string(*busy_[i]));
  }
  for (const auto& p : e.participants) busy_[world_.agent_index(p)] = e.id;
  emit(RecordKind::EventScheduled, e.kind == EventKind::Action ? e.participants.front() : std::string{},
       event_to_json(e), e.context);
  queue_.push(std::move(e));
}

void Engine::notify(int i, EventResult result) {
  auto& a = agents_[i];
  a.memory.add(world_.step, "Step " + std::to_string(world_.step) + ": " + result.summary +
                                (result.ok ? "" : " failed (" + result.reason + ")"),
               MemoryKind::Outcome);
  a.pending_messages.push_back({world_.step, MessageKind::Outcome, {}, result.summary, {}});
  a.last_result = std::move(result);
}

void Engine::start() {
  if (started_) return;
  started_ = true;
  decision_phase();
}

TickReport Engine::tick() {
  if (!started_) start();
  if (finished()) throw InvalidState("run already finished");
  const std::size_t before = log_.records.size();
  ++world_.step;

  TickReport report;
  while (const QueuedEvent* top = queue_.peek()) {
    if (top->due > world_.step) break;
    const Event e = queue_.pop()->event;
    resolve(e);
    ++report.resolved;
  }
  expire_invitations();

  if (evaluate_predicate(scenario_.goal.predicate, world_)) {
    emit(RecordKind::SuccessDetected, {}, {{"predicate", describe(scenario_.goal.predicate)}});
    finish(Outcome::Kind::Success, false);
  } else if (world_.step >= max_steps_) {
    finish(Outcome::Kind::TimeLimit, false);
  } else {
    decision_phase();
  }

  report.step = world_.step;
  report.finished = finished();
  for (std::size_t i = before; i < log_.records.size(); ++i) {
    report.deltas += log_.records[i].kind == RecordKind::StateDelta;
    report.decisions += log_.records[i].kind == RecordKind::Decision;
  }
  return report;
}

RunResult Engine::run() {
  start();
  while (!finished()) tick();
  return {*outcome_, log_};
}

void Engine::abort() {
  if (finished()) return;
  finish(Outcome::Kind::TimeLimit, true);
}

SurveyResult Engine::administer_survey(llm::CompletionBackend& backend, const std::vector<SurveyItem>& items,
                                      std::size_t k) {
  if (!finished()) throw InvalidState("surveys are administered after the run");
  std::vector<const AgentState*> who;
  for (const auto& a : agents_) who.push_back(&a);
  auto result = teamsim::administer_survey(who, items, backend, k);
  log_.surveys.insert(log_.surveys.end(), result.responses.begin(), result.responses.end());
  log_.survey_flags.insert(log_.survey_flags.end(), result.flags.begin(), result.flags.end());
  log_.metrics = metrics_to_json(compute_metrics(log_));
  return result;
}

void Engine::finish(Outcome::Kind kind, bool aborted) {
  outcome_ = Outcome{kind, world_.step, aborted};
  emit(RecordKind::RunEnded, {}, {{"outcome", to_string(kind)}, {"step", world_.step}, {"aborted", aborted}});
  log_.outcome = outcome_;
  log_.final_world = world_to_json(world_);
  log_.metrics = metrics_to_json(compute_metrics(log_));
}

// --- resolution -----------------------------------------------------------

void Engine::resolve(const Event& e) {
  if (e.kind == EventKind::Action) {
    resolve_action(e);
  } else {
    resolve_turn(e);
  }
}

void Engine::resolve_action(const Event& e) {
  const int i = world_.agent_index(e.participants.front());
  busy_[i].reset();
  const auto& action = *e.action;
  const std::string summary = action_name(action) + " (event " + std::to_string(e.id) + ")";
  json payload = {{"event", e.id}, {"kind", "action"}, {"action", action_to_json(action)}};

  std::optional<std::string> problem = action_problem(world_, agents_[i].profile, action);
  const auto change = action_change(agents_[i].name(), action);
  if (!problem && change) problem = change_problem(world_, *change);

  if (problem) {
    payload["ok"] = false;
    payload["reason"] = *problem;
    emit(RecordKind::EventResolved, agents_[i].name(), payload, e.context);
    notify(i, {false, summary, *problem});
    return;
  }
  if (change) {
    const auto delta = apply_world_change(world_, *change);
    sync_agents();
    emit(RecordKind::StateDelta, agents_[i].name(), {{"event", e.id}, {"change", change_to_json(delta.change)}});
  }
  payload["ok"] = true;
  emit(RecordKind::EventResolved, agents_[i].name(), payload, e.context);
  notify(i, {true, summary, {}});
}

void Engine::resolve_turn(const Event& e) {
  for (const auto& p : e.participants) busy_[world_.agent_index(p)].reset();
  auto& c = conversations_.at(e.conversation);
  auto& talk = talk_[c.id];
  const std::size_t turn = c.transcript.size() - 1;
  const auto& entry = c.transcript[turn];
  const auto& facts = talk.facts[turn];

  json facts_json = json::array();
  for (const auto& f : facts) facts_json.push_back(fact_to_json(f));
  emit(RecordKind::EventResolved, entry.speaker,
       {{"event", e.id}, {"kind", "communication"}, {"ok", true}, {"conversation", c.id}, {"turn", turn}});

  long recipient = 0;
  for (const auto& p : c.participants) {
    if (p == entry.speaker) continue;
    auto& a = agent(p);
    a.memory.add(world_.step, entry.speaker + " said: " + entry.text, MemoryKind::Message);
    for (const auto& f : facts) {
      a.knowledge.merge(f);
      a.knowledge.offered.insert(f.signature());
    }
    a.pending_messages.push_back({world_.step, MessageKind::Chat, entry.speaker, entry.text, facts});
    emit(RecordKind::MessageDelivered, p,
         {{"conversation", c.id},
          {"turn", turn},
          {"from", entry.speaker},
          {"text", entry.text},
          {"facts", facts_json},
          {"recipient_index", recipient++}});
  }

  if (auto reason = should_terminate(c)) {
    close_conversation(c, *reason);
    return;
  }
  schedule_turn(c.id);
}

void Engine::schedule_turn(long id) {
  auto& c = conversations_.at(id);
  auto& talk = talk_[id];
  if (talk.scheduled == c.transcript.size()) {
    const auto choice = select_next_speaker(c, options_.speaker_selector.get());
    if (choice.warning) emit(RecordKind::Warning, {}, {{"conversation", id}, {"message", *choice.warning}});
    const int s = world_.agent_index(choice.speaker);
    auto& speaker = agents_[s];
    Utterance u;
    try {
      const auto obs = build_observation(world_, speaker, max_steps_, scenario_.goal.statement);
      u = policy_of_[s]->speak(c, obs, speaker);
    } catch (const CassetteMiss&) {
      throw;
    } catch (const Error& e) {
      emit(RecordKind::PolicyFailure, speaker.name(), {{"conversation", id}, {"error", e.what()}});
      close_conversation(c, "policy_failure");
      return;
    }
    c.transcript.push_back({world_.step, speaker.name(), u.text});
    if (u.end) c.end_marker = true;
    for (const auto& f : u.facts) speaker.knowledge.offered.insert(f.signature());
    talk.facts.push_back(u.facts);
  }

  ++talk.scheduled;

  Event e;
  e.id = next_event_id_++;
  e.kind = EventKind::Communication;
  e.start_step = world_.step;
  e.duration_steps = kTurnSteps;
  e.participants = c.participants;
  e.conversation = id;
  e.context = c.transcript.back().speaker + ": " + c.transcript.back().text;
  for (const auto& p : c.participants) held_[world_.agent_index(p)].reset();
  const auto verdict = validate(e);
  if (!verdict.valid) {
    emit(RecordKind::EventRejected, c.transcript.back().speaker, {{"event", event_to_json(e)}, {"reason", verdict.reason}});
    close_conversation(c, "rejected");
    return;
  }
  schedule(std::move(e));
}

void Engine::close_conversation(Conversation& c, const std::string& reason) {
  c.state = ConversationState::Closed;
  c.close_reason = reason;
  for (const auto& p : c.participants) {
    held_[world_.agent_index(p)].reset();
  }
  emit(RecordKind::ConversationClosed, c.initiator(),
       {{"conversation", c.id},
        {"reason", reason},
        {"turns", static_cast<long>(c.transcript.size())},
        {"participants", c.participants}});
}

// --- conversations --------------------------------------------------------

void Engine::expire_invitations() {
  for (auto& [id, c] : conversations_) {
    if (c.state != ConversationState::Pending) continue;
    if (world_.step - c.started_step < options_.invitation_ttl) continue;
    const auto invited = c.invited;
    for (const auto& name : invited) {
      auto& a = agent(name);
      std::erase_if(a.invitations, [&](const Invitation& inv) { return inv.conversation == id; });
      answer_invitation(c, name, false);
      emit(RecordKind::MessageIgnored, name, {{"conversation", id}, {"from", c.initiator()}, {"reason", "expired"}});
    }
    settle(id);
  }
}

void Engine::settle(long id) {
  auto& c = conversations_.at(id);
  if (c.state == ConversationState::Pending) return;
  if (c.state == ConversationState::Closed) {
    close_conversation(c, c.close_reason);
    return;
  }
  schedule_turn(id);
}

void Engine::handle_invitations(int i, const Observation& obs) {
  auto& a = agents_[i];
  while (!a.invitations.empty()) {
    const Invitation inv = a.invitations.front();
    a.invitations.pop_front();
    auto it = conversations_.find(inv.conversation);
    if (it == conversations_.end() || it->second.state != ConversationState::Pending) continue;
    auto& c = it->second;

    bool listened = false;
    std::string reason = "ignored";
    if (held_[i] || busy_[i]) {
      reason = "engaged";
    } else {
      try {
        listened = policy_of_[i]->listen(obs, a, inv);
      } catch (const CassetteMiss&) {
        throw;
      } catch (const Error& e) {
        emit(RecordKind::PolicyFailure, a.name(), {{"conversation", c.id}, {"error", e.what()}});
      }
    }
    answer_invitation(c, a.name(), listened);
    if (listened) {
      held_[i] = c.id;
      emit(RecordKind::MessageDelivered, a.name(), {{"conversation", c.id}, {"from", inv.from}, {"invitation", true}});
    } else {
      emit(RecordKind::MessageIgnored, a.name(), {{"conversation", c.id}, {"from", inv.from}, {"reason", reason}});
    }
    settle(c.id);
  }
}

// --- decisions ------------------------------------------------------------

void Engine::remember_observation(int i, const Observation& obs) {
  std::string text = "Step " + std::to_string(obs.step) + ": in " + obs.region_name + " at " + to_string(obs.cell) + ".";
  if (obs.entities.empty()) {
    text += " Nothing here.";
  } else {
    text += " Seen:";
    for (const auto& e : obs.entities) {
      text += " " + e.name + " (" + e.kind;
      for (const auto& [k, v] : e.attributes) text += ", " + k + "=" + v;
      text += ") at " + to_string(e.cell) + ";";
    }
  }
  agents_[i].memory.add(obs.step, text, MemoryKind::Observation);
}

void Engine::decision_phase() {
  for (int i = 0; i < static_cast<int>(agents_.size()); ++i) {
    if (!busy_[i] && !held_[i]) decide_for(i);
  }
}

bool Engine::commit(int i, const Decision& d, ValidationVerdict& verdict) {
  auto& a = agents_[i];
  if (const auto* act_ = std::get_if<Act>(&d.choice)) {
    Event e = make_action_event(i, act_->action, d.rationale);
    verdict = validate(e);
    if (!verdict.valid) {
      --next_event_id_;
      return false;
    }
    schedule(std::move(e));
    return true;
  }
  if (const auto* idle_ = std::get_if<Idle>(&d.choice)) {
    Event e = make_action_event(i, IdleFor{idle_->duration}, d.rationale);
    verdict = validate(e);
    if (!verdict.valid) {
      --next_event_id_;
      return false;
    }
    schedule(std::move(e));
    return true;
  }
  const auto& talk = std::get<Communicate>(d.choice);
  if (talk.targets.empty()) {
    verdict = ValidationVerdict::invalid("no conversation targets");
    return false;
  }
  for (const auto& t : talk.targets) {
    if (t == a.name()) {
      verdict = ValidationVerdict::invalid("cannot start a conversation with oneself");
      return false;
    }
    if (world_.agent_index(t) < 0) {
      verdict = ValidationVerdict::invalid("unknown target '" + t + "'");
      return false;
    }
  }
  const long id = next_conversation_id_++;
  auto c = start_conversation(id, a.name(), talk.targets, talk.opening, world_.step, options_.max_turns);
  talk_[id].facts.push_back(talk.facts);
  for (const auto& f : talk.facts) a.knowledge.offered.insert(f.signature());
  a.knowledge.last_initiated = world_.step;
  held_[i] = id;
  for (const auto& t : c.invited) agent(t).invitations.push_back({id, a.name(), talk.opening, world_.step});
  emit(RecordKind::ConversationStarted, a.name(),
       {{"conversation", id}, {"targets", c.invited}, {"opening", talk.opening}}, d.rationale);
  conversations_.emplace(id, std::move(c));
  verdict = ValidationVerdict::ok();
  return true;
}

void Engine::decide_for(int i) {
  auto& a = agents_[i];
  Observation obs = build_observation(world_, a, max_steps_, scenario_.goal.statement);
  if (absorb_observation(a.knowledge, obs)) remember_observation(i, obs);

  handle_invitations(i, obs);
  if (held_[i] || busy_[i]) {
    a.pending_messages.clear();
    return;
  }
  obs.invitations.clear();

  for (int attempt = 0; attempt < 2; ++attempt) {
    Decision d;
    try {
      d = policy_of_[i]->decide(obs, a);
    } catch (const CassetteMiss&) {
      throw;
    } catch (const Error& e) {
      emit(RecordKind::PolicyFailure, a.name(), {{"error", e.what()}});
      a.pending_messages.clear();
      return;
    }
    emit(RecordKind::Decision, a.name(),
         {{"decision", decision_to_json(d)}, {"attempt", attempt}, {"region", obs.region_name}}, d.rationale);
    ValidationVerdict verdict;
    if (commit(i, d, verdict)) {
      a.pending_messages.clear();
      return;
    }
    emit(RecordKind::EventRejected, a.name(), {{"attempt", attempt}, {"reason", verdict.reason}}, d.rationale);
    a.last_result = EventResult{false, "decision rejected", verdict.reason};
    obs.last_result = a.last_result;
  }
  emit(RecordKind::Warning, a.name(), {{"message", "two invalid decisions; idling one step"}});
  Event e = make_action_event(i, IdleFor{1}, "forced idle");
  schedule(std::move(e));
  a.pending_messages.clear();
}

RunResult run_scenario(const Scenario& scenario, PolicyBinding policies, EngineOptions options) {
  Engine engine(scenario, std::move(policies), std::move(options));
  return engine.run();
}

}  // namespace teamsim
