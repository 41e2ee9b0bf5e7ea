#include "teamsim/service.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "teamsim/error.hpp"
#include "teamsim/llm.hpp"
#include "teamsim/metrics.hpp"
#include "teamsim/snapshot.hpp"

namespace teamsim {

using json = nlohmann::json;

std::string to_string(SessionState s) {
  switch (s) {
    case SessionState::NotStarted:
      return "not_started";
    case SessionState::Running:
      return "running";
    case SessionState::Paused:
      return "paused";
    case SessionState::Finished:
      return "finished";
  }
  return "not_started";
}

json stream_message_to_json(const StreamMessage& m) { return {{"seq", m.seq}, {"type", m.type}, {"data", m.data}}; }

// --- subscriptions --------------------------------------------------------

std::optional<StreamMessage> Subscription::next(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mu_);
  cv_.wait_for(lock, timeout, [&] { return !queue_.empty() || closed_; });
  if (queue_.empty()) return std::nullopt;
  auto m = std::move(queue_.front());
  queue_.pop_front();
  return m;
}

bool Subscription::closed() const {
  std::lock_guard lock(mu_);
  return closed_ && queue_.empty();
}

void Subscription::cancel() {
  std::lock_guard lock(mu_);
  closed_ = true;
  queue_.clear();
  cv_.notify_all();
}

bool Subscription::push(StreamMessage m) {
  std::lock_guard lock(mu_);
  if (closed_) return false;
  if (queue_.size() >= capacity_) {
    // slow reader: drop what it has not read and leave a gap marker
    const auto dropped = queue_.size();
    const auto seq = queue_.front().seq;
    queue_.clear();
    queue_.push_back({seq, "gap", {{"dropped", dropped}, {"resubscribe", true}}});
    closed_ = true;
    cv_.notify_all();
    return false;
  }
  queue_.push_back(std::move(m));
  cv_.notify_all();
  return true;
}

void Subscription::close() {
  std::lock_guard lock(mu_);
  closed_ = true;
  cv_.notify_all();
}

// --- sessions -------------------------------------------------------------

struct SessionManager::Session {
  std::string id;
  Scenario scenario;
  SessionOptions options;
  std::unique_ptr<Engine> engine;
  SessionState state = SessionState::NotStarted;
  Pacing pacing;
  std::uint64_t last_seq = 0;
  long last_snapshot_step = 0;
  std::vector<std::shared_ptr<Subscription>> subscribers;
  std::thread thread;
  bool stop = false;
  std::string error;  // fatal run error, if any
  mutable std::mutex mu;
  std::condition_variable cv;
};

SessionManager::SessionManager(ServiceConfig config, std::shared_ptr<llm::CompletionBackend> backend)
    : config_(std::move(config)), backend_(backend ? std::move(backend) : std::make_shared<llm::TemplateBackend>()) {}

SessionManager::~SessionManager() {
  std::vector<std::shared_ptr<Session>> all;
  {
    std::lock_guard lock(mu_);
    for (auto& [id, s] : sessions_) all.push_back(s);
    sessions_.clear();
  }
  for (auto& s : all) {
    {
      std::lock_guard lock(s->mu);
      s->stop = true;
      for (auto& sub : s->subscribers) sub->close();
    }
    s->cv.notify_all();
    if (s->thread.joinable()) s->thread.join();
  }
}

std::shared_ptr<SessionManager::Session> SessionManager::find(const std::string& id) const {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw NotFound("no session '" + id + "'");
  return it->second;
}

void SessionManager::rebuild_engine(Session& s) {
  PolicyBinding policies;
  if (s.options.policy == "llm") {
    policies = uniform_policies(s.scenario, std::make_shared<LlmPolicy>(backend_));
  } else {
    policies = scripted_policies(s.scenario);
  }
  s.engine = std::make_unique<Engine>(s.scenario, std::move(policies));
  Session* raw = &s;
  s.engine->subscribe([this, raw](const LogRecord& r) { publish(*raw, "record", record_to_json(r)); });
}

CreateResult SessionManager::create_session(const std::string& document, SessionOptions options) {
  if (options.policy != "scripted" && options.policy != "llm") {
    return {std::nullopt, {{Diagnostic::Severity::Error, "policy", "must be scripted or llm"}}};
  }
  CreateResult result;
  Scenario scenario;
  try {
    scenario = parse_scenario(document);
  } catch (const SyntaxError& e) {
    result.diagnostics.push_back({Diagnostic::Severity::Error, "", e.what()});
    return result;
  } catch (const SemanticError& e) {
    result.diagnostics.push_back({Diagnostic::Severity::Error, e.path(), e.what()});
    return result;
  }
  result.diagnostics = validate_scenario(scenario);
  if (has_errors(result.diagnostics)) return result;

  auto s = std::make_shared<Session>();
  s->scenario = std::move(scenario);
  s->options = std::move(options);
  rebuild_engine(*s);

  std::lock_guard lock(mu_);
  if (sessions_.size() >= config_.max_sessions) {
    throw InvalidState("session limit of " + std::to_string(config_.max_sessions) + " reached");
  }
  s->id = "s" + std::to_string(next_id_++);
  sessions_[s->id] = s;
  result.id = s->id;
  return result;
}

std::vector<std::string> SessionManager::list() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> ids;
  for (const auto& [id, s] : sessions_) ids.push_back(id);
  return ids;
}

void SessionManager::remove(const std::string& id) {
  std::shared_ptr<Session> s;
  {
    std::lock_guard lock(mu_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw NotFound("no session '" + id + "'");
    s = it->second;
    sessions_.erase(it);
  }
  {
    std::lock_guard lock(s->mu);
    s->stop = true;
    if (s->engine && s->engine->started() && !s->engine->finished()) s->engine->abort();
    for (auto& sub : s->subscribers) sub->close();
  }
  s->cv.notify_all();
  if (s->thread.joinable()) s->thread.join();
}

json SessionManager::describe(const std::string& id) const {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  json agents = json::array();
  for (const auto& m : s->scenario.members) {
    agents.push_back({{"name", m.name}, {"role", m.role}, {"skills", m.skills}, {"trust_level", to_string(m.trust_level)}});
  }
  json j = {{"id", s->id},
            {"scenario_id", s->scenario.id},
            {"title", s->scenario.title},
            {"state", to_string(s->state)},
            {"step", s->engine->step()},
            {"max_steps", s->engine->max_steps()},
            {"policy", s->options.policy},
            {"steps_per_second", fixed6(s->pacing.steps_per_second)},
            {"agents", agents}};
  if (const auto& o = s->engine->outcome()) {
    j["outcome"] = {{"kind", to_string(o->kind)}, {"step", o->step}, {"aborted", o->aborted}};
  }
  if (!s->error.empty()) j["error"] = s->error;
  return j;
}

SessionState SessionManager::state(const std::string& id) const {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  return s->state;
}

void apply_profile_edit(AgentProfileSpec& p, const json& edit, const std::string& path) {
  if (!edit.is_object()) throw SemanticError(path, "must be an object");
  try {
    for (const auto& [key, value] : edit.items()) {
      if (key == "name") continue;
      if (key == "role") {
        p.role = value.get<std::string>();
      } else if (key == "skills") {
        p.skills = value.get<std::vector<std::string>>();
      } else if (key == "backstory") {
        p.backstory = value.get<std::vector<std::string>>();
      } else if (key == "demographics") {
        p.demographics = value.get<std::map<std::string, std::string>>();
      } else if (key == "personality") {
        std::map<std::string, double> traits;
        for (const auto& [trait, score] : value.items()) {
          if (!score.is_number() || !std::isfinite(score.get<double>())) {
            throw SemanticError(path + ".personality." + trait, "must be a finite number");
          }
          traits[trait] = score.get<double>();
        }
        p.personality = std::move(traits);
      } else if (key == "trust_level") {
        auto t = trust_level_from_string(value.get<std::string>());
        if (!t) throw SemanticError(path + ".trust_level", "must be low, high or unspecified");
        p.trust_level = *t;
      } else {
        throw SemanticError(path + "." + key, "unknown field");
      }
    }
  } catch (const json::exception& e) {
    throw SemanticError(path, std::string("bad value: ") + e.what());
  }
}

std::vector<Diagnostic> SessionManager::update_agents(const std::string& id, const json& edits) {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  if (s->state != SessionState::NotStarted) throw InvalidState("agents can only be edited before the run starts");
  if (!edits.is_array()) return {{Diagnostic::Severity::Error, "agents", "must be a list of profile edits"}};

  Scenario edited = s->scenario;
  for (std::size_t i = 0; i < edits.size(); ++i) {
    const std::string path = "agents[" + std::to_string(i) + "]";
    const auto& e = edits[i];
    if (!e.is_object() || !e.contains("name") || !e["name"].is_string()) {
      return {{Diagnostic::Severity::Error, path + ".name", "required"}};
    }
    const auto name = e["name"].get<std::string>();
    auto it = std::find_if(edited.members.begin(), edited.members.end(),
                           [&](const AgentProfileSpec& m) { return m.name == name; });
    if (it == edited.members.end()) return {{Diagnostic::Severity::Error, path + ".name", "unknown member '" + name + "'"}};
    try {
      apply_profile_edit(*it, e, path);
    } catch (const SemanticError& err) {
      return {{Diagnostic::Severity::Error, err.path(), err.what()}};
    }
  }
  auto diags = validate_scenario(edited);
  if (has_errors(diags)) return diags;
  s->scenario = std::move(edited);
  // subscribers keep their stream; the rebuilt engine starts from the same snapshot
  auto subscribers = std::move(s->subscribers);
  rebuild_engine(*s);
  s->subscribers = std::move(subscribers);
  return diags;
}

void SessionManager::publish(Session& s, const std::string& type, json data) {
  StreamMessage m{++s.last_seq, type, std::move(data)};
  std::erase_if(s.subscribers, [&](const std::shared_ptr<Subscription>& sub) { return !sub->push(m); });
}

void SessionManager::snapshot_all(Session& s) {
  publish(s, "snapshot", {{"step", s.engine->step()}, {"world", world_to_json(s.engine->world())}});
  s.last_snapshot_step = s.engine->step();
}

std::shared_ptr<Subscription> SessionManager::subscribe(const std::string& id) {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  auto sub = std::make_shared<Subscription>(config_.subscriber_buffer);
  sub->push({s->last_seq,
             "snapshot",
             {{"step", s->engine->step()}, {"world", world_to_json(s->engine->world())}, {"state", to_string(s->state)}}});
  if (s->state == SessionState::Finished) {
    sub->push({s->last_seq + 1, "end", {{"state", "finished"}}});
    sub->close();
  } else {
    s->subscribers.push_back(sub);
  }
  return sub;
}

void SessionManager::start(const std::string& id, Pacing pacing) {
  if (pacing.steps_per_second < 0 || !std::isfinite(pacing.steps_per_second) ||
      (pacing.steps_per_second > 0 && (pacing.steps_per_second < config_.min_steps_per_second ||
                                       pacing.steps_per_second > config_.max_steps_per_second))) {
    throw std::invalid_argument("steps_per_second must be 0 (full speed) or within [" +
                                fixed6(config_.min_steps_per_second) + ", " + fixed6(config_.max_steps_per_second) + "]");
  }
  auto s = find(id);
  std::lock_guard lock(s->mu);
  if (s->state != SessionState::NotStarted) throw InvalidState("session " + id + " is " + to_string(s->state));
  s->pacing = pacing;
  s->state = SessionState::Running;
  publish(*s, "state", {{"state", "running"}, {"step", s->engine->step()}});
  s->thread = std::thread([this, s] { worker(s); });
}

void SessionManager::pause(const std::string& id) {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  if (s->state != SessionState::Running) throw InvalidState("session " + id + " is " + to_string(s->state));
  s->state = SessionState::Paused;
  publish(*s, "state", {{"state", "paused"}, {"step", s->engine->step()}});
  s->cv.notify_all();
}

void SessionManager::resume(const std::string& id) {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  if (s->state != SessionState::Paused) throw InvalidState("session " + id + " is " + to_string(s->state));
  s->state = SessionState::Running;
  publish(*s, "state", {{"state", "running"}, {"step", s->engine->step()}});
  s->cv.notify_all();
}

void SessionManager::abort(const std::string& id) {
  auto s = find(id);
  {
    std::lock_guard lock(s->mu);
    if (s->state == SessionState::Finished) throw InvalidState("session " + id + " is finished");
    if (!s->engine->started()) s->engine->start();
    s->engine->abort();
    if (s->state == SessionState::NotStarted) finalize(*s);
    // a running worker notices the finished engine and finalizes
  }
  s->cv.notify_all();
  wait_finished(id, std::chrono::milliseconds(10'000));
}

bool SessionManager::wait_finished(const std::string& id, std::chrono::milliseconds timeout) const {
  auto s = find(id);
  std::unique_lock lock(s->mu);
  return s->cv.wait_for(lock, timeout, [&] { return s->state == SessionState::Finished; });
}

void SessionManager::finalize(Session& s) {
  if (config_.survey_on_finish) {
    try {
      s.engine->administer_survey(*backend_, default_survey_items());
    } catch (const Error& e) {
      s.error = std::string("survey failed: ") + e.what();
    }
  }
  if (!config_.log_dir.empty()) {
    try {
      save_log(s.engine->log(), config_.log_dir + "/" + s.id + ".log.json");
    } catch (const std::exception& e) {
      s.error = std::string("log not saved: ") + e.what();
    }
  }
  s.state = SessionState::Finished;
  snapshot_all(s);
  const auto& o = *s.engine->outcome();
  publish(s, "end", {{"state", "finished"}, {"outcome", to_string(o.kind)}, {"step", o.step}, {"aborted", o.aborted}});
  for (auto& sub : s.subscribers) sub->close();
  s.subscribers.clear();
  s.cv.notify_all();
}

void SessionManager::worker(std::shared_ptr<Session> s) {
  using namespace std::chrono;
  auto next_due = steady_clock::now();
  std::unique_lock lock(s->mu);
  for (;;) {
    s->cv.wait(lock, [&] { return s->stop || s->engine->finished() || s->state == SessionState::Running; });
    if (s->stop) return;
    if (!s->engine->finished()) {
      if (s->pacing.steps_per_second > 0) {
        const auto now = steady_clock::now();
        if (now < next_due) {
          s->cv.wait_until(lock, next_due);
          continue;  // re-check pause/abort
        }
        next_due = std::max(next_due, now - seconds(1)) +
                   duration_cast<steady_clock::duration>(duration<double>(1.0 / s->pacing.steps_per_second));
      }
      try {
        s->engine->tick();
      } catch (const std::exception& e) {
        s->error = e.what();
        if (!s->engine->finished()) s->engine->abort();
      }
      if (config_.snapshot_every > 0 && s->engine->step() - s->last_snapshot_step >= config_.snapshot_every &&
          !s->engine->finished()) {
        snapshot_all(*s);
      }
    }
    if (s->engine->finished()) {
      finalize(*s);
      return;
    }
    if (s->pacing.steps_per_second <= 0) {
      // let control calls in between ticks at full speed
      lock.unlock();
      std::this_thread::yield();
      lock.lock();
    }
  }
}

Answer SessionManager::interview(const std::string& id, const std::string& agent, const std::string& question) {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  if (s->state != SessionState::Paused && s->state != SessionState::Finished) {
    throw InvalidState("interviews need a paused or finished session; session " + id + " is " + to_string(s->state));
  }
  if (question.empty()) throw std::invalid_argument("question must be non-empty");
  return teamsim::interview(s->engine->agent(agent), question, *backend_, s->engine->step());
}

json SessionManager::results(const std::string& id) const {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  const auto& log = s->engine->log();
  json surveys = json::array();
  for (const auto& r : log.surveys) surveys.push_back(survey_response_to_json(r));
  json flags = json::array();
  for (const auto& f : log.survey_flags) flags.push_back(survey_flag_to_json(f));
  json j = {{"id", s->id},
            {"state", to_string(s->state)},
            {"metrics", log.metrics.is_null() ? metrics_to_json(compute_metrics(log)) : log.metrics},
            {"surveys", surveys},
            {"survey_flags", flags},
            {"log", "/sessions/" + s->id + "/log"}};
  if (log.outcome) j["outcome"] = {{"kind", to_string(log.outcome->kind)}, {"step", log.outcome->step}, {"aborted", log.outcome->aborted}};
  return j;
}

std::string SessionManager::log_document(const std::string& id) const {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  return export_log(s->engine->log());
}

}  // namespace teamsim
