#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "teamsim/agent.hpp"
#include "teamsim/engine.hpp"
#include "teamsim/scenario.hpp"

namespace teamsim {

namespace llm {
class CompletionBackend;
}

enum class SessionState { NotStarted, Running, Paused, Finished };
std::string to_string(SessionState s);

struct ServiceConfig {
  std::size_t max_sessions = 8;
  double min_steps_per_second = 0.1;
  double max_steps_per_second = 1000.0;
  std::size_t subscriber_buffer = 4096;  // messages; overflow drops the subscriber
  long snapshot_every = 50;              // steps between broadcast snapshots; 0 disables
  std::string log_dir;                   // finished logs are written here when set
  bool survey_on_finish = true;
};

// Steps per second; 0 runs at full speed.
struct Pacing {
  double steps_per_second = 0.0;
};

// One message of a session's event stream. seq strictly increases per
// subscriber. Types: snapshot, record, state, gap, end.
struct StreamMessage {
  std::uint64_t seq = 0;
  std::string type;
  nlohmann::json data;
};

nlohmann::json stream_message_to_json(const StreamMessage& m);

class Subscription {
 public:
  explicit Subscription(std::size_t capacity) : capacity_(capacity) {}

  // Waits up to `timeout`; nullopt on timeout or once closed and drained.
  std::optional<StreamMessage> next(std::chrono::milliseconds timeout);
  bool closed() const;
  // Subscriber-side cancel.
  void cancel();

  // Publisher side. Returns false once the subscription is closed.
  bool push(StreamMessage m);
  void close();

 private:
  std::size_t capacity_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<StreamMessage> queue_;
  bool closed_ = false;
};

struct CreateResult {
  std::optional<std::string> id;
  std::vector<Diagnostic> diagnostics;
};

struct SessionOptions {
  std::string policy = "scripted";  // scripted | llm
};

class SessionManager {
 public:
  // `backend` answers interviews, surveys and llm-policy decisions; a
  // TemplateBackend when null.
  explicit SessionManager(ServiceConfig config = {}, std::shared_ptr<llm::CompletionBackend> backend = nullptr);
  ~SessionManager();
  SessionManager(const SessionManager&) = delete;
  SessionManager& operator=(const SessionManager&) = delete;

  // Diagnostics (and no id) when the document does not parse or validate.
  // Throws InvalidState when the session limit is reached.
  CreateResult create_session(const std::string& document, SessionOptions options = {});
  std::vector<std::string> list() const;
  void remove(const std::string& id);

  nlohmann::json describe(const std::string& id) const;
  SessionState state(const std::string& id) const;

  // Edits: [{name, role?, skills?, backstory?, trust_level?, demographics?,
  // personality?}]. NotStarted only.
  std::vector<Diagnostic> update_agents(const std::string& id, const nlohmann::json& edits);

  void start(const std::string& id, Pacing pacing = {});
  void pause(const std::string& id);
  void resume(const std::string& id);
  void abort(const std::string& id);
  // True once Finished within `timeout`.
  bool wait_finished(const std::string& id, std::chrono::milliseconds timeout) const;

  // First message is a snapshot of the current world.
  std::shared_ptr<Subscription> subscribe(const std::string& id);

  // Paused or Finished only.
  Answer interview(const std::string& id, const std::string& agent, const std::string& question);

  nlohmann::json results(const std::string& id) const;
  std::string log_document(const std::string& id) const;

  const ServiceConfig& config() const { return config_; }

 private:
  struct Session;
  std::shared_ptr<Session> find(const std::string& id) const;
  void worker(std::shared_ptr<Session> s);
  void publish(Session& s, const std::string& type, nlohmann::json data);
  void snapshot_all(Session& s);
  void rebuild_engine(Session& s);
  void finalize(Session& s);

  ServiceConfig config_;
  std::shared_ptr<llm::CompletionBackend> backend_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  long next_id_ = 1;
};

// Applies one profile edit; SemanticError on unknown fields or bad values.
void apply_profile_edit(AgentProfileSpec& profile, const nlohmann::json& edit, const std::string& path);

}  // namespace teamsim
