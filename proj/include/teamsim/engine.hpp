#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "teamsim/agent.hpp"
#include "teamsim/dialogue.hpp"
#include "teamsim/event_queue.hpp"
#include "teamsim/policy.hpp"
#include "teamsim/runlog.hpp"
#include "teamsim/scenario.hpp"
#include "teamsim/survey.hpp"
#include "teamsim/world.hpp"

namespace teamsim {

inline constexpr long kUseOnSteps = 3;
inline constexpr long kPickUpSteps = 1;
inline constexpr long kPutDownSteps = 1;
inline constexpr long kTurnSteps = 2;

struct ValidationVerdict {
  bool valid = true;
  std::string reason;  // non-empty when invalid

  static ValidationVerdict ok() { return {}; }
  static ValidationVerdict invalid(std::string why) { return {false, std::move(why)}; }
  bool operator==(const ValidationVerdict&) const = default;
};

// Optional judge consulted after the rule-based checks pass.
class ValidatorPolicy {
 public:
  virtual ~ValidatorPolicy() = default;
  // A veto reason, or nullopt to allow.
  virtual std::optional<std::string> veto(const Event& e, const World& world) = 0;
};

// Steps an action takes: moves in the path, 1 for pick-up/put-down, 3 for
// use-on, n for idle.
long action_duration(const ActionPayload& a);

// Rule-based admissibility of an action by `agent` in `world`; nullopt when
// admissible.
std::optional<std::string> action_problem(const World& world, const AgentProfileSpec& agent, const ActionPayload& a);

// The world change an admissible action resolves to, if any.
std::optional<WorldChange> action_change(const std::string& agent, const ActionPayload& a);

// Rule checks (paths open, reach, interactivity, skills, availability), then
// the judge if given. `busy` lists agents already committed to an event.
ValidationVerdict validate_event(const Event& e, const World& world, const std::vector<AgentProfileSpec>& members,
                                 ValidatorPolicy* judge = nullptr, const std::set<std::string>* busy = nullptr);

nlohmann::json event_to_json(const Event& e);

using PolicyBinding = std::map<std::string, std::shared_ptr<DecisionPolicy>>;

struct EngineOptions {
  std::optional<long> max_steps;  // overrides the scenario
  std::shared_ptr<ValidatorPolicy> judge;
  std::shared_ptr<SpeakerSelector> speaker_selector;
  int max_turns = kDefaultMaxTurns;
  long invitation_ttl = kInvitationTtl;
  std::shared_ptr<const Embedder> embedder;  // default: HashEmbedder(64)
};

struct TickReport {
  long step = 0;
  std::size_t resolved = 0;
  std::size_t deltas = 0;
  std::size_t decisions = 0;
  bool finished = false;
};

struct RunResult {
  Outcome outcome;
  RunLog log;
};

// Owns the world and drives perceive -> decide -> act in simulated time.
// Single-threaded; listeners are called synchronously for every record.
class Engine {
 public:
  using Listener = std::function<void(const LogRecord&)>;

  // Throws InvalidState when a member has no policy.
  Engine(Scenario scenario, PolicyBinding policies, EngineOptions options = {});

  void subscribe(Listener listener) { listeners_.push_back(std::move(listener)); }

  // Decision phase at step 0. Called by the first tick when not called.
  void start();
  TickReport tick();
  RunResult run();
  void abort();
  // Post-run survey of every agent; stored in the log, metrics recomputed.
  // Throws InvalidState before the run has finished.
  SurveyResult administer_survey(llm::CompletionBackend& backend, const std::vector<SurveyItem>& items,
                                 std::size_t k = 5);

  bool started() const { return started_; }
  bool finished() const { return outcome_.has_value(); }
  const std::optional<Outcome>& outcome() const { return outcome_; }
  long step() const { return world_.step; }
  long max_steps() const { return max_steps_; }
  const World& world() const { return world_; }
  const RunLog& log() const { return log_; }
  RunLog& mutable_log() { return log_; }
  const Scenario& scenario() const { return scenario_; }
  const std::vector<AgentState>& agents() const { return agents_; }
  AgentState& agent(const std::string& name);
  const std::map<long, Conversation>& conversations() const { return conversations_; }
  const EventQueue& queue() const { return queue_; }
  bool busy(const std::string& agent) const;

  ValidationVerdict validate(const Event& e) const;
  // Enqueues a validated event and marks its participants busy until due.
  // Throws ParticipantBusy.
  void schedule(Event e);
  Event make_action_event(int agent, ActionPayload action, std::string context);

 private:
  struct Talk {
    std::vector<std::vector<EntityFact>> facts;  // per transcript entry
    std::size_t scheduled = 0;                   // entries already given a turn event
  };

  const LogRecord& emit(RecordKind kind, const std::string& agent, nlohmann::json payload,
                        std::string rationale = {});
  void resolve(const Event& e);
  void resolve_action(const Event& e);
  void resolve_turn(const Event& e);
  void decision_phase();
  void decide_for(int i);
  void handle_invitations(int i, const Observation& obs);
  bool commit(int i, const Decision& d, ValidationVerdict& verdict);
  void expire_invitations();
  void settle(long conversation);
  void close_conversation(Conversation& c, const std::string& reason);
  void schedule_turn(long conversation);
  void notify(int i, EventResult result);
  void sync_agents();
  void remember_observation(int i, const Observation& obs);
  void finish(Outcome::Kind kind, bool aborted);

  Scenario scenario_;
  PolicyBinding policies_;
  EngineOptions options_;
  long max_steps_ = 0;
  World world_;
  std::vector<AgentState> agents_;
  std::vector<std::shared_ptr<DecisionPolicy>> policy_of_;
  std::vector<std::optional<long>> busy_;  // event id
  std::vector<std::optional<long>> held_;  // conversation id while pending
  EventQueue queue_;
  long next_event_id_ = 0;
  long next_conversation_id_ = 0;
  std::map<long, Conversation> conversations_;
  std::map<long, Talk> talk_;
  RunLog log_;
  std::vector<Listener> listeners_;
  std::optional<Outcome> outcome_;
  bool started_ = false;
};

// Builds scripted policies for every member.
PolicyBinding scripted_policies(const Scenario& scenario);
PolicyBinding uniform_policies(const Scenario& scenario, std::shared_ptr<DecisionPolicy> policy);

RunResult run_scenario(const Scenario& scenario, PolicyBinding policies, EngineOptions options = {});

}  // namespace teamsim
