#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "teamsim/agent.hpp"
#include "teamsim/dialogue.hpp"
#include "teamsim/evaluation.hpp"
#include "teamsim/predicate.hpp"

namespace teamsim {

namespace llm {
class CompletionBackend;
}

struct Utterance {
  std::string text;
  std::vector<EntityFact> facts;
  bool end = false;  // speaker closes the conversation after this turn
};

// Maps an agent's view to a Decision. Implementations throw PolicyFailure
// when they cannot produce one.
class DecisionPolicy {
 public:
  virtual ~DecisionPolicy() = default;
  virtual Decision decide(const Observation& obs, const AgentState& agent) = 0;
  // Listen (true) or ignore (false) an invitation at a decision point.
  virtual bool listen(const Observation& obs, const AgentState& agent, const Invitation& invitation) = 0;
  virtual Utterance speak(const Conversation& c, const Observation& obs, const AgentState& agent) = 0;
  virtual std::string id() const = 0;
};

inline constexpr int kMaxLeg = 10;
inline constexpr long kAskCooldown = 20;

// Rule table, first match wins:
//   1. share unshared discoveries (trust not low)
//   2. carrying: go to the delivery region, put down there
//   3. skill stabilize: stabilize the nearest known unstabilized critical entity
//   4. skill clear: clear the nearest known blocking obstacle
//   5. skill carry: fetch the nearest deliverable entity
//   6. explore the nearest unvisited region by path distance (ties by RegionId)
//   7. skill carry: wait beside the nearest entity still awaiting stabilization
//   8. low trust: ask teammates for news, at most every kAskCooldown steps
//   9. idle one step
// Movement is issued in legs of at most kMaxLeg cells.
class ScriptedPolicy final : public DecisionPolicy {
 public:
  explicit ScriptedPolicy(PredicateExpr goal) : deliveries_(delivery_targets(goal)), goal_(std::move(goal)) {}
  Decision decide(const Observation& obs, const AgentState& agent) override;
  bool listen(const Observation& obs, const AgentState& agent, const Invitation& invitation) override;
  Utterance speak(const Conversation& c, const Observation& obs, const AgentState& agent) override;
  std::string id() const override { return "scripted"; }

 private:
  std::vector<Delivery> deliveries_;
  PredicateExpr goal_;
};

// Facts worth telling teammates that the agent has not shared or heard yet.
std::vector<EntityFact> unshared_facts(const AgentState& agent, const std::vector<Delivery>& deliveries);
bool needs_stabilizing(const EntityFact& f);
bool deliverable_to(const EntityFact& f, const std::vector<Delivery>& deliveries, const Environment& env,
                    std::string* region = nullptr);

// --- model-backed policy --------------------------------------------------

inline constexpr const char* kPromptVersion = "teamsim-prompt/1";

// One line per currently legal move, in the reply grammar.
std::vector<std::string> allowed_actions(const Observation& obs, const AgentState& agent);

std::string decision_prompt(const Observation& obs, const AgentState& agent, const std::vector<MemoryRecord>& memories);
std::string decision_system_text(const AgentState& agent);

struct ParsedReply {
  std::optional<Decision> decision;
  std::string error;  // set when decision is empty
};

// Reply grammar (first non-empty line, keywords case-sensitive):
//   ACTION MOVE_TO <region name> | ACTION MOVE_TO <x>,<y>
//   ACTION PICK_UP <entity> | ACTION PUT_DOWN <entity> | ACTION USE_ON <entity> <verb>
//   COMMUNICATE <name>[,<name>...] :: <message>
//   IDLE <steps>
// optionally followed by a line "RATIONALE: <text>".
ParsedReply parse_decision_reply(const std::string& text, const Observation& obs, const AgentState& agent);

class LlmPolicy final : public DecisionPolicy {
 public:
  LlmPolicy(std::shared_ptr<llm::CompletionBackend> backend, std::size_t memory_k = 5)
      : backend_(std::move(backend)), k_(memory_k) {}
  Decision decide(const Observation& obs, const AgentState& agent) override;
  bool listen(const Observation& obs, const AgentState& agent, const Invitation& invitation) override;
  Utterance speak(const Conversation& c, const Observation& obs, const AgentState& agent) override;
  std::string id() const override { return "llm"; }

 private:
  std::shared_ptr<llm::CompletionBackend> backend_;
  std::size_t k_;
};

}  // namespace teamsim
