#pragma once

#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "teamsim/memory.hpp"
#include "teamsim/scenario.hpp"
#include "teamsim/world.hpp"

namespace teamsim {

namespace llm {
class CompletionBackend;
}

// What an agent believes about one entity, and when it learnt it.
struct EntityFact {
  std::string name;
  std::string kind;
  bool interactive = true;
  bool blocking = false;
  std::map<std::string, std::string> attributes;
  Cell cell;
  RegionId region = kNoRegion;
  long seen_step = 0;

  std::string attribute(const std::string& key) const;
  // Identity of the believed state; changes when the entity moves or an
  // attribute changes.
  std::string signature() const;
  bool operator==(const EntityFact&) const = default;
};

nlohmann::json fact_to_json(const EntityFact& f);
EntityFact fact_from_json(const nlohmann::json& j);

struct Teammate {
  std::string name;
  std::string role;
  std::vector<std::string> skills;
  bool operator==(const Teammate&) const = default;
};

struct Knowledge {
  std::set<RegionId> visited;
  std::map<std::string, EntityFact> entities;  // lying entities believed present
  std::vector<Teammate> teammates;
  std::map<std::string, long> gone;  // entity -> step it was last seen missing
  std::set<std::string> offered;     // fact signatures already shared or received
  long last_initiated = -1'000'000;

  // Newer facts replace older ones; facts older than a sighting of absence
  // are dropped. Returns true when the believed state changed.
  bool merge(const EntityFact& fact);
  void forget(const std::string& entity, long step);
  bool operator==(const Knowledge&) const = default;
};

enum class MessageKind { Outcome, Chat };

struct Message {
  long step = 0;
  MessageKind kind = MessageKind::Outcome;
  std::string from;
  std::string text;
  std::vector<EntityFact> facts;
  bool operator==(const Message&) const = default;
};

struct Invitation {
  long conversation = -1;
  std::string from;
  std::string topic;  // opening message text
  long issued_step = 0;
  bool operator==(const Invitation&) const = default;
};

struct EventResult {
  bool ok = true;
  std::string summary;
  std::string reason;  // rejection or failure reason, verbatim
  bool operator==(const EventResult&) const = default;
};

struct AgentState {
  AgentProfileSpec profile;
  int index = 0;
  Cell cell;
  std::optional<std::string> carrying;
  MemoryStore memory;
  std::deque<Message> pending_messages;
  std::deque<Invitation> invitations;
  std::optional<EventResult> last_result;
  Knowledge knowledge;

  const std::string& name() const { return profile.name; }
};

// --- observations ---------------------------------------------------------

struct VisibleEntity {
  std::string name;
  std::string kind;
  bool interactive = true;
  bool blocking = false;
  std::map<std::string, std::string> attributes;
  Cell cell;
  RegionId region = kNoRegion;
  bool operator==(const VisibleEntity&) const = default;
};

struct VisibleAgent {
  std::string name;
  Cell cell;
  std::optional<std::string> carrying;
  bool operator==(const VisibleAgent&) const = default;
};

struct Observation {
  std::string agent;
  Cell cell;
  RegionId region = kNoRegion;
  std::string region_name;
  std::optional<std::string> carrying;
  std::string carrying_kind;
  std::vector<VisibleEntity> entities;  // name order
  std::vector<VisibleAgent> agents;     // co-located (same region), agent index order
  std::optional<EventResult> last_result;
  std::vector<Message> messages;
  std::vector<Invitation> invitations;
  long step = 0;
  long remaining = 0;
  std::string goal;
  // Navigation view: static layout plus the cells blocked right now.
  std::shared_ptr<const Environment> env;
  BlockedMask blocked;
};

// Visible: lying entities in the agent's region, plus entities on door cells
// of that region's doors. Throws UnknownAgent.
Observation build_observation(const World& world, const AgentState& agent, long max_steps, const std::string& goal);

// Folds what the observation shows into knowledge. Entities believed to lie
// in the observed region but no longer visible are forgotten. Returns true
// when knowledge changed.
bool absorb_observation(Knowledge& k, const Observation& obs);

// --- decisions ------------------------------------------------------------

struct MoveTo {
  std::vector<Cell> path;  // starts at the agent's cell
  bool operator==(const MoveTo&) const = default;
};
struct PickUp {
  std::string entity;
  bool operator==(const PickUp&) const = default;
};
struct PutDown {
  std::string entity;
  bool operator==(const PutDown&) const = default;
};
struct UseOn {
  std::string entity;
  std::string verb;
  bool operator==(const UseOn&) const = default;
};
struct IdleFor {
  long steps = 1;
  bool operator==(const IdleFor&) const = default;
};

using ActionPayload = std::variant<MoveTo, PickUp, PutDown, UseOn, IdleFor>;

std::string action_name(const ActionPayload& a);  // move_to, pick_up, put_down, use_on, idle
nlohmann::json action_to_json(const ActionPayload& a);
ActionPayload action_from_json(const nlohmann::json& j);

struct Act {
  ActionPayload action;
  bool operator==(const Act&) const = default;
};
struct Communicate {
  std::vector<std::string> targets;
  std::string opening;
  std::vector<EntityFact> facts;
  bool operator==(const Communicate&) const = default;
};
struct Idle {
  long duration = 1;
  bool operator==(const Idle&) const = default;
};

struct Decision {
  std::variant<Act, Communicate, Idle> choice;
  std::string rationale;
  bool operator==(const Decision&) const = default;
};

Decision act(ActionPayload a, std::string rationale = {});
Decision idle(long duration = 1, std::string rationale = {});
// Throws NoTargets when targets is empty, UnknownAgent when a target is the
// speaker or not a teammate.
Decision communicate(const AgentState& self, std::vector<std::string> targets, std::string opening,
                     std::vector<EntityFact> facts = {}, std::string rationale = {});

nlohmann::json decision_to_json(const Decision& d);

// --- knowledge seeding and interviews -------------------------------------

// Duty text for well-known roles (case-insensitive), empty otherwise.
std::string role_duty(const std::string& role);

AgentState make_agent_state(const AgentProfileSpec& profile, int index,
                            std::shared_ptr<const Embedder> embedder = std::make_shared<HashEmbedder>());

// Seed records: identity and skills, role duty, goal, one per teammate,
// starting region, one per backstory entry.
void seed_knowledge(AgentState& agent, const Scenario& scenario);

struct Answer {
  std::string text;
  std::vector<long> retrieved;  // memory ids offered to the backend
  std::vector<long> cited;      // memory ids the answer refers to
};

// Top-k memories + question to the backend; appends the Q/A pair to memory.
// Throws PolicyFailure when the backend fails.
Answer interview(AgentState& agent, const std::string& question, llm::CompletionBackend& backend, long step,
                 std::size_t k = 5);

std::string render_memories(const std::vector<MemoryRecord>& records);

}  // namespace teamsim
