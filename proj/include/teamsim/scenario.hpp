#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "teamsim/predicate.hpp"

namespace teamsim {

inline constexpr int kScenarioFormatVersion = 1;
inline constexpr int kMinRoomSide = 3;
inline constexpr int kMaxGridSide = 256;  // including the wall ring

enum class TrustLevel { Low, High, Unspecified };

std::string to_string(TrustLevel t);
std::optional<TrustLevel> trust_level_from_string(std::string_view s);

// width/height are the walkable extent; the generated grid adds a wall ring.
struct EnvSpec {
  int width = 0;
  int height = 0;
  int num_regions = 1;
  std::vector<std::string> region_name_hints;
  bool operator==(const EnvSpec&) const = default;
};

struct AgentProfileSpec {
  std::string name;
  std::string role;
  std::map<std::string, std::string> demographics;
  std::map<std::string, double> personality;
  std::vector<std::string> skills;
  std::vector<std::string> backstory;
  TrustLevel trust_level = TrustLevel::Unspecified;

  bool has_skill(std::string_view skill) const;
  bool operator==(const AgentProfileSpec&) const = default;
};

struct EntitySpec {
  std::string name;
  std::string kind;
  bool interactive = true;
  std::optional<std::string> region;
  std::map<std::string, std::string> attributes;

  // Blocking entities occupy their cell exclusively and cannot be walked
  // through. Attribute "blocking" overrides; otherwise obstacles block.
  bool blocking() const;
  bool operator==(const EntitySpec&) const = default;
};

struct GoalSpec {
  std::string statement;
  PredicateExpr predicate;
  bool operator==(const GoalSpec&) const = default;
};

struct Scenario {
  std::string id;
  std::string title;
  std::string description;
  EnvSpec env_spec;
  std::vector<AgentProfileSpec> members;
  std::vector<EntitySpec> entities;
  GoalSpec goal;
  long max_steps = 0;
  std::uint64_t seed = 0;
  std::optional<std::string> start_region;

  const AgentProfileSpec* member(std::string_view name) const;
  bool operator==(const Scenario&) const = default;
};

// Throws SyntaxError (malformed YAML, with line/column) or SemanticError
// (type invariant violated or unknown field, with field path).
Scenario parse_scenario(std::string_view document);
Scenario load_scenario_file(const std::string& path);
std::string serialize_scenario(const Scenario& s);

struct Diagnostic {
  enum class Severity { Error, Warning };
  Severity severity = Severity::Error;
  std::string path;
  std::string message;
  bool operator==(const Diagnostic&) const = default;
};

std::string to_string(const Diagnostic& d);
bool has_errors(const std::vector<Diagnostic>& diags);

// Runnability checks (capacity, references). Pure.
std::vector<Diagnostic> validate_scenario(const Scenario& s);

// Maximum number of >= 3x3 rooms separated by one-cell walls that a
// guillotine partition can carve from a w x h room.
long room_capacity(int width, int height);

// Final region names in leaf order: hints first, then "Room-k".
std::vector<std::string> region_names(const EnvSpec& env);

}  // namespace teamsim
