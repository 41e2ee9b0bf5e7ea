#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace teamsim {

// Success-predicate tree. Atoms test world state; And/Or/Not combine them.
struct PredicateExpr {
  enum class Op {
    Always,               // constant
    EntityInRegion,       // named entity, or any entity of a kind, lies in region
    AllEntitiesInRegion,  // every live entity of kind lies (uncarried) in region
    AgentInRegion,
    CountAtLeast,         // at least n entities of kind lie in region
    StepAtMost,           // current step <= n
    And,
    Or,
    Not,
  };

  Op op = Op::Always;
  bool constant = false;
  std::string kind;    // entity kind selector (empty when selecting by name)
  std::string name;    // entity name selector
  std::string agent;
  std::string region;
  long n = 0;
  std::vector<PredicateExpr> children;

  bool operator==(const PredicateExpr&) const = default;

  int depth() const;
};

inline constexpr int kMaxPredicateDepth = 16;

namespace pred {
PredicateExpr always(bool value);
PredicateExpr entity_kind_in_region(std::string kind, std::string region);
PredicateExpr entity_named_in_region(std::string name, std::string region);
PredicateExpr all_in_region(std::string kind, std::string region);
PredicateExpr agent_in_region(std::string agent, std::string region);
PredicateExpr count_at_least(std::string kind, std::string region, long n);
PredicateExpr step_at_most(long n);
PredicateExpr all_of(std::vector<PredicateExpr> terms);
PredicateExpr any_of(std::vector<PredicateExpr> terms);
PredicateExpr negate(PredicateExpr term);
}  // namespace pred

nlohmann::json predicate_to_json(const PredicateExpr& p);
PredicateExpr predicate_from_json(const nlohmann::json& j);

// Human-readable one-liner, e.g. "all_entities_in_region(victim, Hospital)".
std::string describe(const PredicateExpr& p);

}  // namespace teamsim
