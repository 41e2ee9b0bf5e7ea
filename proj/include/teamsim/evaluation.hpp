#pragma once

#include <string>
#include <vector>

#include "teamsim/predicate.hpp"
#include "teamsim/world.hpp"

namespace teamsim {

// An entity lies in a region when it is live, not carried, and its cell
// belongs to the region. Unknown region names never match.
bool evaluate_predicate(const PredicateExpr& p, const World& world);

// Where the goal wants entities to end up: one entry per positive
// in-region atom (negated atoms are skipped).
struct Delivery {
  std::string kind;  // empty when selecting by name
  std::string name;
  std::string region;
  bool operator==(const Delivery&) const = default;
};
std::vector<Delivery> delivery_targets(const PredicateExpr& goal);

// Live entities lying in the region their delivery atom names, name order.
std::vector<std::string> delivered_entities(const std::vector<Delivery>& deliveries, const World& world);

}  // namespace teamsim
