#include "teamsim/evaluation.hpp"

#include <algorithm>

namespace teamsim {

namespace {

void collect_deliveries(const PredicateExpr& p, bool negated, std::vector<Delivery>& out) {
  using Op = PredicateExpr::Op;
  switch (p.op) {
    case Op::EntityInRegion:
    case Op::AllEntitiesInRegion:
    case Op::CountAtLeast:
      if (!negated) {
        Delivery d{p.kind, p.name, p.region};
        if (std::find(out.begin(), out.end(), d) == out.end()) out.push_back(d);
      }
      break;
    case Op::And:
    case Op::Or:
      for (const auto& c : p.children) collect_deliveries(c, negated, out);
      break;
    case Op::Not:
      for (const auto& c : p.children) collect_deliveries(c, !negated, out);
      break;
    default:
      break;
  }
}


RegionId region_id(const World& w, const std::string& name) {
  const Region* r = w.tree().find(name);
  return r ? r->id : kNoRegion;
}

bool lies_in(const World& w, const EntityState& e, RegionId region) {
  return region != kNoRegion && e.lying() && w.region_at(*e.cell) == region;
}

}  // namespace

bool evaluate_predicate(const PredicateExpr& p, const World& world) {
  using Op = PredicateExpr::Op;
  switch (p.op) {
    case Op::Always:
      return p.constant;
    case Op::EntityInRegion: {
      const RegionId r = region_id(world, p.region);
      return std::any_of(world.entities.begin(), world.entities.end(), [&](const EntityState& e) {
        const bool selected = p.name.empty() ? e.kind == p.kind : e.name == p.name;
        return selected && lies_in(world, e, r);
      });
    }
    case Op::AllEntitiesInRegion: {
      const RegionId r = region_id(world, p.region);
      return std::all_of(world.entities.begin(), world.entities.end(), [&](const EntityState& e) {
        return e.kind != p.kind || e.removed || lies_in(world, e, r);
      });
    }
    case Op::AgentInRegion: {
      const AgentBody* a = world.agent(p.agent);
      const RegionId r = region_id(world, p.region);
      return a && r != kNoRegion && world.region_at(a->cell) == r;
    }
    case Op::CountAtLeast: {
      const RegionId r = region_id(world, p.region);
      const long count = std::count_if(world.entities.begin(), world.entities.end(),
                                       [&](const EntityState& e) { return e.kind == p.kind && lies_in(world, e, r); });
      return count >= p.n;
    }
    case Op::StepAtMost:
      return world.step <= p.n;
    case Op::And:
      return std::all_of(p.children.begin(), p.children.end(),
                         [&](const PredicateExpr& c) { return evaluate_predicate(c, world); });
    case Op::Or:
      return std::any_of(p.children.begin(), p.children.end(),
                         [&](const PredicateExpr& c) { return evaluate_predicate(c, world); });
    case Op::Not:
      return !evaluate_predicate(p.children.at(0), world);
  }
  return false;
}

std::vector<Delivery> delivery_targets(const PredicateExpr& goal) {
  std::vector<Delivery> out;
  collect_deliveries(goal, false, out);
  return out;
}

std::vector<std::string> delivered_entities(const std::vector<Delivery>& deliveries, const World& world) {
  std::vector<std::string> out;
  for (const auto& e : world.entities) {
    if (!e.lying()) continue;
    for (const auto& d : deliveries) {
      const bool selected = d.name.empty() ? (!d.kind.empty() && d.kind == e.kind) : d.name == e.name;
      if (selected && world.region_name(world.region_at(*e.cell)) == d.region) {
        out.push_back(e.name);
        break;
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace teamsim
