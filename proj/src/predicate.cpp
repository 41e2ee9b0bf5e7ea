#include "teamsim/predicate.hpp"

#include <algorithm>

#include "teamsim/error.hpp"

namespace teamsim {

using json = nlohmann::json;

int PredicateExpr::depth() const {
  int deepest = 0;
  for (const auto& c : children) deepest = std::max(deepest, c.depth());
  return deepest + 1;
}

namespace pred {

PredicateExpr always(bool value) {
  PredicateExpr p;
  p.op = PredicateExpr::Op::Always;
  p.constant = value;
  return p;
}

PredicateExpr entity_kind_in_region(std::string kind, std::string region) {
  PredicateExpr p;
  p.op = PredicateExpr::Op::EntityInRegion;
  p.kind = std::move(kind);
  p.region = std::move(region);
  return p;
}

PredicateExpr entity_named_in_region(std::string name, std::string region) {
  PredicateExpr p;
  p.op = PredicateExpr::Op::EntityInRegion;
  p.name = std::move(name);
  p.region = std::move(region);
  return p;
}

PredicateExpr all_in_region(std::string kind, std::string region) {
  PredicateExpr p;
  p.op = PredicateExpr::Op::AllEntitiesInRegion;
  p.kind = std::move(kind);
  p.region = std::move(region);
  return p;
}

PredicateExpr agent_in_region(std::string agent, std::string region) {
  PredicateExpr p;
  p.op = PredicateExpr::Op::AgentInRegion;
  p.agent = std::move(agent);
  p.region = std::move(region);
  return p;
}

PredicateExpr count_at_least(std::string kind, std::string region, long n) {
  PredicateExpr p;
  p.op = PredicateExpr::Op::CountAtLeast;
  p.kind = std::move(kind);
  p.region = std::move(region);
  p.n = n;
  return p;
}

PredicateExpr step_at_most(long n) {
  PredicateExpr p;
  p.op = PredicateExpr::Op::StepAtMost;
  p.n = n;
  return p;
}

PredicateExpr all_of(std::vector<PredicateExpr> terms) {
  PredicateExpr p;
  p.op = PredicateExpr::Op::And;
  p.children = std::move(terms);
  return p;
}

PredicateExpr any_of(std::vector<PredicateExpr> terms) {
  PredicateExpr p;
  p.op = PredicateExpr::Op::Or;
  p.children = std::move(terms);
  return p;
}

PredicateExpr negate(PredicateExpr term) {
  PredicateExpr p;
  p.op = PredicateExpr::Op::Not;
  p.children.push_back(std::move(term));
  return p;
}

}  // namespace pred

json predicate_to_json(const PredicateExpr& p) {
  using Op = PredicateExpr::Op;
  switch (p.op) {
    case Op::Always:
      return p.constant ? "always_true" : "always_false";
    case Op::EntityInRegion: {
      json body = {{"region", p.region}};
      if (!p.name.empty()) {
        body["name"] = p.name;
      } else {
        body["kind"] = p.kind;
      }
      return {{"entity_in_region", body}};
    }
    case Op::AllEntitiesInRegion:
      return {{"all_entities_in_region", {{"kind", p.kind}, {"region", p.region}}}};
    case Op::AgentInRegion:
      return {{"agent_in_region", {{"agent", p.agent}, {"region", p.region}}}};
    case Op::CountAtLeast:
      return {{"count_at_least", {{"kind", p.kind}, {"region", p.region}, {"n", p.n}}}};
    case Op::StepAtMost:
      return {{"step_at_most", p.n}};
    case Op::And:
    case Op::Or: {
      json terms = json::array();
      for (const auto& c : p.children) terms.push_back(predicate_to_json(c));
      return {{p.op == Op::And ? "and" : "or", terms}};
    }
    case Op::Not:
      return {{"not", predicate_to_json(p.children.at(0))}};
  }
  return nullptr;
}

namespace {

std::string str_field(const json& body, const char* key) {
  if (!body.contains(key) || !body[key].is_string()) throw MalformedLog(std::string("predicate field '") + key + "' missing");
  return body[key].get<std::string>();
}

}  // namespace

PredicateExpr predicate_from_json(const json& j) {
  if (j.is_string()) {
    if (j == "always_true") return pred::always(true);
    if (j == "always_false") return pred::always(false);
    throw MalformedLog("unknown predicate constant " + j.get<std::string>());
  }
  if (!j.is_object() || j.size() != 1) throw MalformedLog("predicate node must be a single-key object");
  const std::string key = j.begin().key();
  const json& body = j.begin().value();
  if (key == "entity_in_region") {
    if (body.contains("name")) return pred::entity_named_in_region(str_field(body, "name"), str_field(body, "region"));
    return pred::entity_kind_in_region(str_field(body, "kind"), str_field(body, "region"));
  }
  if (key == "all_entities_in_region") return pred::all_in_region(str_field(body, "kind"), str_field(body, "region"));
  if (key == "agent_in_region") return pred::agent_in_region(str_field(body, "agent"), str_field(body, "region"));
  if (key == "count_at_least") {
    return pred::count_at_least(str_field(body, "kind"), str_field(body, "region"), body.at("n").get<long>());
  }
  if (key == "step_at_most") return pred::step_at_most(body.get<long>());
  if (key == "and" || key == "or") {
    std::vector<PredicateExpr> terms;
    for (const auto& t : body) terms.push_back(predicate_from_json(t));
    return key == "and" ? pred::all_of(std::move(terms)) : pred::any_of(std::move(terms));
  }
  if (key == "not") return pred::negate(predicate_from_json(body));
  throw MalformedLog("unknown predicate operator " + key);
}

std::string describe(const PredicateExpr& p) {
  using Op = PredicateExpr::Op;
  auto join = [&](const char* op) {
    std::string out = std::string(op) + "(";
    for (std::size_t i = 0; i < p.children.size(); ++i) {
      if (i) out += ", ";
      out += describe(p.children[i]);
    }
    return out + ")";
  };
  switch (p.op) {
    case Op::Always:
      return p.constant ? "always_true" : "always_false";
    case Op::EntityInRegion:
      return "entity_in_region(" + (p.name.empty() ? p.kind : p.name) + ", " + p.region + ")";
    case Op::AllEntitiesInRegion:
      return "all_entities_in_region(" + p.kind + ", " + p.region + ")";
    case Op::AgentInRegion:
      return "agent_in_region(" + p.agent + ", " + p.region + ")";
    case Op::CountAtLeast:
      return "count_at_least(" + p.kind + ", " + p.region + ", " + std::to_string(p.n) + ")";
    case Op::StepAtMost:
      return "step_at_most(" + std::to_string(p.n) + ")";
    case Op::And:
      return join("and");
    case Op::Or:
      return join("or");
    case Op::Not:
      return join("not");
  }
  return "?";
}

}  // namespace teamsim
