#include "teamsim/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "teamsim/error.hpp"

namespace teamsim {

std::string to_string(TrustLevel t) {
  switch (t) {
    case TrustLevel::Low:
      return "low";
    case TrustLevel::High:
      return "high";
    case TrustLevel::Unspecified:
      return "unspecified";
  }
  return "unspecified";
}

std::optional<TrustLevel> trust_level_from_string(std::string_view s) {
  if (s == "low") return TrustLevel::Low;
  if (s == "high") return TrustLevel::High;
  if (s == "unspecified") return TrustLevel::Unspecified;
  return std::nullopt;
}

bool AgentProfileSpec::has_skill(std::string_view skill) const {
  return std::find(skills.begin(), skills.end(), skill) != skills.end();
}

bool EntitySpec::blocking() const {
  if (auto it = attributes.find("blocking"); it != attributes.end()) return it->second == "true";
  return kind == "obstacle";
}

const AgentProfileSpec* Scenario::member(std::string_view name) const {
  for (const auto& m : members) {
    if (m.name == name) return &m;
  }
  return nullptr;
}

long room_capacity(int width, int height) {
  if (width < kMinRoomSide || height < kMinRoomSide) return 0;
  return static_cast<long>((width + 1) / (kMinRoomSide + 1)) * ((height + 1) / (kMinRoomSide + 1));
}

std::vector<std::string> region_names(const EnvSpec& env) {
  std::vector<std::string> names;
  for (int i = 0; i < env.num_regions; ++i) {
    if (i < static_cast<int>(env.region_name_hints.size())) {
      names.push_back(env.region_name_hints[i]);
    } else {
      names.push_back("Room-" + std::to_string(i + 1));
    }
  }
  return names;
}

std::string to_string(const Diagnostic& d) {
  return std::string(d.severity == Diagnostic::Severity::Error ? "error" : "warning") + ": " + d.path + ": " + d.message;
}

bool has_errors(const std::vector<Diagnostic>& diags) {
  return std::any_of(diags.begin(), diags.end(),
                     [](const Diagnostic& d) { return d.severity == Diagnostic::Severity::Error; });
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

std::string join_path(const std::string& base, const std::string& key) { return base.empty() ? key : base + "." + key; }

std::string index_path(const std::string& base, std::size_t i) { return base + "[" + std::to_string(i) + "]"; }

const std::string& scalar(const YAML::Node& node, const std::string& path) {
  if (!node.IsScalar()) throw SemanticError(path, "must be a scalar");
  return node.Scalar();
}

std::string as_string(const YAML::Node& node, const std::string& path) {
  if (node.IsNull()) return "";
  return scalar(node, path);
}

template <typename Int>
Int as_integer(const YAML::Node& node, const std::string& path) {
  const auto& text = scalar(node, path);
  Int value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) throw SemanticError(path, "must be an integer");
  return value;
}

double as_number(const YAML::Node& node, const std::string& path) {
  const auto& text = scalar(node, path);
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size()) throw SemanticError(path, "must be a number");
  if (!std::isfinite(v)) throw SemanticError(path, "must be finite");
  return v;
}

bool as_bool(const YAML::Node& node, const std::string& path) {
  const auto& text = scalar(node, path);
  if (text == "true") return true;
  if (text == "false") return false;
  throw SemanticError(path, "must be true or false");
}

// A YAML mapping with key tracking: remaining keys are rejected on finish().
class Fields {
 public:
  Fields(const YAML::Node& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node.IsMap()) throw SemanticError(path_, "must be a mapping");
    for (const auto& kv : node) {
      const auto key = kv.first.as<std::string>();
      if (!keys_.insert(key).second) throw SemanticError(join_path(path_, key), "duplicate key");
    }
  }

  std::optional<YAML::Node> take(const std::string& key) {
    if (keys_.erase(key) == 0) return std::nullopt;
    return node_[key];
  }

  YAML::Node require(const std::string& key) {
    auto n = take(key);
    if (!n) throw SemanticError(join_path(path_, key), "is required");
    return *n;
  }

  std::string path(const std::string& key) const { return join_path(path_, key); }

  void finish() const {
    if (!keys_.empty()) throw SemanticError(join_path(path_, *keys_.begin()), "unknown field");
  }

 private:
  YAML::Node node_;
  std::string path_;
  std::set<std::string> keys_;
};

std::vector<std::string> string_list(const YAML::Node& node, const std::string& path) {
  if (node.IsNull()) return {};
  if (!node.IsSequence()) throw SemanticError(path, "must be a list");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < node.size(); ++i) out.push_back(as_string(node[i], index_path(path, i)));
  return out;
}

std::map<std::string, std::string> string_map(const YAML::Node& node, const std::string& path) {
  std::map<std::string, std::string> out;
  if (node.IsNull()) return out;
  if (!node.IsMap()) throw SemanticError(path, "must be a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!out.emplace(key, as_string(kv.second, join_path(path, key))).second) {
      throw SemanticError(join_path(path, key), "duplicate key");
    }
  }
  return out;
}

PredicateExpr parse_predicate(const YAML::Node& node, const std::string& path) {
  if (node.IsScalar()) {
    if (node.Scalar() == "always_true") return pred::always(true);
    if (node.Scalar() == "always_false") return pred::always(false);
    throw SemanticError(path, "unknown predicate '" + node.Scalar() + "'");
  }
  if (!node.IsMap() || node.size() != 1) throw SemanticError(path, "predicate must have exactly one operator");
  const auto op = node.begin()->first.as<std::string>();
  const YAML::Node body = node.begin()->second;
  const std::string at = join_path(path, op);

  if (op == "and" || op == "or") {
    if (!body.IsSequence() || body.size() == 0) throw SemanticError(at, "must be a non-empty list");
    std::vector<PredicateExpr> terms;
    for (std::size_t i = 0; i < body.size(); ++i) terms.push_back(parse_predicate(body[i], index_path(at, i)));
    return op == "and" ? pred::all_of(std::move(terms)) : pred::any_of(std::move(terms));
  }
  if (op == "not") return pred::negate(parse_predicate(body, at));
  if (op == "step_at_most") return pred::step_at_most(as_integer<long>(body, at));

  Fields f(body, at);
  PredicateExpr p;
  if (op == "entity_in_region") {
    auto name = f.take("name");
    auto kind = f.take("kind");
    if (name.has_value() == kind.has_value()) throw SemanticError(at, "needs exactly one of name or kind");
    const std::string region = as_string(f.require("region"), f.path("region"));
    p = name ? pred::entity_named_in_region(as_string(*name, f.path("name")), region)
             : pred::entity_kind_in_region(as_string(*kind, f.path("kind")), region);
  } else if (op == "all_entities_in_region") {
    const auto kind = as_string(f.require("kind"), f.path("kind"));
    p = pred::all_in_region(kind, as_string(f.require("region"), f.path("region")));
  } else if (op == "agent_in_region") {
    const auto agent = as_string(f.require("agent"), f.path("agent"));
    p = pred::agent_in_region(agent, as_string(f.require("region"), f.path("region")));
  } else if (op == "count_at_least") {
    const auto kind = as_string(f.require("kind"), f.path("kind"));
    const auto region = as_string(f.require("region"), f.path("region"));
    const long n = as_integer<long>(f.require("n"), f.path("n"));
    if (n < 0) throw SemanticError(f.path("n"), "must be >= 0");
    p = pred::count_at_least(kind, region, n);
  } else {
    throw SemanticError(at, "unknown predicate operator");
  }
  f.finish();
  return p;
}

EnvSpec parse_env(const YAML::Node& node, const std::string& path) {
  Fields f(node, path);
  EnvSpec env;
  env.width = as_integer<int>(f.require("width"), f.path("width"));
  env.height = as_integer<int>(f.require("height"), f.path("height"));
  env.num_regions = as_integer<int>(f.require("num_regions"), f.path("num_regions"));
  if (auto n = f.take("region_name_hints")) env.region_name_hints = string_list(*n, f.path("region_name_hints"));
  f.finish();
  if (env.width < 4) throw SemanticError(f.path("width"), "must be >= 4");
  if (env.height < 4) throw SemanticError(f.path("height"), "must be >= 4");
  if (env.num_regions < 1) throw SemanticError(f.path("num_regions"), "must be >= 1");
  return env;
}

AgentProfileSpec parse_member(const YAML::Node& node, const std::string& path) {
  Fields f(node, path);
  AgentProfileSpec m;
  m.name = as_string(f.require("name"), f.path("name"));
  if (m.name.empty()) throw SemanticError(f.path("name"), "must be non-empty");
  if (auto n = f.take("role")) m.role = as_string(*n, f.path("role"));
  if (auto n = f.take("demographics")) m.demographics = string_map(*n, f.path("demographics"));
  if (auto n = f.take("personality")) {
    const auto at = f.path("personality");
    if (!n->IsNull()) {
      if (!n->IsMap()) throw SemanticError(at, "must be a mapping");
      for (const auto& kv : *n) {
        const auto trait = kv.first.as<std::string>();
        m.personality[trait] = as_number(kv.second, join_path(at, trait));
      }
    }
  }
  if (auto n = f.take("skills")) m.skills = string_list(*n, f.path("skills"));
  if (auto n = f.take("backstory")) m.backstory = string_list(*n, f.path("backstory"));
  if (auto n = f.take("trust_level")) {
    auto t = trust_level_from_string(as_string(*n, f.path("trust_level")));
    if (!t) throw SemanticError(f.path("trust_level"), "must be low, high or unspecified");
    m.trust_level = *t;
  }
  f.finish();
  return m;
}

EntitySpec parse_entity(const YAML::Node& node, const std::string& path) {
  Fields f(node, path);
  EntitySpec e;
  e.name = as_string(f.require("name"), f.path("name"));
  if (e.name.empty()) throw SemanticError(f.path("name"), "must be non-empty");
  e.kind = as_string(f.require("kind"), f.path("kind"));
  if (auto n = f.take("interactive")) e.interactive = as_bool(*n, f.path("interactive"));
  if (auto n = f.take("region")) {
    if (!n->IsNull()) e.region = as_string(*n, f.path("region"));
  }
  if (auto n = f.take("attributes")) e.attributes = string_map(*n, f.path("attributes"));
  f.finish();
  return e;
}

Scenario parse_root(const YAML::Node& root) {
  Fields f(root, "");
  const long version = as_integer<long>(f.require("format_version"), "format_version");
  if (version != kScenarioFormatVersion) {
    throw SemanticError("format_version", "unsupported version " + std::to_string(version));
  }

  Scenario s;
  if (auto n = f.take("id")) s.id = as_string(*n, "id");
  if (auto n = f.take("title")) s.title = as_string(*n, "title");
  if (auto n = f.take("description")) s.description = as_string(*n, "description");
  s.seed = as_integer<std::uint64_t>(f.require("seed"), "seed");
  s.max_steps = as_integer<long>(f.require("max_steps"), "max_steps");
  if (s.max_steps < 1) throw SemanticError("max_steps", "must be >= 1");
  s.env_spec = parse_env(f.require("env_spec"), "env_spec");
  if (auto n = f.take("start_region")) {
    if (!n->IsNull()) s.start_region = as_string(*n, "start_region");
  }

  const YAML::Node members = f.require("members");
  if (!members.IsSequence() || members.size() == 0) throw SemanticError("members", "must be a non-empty list");
  std::set<std::string> member_names;
  for (std::size_t i = 0; i < members.size(); ++i) {
    const auto path = index_path("members", i);
    s.members.push_back(parse_member(members[i], path));
    if (!member_names.insert(s.members.back().name).second) throw SemanticError(path + ".name", "duplicate");
  }

  if (auto entities = f.take("entities")) {
    if (!entities->IsNull()) {
      if (!entities->IsSequence()) throw SemanticError("entities", "must be a list");
      std::set<std::string> entity_names;
      for (std::size_t i = 0; i < entities->size(); ++i) {
        const auto path = index_path("entities", i);
        s.entities.push_back(parse_entity((*entities)[i], path));
        if (!entity_names.insert(s.entities.back().name).second) throw SemanticError(path + ".name", "duplicate");
      }
    }
  }

  Fields goal(f.require("goal"), "goal");
  if (auto n = goal.take("statement")) s.goal.statement = as_string(*n, "goal.statement");
  s.goal.predicate = parse_predicate(goal.require("predicate"), "goal.predicate");
  goal.finish();

  f.finish();
  return s;
}

}  // namespace

Scenario parse_scenario(std::string_view document) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(document));
  } catch (const YAML::ParserException& e) {
    throw SyntaxError("malformed scenario document: " + e.msg, e.mark.line + 1, e.mark.column + 1);
  }
  if (!root.IsMap()) throw SyntaxError("scenario document must be a mapping", 1, 1);
  return parse_root(root);
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFound("cannot open scenario file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

void emit_predicate(YAML::Emitter& out, const PredicateExpr& p) {
  using Op = PredicateExpr::Op;
  auto str = [&](const std::string& v) { out << YAML::DoubleQuoted << v; };
  switch (p.op) {
    case Op::Always:
      out << (p.constant ? "always_true" : "always_false");
      return;
    case Op::And:
    case Op::Or:
      out << YAML::BeginMap << YAML::Key << (p.op == Op::And ? "and" : "or") << YAML::Value << YAML::BeginSeq;
      for (const auto& c : p.children) emit_predicate(out, c);
      out << YAML::EndSeq << YAML::EndMap;
      return;
    case Op::Not:
      out << YAML::BeginMap << YAML::Key << "not" << YAML::Value;
      emit_predicate(out, p.children.at(0));
      out << YAML::EndMap;
      return;
    case Op::StepAtMost:
      out << YAML::BeginMap << YAML::Key << "step_at_most" << YAML::Value << p.n << YAML::EndMap;
      return;
    default:
      break;
  }
  out << YAML::BeginMap << YAML::Key;
  switch (p.op) {
    case Op::EntityInRegion:
      out << "entity_in_region" << YAML::Value << YAML::BeginMap;
      if (!p.name.empty()) {
        out << YAML::Key << "name" << YAML::Value;
        str(p.name);
      } else {
        out << YAML::Key << "kind" << YAML::Value;
        str(p.kind);
      }
      break;
    case Op::AllEntitiesInRegion:
      out << "all_entities_in_region" << YAML::Value << YAML::BeginMap << YAML::Key << "kind" << YAML::Value;
      str(p.kind);
      break;
    case Op::AgentInRegion:
      out << "agent_in_region" << YAML::Value << YAML::BeginMap << YAML::Key << "agent" << YAML::Value;
      str(p.agent);
      break;
    case Op::CountAtLeast:
      out << "count_at_least" << YAML::Value << YAML::BeginMap << YAML::Key << "kind" << YAML::Value;
      str(p.kind);
      out << YAML::Key << "n" << YAML::Value << p.n;
      break;
    default:
      break;
  }
  out << YAML::Key << "region" << YAML::Value;
  str(p.region);
  out << YAML::EndMap << YAML::EndMap;
}

void emit_string_map(YAML::Emitter& out, const std::map<std::string, std::string>& m) {
  out << YAML::BeginMap;
  for (const auto& [k, v] : m) out << YAML::Key << YAML::DoubleQuoted << k << YAML::Value << YAML::DoubleQuoted << v;
  out << YAML::EndMap;
}

void emit_string_list(YAML::Emitter& out, const std::vector<std::string>& v) {
  out << YAML::BeginSeq;
  for (const auto& s : v) out << YAML::DoubleQuoted << s;
  out << YAML::EndSeq;
}

}  // namespace

std::string serialize_scenario(const Scenario& s) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "format_version" << YAML::Value << kScenarioFormatVersion;
  out << YAML::Key << "id" << YAML::Value << YAML::DoubleQuoted << s.id;
  out << YAML::Key << "title" << YAML::Value << YAML::DoubleQuoted << s.title;
  out << YAML::Key << "description" << YAML::Value << YAML::DoubleQuoted << s.description;
  out << YAML::Key << "seed" << YAML::Value << s.seed;
  out << YAML::Key << "max_steps" << YAML::Value << s.max_steps;
  if (s.start_region) out << YAML::Key << "start_region" << YAML::Value << YAML::DoubleQuoted << *s.start_region;

  out << YAML::Key << "env_spec" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "width" << YAML::Value << s.env_spec.width;
  out << YAML::Key << "height" << YAML::Value << s.env_spec.height;
  out << YAML::Key << "num_regions" << YAML::Value << s.env_spec.num_regions;
  out << YAML::Key << "region_name_hints" << YAML::Value << YAML::Flow;
  emit_string_list(out, s.env_spec.region_name_hints);
  out << YAML::EndMap;

  out << YAML::Key << "members" << YAML::Value << YAML::BeginSeq;
  for (const auto& m : s.members) {
    out << YAML::BeginMap;
    out << YAML::Key << "name" << YAML::Value << YAML::DoubleQuoted << m.name;
    out << YAML::Key << "role" << YAML::Value << YAML::DoubleQuoted << m.role;
    out << YAML::Key << "demographics" << YAML::Value;
    emit_string_map(out, m.demographics);
    out << YAML::Key << "personality" << YAML::Value << YAML::BeginMap;
    for (const auto& [k, v] : m.personality) out << YAML::Key << YAML::DoubleQuoted << k << YAML::Value << v;
    out << YAML::EndMap;
    out << YAML::Key << "skills" << YAML::Value << YAML::Flow;
    emit_string_list(out, m.skills);
    out << YAML::Key << "backstory" << YAML::Value;
    emit_string_list(out, m.backstory);
    out << YAML::Key << "trust_level" << YAML::Value << to_string(m.trust_level);
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;

  out << YAML::Key << "entities" << YAML::Value << YAML::BeginSeq;
  for (const auto& e : s.entities) {
    out << YAML::BeginMap;
    out << YAML::Key << "name" << YAML::Value << YAML::DoubleQuoted << e.name;
    out << YAML::Key << "kind" << YAML::Value << YAML::DoubleQuoted << e.kind;
    out << YAML::Key << "interactive" << YAML::Value << (e.interactive ? "true" : "false");
    if (e.region) out << YAML::Key << "region" << YAML::Value << YAML::DoubleQuoted << *e.region;
    out << YAML::Key << "attributes" << YAML::Value;
    emit_string_map(out, e.attributes);
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;

  out << YAML::Key << "goal" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "statement" << YAML::Value << YAML::DoubleQuoted << s.goal.statement;
  out << YAML::Key << "predicate" << YAML::Value;
  emit_predicate(out, s.goal.predicate);
  out << YAML::EndMap;

  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

// ---------------------------------------------------------------------------
// Validation

namespace {

struct PredicateContext {
  std::set<std::string> kinds;
  std::set<std::string> entities;
  std::set<std::string> regions;
  std::set<std::string> agents;
};

void check_predicate(const PredicateExpr& p, const std::string& path, const PredicateContext& ctx, int depth,
                     std::vector<Diagnostic>& out) {
  using Op = PredicateExpr::Op;
  auto error = [&](const std::string& at, const std::string& msg) {
    out.push_back({Diagnostic::Severity::Error, at, msg});
  };
  if (depth > kMaxPredicateDepth) {
    error(path, "predicate deeper than " + std::to_string(kMaxPredicateDepth));
    return;
  }
  auto region = [&](const std::string& at) {
    if (!ctx.regions.count(p.region)) error(at + ".region", "unknown region '" + p.region + "'");
  };
  auto kind = [&](const std::string& at) {
    if (!ctx.kinds.count(p.kind)) error(at + ".kind", "undeclared entity kind '" + p.kind + "'");
  };
  switch (p.op) {
    case Op::Always:
    case Op::StepAtMost:
      return;
    case Op::EntityInRegion: {
      const auto at = path + ".entity_in_region";
      if (!p.name.empty()) {
        if (!ctx.entities.count(p.name)) error(at + ".name", "undeclared entity '" + p.name + "'");
      } else {
        kind(at);
      }
      region(at);
      return;
    }
    case Op::AllEntitiesInRegion:
      kind(path + ".all_entities_in_region");
      region(path + ".all_entities_in_region");
      return;
    case Op::CountAtLeast:
      kind(path + ".count_at_least");
      region(path + ".count_at_least");
      return;
    case Op::AgentInRegion: {
      const auto at = path + ".agent_in_region";
      if (!ctx.agents.count(p.agent)) error(at + ".agent", "unknown agent '" + p.agent + "'");
      region(at);
      return;
    }
    case Op::And:
    case Op::Or:
      for (std::size_t i = 0; i < p.children.size(); ++i) {
        check_predicate(p.children[i], path + (p.op == Op::And ? ".and" : ".or") + "[" + std::to_string(i) + "]", ctx,
                        depth + 1, out);
      }
      return;
    case Op::Not:
      check_predicate(p.children.at(0), path + ".not", ctx, depth + 1, out);
      return;
  }
}

}  // namespace

std::vector<Diagnostic> validate_scenario(const Scenario& s) {
  std::vector<Diagnostic> out;
  auto error = [&](std::string path, std::string msg) {
    out.push_back({Diagnostic::Severity::Error, std::move(path), std::move(msg)});
  };
  auto warning = [&](std::string path, std::string msg) {
    out.push_back({Diagnostic::Severity::Warning, std::move(path), std::move(msg)});
  };

  const auto& env = s.env_spec;
  const int side_limit = kMaxGridSide - 2;
  if (env.width > side_limit) error("env_spec.width", "exceeds " + std::to_string(side_limit));
  if (env.height > side_limit) error("env_spec.height", "exceeds " + std::to_string(side_limit));
  const long capacity = room_capacity(env.width, env.height);
  if (env.num_regions > capacity) {
    error("env_spec.num_regions", "insufficient area: " + std::to_string(env.width) + "x" + std::to_string(env.height) +
                                      " admits at most " + std::to_string(capacity) + " regions of 3x3");
  }
  if (static_cast<int>(env.region_name_hints.size()) > env.num_regions) {
    error("env_spec.region_name_hints", "more names than num_regions");
  }

  const auto names = region_names(env);
  std::set<std::string> regions;
  for (std::size_t i = 0; i < names.size(); ++i) {
    const auto path = "env_spec.region_name_hints[" + std::to_string(i) + "]";
    if (names[i].empty()) error(path, "empty region name");
    if (!regions.insert(names[i]).second) {
      error(i < env.region_name_hints.size() ? path : std::string("env_spec.region_name_hints"),
            "duplicate region name '" + names[i] + "'");
    }
  }
  for (std::size_t i = env.num_regions; i < env.region_name_hints.size(); ++i) regions.insert(env.region_name_hints[i]);

  if (s.start_region && !regions.count(*s.start_region)) {
    error("start_region", "unknown region hint '" + *s.start_region + "'");
  }

  PredicateContext ctx;
  ctx.regions = regions;
  for (std::size_t i = 0; i < s.entities.size(); ++i) {
    const auto& e = s.entities[i];
    ctx.kinds.insert(e.kind);
    ctx.entities.insert(e.name);
    if (e.region && !regions.count(*e.region)) {
      error("entities[" + std::to_string(i) + "].region", "unknown region hint '" + *e.region + "'");
    }
    if (e.blocking() && !e.interactive) {
      warning("entities[" + std::to_string(i) + "].interactive", "blocking entity can never be cleared");
    }
  }
  for (const auto& m : s.members) ctx.agents.insert(m.name);

  check_predicate(s.goal.predicate, "goal.predicate", ctx, 1, out);
  if (s.goal.predicate.op == PredicateExpr::Op::Always) warning("goal.predicate", "goal predicate is constant");
  if (s.max_steps > 1'000'000) warning("max_steps", "very long run");
  return out;
}

}  // namespace teamsim
