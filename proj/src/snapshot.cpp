#include "teamsim/snapshot.hpp"

#include "teamsim/error.hpp"

namespace teamsim {

using json = nlohmann::json;

std::string encode_grid(const TraversabilityGrid& grid) {
  std::string out;
  std::size_t i = 0;
  const auto n = grid.size();
  while (i < n) {
    const CellState s = grid.at(grid.cell_at(i));
    std::size_t j = i;
    while (j < n && grid.at(grid.cell_at(j)) == s) ++j;
    out += s == CellState::Open ? '.' : '#';
    out += std::to_string(j - i);
    i = j;
  }
  return out;
}

TraversabilityGrid decode_grid(const std::string& rle, int width, int height) {
  TraversabilityGrid grid(width, height);
  std::size_t pos = 0;
  std::size_t cell = 0;
  while (pos < rle.size()) {
    const char sym = rle[pos++];
    if (sym != '.' && sym != '#') throw MalformedLog("bad grid symbol");
    std::size_t len = 0;
    bool digits = false;
    while (pos < rle.size() && rle[pos] >= '0' && rle[pos] <= '9') {
      len = len * 10 + static_cast<std::size_t>(rle[pos++] - '0');
      digits = true;
    }
    if (!digits || cell + len > grid.size()) throw MalformedLog("bad grid run");
    for (std::size_t k = 0; k < len; ++k, ++cell) {
      grid.set(grid.cell_at(cell), sym == '.' ? CellState::Open : CellState::Wall);
    }
  }
  if (cell != grid.size()) throw MalformedLog("grid run lengths do not cover the grid");
  return grid;
}

json cell_to_json(Cell c) { return json::array({c.x, c.y}); }

Cell cell_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) throw MalformedLog("cell must be [x, y]");
  return {j[0].get<int>(), j[1].get<int>()};
}

namespace {

json rect_to_json(const Rect& r) { return json::array({r.x0, r.y0, r.x1, r.y1}); }

Rect rect_from_json(const json& j) {
  if (!j.is_array() || j.size() != 4) throw MalformedLog("rect must be [x0, y0, x1, y1]");
  return {j[0].get<int>(), j[1].get<int>(), j[2].get<int>(), j[3].get<int>()};
}

const char* axis_name(SplitAxis a) {
  switch (a) {
    case SplitAxis::Vertical:
      return "vertical";
    case SplitAxis::Horizontal:
      return "horizontal";
    default:
      return "none";
  }
}

SplitAxis axis_from(const std::string& s) {
  if (s == "vertical") return SplitAxis::Vertical;
  if (s == "horizontal") return SplitAxis::Horizontal;
  return SplitAxis::None;
}

json optional_string(const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); }

std::optional<std::string> optional_string_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<std::string>();
}

}  // namespace

json environment_to_json(const Environment& env) {
  json regions = json::array();
  for (const auto& r : env.tree.regions) {
    regions.push_back({{"id", r.id},
                       {"name", r.name},
                       {"description", r.description},
                       {"bounds", rect_to_json(r.bounds)},
                       {"room", rect_to_json(r.room)},
                       {"node", r.node}});
  }
  json tree = json::array();
  for (const auto& n : env.tree.nodes) {
    tree.push_back({{"parent", n.parent},
                    {"first", n.first},
                    {"second", n.second},
                    {"split", axis_name(n.split)},
                    {"bounds", rect_to_json(n.bounds)},
                    {"room", rect_to_json(n.room)},
                    {"region", n.region}});
  }
  json doors = json::array();
  for (const auto& d : env.adjacency.doors()) doors.push_back({{"a", d.a}, {"b", d.b}, {"cell", cell_to_json(d.cell)}});
  return {{"width", env.grid.width()},
          {"height", env.grid.height()},
          {"grid", encode_grid(env.grid)},
          {"regions", regions},
          {"tree", tree},
          {"doors", doors}};
}

Environment environment_from_json(const json& j) {
  try {
    Environment env;
    env.grid = decode_grid(j.at("grid").get<std::string>(), j.at("width").get<int>(), j.at("height").get<int>());
    for (const auto& r : j.at("regions")) {
      Region region;
      region.id = r.at("id").get<int>();
      region.name = r.at("name").get<std::string>();
      region.description = r.at("description").get<std::string>();
      region.bounds = rect_from_json(r.at("bounds"));
      region.room = rect_from_json(r.at("room"));
      region.node = r.at("node").get<int>();
      env.tree.regions.push_back(region);
    }
    for (const auto& n : j.at("tree")) {
      PartitionNode node;
      node.parent = n.at("parent").get<int>();
      node.first = n.at("first").get<int>();
      node.second = n.at("second").get<int>();
      node.split = axis_from(n.at("split").get<std::string>());
      node.bounds = rect_from_json(n.at("bounds"));
      node.room = rect_from_json(n.at("room"));
      node.region = n.at("region").get<int>();
      env.tree.nodes.push_back(node);
    }
    for (const auto& d : j.at("doors")) {
      env.adjacency.connect(d.at("a").get<int>(), d.at("b").get<int>(), cell_from_json(d.at("cell")));
    }
    for (const auto& region : env.tree.regions) {
      for (int y = region.bounds.y0; y < region.bounds.y1; ++y) {
        for (int x = region.bounds.x0; x < region.bounds.x1; ++x) {
          if (env.grid.in_bounds({x, y}) && env.grid.open({x, y})) env.grid.set_region({x, y}, region.id);
        }
      }
    }
    return env;
  } catch (const json::exception& e) {
    throw MalformedLog(std::string("malformed environment: ") + e.what());
  }
}

json world_to_json(const World& world) {
  json entities = json::array();
  for (const auto& e : world.entities) {
    entities.push_back({{"name", e.name},
                        {"kind", e.kind},
                        {"interactive", e.interactive},
                        {"blocking", e.blocking},
                        {"attributes", e.attributes},
                        {"cell", e.cell ? cell_to_json(*e.cell) : json(nullptr)},
                        {"carried_by", optional_string(e.carried_by)},
                        {"removed", e.removed}});
  }
  json agents = json::array();
  for (const auto& a : world.agents) {
    agents.push_back({{"name", a.name}, {"cell", cell_to_json(a.cell)}, {"carrying", optional_string(a.carrying)}});
  }
  return {{"environment", environment_to_json(*world.env)},
          {"entities", entities},
          {"agents", agents},
          {"step", world.step}};
}

World world_from_json(const json& j) {
  try {
    World world;
    world.env = std::make_shared<Environment>(environment_from_json(j.at("environment")));
    for (const auto& e : j.at("entities")) {
      EntityState s;
      s.name = e.at("name").get<std::string>();
      s.kind = e.at("kind").get<std::string>();
      s.interactive = e.at("interactive").get<bool>();
      s.blocking = e.at("blocking").get<bool>();
      s.attributes = e.at("attributes").get<std::map<std::string, std::string>>();
      if (!e.at("cell").is_null()) s.cell = cell_from_json(e.at("cell"));
      s.carried_by = optional_string_from(e.at("carried_by"));
      s.removed = e.at("removed").get<bool>();
      world.entities.push_back(std::move(s));
    }
    for (const auto& a : j.at("agents")) {
      world.agents.push_back(
          {a.at("name").get<std::string>(), cell_from_json(a.at("cell")), optional_string_from(a.at("carrying"))});
    }
    world.step = j.at("step").get<long>();
    return world;
  } catch (const json::exception& e) {
    throw MalformedLog(std::string("malformed world snapshot: ") + e.what());
  }
}

namespace {

struct ChangeJson {
  json operator()(const MoveAgent& m) const { return {{"op", "move"}, {"agent", m.agent}, {"to", cell_to_json(m.to)}}; }
  json operator()(const PickUpEntity& p) const { return {{"op", "pick_up"}, {"agent", p.agent}, {"entity", p.entity}}; }
  json operator()(const PutDownEntity& p) const {
    return {{"op", "put_down"}, {"agent", p.agent}, {"entity", p.entity}};
  }
  json operator()(const SetAttribute& s) const {
    return {{"op", "set_attribute"}, {"entity", s.entity}, {"key", s.key}, {"value", s.value}};
  }
  json operator()(const RemoveEntity& r) const { return {{"op", "remove"}, {"entity", r.entity}}; }
};

}  // namespace

json change_to_json(const WorldChange& change) { return std::visit(ChangeJson{}, change); }

WorldChange change_from_json(const json& j) {
  try {
    const auto op = j.at("op").get<std::string>();
    if (op == "move") return MoveAgent{j.at("agent").get<std::string>(), cell_from_json(j.at("to"))};
    if (op == "pick_up") return PickUpEntity{j.at("agent").get<std::string>(), j.at("entity").get<std::string>()};
    if (op == "put_down") return PutDownEntity{j.at("agent").get<std::string>(), j.at("entity").get<std::string>()};
    if (op == "set_attribute") {
      return SetAttribute{j.at("entity").get<std::string>(), j.at("key").get<std::string>(),
                          j.at("value").get<std::string>()};
    }
    if (op == "remove") return RemoveEntity{j.at("entity").get<std::string>()};
    throw MalformedLog("unknown change op " + op);
  } catch (const json::exception& e) {
    throw MalformedLog(std::string("malformed change: ") + e.what());
  }
}

}  // namespace teamsim
