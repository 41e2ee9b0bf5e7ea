#include "teamsim/world.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <stdexcept>

#include "teamsim/error.hpp"
#include "teamsim/rng.hpp"

namespace teamsim {

TraversabilityGrid::TraversabilityGrid(int width, int height)
    : width_(width),
      height_(height),
      cells_(static_cast<std::size_t>(width) * height, CellState::Wall),
      regions_(static_cast<std::size_t>(width) * height, kNoRegion) {}

long TraversabilityGrid::open_count() const {
  return static_cast<long>(std::count(cells_.begin(), cells_.end(), CellState::Open));
}

std::vector<Cell> TraversabilityGrid::open_cells() const {
  std::vector<Cell> out;
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    if (cells_[i] == CellState::Open) out.push_back(cell_at(i));
  }
  return out;
}

const Region* RegionTree::find(std::string_view name) const {
  for (const auto& r : regions) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

void RegionAdjacency::connect(RegionId a, RegionId b, Cell door) {
  edges[a][b] = door;
  edges[b][a] = door;
}

std::vector<Door> RegionAdjacency::doors() const {
  std::vector<Door> out;
  for (const auto& [a, nbrs] : edges) {
    for (const auto& [b, cell] : nbrs) {
      if (a < b) out.push_back({a, b, cell});
    }
  }
  return out;
}

bool RegionAdjacency::is_door(Cell c) const {
  for (const auto& [a, nbrs] : edges) {
    for (const auto& [b, cell] : nbrs) {
      if (cell == c) return true;
    }
  }
  return false;
}

// ---------------------------------------------------------------------------
// Binary space partition

namespace {

long room_cap(const Rect& r) { return room_capacity(r.width(), r.height()); }

struct SplitChoice {
  SplitAxis axis = SplitAxis::None;
  std::vector<int> offsets;  // left/top room extents that keep the target reachable
};

// Offsets along `axis` that leave both rooms >= 3 wide and keep the summed
// capacity of all leaves >= target.
std::vector<int> feasible_offsets(const Rect& room, SplitAxis axis, long spare_capacity, long target) {
  const int extent = axis == SplitAxis::Vertical ? room.width() : room.height();
  std::vector<int> out;
  for (int a = kMinRoomSide; a <= extent - kMinRoomSide - 1; ++a) {
    Rect first = room;
    Rect second = room;
    if (axis == SplitAxis::Vertical) {
      first.x1 = room.x0 + a;
      second.x0 = room.x0 + a + 1;
    } else {
      first.y1 = room.y0 + a;
      second.y0 = room.y0 + a + 1;
    }
    if (spare_capacity + room_cap(first) + room_cap(second) >= target) out.push_back(a);
  }
  return out;
}

}  // namespace

Environment generate_environment(const EnvSpec& spec, std::uint64_t seed) {
  if (spec.width < 1 || spec.height < 1 || spec.num_regions < 1) throw InsufficientArea("empty environment");
  if (spec.width + 2 > kMaxGridSide || spec.height + 2 > kMaxGridSide) {
    throw InsufficientArea("environment exceeds " + std::to_string(kMaxGridSide) + " cells per side");
  }
  const long target = spec.num_regions;
  const Rect interior{1, 1, spec.width + 1, spec.height + 1};
  long total_capacity = room_cap(interior);
  if (target > total_capacity) {
    throw InsufficientArea("cannot fit " + std::to_string(target) + " regions of 3x3 in " + std::to_string(spec.width) +
                           "x" + std::to_string(spec.height));
  }

  Rng rng(seed);
  Environment env;
  auto& nodes = env.tree.nodes;
  nodes.push_back(PartitionNode{-1, -1, -1, SplitAxis::None, interior, interior, kNoRegion});
  std::vector<int> leaves{0};

  while (static_cast<long>(leaves.size()) < target) {
    std::vector<int> order = leaves;
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return nodes[a].room.area() > nodes[b].room.area(); });
    bool split_done = false;
    for (int leaf : order) {
      const PartitionNode node = nodes[leaf];
      SplitAxis preferred;
      if (node.parent < 0) {
        preferred = node.room.width() >= node.room.height() ? SplitAxis::Vertical : SplitAxis::Horizontal;
      } else {
        preferred = nodes[node.parent].split == SplitAxis::Vertical ? SplitAxis::Horizontal : SplitAxis::Vertical;
      }
      const SplitAxis other = preferred == SplitAxis::Vertical ? SplitAxis::Horizontal : SplitAxis::Vertical;
      const long spare = total_capacity - room_cap(node.room);

      for (SplitAxis axis : {preferred, other}) {
        auto offsets = feasible_offsets(node.room, axis, spare, target);
        if (offsets.empty()) continue;
        const int a = offsets[rng.below(offsets.size())];
        PartitionNode first{leaf, -1, -1, SplitAxis::None, node.bounds, node.room, kNoRegion};
        PartitionNode second = first;
        if (axis == SplitAxis::Vertical) {
          const int wall = node.room.x0 + a;
          first.room.x1 = wall;
          first.bounds.x1 = wall + 1;
          second.room.x0 = wall + 1;
          second.bounds.x0 = wall + 1;
        } else {
          const int wall = node.room.y0 + a;
          first.room.y1 = wall;
          first.bounds.y1 = wall + 1;
          second.room.y0 = wall + 1;
          second.bounds.y0 = wall + 1;
        }
        const int first_id = static_cast<int>(nodes.size());
        nodes.push_back(first);
        nodes.push_back(second);
        nodes[leaf].first = first_id;
        nodes[leaf].second = first_id + 1;
        nodes[leaf].split = axis;
        total_capacity = spare + room_cap(first.room) + room_cap(second.room);

        leaves.erase(std::find(leaves.begin(), leaves.end(), leaf));
        leaves.push_back(first_id);
        leaves.push_back(first_id + 1);
        split_done = true;
        break;
      }
      if (split_done) break;
    }
    if (!split_done) throw std::logic_error("partition stalled below the requested region count");
  }

  // Leaves get region ids in node creation order.
  std::sort(leaves.begin(), leaves.end());
  const auto names = region_names(spec);
  env.grid = TraversabilityGrid(spec.width + 2, spec.height + 2);
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    auto& node = nodes[leaves[i]];
    node.region = static_cast<RegionId>(i);
    Region region;
    region.id = node.region;
    region.name = names[i];
    region.bounds = node.bounds;
    region.room = node.room;
    region.node = leaves[i];
    region.description = region.name + ": a " + std::to_string(node.room.width()) + "x" +
                         std::to_string(node.room.height()) + " room";
    env.tree.regions.push_back(region);
    for (int y = node.room.y0; y < node.room.y1; ++y) {
      for (int x = node.room.x0; x < node.room.x1; ++x) {
        env.grid.set({x, y}, CellState::Open);
        env.grid.set_region({x, y}, region.id);
      }
    }
  }

  // Door candidates: wall cells whose opposite neighbours are rooms of two
  // different regions. Scanned row-major so the draw order is fixed.
  std::map<std::pair<RegionId, RegionId>, std::vector<Cell>> candidates;
  const auto& grid = env.grid;
  for (int y = 1; y < grid.height() - 1; ++y) {
    for (int x = 1; x < grid.width() - 1; ++x) {
      if (grid.open({x, y})) continue;
      for (auto [dx, dy] : {std::pair{1, 0}, std::pair{0, 1}}) {
        const Cell lo{x - dx, y - dy};
        const Cell hi{x + dx, y + dy};
        if (!grid.open(lo) || !grid.open(hi)) continue;
        const RegionId a = grid.region_of(lo);
        const RegionId b = grid.region_of(hi);
        if (a != b) candidates[{std::min(a, b), std::max(a, b)}].push_back({x, y});
      }
    }
  }
  for (const auto& [pair, cells] : candidates) {
    const Cell door = cells[rng.below(cells.size())];
    env.adjacency.connect(pair.first, pair.second, door);
  }

  // Door cells take the region whose bounds contain them.
  for (const auto& door : env.adjacency.doors()) {
    env.grid.set(door.cell, CellState::Open);
    for (const auto& region : env.tree.regions) {
      if (region.bounds.contains(door.cell)) {
        env.grid.set_region(door.cell, region.id);
        break;
      }
    }
  }
  return env;
}

// ---------------------------------------------------------------------------
// Navigation

namespace {

bool passable(const TraversabilityGrid& grid, Cell c, const BlockedMask* blocked) {
  return grid.open(c) && !(blocked && (*blocked)[grid.index(c)]);
}

void require_passable(const TraversabilityGrid& grid, Cell c, const BlockedMask* blocked, const char* which) {
  if (!passable(grid, c, blocked)) throw CellNotOpen(std::string(which) + " cell " + to_string(c) + " is not open");
}

std::vector<Cell> unwind(const TraversabilityGrid& grid, const std::vector<int>& parent, std::size_t end) {
  std::vector<Cell> path;
  for (long i = static_cast<long>(end); i >= 0; i = parent[static_cast<std::size_t>(i)]) {
    path.push_back(grid.cell_at(static_cast<std::size_t>(i)));
    if (parent[static_cast<std::size_t>(i)] == static_cast<int>(i)) break;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

// Breadth-first search that stops at the first dequeued cell satisfying
// `goal`; returns its index, or -1.
template <typename Goal>
long bfs(const TraversabilityGrid& grid, Cell from, const BlockedMask* blocked, std::vector<int>& parent, Goal goal) {
  parent.assign(grid.size(), -1);
  std::deque<std::size_t> queue;
  const auto start = grid.index(from);
  parent[start] = static_cast<int>(start);
  queue.push_back(start);
  while (!queue.empty()) {
    const auto cur = queue.front();
    queue.pop_front();
    const Cell c = grid.cell_at(cur);
    if (goal(c)) return static_cast<long>(cur);
    for (const auto& step : kSteps) {
      const Cell n{c.x + step.x, c.y + step.y};
      if (!passable(grid, n, blocked)) continue;
      const auto ni = grid.index(n);
      if (parent[ni] != -1) continue;
      parent[ni] = static_cast<int>(cur);
      queue.push_back(ni);
    }
  }
  return -1;
}

}  // namespace

std::optional<std::vector<Cell>> shortest_path(const TraversabilityGrid& grid, Cell from, Cell to,
                                               const BlockedMask* blocked) {
  require_passable(grid, from, blocked, "start");
  require_passable(grid, to, blocked, "goal");
  std::vector<int> parent;
  const long end = bfs(grid, from, blocked, parent, [&](Cell c) { return c == to; });
  if (end < 0) return std::nullopt;
  return unwind(grid, parent, static_cast<std::size_t>(end));
}

std::vector<int> distance_field(const TraversabilityGrid& grid, Cell from, const BlockedMask* blocked) {
  std::vector<int> dist(grid.size(), -1);
  if (!passable(grid, from, blocked)) return dist;
  std::deque<Cell> queue{from};
  dist[grid.index(from)] = 0;
  while (!queue.empty()) {
    const Cell c = queue.front();
    queue.pop_front();
    for (const auto& step : kSteps) {
      const Cell n{c.x + step.x, c.y + step.y};
      if (!passable(grid, n, blocked) || dist[grid.index(n)] != -1) continue;
      dist[grid.index(n)] = dist[grid.index(c)] + 1;
      queue.push_back(n);
    }
  }
  return dist;
}

NavigationPlan directions_to_region(const TraversabilityGrid& grid, const RegionAdjacency& adjacency, Cell from,
                                    RegionId target, const BlockedMask* blocked) {
  require_passable(grid, from, blocked, "start");
  if (grid.region_of(from) == target) return {};
  std::vector<int> parent;
  const long end = bfs(grid, from, blocked, parent, [&](Cell c) { return grid.region_of(c) == target; });
  if (end < 0) throw NoRoute("no route from " + to_string(from) + " to region " + std::to_string(target));
  NavigationPlan plan;
  plan.path = unwind(grid, parent, static_cast<std::size_t>(end));
  for (const auto& c : plan.path) {
    if (adjacency.is_door(c)) plan.doors.push_back(c);
  }
  return plan;
}

// ---------------------------------------------------------------------------
// Entities and world state

std::string EntityState::attribute(const std::string& key) const {
  auto it = attributes.find(key);
  return it == attributes.end() ? std::string{} : it->second;
}

std::vector<Placement> place_entities(const std::vector<EntitySpec>& specs, const RegionTree& tree,
                                      const TraversabilityGrid& grid, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<int> occupancy(grid.size(), 0);  // 1 = non-blocking present, 2 = blocking present
  const auto all_open = grid.open_cells();
  std::vector<Placement> out;
  for (const auto& spec : specs) {
    RegionId region = kNoRegion;
    if (spec.region) {
      const Region* r = tree.find(*spec.region);
      if (!r) throw UnknownRegion("entity '" + spec.name + "' names unknown region '" + *spec.region + "'");
      region = r->id;
    }
    std::vector<Cell> free;
    for (const auto& c : all_open) {
      if (region != kNoRegion && grid.region_of(c) != region) continue;
      const int occ = occupancy[grid.index(c)];
      if (occ == 2 || (spec.blocking() && occ != 0)) continue;
      free.push_back(c);
    }
    if (free.empty()) throw NoFreeCell("no free cell for entity '" + spec.name + "'");
    const Cell c = free[rng.below(free.size())];
    occupancy[grid.index(c)] = spec.blocking() ? 2 : 1;
    out.push_back({spec.name, c, std::nullopt});
  }
  return out;
}

const EntityState* World::entity(std::string_view name) const {
  for (const auto& e : entities) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

EntityState* World::entity(std::string_view name) {
  return const_cast<EntityState*>(static_cast<const World*>(this)->entity(name));
}

const AgentBody* World::agent(std::string_view name) const {
  for (const auto& a : agents) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

AgentBody* World::agent(std::string_view name) {
  return const_cast<AgentBody*>(static_cast<const World*>(this)->agent(name));
}

int World::agent_index(std::string_view name) const {
  for (std::size_t i = 0; i < agents.size(); ++i) {
    if (agents[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

BlockedMask World::blocked_mask() const {
  BlockedMask mask(env->grid.size(), 0);
  for (const auto& e : entities) {
    if (e.blocking && e.lying()) mask[env->grid.index(*e.cell)] = 1;
  }
  return mask;
}

bool World::operator==(const World& other) const {
  const bool same_env = env == other.env || (env && other.env && *env == *other.env);
  return same_env && entities == other.entities && agents == other.agents && step == other.step;
}

World build_world(const Scenario& scenario) {
  World world;
  auto env = std::make_shared<Environment>(generate_environment(scenario.env_spec, scenario.seed));
  const auto placements = place_entities(scenario.entities, env->tree, env->grid, derive_seed(scenario.seed, 1));
  for (std::size_t i = 0; i < scenario.entities.size(); ++i) {
    const auto& spec = scenario.entities[i];
    EntityState e;
    e.name = spec.name;
    e.kind = spec.kind;
    e.interactive = spec.interactive;
    e.blocking = spec.blocking();
    e.attributes = spec.attributes;
    e.attributes.erase("blocking");
    e.cell = placements[i].cell;
    world.entities.push_back(std::move(e));
  }

  RegionId start = 0;
  if (scenario.start_region) {
    const Region* r = env->tree.find(*scenario.start_region);
    if (!r) throw UnknownRegion("unknown start region '" + *scenario.start_region + "'");
    start = r->id;
  }
  world.env = env;
  const auto blocked = world.blocked_mask();
  std::vector<Cell> free;
  for (const auto& c : env->grid.open_cells()) {
    if (env->grid.region_of(c) == start && !blocked[env->grid.index(c)]) free.push_back(c);
  }
  if (free.empty()) throw NoFreeCell("start region has no free cell");
  Rng rng(derive_seed(scenario.seed, 2));
  for (const auto& m : scenario.members) {
    // Agents do not block each other; distinct cells are preferred while they last.
    const auto pick = rng.below(free.size());
    world.agents.push_back({m.name, free[pick], std::nullopt});
    if (free.size() > 1) free.erase(free.begin() + static_cast<long>(pick));
  }
  return world;
}

// ---------------------------------------------------------------------------
// Changes

namespace {

struct ProblemVisitor {
  const World& w;

  std::optional<std::string> operator()(const MoveAgent& m) const {
    if (!w.agent(m.agent)) return "unknown agent " + m.agent;
    if (!w.grid().open(m.to)) return "destination " + to_string(m.to) + " is a wall";
    if (w.blocked_mask()[w.grid().index(m.to)]) return "destination " + to_string(m.to) + " is blocked";
    return std::nullopt;
  }
  std::optional<std::string> operator()(const PickUpEntity& p) const {
    const AgentBody* a = w.agent(p.agent);
    const EntityState* e = w.entity(p.entity);
    if (!a) return "unknown agent " + p.agent;
    if (!e || e->removed) return "entity " + p.entity + " no longer exists";
    if (e->carried_by) return "entity " + p.entity + " is already carried by " + *e->carried_by;
    if (a->carrying) return p.agent + " is already carrying " + *a->carrying;
    if (e->blocking) return "entity " + p.entity + " cannot be carried";
    if (manhattan(*e->cell, a->cell) > 1) return "entity " + p.entity + " is out of reach";
    return std::nullopt;
  }
  std::optional<std::string> operator()(const PutDownEntity& p) const {
    const AgentBody* a = w.agent(p.agent);
    if (!a) return "unknown agent " + p.agent;
    if (a->carrying != p.entity) return p.agent + " is not carrying " + p.entity;
    return std::nullopt;
  }
  std::optional<std::string> operator()(const SetAttribute& s) const {
    const EntityState* e = w.entity(s.entity);
    if (!e || e->removed) return "entity " + s.entity + " no longer exists";
    return std::nullopt;
  }
  std::optional<std::string> operator()(const RemoveEntity& r) const {
    const EntityState* e = w.entity(r.entity);
    if (!e || e->removed) return "entity " + r.entity + " no longer exists";
    if (e->carried_by) return "entity " + r.entity + " is being carried";
    return std::nullopt;
  }
};

struct ApplyVisitor {
  World& w;
  void operator()(const MoveAgent& m) const { w.agent(m.agent)->cell = m.to; }
  void operator()(const PickUpEntity& p) const {
    AgentBody* a = w.agent(p.agent);
    EntityState* e = w.entity(p.entity);
    e->cell.reset();
    e->carried_by = p.agent;
    a->carrying = p.entity;
  }
  void operator()(const PutDownEntity& p) const {
    AgentBody* a = w.agent(p.agent);
    EntityState* e = w.entity(p.entity);
    e->cell = a->cell;
    e->carried_by.reset();
    a->carrying.reset();
  }
  void operator()(const SetAttribute& s) const { w.entity(s.entity)->attributes[s.key] = s.value; }
  void operator()(const RemoveEntity& r) const {
    EntityState* e = w.entity(r.entity);
    e->removed = true;
    e->cell.reset();
  }
};

struct DescribeVisitor {
  std::string operator()(const MoveAgent& m) const { return m.agent + " moved to " + to_string(m.to); }
  std::string operator()(const PickUpEntity& p) const { return p.agent + " picked up " + p.entity; }
  std::string operator()(const PutDownEntity& p) const { return p.agent + " put down " + p.entity; }
  std::string operator()(const SetAttribute& s) const { return s.entity + "." + s.key + " = " + s.value; }
  std::string operator()(const RemoveEntity& r) const { return r.entity + " removed"; }
};

}  // namespace

std::optional<std::string> change_problem(const World& world, const WorldChange& change) {
  return std::visit(ProblemVisitor{world}, change);
}

StateDelta apply_world_change(World& world, const WorldChange& change) {
  if (auto problem = change_problem(world, change)) throw IllegalChange(*problem);
  std::visit(ApplyVisitor{world}, change);
  return StateDelta{world.step, change};
}

World applied(const World& world, const WorldChange& change) {
  World next = world;
  apply_world_change(next, change);
  return next;
}

std::string describe(const WorldChange& change) { return std::visit(DescribeVisitor{}, change); }

}  // namespace teamsim
