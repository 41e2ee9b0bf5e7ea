#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "teamsim/geometry.hpp"
#include "teamsim/scenario.hpp"

namespace teamsim {

enum class CellState : std::uint8_t { Wall, Open };

using RegionId = int;
inline constexpr RegionId kNoRegion = -1;

// Dense traversability matrix. region_of is kNoRegion for Wall cells.
class TraversabilityGrid {
 public:
  TraversabilityGrid() = default;
  TraversabilityGrid(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return cells_.size(); }

  bool in_bounds(Cell c) const { return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_; }
  std::size_t index(Cell c) const { return static_cast<std::size_t>(c.y) * width_ + c.x; }
  Cell cell_at(std::size_t i) const { return {static_cast<int>(i % width_), static_cast<int>(i / width_)}; }

  CellState at(Cell c) const { return cells_[index(c)]; }
  bool open(Cell c) const { return in_bounds(c) && at(c) == CellState::Open; }
  RegionId region_of(Cell c) const { return in_bounds(c) ? regions_[index(c)] : kNoRegion; }

  void set(Cell c, CellState s) { cells_[index(c)] = s; }
  void set_region(Cell c, RegionId r) { regions_[index(c)] = r; }

  long open_count() const;
  std::vector<Cell> open_cells() const;  // row-major

  bool operator==(const TraversabilityGrid&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<CellState> cells_;
  std::vector<RegionId> regions_;
};

enum class SplitAxis { None, Vertical, Horizontal };

// Internal nodes are partitions; leaves carry a region. bounds of the leaves
// tile the grid interior (a leaf owns the wall to its right/bottom); room is
// the open rectangle inside bounds.
struct PartitionNode {
  int parent = -1;
  int first = -1;
  int second = -1;
  SplitAxis split = SplitAxis::None;
  Rect bounds;
  Rect room;
  RegionId region = kNoRegion;
  bool operator==(const PartitionNode&) const = default;
};

struct Region {
  RegionId id = kNoRegion;
  std::string name;
  Rect bounds;
  Rect room;
  std::string description;
  int node = -1;
  bool operator==(const Region&) const = default;
};

struct RegionTree {
  std::vector<PartitionNode> nodes;  // nodes[0] is the root
  std::vector<Region> regions;       // indexed by RegionId

  const Region* find(std::string_view name) const;
  bool operator==(const RegionTree&) const = default;
};

struct Door {
  RegionId a = kNoRegion;  // a < b
  RegionId b = kNoRegion;
  Cell cell;
  bool operator==(const Door&) const = default;
};

// Symmetric region graph; each edge stores its door cell.
struct RegionAdjacency {
  std::map<RegionId, std::map<RegionId, Cell>> edges;

  void connect(RegionId a, RegionId b, Cell door);
  std::vector<Door> doors() const;
  bool is_door(Cell c) const;
  bool operator==(const RegionAdjacency&) const = default;
};

struct Environment {
  TraversabilityGrid grid;
  RegionTree tree;
  RegionAdjacency adjacency;
  bool operator==(const Environment&) const = default;
};

// Deterministic in (spec, seed). Throws InsufficientArea.
Environment generate_environment(const EnvSpec& spec, std::uint64_t seed);

// Marks cells that cannot be entered (live, uncarried blocking entities).
using BlockedMask = std::vector<char>;

// Minimum-length 4-connected path, endpoints inclusive, ties broken by
// neighbour order N,E,S,W. Throws CellNotOpen.
std::optional<std::vector<Cell>> shortest_path(const TraversabilityGrid& grid, Cell from, Cell to,
                                               const BlockedMask* blocked = nullptr);

// BFS distance from `from` to every cell; -1 when unreachable.
std::vector<int> distance_field(const TraversabilityGrid& grid, Cell from, const BlockedMask* blocked = nullptr);

struct NavigationPlan {
  std::vector<Cell> doors;  // door cells crossed, in order
  std::vector<Cell> path;   // full path from `from`; empty when already inside
  bool empty() const { return path.empty(); }
  bool operator==(const NavigationPlan&) const = default;
};

// Route to the nearest cell of `target`. Throws NoRoute, CellNotOpen.
NavigationPlan directions_to_region(const TraversabilityGrid& grid, const RegionAdjacency& adjacency, Cell from,
                                    RegionId target, const BlockedMask* blocked = nullptr);

struct EntityState {
  std::string name;
  std::string kind;
  bool interactive = true;
  bool blocking = false;
  std::map<std::string, std::string> attributes;
  std::optional<Cell> cell;
  std::optional<std::string> carried_by;
  bool removed = false;

  bool lying() const { return !removed && cell.has_value(); }
  std::string attribute(const std::string& key) const;
  bool operator==(const EntityState&) const = default;
};

struct Placement {
  std::string entity;
  Cell cell;
  std::optional<std::string> carried_by;
  bool operator==(const Placement&) const = default;
};

// Hinted entities are drawn uniformly from their region's open cells, the rest
// from all open cells. Blocking entities never share a cell. Throws
// UnknownRegion, NoFreeCell.
std::vector<Placement> place_entities(const std::vector<EntitySpec>& specs, const RegionTree& tree,
                                      const TraversabilityGrid& grid, std::uint64_t seed);

struct AgentBody {
  std::string name;
  Cell cell;
  std::optional<std::string> carrying;
  bool operator==(const AgentBody&) const = default;
};

struct World {
  std::shared_ptr<const Environment> env;
  std::vector<EntityState> entities;
  std::vector<AgentBody> agents;  // agent index order
  long step = 0;

  const TraversabilityGrid& grid() const { return env->grid; }
  const RegionTree& tree() const { return env->tree; }
  const RegionAdjacency& adjacency() const { return env->adjacency; }

  const EntityState* entity(std::string_view name) const;
  EntityState* entity(std::string_view name);
  const AgentBody* agent(std::string_view name) const;
  AgentBody* agent(std::string_view name);
  int agent_index(std::string_view name) const;

  RegionId region_at(Cell c) const { return env->grid.region_of(c); }
  const std::string& region_name(RegionId r) const { return env->tree.regions.at(r).name; }
  BlockedMask blocked_mask() const;

  bool operator==(const World& other) const;
};

// Environment + entity placement + agents at seeded cells of the start region.
World build_world(const Scenario& scenario);

// --- state changes --------------------------------------------------------

struct MoveAgent {
  std::string agent;
  Cell to;
  bool operator==(const MoveAgent&) const = default;
};
struct PickUpEntity {
  std::string agent;
  std::string entity;
  bool operator==(const PickUpEntity&) const = default;
};
struct PutDownEntity {
  std::string agent;
  std::string entity;
  bool operator==(const PutDownEntity&) const = default;
};
struct SetAttribute {
  std::string entity;
  std::string key;
  std::string value;
  bool operator==(const SetAttribute&) const = default;
};
struct RemoveEntity {
  std::string entity;
  bool operator==(const RemoveEntity&) const = default;
};

using WorldChange = std::variant<MoveAgent, PickUpEntity, PutDownEntity, SetAttribute, RemoveEntity>;

struct StateDelta {
  long step = 0;
  WorldChange change;
  bool operator==(const StateDelta&) const = default;
};

// Reason the change cannot be applied to `world`, or nullopt when legal.
std::optional<std::string> change_problem(const World& world, const WorldChange& change);

// In-place form used by the engine loop. Throws IllegalChange.
StateDelta apply_world_change(World& world, const WorldChange& change);

// Pure form: returns the successor world.
World applied(const World& world, const WorldChange& change);

std::string describe(const WorldChange& change);

}  // namespace teamsim
