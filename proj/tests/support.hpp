#pragma once

#include <set>
#include <string>
#include <vector>

#include "teamsim/scenario.hpp"
#include "teamsim/world.hpp"

namespace teamsim::testing {

inline std::string fixture(const std::string& name) { return std::string(TEAMSIM_SOURCE_DIR) + "/scenarios/" + name; }

inline Scenario load_fixture(const std::string& name) { return load_scenario_file(fixture(name)); }

// Oracles below are written against the grid accessors only, without the
// library's search code.

// Layered frontier expansion: distance in moves, or -1 when unreachable.
inline int oracle_distance(const TraversabilityGrid& g, Cell from, Cell to, const BlockedMask* blocked = nullptr) {
  auto ok = [&](Cell c) {
    if (c.x < 0 || c.y < 0 || c.x >= g.width() || c.y >= g.height()) return false;
    if (g.at(c) != CellState::Open) return false;
    return !(blocked && (*blocked)[static_cast<std::size_t>(c.y) * g.width() + c.x]);
  };
  if (!ok(from) || !ok(to)) return -1;
  std::set<std::pair<int, int>> seen{{from.x, from.y}};
  std::vector<Cell> frontier{from};
  for (int d = 0; !frontier.empty(); ++d) {
    std::vector<Cell> next;
    for (const Cell c : frontier) {
      if (c == to) return d;
      const Cell around[4] = {{c.x + 1, c.y}, {c.x - 1, c.y}, {c.x, c.y + 1}, {c.x, c.y - 1}};
      for (const Cell n : around) {
        if (ok(n) && seen.insert({n.x, n.y}).second) next.push_back(n);
      }
    }
    frontier = std::move(next);
  }
  return -1;
}

// Depth-first flood fill over Open cells; returns the number reached.
inline long oracle_flood(const TraversabilityGrid& g, Cell start) {
  std::vector<char> seen(static_cast<std::size_t>(g.width()) * g.height(), 0);
  std::vector<Cell> stack{start};
  long count = 0;
  while (!stack.empty()) {
    const Cell c = stack.back();
    stack.pop_back();
    if (c.x < 0 || c.y < 0 || c.x >= g.width() || c.y >= g.height()) continue;
    const auto i = static_cast<std::size_t>(c.y) * g.width() + c.x;
    if (seen[i] || g.at(c) != CellState::Open) continue;
    seen[i] = 1;
    ++count;
    stack.push_back({c.x + 1, c.y});
    stack.push_back({c.x - 1, c.y});
    stack.push_back({c.x, c.y + 1});
    stack.push_back({c.x, c.y - 1});
  }
  return count;
}

// Checks the partition and door invariants of a generated environment.
// Returns an empty string when they hold, else the first problem found.
inline std::string environment_problem(const Environment& env, int num_regions) {
  const auto& g = env.grid;
  const auto& regions = env.tree.regions;
  if (static_cast<int>(regions.size()) != num_regions) return "wrong leaf count";
  int leaves = 0;
  for (const auto& n : env.tree.nodes) leaves += n.region != kNoRegion;
  if (leaves != num_regions) return "tree leaf count differs from region count";
  for (std::size_t i = 0; i < regions.size(); ++i) {
    for (std::size_t j = i + 1; j < regions.size(); ++j) {
      const auto& a = regions[i].bounds;
      const auto& b = regions[j].bounds;
      if (a.x0 < b.x1 && b.x0 < a.x1 && a.y0 < b.y1 && b.y0 < a.y1) return "leaf bounds overlap";
    }
  }
  long open = 0;
  for (int y = 0; y < g.height(); ++y) {
    for (int x = 0; x < g.width(); ++x) {
      const Cell c{x, y};
      const bool border = x == 0 || y == 0 || x == g.width() - 1 || y == g.height() - 1;
      if (border && g.at(c) == CellState::Open) return "open border cell";
      if (g.at(c) != CellState::Open) continue;
      ++open;
      int owners = 0;
      for (const auto& r : regions) owners += r.bounds.contains(c);
      if (owners != 1) return "open cell not owned by exactly one leaf";
      const RegionId r = g.region_of(c);
      if (r < 0 || r >= num_regions || !regions[r].bounds.contains(c)) return "region_of disagrees with bounds";
    }
  }
  Cell first{-1, -1};
  for (int y = 0; y < g.height() && first.x < 0; ++y) {
    for (int x = 0; x < g.width(); ++x) {
      if (g.at({x, y}) == CellState::Open) {
        first = {x, y};
        break;
      }
    }
  }
  if (first.x < 0 || oracle_flood(g, first) != open) return "open cells not connected";
  for (const auto& [a, row] : env.adjacency.edges) {
    for (const auto& [b, door] : row) {
      auto back = env.adjacency.edges.find(b);
      if (back == env.adjacency.edges.end() || !back->second.count(a) || !(back->second.at(a) == door)) {
        return "adjacency not symmetric";
      }
      if (g.at(door) != CellState::Open) return "door is a wall";
      bool touches_a = g.region_of(door) == a, touches_b = g.region_of(door) == b;
      const Cell around[4] = {{door.x + 1, door.y}, {door.x - 1, door.y}, {door.x, door.y + 1}, {door.x, door.y - 1}};
      for (const Cell n : around) {
        if (!g.in_bounds(n) || g.at(n) != CellState::Open) continue;
        touches_a |= g.region_of(n) == a;
        touches_b |= g.region_of(n) == b;
      }
      if (!touches_a || !touches_b) return "door not on the shared boundary";
    }
  }
  return {};
}

}  // namespace teamsim::testing
