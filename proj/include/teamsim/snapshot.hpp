#pragma once

#include <string>

#include <json.hpp>

#include "teamsim/world.hpp"

namespace teamsim {

// Run-length encoding of the grid, row-major: '#' = wall, '.' = open, each
// symbol followed by its decimal run length, e.g. "#12.10#2".
std::string encode_grid(const TraversabilityGrid& grid);
// Rebuilds cell states only; region ownership comes from the region tree.
TraversabilityGrid decode_grid(const std::string& rle, int width, int height);

nlohmann::json environment_to_json(const Environment& env);
Environment environment_from_json(const nlohmann::json& j);

// Full world snapshot: environment + entities + agents + clock.
nlohmann::json world_to_json(const World& world);
World world_from_json(const nlohmann::json& j);

nlohmann::json change_to_json(const WorldChange& change);
WorldChange change_from_json(const nlohmann::json& j);

nlohmann::json cell_to_json(Cell c);
Cell cell_from_json(const nlohmann::json& j);

}  // namespace teamsim
