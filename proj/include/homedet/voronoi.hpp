// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "homedet/geo.hpp"

namespace homedet {

// One Voronoi cell. Towers sharing exact coordinates are merged into a
// single generator, so a cell can carry several tower ids; `tower_ids` is
// ascending and the first entry is the cell's representative id.
struct VoronoiCell {
  std::vector<std::string> tower_ids;
  Ring polygon;                        // projected meters, CCW
  std::vector<LonLat> polygon_lonlat;  // same ring in lon/lat
  double area_m2 = 0.0;
  std::vector<std::uint32_t> neighbor_cells;  // edge-sharing cells, sorted
};

struct Tessellation {
  std::vector<VoronoiCell> cells;             // ordered by representative tower id
  std::vector<std::uint32_t> cell_of_tower;   // tower index -> cell index

  const VoronoiCell& cell_for(std::uint32_t tower_idx) const {
    return cells[cell_of_tower[tower_idx]];
  }
};

// Voronoi tessellation of the network clipped to its boundary polygon.
// Requires >= 3 non-collinear distinct generator positions and every tower
// strictly inside the boundary; throws Error(degenerate) / Error(data)
// otherwise. `workers` parallelizes cell construction (output independent
// of it).
Tessellation voronoi(const TowerNetwork& net, unsigned workers = 1);

}  // namespace homedet
