// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <cstdio>
#include <filesystem>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "homedet/geo.hpp"
#include "homedet/ingest.hpp"

namespace homedet::testing {

// Towers laid out at planar offsets (meters) around an origin, mapped back
// through an azimuthal projection so great-circle geometry stays faithful.
inline std::vector<CellTower> towers_at_offsets(const std::vector<PlanarPoint>& offsets,
                                                LonLat origin = LonLat{2.0, 46.5}) {
  const AzimuthalProjection proj(origin);
  std::vector<CellTower> towers;
  towers.reserve(offsets.size());
  char id[24];
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    const LonLat p = proj.inverse(offsets[i]);
    std::snprintf(id, sizeof id, "t%05zu", i);
    towers.push_back(CellTower{id, p.lon, p.lat});
  }
  return towers;
}

inline TowerNetwork offsets_network(const std::vector<PlanarPoint>& offsets,
                                    LonLat origin = LonLat{2.0, 46.5}) {
  return TowerNetwork::build(towers_at_offsets(offsets, origin));
}

// nx * ny towers on a planar grid, `spacing_m` apart, centered on the origin.
inline TowerNetwork grid_network(std::size_t nx, std::size_t ny, double spacing_m) {
  std::vector<PlanarPoint> offsets;
  offsets.reserve(nx * ny);
  const double x0 = -0.5 * spacing_m * static_cast<double>(nx - 1);
  const double y0 = -0.5 * spacing_m * static_cast<double>(ny - 1);
  for (std::size_t y = 0; y < ny; ++y)
    for (std::size_t x = 0; x < nx; ++x)
      offsets.push_back(PlanarPoint{x0 + spacing_m * static_cast<double>(x),
                                    y0 + spacing_m * static_cast<double>(y)});
  return offsets_network(offsets);
}

struct TempDir {
  std::filesystem::path path;

  TempDir() {
    const auto base = std::filesystem::temp_directory_path();
    std::random_device rd;
    for (int attempt = 0; attempt < 100; ++attempt) {
      auto candidate = base / ("homedet_test_" + std::to_string(rd()));
      std::error_code ec;
      if (std::filesystem::create_directory(candidate, ec)) {
        path = std::move(candidate);
        return;
      }
    }
    throw std::runtime_error("cannot create a temporary directory");
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path / name).string(); }
};

inline ActivitySummary summary(std::string user, std::uint32_t period,
                               std::vector<TowerActivityCounts> towers) {
  ActivitySummary s;
  s.user_id = std::move(user);
  s.period = period;
  s.towers = std::move(towers);
  return s;
}

inline TowerActivityCounts counts(std::uint32_t tower, std::uint32_t n_total,
                                  std::uint32_t n_window = 0, std::uint32_t n_days_total = 1,
                                  std::uint32_t n_days_window = 0) {
  return TowerActivityCounts{tower, n_total, n_window, n_days_total, n_days_window};
}

}  // namespace homedet::testing
