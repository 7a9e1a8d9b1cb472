// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace homedet {

constexpr double kEarthRadiusM = 6371000.0;

struct LonLat {
  double lon = 0.0;  // degrees, [-180, 180]
  double lat = 0.0;  // degrees, [-90, 90]
};

// great-circle distance in meters on the fixed-radius sphere;
// throws Error(data) on non-finite or out-of-range coordinates
double haversine_m(const LonLat& a, const LonLat& b);

struct CellTower {
  std::string id;
  double lon = 0.0;
  double lat = 0.0;

  LonLat position() const { return LonLat{lon, lat}; }
};

struct PlanarPoint {
  double x = 0.0;  // meters
  double y = 0.0;
};

// Azimuthal equidistant projection on the sphere. Radial distances from the
// center are exact; distances between arbitrary points are stretched by at
// most c/sin(c) where c is the angular distance from the center, which is
// negligible at country scale compared to tower spacing.
class AzimuthalProjection {
 public:
  explicit AzimuthalProjection(LonLat center);

  PlanarPoint forward(const LonLat& p) const;
  LonLat inverse(const PlanarPoint& p) const;
  LonLat center() const { return center_; }

 private:
  LonLat center_;
  double sin_lat0_;
  double cos_lat0_;
};

// Closed planar ring, implicit last->first edge, CCW for positive area.
using Ring = std::vector<PlanarPoint>;

double ring_area(const Ring& ring);                      // signed (CCW positive)
bool point_in_ring(const PlanarPoint& p, const Ring& ring);  // even-odd rule

// Convex hull (Andrew's monotone chain), CCW, no repeated last point.
Ring convex_hull(std::vector<PlanarPoint> points);

struct StringHash {
  using is_transparent = void;
  std::size_t operator()(std::string_view s) const noexcept {
    return std::hash<std::string_view>{}(s);
  }
  std::size_t operator()(const std::string& s) const noexcept {
    return std::hash<std::string_view>{}(s);
  }
};

// Immutable registry of cell towers: sorted ids, id lookup, a clipping
// boundary, the shared projection centered on the tower centroid, and a
// bucket grid for radius queries.
class TowerNetwork {
 public:
  // Validates, sorts by id, builds the index. When no boundary is supplied,
  // uses the convex hull of the towers buffered by 10 km so border Voronoi
  // cells stay finite.
  static TowerNetwork build(std::vector<CellTower> towers,
                            std::optional<std::vector<LonLat>> boundary = std::nullopt);

  std::size_t size() const { return towers_.size(); }
  const CellTower& tower(std::size_t idx) const { return towers_[idx]; }
  const std::vector<CellTower>& towers() const { return towers_; }

  std::optional<std::uint32_t> index_of(std::string_view id) const;
  std::uint32_t require_index(std::string_view id) const;  // throws Error(data)

  const std::vector<LonLat>& boundary_lonlat() const { return boundary_lonlat_; }
  const Ring& boundary_planar() const { return boundary_planar_; }
  const AzimuthalProjection& projection() const { return proj_; }
  const PlanarPoint& planar(std::size_t idx) const { return planar_[idx]; }

  // All tower indices within `radius_m` great-circle meters of tower `idx`,
  // inclusive; always contains `idx` itself. Sorted ascending.
  std::vector<std::uint32_t> neighbors_within(std::uint32_t idx, double radius_m) const;

 private:
  TowerNetwork() : proj_(LonLat{0, 0}) {}

  std::vector<CellTower> towers_;  // ascending id
  std::unordered_map<std::string, std::uint32_t, StringHash, std::equal_to<>> index_;
  std::vector<LonLat> boundary_lonlat_;
  AzimuthalProjection proj_;
  Ring boundary_planar_;
  std::vector<PlanarPoint> planar_;

  // bucket grid over planar coordinates
  double cell_size_ = 1.0;
  double grid_x0_ = 0.0, grid_y0_ = 0.0;
  int grid_nx_ = 0, grid_ny_ = 0;
  std::vector<std::vector<std::uint32_t>> grid_;
  double planar_slack_ = 1.001;  // worst-case projection stretch over the network extent
};

// Convenience form: neighbor ids for a tower id.
std::vector<std::string> neighbors_within(const TowerNetwork& net, std::string_view tower_id,
                                          double radius_m);

// Precomputed neighbor lists for one (network, radius) pair; what the
// space-constrained decision rules iterate per user.
class NeighborIndex {
 public:
  NeighborIndex(const TowerNetwork& net, double radius_m);

  const std::vector<std::uint32_t>& neighbors(std::size_t idx) const { return lists_[idx]; }
  double radius_m() const { return radius_m_; }

 private:
  double radius_m_;
  std::vector<std::vector<std::uint32_t>> lists_;
};

// Tower CSV: header `tower_id,lon,lat`, '.' decimal separator.
std::vector<CellTower> read_towers_csv(const std::string& path);
std::string towers_csv_string(const std::vector<CellTower>& towers, const std::string& stamp = {});

}  // namespace homedet
