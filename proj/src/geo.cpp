// Apache License, Version 2.0, refer to LICENSE.txt
#include "homedet/geo.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "homedet/csv.hpp"
#include "homedet/error.hpp"

namespace homedet {

namespace {

constexpr double kDegToRad = M_PI / 180.0;

void check_coordinate(const LonLat& p) {
  if (!std::isfinite(p.lon) || !std::isfinite(p.lat) || p.lon < -180.0 || p.lon > 180.0 ||
      p.lat < -90.0 || p.lat > 90.0)
    throw_data("coordinate out of range: lon=" + std::to_string(p.lon) +
               " lat=" + std::to_string(p.lat));
}

}  // namespace

double haversine_m(const LonLat& a, const LonLat& b) {
  check_coordinate(a);
  check_coordinate(b);
  const double phi1 = a.lat * kDegToRad;
  const double phi2 = b.lat * kDegToRad;
  const double dphi = (b.lat - a.lat) * kDegToRad;
  const double dlambda = (b.lon - a.lon) * kDegToRad;
  const double s1 = std::sin(dphi / 2);
  const double s2 = std::sin(dlambda / 2);
  const double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(h)));
}

AzimuthalProjection::AzimuthalProjection(LonLat center)
    : center_(center),
      sin_lat0_(std::sin(center.lat * kDegToRad)),
      cos_lat0_(std::cos(center.lat * kDegToRad)) {}

PlanarPoint AzimuthalProjection::forward(const LonLat& p) const {
  const double phi = p.lat * kDegToRad;
  const double dl = (p.lon - center_.lon) * kDegToRad;
  const double sin_phi = std::sin(phi);
  const double cos_phi = std::cos(phi);
  const double cos_c = sin_lat0_ * sin_phi + cos_lat0_ * cos_phi * std::cos(dl);
  const double c = std::acos(std::clamp(cos_c, -1.0, 1.0));
  // k -> 1 as c -> 0
  const double k = c < 1e-12 ? 1.0 : c / std::sin(c);
  return PlanarPoint{kEarthRadiusM * k * cos_phi * std::sin(dl),
                     kEarthRadiusM * k * (cos_lat0_ * sin_phi - sin_lat0_ * cos_phi * std::cos(dl))};
}

LonLat AzimuthalProjection::inverse(const PlanarPoint& p) const {
  const double rho = std::hypot(p.x, p.y);
  if (rho < 1e-9) return center_;
  const double c = rho / kEarthRadiusM;
  const double sin_c = std::sin(c);
  const double cos_c = std::cos(c);
  const double lat =
      std::asin(std::clamp(cos_c * sin_lat0_ + p.y * sin_c * cos_lat0_ / rho, -1.0, 1.0));
  const double lon = center_.lon * kDegToRad +
                     std::atan2(p.x * sin_c, rho * cos_lat0_ * cos_c - p.y * sin_lat0_ * sin_c);
  return LonLat{lon / kDegToRad, lat / kDegToRad};
}

double ring_area(const Ring& ring) {
  double acc = 0.0;
  const std::size_t n = ring.size();
  for (std::size_t i = 0; i < n; ++i) {
    const PlanarPoint& a = ring[i];
    const PlanarPoint& b = ring[(i + 1) % n];
    acc += a.x * b.y - b.x * a.y;
  }
  return acc / 2.0;
}

bool point_in_ring(const PlanarPoint& p, const Ring& ring) {
  bool inside = false;
  const std::size_t n = ring.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const PlanarPoint& a = ring[i];
    const PlanarPoint& b = ring[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x = (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x;
      if (p.x < x) inside = !inside;
    }
  }
  return inside;
}

Ring convex_hull(std::vector<PlanarPoint> pts) {
  std::sort(pts.begin(), pts.end(), [](const PlanarPoint& a, const PlanarPoint& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const PlanarPoint& a, const PlanarPoint& b) {
                          return a.x == b.x && a.y == b.y;
                        }),
            pts.end());
  const std::size_t n = pts.size();
  if (n < 3) return pts;
  auto cross = [](const PlanarPoint& o, const PlanarPoint& a, const PlanarPoint& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
  };
  std::vector<PlanarPoint> hull(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  const std::size_t lower = k + 1;
  for (std::size_t i = n - 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);  // lower-then-upper chain, already CCW
  return hull;
}

namespace {

// convex hull of the towers buffered by `buffer_m`, approximated by hulling
// 64-gon samples around each hull vertex
Ring buffered_hull(const std::vector<PlanarPoint>& pts, double buffer_m) {
  Ring base = convex_hull(pts);
  std::vector<PlanarPoint> samples;
  samples.reserve(base.size() * 64);
  for (const PlanarPoint& p : base) {
    for (int k = 0; k < 64; ++k) {
      const double a = 2.0 * M_PI * k / 64;
      samples.push_back(PlanarPoint{p.x + buffer_m * std::cos(a), p.y + buffer_m * std::sin(a)});
    }
  }
  return convex_hull(std::move(samples));
}

}  // namespace

TowerNetwork TowerNetwork::build(std::vector<CellTower> towers,
                                 std::optional<std::vector<LonLat>> boundary) {
  if (towers.empty()) throw_data("tower network needs at least one tower");
  for (const CellTower& t : towers) {
    if (!is_safe_id(t.id)) throw_data("tower id '" + t.id + "' is empty or contains , \" or #");
    check_coordinate(t.position());
  }
  std::sort(towers.begin(), towers.end(),
            [](const CellTower& a, const CellTower& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < towers.size(); ++i)
    if (towers[i].id == towers[i - 1].id) throw_data("duplicate tower id '" + towers[i].id + "'");

  TowerNetwork net;
  net.towers_ = std::move(towers);
  net.index_.reserve(net.towers_.size());
  for (std::uint32_t i = 0; i < net.towers_.size(); ++i) net.index_.emplace(net.towers_[i].id, i);

  double lon_sum = 0, lat_sum = 0;
  for (const CellTower& t : net.towers_) {
    lon_sum += t.lon;
    lat_sum += t.lat;
  }
  const double n = static_cast<double>(net.towers_.size());
  net.proj_ = AzimuthalProjection(LonLat{lon_sum / n, lat_sum / n});

  net.planar_.reserve(net.towers_.size());
  for (const CellTower& t : net.towers_) net.planar_.push_back(net.proj_.forward(t.position()));

  if (boundary) {
    if (boundary->size() < 3) throw_data("boundary polygon needs at least 3 vertices");
    for (const LonLat& p : *boundary) check_coordinate(p);
    net.boundary_lonlat_ = std::move(*boundary);
    net.boundary_planar_.reserve(net.boundary_lonlat_.size());
    for (const LonLat& p : net.boundary_lonlat_) net.boundary_planar_.push_back(net.proj_.forward(p));
    if (ring_area(net.boundary_planar_) < 0) {
      std::reverse(net.boundary_planar_.begin(), net.boundary_planar_.end());
      std::reverse(net.boundary_lonlat_.begin(), net.boundary_lonlat_.end());
    }
    if (ring_area(net.boundary_planar_) <= 0) throw_data("boundary polygon has zero area");
  } else {
    net.boundary_planar_ = buffered_hull(net.planar_, 10000.0);
    net.boundary_lonlat_.reserve(net.boundary_planar_.size());
    for (const PlanarPoint& p : net.boundary_planar_)
      net.boundary_lonlat_.push_back(net.proj_.inverse(p));
  }

  // bucket grid over the tower extent
  double xmin = net.planar_[0].x, xmax = xmin, ymin = net.planar_[0].y, ymax = ymin, rmax = 0;
  for (const PlanarPoint& p : net.planar_) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
    rmax = std::max(rmax, std::hypot(p.x, p.y));
  }
  // stretch bound of the projection over the tower extent (see class comment)
  const double c = rmax / kEarthRadiusM;
  net.planar_slack_ = (c < 1e-9 ? 1.0 : c / std::sin(std::min(c, M_PI * 0.999))) * (1.0 + 1e-9);

  const int target_cells = static_cast<int>(net.towers_.size());
  const double extent = std::max({xmax - xmin, ymax - ymin, 1.0});
  net.cell_size_ = std::max(extent / std::max(1.0, std::sqrt(static_cast<double>(target_cells))), 1.0);
  net.grid_x0_ = xmin;
  net.grid_y0_ = ymin;
  net.grid_nx_ = static_cast<int>((xmax - xmin) / net.cell_size_) + 1;
  net.grid_ny_ = static_cast<int>((ymax - ymin) / net.cell_size_) + 1;
  net.grid_.assign(static_cast<std::size_t>(net.grid_nx_) * net.grid_ny_, {});
  for (std::uint32_t i = 0; i < net.planar_.size(); ++i) {
    const int gx = static_cast<int>((net.planar_[i].x - net.grid_x0_) / net.cell_size_);
    const int gy = static_cast<int>((net.planar_[i].y - net.grid_y0_) / net.cell_size_);
    net.grid_[static_cast<std::size_t>(gy) * net.grid_nx_ + gx].push_back(i);
  }
  return net;
}

std::optional<std::uint32_t> TowerNetwork::index_of(std::string_view id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::uint32_t TowerNetwork::require_index(std::string_view id) const {
  const auto idx = index_of(id);
  if (!idx) throw_data("unknown tower id '" + std::string(id) + "'");
  return *idx;
}

std::vector<std::uint32_t> TowerNetwork::neighbors_within(std::uint32_t idx, double radius_m) const {
  if (idx >= towers_.size()) throw_data("tower index out of range");
  if (!(radius_m >= 0.0)) throw_data("radius must be >= 0");

  const PlanarPoint& c = planar_[idx];
  const LonLat center = towers_[idx].position();
  // candidate search in the plane with the stretch slack, exact great-circle check after
  const double scan = radius_m * planar_slack_ + 1e-6;
  int gx0 = static_cast<int>(std::floor((c.x - scan - grid_x0_) / cell_size_));
  int gx1 = static_cast<int>(std::floor((c.x + scan - grid_x0_) / cell_size_));
  int gy0 = static_cast<int>(std::floor((c.y - scan - grid_y0_) / cell_size_));
  int gy1 = static_cast<int>(std::floor((c.y + scan - grid_y0_) / cell_size_));
  gx0 = std::max(gx0, 0);
  gy0 = std::max(gy0, 0);
  gx1 = std::min(gx1, grid_nx_ - 1);
  gy1 = std::min(gy1, grid_ny_ - 1);

  std::vector<std::uint32_t> out;
  for (int gy = gy0; gy <= gy1; ++gy) {
    for (int gx = gx0; gx <= gx1; ++gx) {
      for (std::uint32_t j : grid_[static_cast<std::size_t>(gy) * grid_nx_ + gx]) {
        if (j == idx) continue;
        const double dx = planar_[j].x - c.x;
        const double dy = planar_[j].y - c.y;
        if (dx * dx + dy * dy > scan * scan) continue;
        if (haversine_m(center, towers_[j].position()) <= radius_m) out.push_back(j);
      }
    }
  }
  out.push_back(idx);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> neighbors_within(const TowerNetwork& net, std::string_view tower_id,
                                          double radius_m) {
  const std::uint32_t idx = net.require_index(tower_id);
  std::vector<std::string> out;
  for (std::uint32_t j : net.neighbors_within(idx, radius_m)) out.push_back(net.tower(j).id);
  return out;
}

NeighborIndex::NeighborIndex(const TowerNetwork& net, double radius_m) : radius_m_(radius_m) {
  if (!(radius_m > 0.0)) throw_data("neighbor radius must be > 0");
  lists_.resize(net.size());
  for (std::uint32_t i = 0; i < net.size(); ++i) lists_[i] = net.neighbors_within(i, radius_m);
}

std::vector<CellTower> read_towers_csv(const std::string& path) {
  const std::string text = read_file(path);
  std::vector<CellTower> towers;
  std::vector<std::string_view> fields;
  bool header_seen = false;
  for_each_csv_line(text, [&](std::string_view line, std::size_t lineno) {
    split_fields(line, fields);
    if (!header_seen) {
      if (fields.size() != 3 || fields[0] != "tower_id" || fields[1] != "lon" || fields[2] != "lat")
        throw_data(path + ":" + std::to_string(lineno) + ": expected header tower_id,lon,lat");
      header_seen = true;
      return true;
    }
    if (fields.size() != 3)
      throw_data(path + ":" + std::to_string(lineno) + ": expected 3 fields");
    const auto lon = parse_f64(fields[1]);
    const auto lat = parse_f64(fields[2]);
    if (!lon || !lat)
      throw_data(path + ":" + std::to_string(lineno) + ": bad coordinate");
    if (!std::isfinite(*lon) || !std::isfinite(*lat) || std::abs(*lon) > 180.0 ||
        std::abs(*lat) > 90.0)
      throw_data(path + ":" + std::to_string(lineno) + ": coordinate out of range");
    towers.push_back(CellTower{std::string(fields[0]), *lon, *lat});
    return true;
  });
  if (!header_seen) throw_data(path + ": empty tower file");
  return towers;
}

std::string towers_csv_string(const std::vector<CellTower>& towers, const std::string& stamp) {
  std::string out;
  if (!stamp.empty()) out += "# " + stamp + "\n";
  out += "tower_id,lon,lat\n";
  char buf[64];
  const auto shortest = [&buf](double v) {
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
  };
  for (const CellTower& t : towers) {
    out += t.id;
    out += ',';
    out += shortest(t.lon);
    out += ',';
    out += shortest(t.lat);
    out += '\n';
  }
  return out;
}

}  // namespace homedet
