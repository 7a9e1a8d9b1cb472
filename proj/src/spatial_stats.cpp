// Apache License, Version 2.0, refer to LICENSE.txt
#include "homedet/spatial_stats.hpp"

#include <algorithm>
#include <cmath>

#include "homedet/error.hpp"

namespace homedet {

SpatialWeights SpatialWeights::voronoi_adjacency(const Tessellation& tess,
                                                 const TowerNetwork& net) {
  SpatialWeights w;
  w.scheme_ = "voronoi_adjacency";
  w.rows_.resize(net.size());

  // cell index -> tower indices in that cell
  std::vector<std::vector<std::uint32_t>> towers_of(tess.cells.size());
  for (std::uint32_t t = 0; t < net.size(); ++t)
    towers_of[tess.cell_of_tower[t]].push_back(t);

  for (std::uint32_t t = 0; t < net.size(); ++t) {
    const std::uint32_t c = tess.cell_of_tower[t];
    auto& row = w.rows_[t];
    row.insert(row.end(), towers_of[c].begin(), towers_of[c].end());
    for (std::uint32_t nc : tess.cells[c].neighbor_cells)
      row.insert(row.end(), towers_of[nc].begin(), towers_of[nc].end());
    std::sort(row.begin(), row.end());
  }
  return w;
}

SpatialWeights SpatialWeights::distance_band(const TowerNetwork& net, double band_m) {
  if (!(band_m > 0.0)) throw_usage("distance band must be positive");
  SpatialWeights w;
  w.scheme_ = "distance_band";
  w.rows_.resize(net.size());
  for (std::uint32_t t = 0; t < net.size(); ++t) w.rows_[t] = net.neighbors_within(t, band_m);
  return w;
}

std::vector<double> gi_star(const Eigen::VectorXd& values, const SpatialWeights& w) {
  const auto n = static_cast<std::size_t>(values.size());
  if (n != w.size())
    throw_data("values length " + std::to_string(n) + " does not match weights size " +
               std::to_string(w.size()));
  if (n < 2) throw_data("need at least 2 towers");

  const double mean = values.mean();
  const double sq_mean = values.squaredNorm() / static_cast<double>(n);
  const double var = sq_mean - mean * mean;
  if (!(var > 0.0))
    throw_degenerate("constant field: local statistic undefined when every value is equal");
  const double sd = std::sqrt(var);

  std::vector<double> z(n);
  const double dn = static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = w.row(i);
    double local = 0.0;
    for (std::uint32_t j : row) local += values[static_cast<Eigen::Index>(j)];
    const double wi = static_cast<double>(row.size());
    const double denom_sq = (dn * wi - wi * wi) / (dn - 1.0);
    if (denom_sq <= 0.0) {
      // row covers the whole network: numerator is identically zero
      z[i] = 0.0;
      continue;
    }
    z[i] = (local - mean * wi) / (sd * std::sqrt(denom_sq));
  }
  return z;
}

HotspotMap classify(const std::vector<double>& z, int confidence) {
  double threshold;
  switch (confidence) {
    case 90: threshold = 1.645; break;
    case 95: threshold = 1.960; break;
    case 99: threshold = 2.576; break;
    default: throw_usage("confidence must be 90, 95 or 99");
  }
  HotspotMap map;
  map.confidence = confidence;
  map.z = z;
  map.cls.resize(z.size(), SpotClass::neutral);
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (!std::isfinite(z[i])) throw_data("non-finite z-score at index " + std::to_string(i));
    if (z[i] >= threshold) map.cls[i] = SpotClass::hot;
    else if (z[i] <= -threshold) map.cls[i] = SpotClass::cold;
  }
  return map;
}

LogRatioMap log_ratio(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size())
    throw_data("vector length mismatch: " + std::to_string(a.size()) + " vs " +
               std::to_string(b.size()));
  LogRatioMap map;
  const auto n = static_cast<std::size_t>(a.size());
  map.value.assign(n, 0.0);
  map.defined.assign(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    if (a[k] > 0.0 && b[k] > 0.0) {
      map.value[i] = std::log(a[k] / b[k]);
      map.defined[i] = true;
    } else {
      ++map.skipped;
    }
  }
  return map;
}

}  // namespace homedet
