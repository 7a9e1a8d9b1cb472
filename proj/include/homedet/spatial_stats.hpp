// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "homedet/geo.hpp"
#include "homedet/voronoi.hpp"

namespace homedet {

// Binary symmetric spatial weights with self-weight always present (the
// star form of the local statistic includes the focal value).
class SpatialWeights {
 public:
  // Towers are neighbors when their Voronoi cells share an edge; towers
  // merged into one cell (coincident coordinates) are mutual neighbors and
  // inherit the cell's adjacency.
  static SpatialWeights voronoi_adjacency(const Tessellation& tess, const TowerNetwork& net);

  // Towers are neighbors when within `band_m` great-circle meters.
  static SpatialWeights distance_band(const TowerNetwork& net, double band_m);

  std::size_t size() const { return rows_.size(); }
  // ascending tower indices, always containing `i` itself
  const std::vector<std::uint32_t>& row(std::size_t i) const { return rows_[i]; }
  const std::string& scheme() const { return scheme_; }

 private:
  std::vector<std::vector<std::uint32_t>> rows_;
  std::string scheme_;
};

// Local z-scores: z_i = (sum_{j in row(i)} x_j - mean * W_i) /
// (sd * sqrt((n*W_i - W_i^2)/(n-1))) with the global mean and the population
// standard deviation over all n values and W_i = |row(i)|. A row spanning the
// whole network makes the statistic 0/0; such z are defined as 0. A constant
// field (sd = 0) raises Error(degenerate).
std::vector<double> gi_star(const Eigen::VectorXd& values, const SpatialWeights& w);

enum class SpotClass : std::uint8_t { cold, neutral, hot };

struct HotspotMap {
  int confidence = 90;  // 90, 95 or 99
  std::vector<double> z;
  std::vector<SpotClass> cls;
};

// 90% -> |z| >= 1.645, 95% -> 1.960, 99% -> 2.576; sign picks hot vs cold.
HotspotMap classify(const std::vector<double>& z, int confidence);

struct LogRatioMap {
  std::vector<double> value;   // meaningful where defined[i]
  std::vector<bool> defined;
  std::uint64_t skipped = 0;   // towers where either side was not positive
};

// ln(a_i / b_i) where both sides are positive; other towers are skipped.
LogRatioMap log_ratio(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

}  // namespace homedet
