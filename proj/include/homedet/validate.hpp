// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <Eigen/Core>
#include <span>
#include <string>
#include <vector>

#include "homedet/hda.hpp"

namespace homedet {

// Per-tower counts over the full network, zeros included, indexed like
// TowerNetwork so two vectors over the same network compare positionally.
struct PopulationVector {
  std::string source;  // "activities/2007-06", "census", ...
  Eigen::VectorXd values;
};

// values[tower] = number of users whose L1 is that tower; empty tables have
// no defined vector (all-zero) and raise Error(data).
PopulationVector population_counts(const HomeTable& t, const TowerNetwork& net);

// Plain cosine of the angle between the two count vectors, clamped into
// [-1,1]. The single-sqrt form sqrt(dot(x,x)*dot(y,y)) keeps cosine(x,x)
// exactly 1 so identical vectors measure exactly 0 degrees downstream.
// Zero-norm operands raise Error(degenerate).
double cosine(const Eigen::VectorXd& x, const Eigen::VectorXd& y);
double cosine(const PopulationVector& x, const PopulationVector& y);

// |arccos(cosine)| in degrees: 0 = identical direction, 90 = orthogonal.
double csm_degrees(const Eigen::VectorXd& x, const Eigen::VectorXd& y);
double csm_degrees(const PopulationVector& x, const PopulationVector& y);

struct CsmReport {
  Rule rule = Rule::activities;
  std::string period;
  double cosine = 1.0;
  double csm_deg = 0.0;
};

// One report per table against the shared census vector. `joint_nonzero`
// restricts each comparison to towers where both vectors are positive
// (default keeps the full network, zeros included).
std::vector<CsmReport> validate_against_census(std::span<const HomeTable> tables,
                                               const PopulationVector& census,
                                               const TowerNetwork& net,
                                               bool joint_nonzero = false);

// Census CSV: header `tower_id,population`; must cover every network tower
// exactly once (missing ids are listed in the error).
PopulationVector read_census_csv(const std::string& path, const TowerNetwork& net);
std::string census_csv_string(const PopulationVector& v, const TowerNetwork& net,
                              const std::string& stamp = {});

}  // namespace homedet
