// Apache License, Version 2.0, refer to LICENSE.txt
#include "homedet/validate.hpp"

#include <algorithm>
#include <cmath>

#include "homedet/csv.hpp"
#include "homedet/error.hpp"

namespace homedet {

PopulationVector population_counts(const HomeTable& t, const TowerNetwork& net) {
  if (t.rows.empty())
    throw_data("empty table for rule '" + std::string(rule_name(t.rule)) + "' period '" +
               t.period + "': population vector would be all-zero");
  PopulationVector v;
  v.source = std::string(rule_name(t.rule)) + "/" + t.period;
  v.values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(net.size()));
  for (const auto& row : t.rows) {
    if (row.l1() >= net.size())
      throw_data("table references tower index " + std::to_string(row.l1()) +
                 " outside the network");
    v.values[static_cast<Eigen::Index>(row.l1())] += 1.0;
  }
  return v;
}

double cosine(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != y.size())
    throw_data("vector length mismatch: " + std::to_string(x.size()) + " vs " +
               std::to_string(y.size()));
  const double sx = x.dot(x);
  const double sy = y.dot(y);
  if (sx <= 0.0 || sy <= 0.0) throw_degenerate("cosine undefined for a zero-norm vector");
  const double c = x.dot(y) / std::sqrt(sx * sy);
  return std::clamp(c, -1.0, 1.0);
}

double cosine(const PopulationVector& x, const PopulationVector& y) {
  return cosine(x.values, y.values);
}

double csm_degrees(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  return std::abs(std::acos(cosine(x, y)) * (180.0 / M_PI));
}

double csm_degrees(const PopulationVector& x, const PopulationVector& y) {
  return csm_degrees(x.values, y.values);
}

namespace {

// Keep only coordinates where both entries are positive.
void restrict_joint(Eigen::VectorXd& a, Eigen::VectorXd& b) {
  Eigen::Index n = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] > 0.0 && b[i] > 0.0) {
      a[n] = a[i];
      b[n] = b[i];
      ++n;
    }
  }
  a.conservativeResize(n);
  b.conservativeResize(n);
}

}  // namespace

std::vector<CsmReport> validate_against_census(std::span<const HomeTable> tables,
                                               const PopulationVector& census,
                                               const TowerNetwork& net, bool joint_nonzero) {
  if (census.values.size() != static_cast<Eigen::Index>(net.size()))
    throw_data("census vector length " + std::to_string(census.values.size()) +
               " does not match network size " + std::to_string(net.size()));
  std::vector<CsmReport> out;
  out.reserve(tables.size());
  for (const auto& t : tables) {
    PopulationVector counts = population_counts(t, net);
    Eigen::VectorXd a = counts.values;
    Eigen::VectorXd b = census.values;
    if (joint_nonzero) restrict_joint(a, b);
    CsmReport r;
    r.rule = t.rule;
    r.period = t.period;
    r.cosine = cosine(a, b);
    r.csm_deg = std::abs(std::acos(r.cosine) * (180.0 / M_PI));
    out.push_back(std::move(r));
  }
  return out;
}

PopulationVector read_census_csv(const std::string& path, const TowerNetwork& net) {
  const std::string text = read_file(path);
  constexpr std::string_view kHeader = "tower_id,population";
  PopulationVector v;
  v.source = "census";
  v.values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(net.size()));
  std::vector<bool> seen(net.size(), false);
  bool seen_header = false;
  std::vector<std::string_view> fields;
  for_each_csv_line(text, [&](std::string_view line, std::size_t lineno) {
    if (!seen_header) {
      if (line != kHeader)
        throw_data(path + ": expected header '" + std::string(kHeader) + "'");
      seen_header = true;
      return true;
    }
    if (split_fields(line, fields) != 2)
      throw_data(path + ":" + std::to_string(lineno) + ": expected 2 fields");
    const auto idx = net.index_of(fields[0]);
    if (!idx)
      throw_data(path + ":" + std::to_string(lineno) + ": unknown tower '" +
                 std::string(fields[0]) + "'");
    const auto population = parse_f64(fields[1]);
    if (!population || !(*population >= 0.0))
      throw_data(path + ":" + std::to_string(lineno) + ": population must be a number >= 0");
    if (seen[*idx])
      throw_data(path + ":" + std::to_string(lineno) + ": duplicate tower '" +
                 std::string(fields[0]) + "'");
    seen[*idx] = true;
    v.values[static_cast<Eigen::Index>(*idx)] = *population;
    return true;
  });
  if (!seen_header) throw_data(path + ": empty input, missing header");

  std::string missing;
  int n_missing = 0;
  for (std::size_t i = 0; i < net.size(); ++i) {
    if (seen[i]) continue;
    ++n_missing;
    if (n_missing <= 10) {
      if (!missing.empty()) missing += ", ";
      missing += net.tower(i).id;
    }
  }
  if (n_missing > 0)
    throw_data(path + ": census misses " + std::to_string(n_missing) + " tower(s): " + missing +
               (n_missing > 10 ? ", ..." : ""));
  return v;
}

std::string census_csv_string(const PopulationVector& v, const TowerNetwork& net,
                              const std::string& stamp) {
  if (v.values.size() != static_cast<Eigen::Index>(net.size()))
    throw_data("census vector length does not match network size");
  std::string out;
  if (!stamp.empty()) out += "# " + stamp + "\n";
  out += "tower_id,population\n";
  char buf[64];
  for (std::size_t i = 0; i < net.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", v.values[static_cast<Eigen::Index>(i)]);
    out += net.tower(i).id;
    out += ',';
    out += buf;
    out += '\n';
  }
  return out;
}

}  // namespace homedet
