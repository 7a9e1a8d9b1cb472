// Apache License, Version 2.0, refer to LICENSE.txt
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "homedet/csv.hpp"
#include "homedet/error.hpp"
#include "homedet/rng.hpp"
#include "homedet/validate.hpp"

using namespace homedet;
using homedet::testing::TempDir;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> values) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

HomeTable table_with_l1(Rule rule, const std::string& period,
                        const std::vector<std::uint32_t>& l1s) {
  HomeTable t;
  t.rule = rule;
  t.period = period;
  for (std::size_t i = 0; i < l1s.size(); ++i) {
    DetectionResult r;
    r.user_id = "u" + std::to_string(1000 + i);
    r.n_ranked = 1;
    r.towers[0] = l1s[i];
    t.rows.push_back(std::move(r));
  }
  return t;
}

}  // namespace

TEST_SUITE("validate") {

TEST_CASE("angle anchor points") {
  CHECK(csm_degrees(vec({1, 0}), vec({0, 1})) == doctest::Approx(90.0).epsilon(1e-12));
  CHECK(csm_degrees(vec({1, 0}), vec({1, 1})) == doctest::Approx(45.0).epsilon(1e-12));
  CHECK(csm_degrees(vec({1, 2, 3}), vec({1, 2, 3})) == 0.0);  // exactly
  CHECK(cosine(vec({1, 2, 3}), vec({2, 4, 6})) == 1.0);
}

TEST_CASE("identical direction measures exactly zero") {
  Rng rng(61);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd x(200);
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = std::floor(rng.uniform(0, 1000));
    if (x.sum() == 0) x[0] = 1;
    CHECK(cosine(x, x) == 1.0);
    CHECK(csm_degrees(x, x) == 0.0);
  }
}

TEST_CASE("zero-norm vectors are degenerate") {
  CHECK_THROWS_AS(cosine(vec({0, 0, 0}), vec({1, 2, 3})), Error);
  try {
    csm_degrees(vec({1, 1}), vec({0, 0}));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::degenerate);
  }
  CHECK_THROWS_AS(cosine(vec({1, 2}), vec({1, 2, 3})), Error);  // length mismatch
}

TEST_CASE("non-negative vectors stay within the quarter turn") {
  Rng rng(62);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::VectorXd x(50), y(50);
    for (Eigen::Index i = 0; i < 50; ++i) {
      x[i] = rng.bernoulli(0.3) ? 0.0 : rng.uniform(0, 10);
      y[i] = rng.bernoulli(0.3) ? 0.0 : rng.uniform(0, 10);
    }
    if (x.sum() == 0) x[0] = 1;
    if (y.sum() == 0) y[1] = 1;
    const double deg = csm_degrees(x, y);
    CHECK(deg >= 0.0);
    CHECK(deg <= 90.0);
  }
}

TEST_CASE("scale invariance") {
  Rng rng(63);
  Eigen::VectorXd x(300), y(300);
  for (Eigen::Index i = 0; i < 300; ++i) {
    x[i] = rng.uniform(0, 5);
    y[i] = rng.uniform(0, 5);
  }
  const double base = csm_degrees(x, y);
  for (double c : {1e-6, 3.0, 1e6})
    CHECK(csm_degrees(x, Eigen::VectorXd(c * y)) == doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("permutation applied to both sides preserves the angle") {
  Rng rng(64);
  Eigen::VectorXd x(100), y(100);
  for (Eigen::Index i = 0; i < 100; ++i) {
    x[i] = rng.uniform(0, 5);
    y[i] = rng.uniform(0, 5);
  }
  std::vector<Eigen::Index> perm(100);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 mix(9);
  std::shuffle(perm.begin(), perm.end(), mix);
  Eigen::VectorXd px(100), py(100);
  for (Eigen::Index i = 0; i < 100; ++i) {
    px[i] = x[perm[static_cast<std::size_t>(i)]];
    py[i] = y[perm[static_cast<std::size_t>(i)]];
  }
  CHECK(csm_degrees(px, py) == doctest::Approx(csm_degrees(x, y)).epsilon(1e-9));
}

TEST_CASE("population counts from a table") {
  const TowerNetwork net = homedet::testing::grid_network(4, 1, 5000.0);
  const HomeTable t = table_with_l1(Rule::activities, "p", {0, 2, 2, 3, 2});
  const PopulationVector v = population_counts(t, net);
  CHECK(v.values == vec({1, 0, 3, 1}));
  CHECK(v.source == "activities/p");

  const HomeTable empty = table_with_l1(Rule::days, "p", {});
  CHECK_THROWS_AS(population_counts(empty, net), Error);
}

TEST_CASE("census comparison reports one row per table") {
  const TowerNetwork net = homedet::testing::grid_network(3, 1, 5000.0);
  std::vector<HomeTable> tables;
  tables.push_back(table_with_l1(Rule::activities, "p", {0, 0, 1, 2}));
  tables.push_back(table_with_l1(Rule::time_window, "p", {0, 0, 1, 2}));

  PopulationVector census;
  census.source = "census";
  census.values = population_counts(tables[0], net).values;

  const auto reports = validate_against_census(tables, census, net);
  REQUIRE(reports.size() == 2);
  for (const auto& r : reports) {
    CHECK(r.period == "p");
    CHECK(r.cosine == 1.0);
    CHECK(r.csm_deg == 0.0);  // counts equal the census exactly
  }
}

TEST_CASE("joint restriction drops one-sided towers") {
  const TowerNetwork net = homedet::testing::grid_network(3, 1, 5000.0);
  // counts (2,0,1); census (1,5,1): tower 1 is census-only
  std::vector<HomeTable> tables;
  tables.push_back(table_with_l1(Rule::activities, "p", {0, 0, 2}));
  PopulationVector census;
  census.source = "census";
  census.values = vec({1, 5, 1});

  const auto full = validate_against_census(tables, census, net, false);
  const auto joint = validate_against_census(tables, census, net, true);
  const double expected_full = csm_degrees(vec({2, 0, 1}), vec({1, 5, 1}));
  const double expected_joint = csm_degrees(vec({2, 1}), vec({1, 1}));
  CHECK(full[0].csm_deg == doctest::Approx(expected_full).epsilon(1e-12));
  CHECK(joint[0].csm_deg == doctest::Approx(expected_joint).epsilon(1e-12));
  CHECK(joint[0].csm_deg < full[0].csm_deg);
}

TEST_CASE("census csv round trip and coverage checks") {
  const TowerNetwork net = homedet::testing::grid_network(3, 1, 5000.0);
  PopulationVector v;
  v.source = "census";
  v.values = vec({10, 0, 7});

  TempDir dir;
  const std::string path = dir.file("census.csv");
  write_file(path, census_csv_string(v, net, "seed=1"));
  const PopulationVector back = read_census_csv(path, net);
  CHECK(back.values == v.values);

  write_file(path, "tower_id,population\nt00000,10\nt00002,7\n");  // t00001 missing
  try {
    read_census_csv(path, net);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::data);
    CHECK(std::string(e.what()).find("t00001") != std::string::npos);
  }

  write_file(path, "tower_id,population\nt00000,10\nt00000,3\nt00001,1\nt00002,7\n");
  CHECK_THROWS_AS(read_census_csv(path, net), Error);  // duplicate row

  write_file(path, "tower_id,population\nt00000,10\nt00001,-3\nt00002,7\n");
  CHECK_THROWS_AS(read_census_csv(path, net), Error);  // negative count
}

}  // TEST_SUITE
