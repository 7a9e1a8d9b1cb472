// Apache License, Version 2.0, refer to LICENSE.txt
#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "homedet/error.hpp"
#include "homedet/hda.hpp"
#include "homedet/rng.hpp"

using namespace homedet;
using homedet::testing::counts;
using homedet::testing::summary;

namespace {

// two towers 800 m apart plus one 3 km away
TowerNetwork near_far_network() {
  return homedet::testing::offsets_network({{0, 0}, {800, 0}, {3000, 0}});
}

ActivitySummary random_summary(Rng& rng, const TowerNetwork& net, std::string user) {
  ActivitySummary s;
  s.user_id = std::move(user);
  s.period = 0;
  const std::size_t n = 1 + rng.uniform_index(std::min<std::size_t>(6, net.size()));
  std::set<std::uint32_t> picked;
  while (picked.size() < n) picked.insert(static_cast<std::uint32_t>(rng.uniform_index(net.size())));
  for (std::uint32_t t : picked) {
    TowerActivityCounts c;
    c.tower = t;
    c.n_total = static_cast<std::uint32_t>(rng.uniform_index(20));  // may be 0
    c.n_window = static_cast<std::uint32_t>(rng.uniform_index(c.n_total + 1));
    c.n_days_total = c.n_total == 0 ? 0 : 1 + static_cast<std::uint32_t>(rng.uniform_index(
                                              std::min<std::uint64_t>(c.n_total, 28)));
    c.n_days_window = std::min(c.n_days_total,
                               c.n_window == 0 ? 0u
                                               : 1u + static_cast<std::uint32_t>(
                                                          rng.uniform_index(c.n_window)));
    if (c.n_total == 0) continue;  // aggregation never emits empty tower rows
    s.towers.push_back(c);
  }
  return s;
}

}  // namespace

TEST_SUITE("hda") {

TEST_CASE("rule parsing") {
  CHECK(parse_rule("1") == Rule::activities);
  CHECK(parse_rule("activities") == Rule::activities);
  CHECK(parse_rule("3") == Rule::time_window);
  CHECK(parse_rule("time") == Rule::time_window);
  CHECK(parse_rule("timespace") == Rule::time_space);
  CHECK_FALSE(parse_rule("6").has_value());
  CHECK_FALSE(parse_rule("").has_value());

  CHECK(parse_rules("all").size() == 5);
  CHECK(parse_rules("1,3") == std::vector<Rule>{Rule::activities, Rule::time_window});
  CHECK(parse_rules("space,days") == std::vector<Rule>{Rule::space_radius, Rule::days});
  CHECK(parse_rules("2,2").size() == 1);  // duplicates collapse
  CHECK_THROWS_AS(parse_rules("1,9"), Error);
  CHECK_THROWS_AS(parse_rules(""), Error);
  for (Rule r : kAllRules) CHECK(parse_rule(rule_name(r)) == r);
}

TEST_CASE("record counting picks the busiest tower") {
  const TowerNetwork net = near_far_network();
  const RuleContext ctx{net, 1000.0, nullptr};
  const auto s = summary("u1", 0, {counts(0, 5, 2, 3, 2), counts(1, 3, 3, 2, 2)});

  const auto scores = score_towers(Rule::activities, s, ctx);
  REQUIRE(scores.size() == 2);
  CHECK(scores[0].tower == 0);
  CHECK(scores[0].score == 5);
  CHECK(scores[1].score == 3);

  const auto res = detect_home(Rule::activities, s, ctx);
  REQUIRE(res.has_value());
  CHECK(res->l1() == 0);
  CHECK(res->scores[0] == 5);
  CHECK(res->n_ranked == 2);
  CHECK(res->towers[1] == 1);
  CHECK_FALSE(res->l1_tied);
}

TEST_CASE("day counting scores distinct active days") {
  const TowerNetwork net = near_far_network();
  const RuleContext ctx{net, 1000.0, nullptr};
  // fewer records but spread over more days wins
  const auto s = summary("u1", 0, {counts(0, 9, 0, 2, 0), counts(1, 4, 0, 4, 0)});
  const auto res = detect_home(Rule::days, s, ctx);
  REQUIRE(res.has_value());
  CHECK(res->l1() == 1);
  CHECK(res->scores[0] == 4);
}

TEST_CASE("night counting ignores daytime-only towers") {
  const TowerNetwork net = near_far_network();
  const RuleContext ctx{net, 1000.0, nullptr};

  // all records outside the window: no tower scores, the user stays undetected
  const auto daytime = summary("u1", 0, {counts(0, 7, 0, 3, 0), counts(1, 2, 0, 1, 0)});
  CHECK(score_towers(Rule::time_window, daytime, ctx).empty());
  CHECK_FALSE(detect_home(Rule::time_window, daytime, ctx).has_value());

  // night records at the smaller tower flip the decision vs plain counting
  const auto mixed = summary("u2", 0, {counts(0, 7, 1, 3, 1), counts(1, 4, 3, 2, 2)});
  const auto act = detect_home(Rule::activities, mixed, ctx);
  const auto night = detect_home(Rule::time_window, mixed, ctx);
  REQUIRE(act.has_value());
  REQUIRE(night.has_value());
  CHECK(act->l1() == 0);
  CHECK(night->l1() == 1);
  CHECK(night->scores[0] == 3);
}

TEST_CASE("perimeter aggregation pools towers within the radius") {
  const TowerNetwork net = near_far_network();  // towers 0,1 within 800 m; tower 2 far
  const NeighborIndex idx(net, 1000.0);
  const RuleContext ctx{net, 1000.0, &idx};

  const auto s = summary("u1", 0, {counts(0, 8, 2, 4, 2), counts(1, 8, 3, 4, 3)});
  const auto scores = score_towers(Rule::space_radius, s, ctx);
  REQUIRE(scores.size() == 2);
  CHECK(scores[0].score == 16);  // both towers pool each other
  CHECK(scores[1].score == 16);

  const auto res = detect_home(Rule::space_radius, s, ctx);
  REQUIRE(res.has_value());
  CHECK(res->l1() == 0);   // full tie, resolved by tower id
  CHECK(res->l1_tied);
  CHECK(res->scores[1] == 16);

  const auto night = detect_home(Rule::time_space, s, ctx);
  REQUIRE(night.has_value());
  CHECK(night->scores[0] == 5);  // pooled night records tie as well
  CHECK(night->l1() == 0);
  CHECK(night->l1_tied);
}

TEST_CASE("towers beyond the radius are not pooled") {
  const TowerNetwork net = near_far_network();
  const NeighborIndex idx(net, 1000.0);
  const RuleContext ctx{net, 1000.0, &idx};
  const auto s = summary("u1", 0, {counts(0, 5, 0, 2, 0), counts(2, 4, 0, 2, 0)});
  const auto scores = score_towers(Rule::space_radius, s, ctx);
  REQUIRE(scores.size() == 2);
  CHECK(scores[0].score == 5);  // 3 km apart: no pooling
  CHECK(scores[1].score == 4);
}

TEST_CASE("perimeter fallback path matches the index path") {
  Rng rng(41);
  const TowerNetwork net = homedet::testing::grid_network(6, 6, 700.0);
  const NeighborIndex idx(net, 1000.0);
  const RuleContext with_index{net, 1000.0, &idx};
  const RuleContext without{net, 1000.0, nullptr};
  for (int i = 0; i < 300; ++i) {
    const auto s = random_summary(rng, net, "u" + std::to_string(i));
    for (Rule rule : {Rule::space_radius, Rule::time_space}) {
      const auto a = score_towers(rule, s, with_index);
      const auto b = score_towers(rule, s, without);
      REQUIRE(a.size() == b.size());
      for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(a[k].tower == b[k].tower);
        CHECK(a[k].score == b[k].score);
      }
    }
  }
}

TEST_CASE("tie chain: score, records, days, id") {
  const TowerNetwork net = near_far_network();
  const RuleContext ctx{net, 1000.0, nullptr};

  // same day count; more records wins
  auto s = summary("u1", 0, {counts(0, 4, 0, 3, 0), counts(1, 6, 0, 3, 0)});
  auto res = detect_home(Rule::days, s, ctx);
  REQUIRE(res.has_value());
  CHECK(res->l1() == 1);
  CHECK_FALSE(res->l1_tied);

  // same day count and records; more distinct days cannot differ under the
  // days rule, so move to the night rule: days break the tie
  s = summary("u2", 0, {counts(0, 5, 2, 2, 1), counts(1, 5, 2, 4, 2)});
  res = detect_home(Rule::time_window, s, ctx);
  REQUIRE(res.has_value());
  CHECK(res->l1() == 1);
  CHECK_FALSE(res->l1_tied);

  // full chain equality: smallest tower id wins and the tie is flagged
  s = summary("u3", 0, {counts(0, 5, 2, 3, 2), counts(2, 5, 2, 3, 1)});
  res = detect_home(Rule::time_window, s, ctx);
  REQUIRE(res.has_value());
  CHECK(res->l1() == 0);
  CHECK(res->l1_tied);
}

TEST_CASE("top three ranking") {
  const TowerNetwork net = homedet::testing::grid_network(4, 1, 5000.0);
  const RuleContext ctx{net, 1000.0, nullptr};
  const auto s = summary("u1", 0,
                         {counts(0, 1, 0, 1, 0), counts(1, 9, 0, 4, 0), counts(2, 5, 0, 3, 0),
                          counts(3, 7, 0, 2, 0)});
  const auto res = detect_home(Rule::activities, s, ctx);
  REQUIRE(res.has_value());
  CHECK(res->n_ranked == 3);
  CHECK(res->towers[0] == 1);
  CHECK(res->towers[1] == 3);
  CHECK(res->towers[2] == 2);
  CHECK(res->scores[0] == 9);
  CHECK(res->scores[1] == 7);
  CHECK(res->scores[2] == 5);
}

TEST_CASE("score conservation per rule") {
  Rng rng(42);
  const TowerNetwork net = homedet::testing::grid_network(5, 5, 2000.0);
  const RuleContext ctx{net, 1000.0, nullptr};
  for (int i = 0; i < 200; ++i) {
    const auto s = random_summary(rng, net, "u");
    std::uint64_t total = 0, window = 0;
    for (const auto& t : s.towers) {
      total += t.n_total;
      window += t.n_window;
    }
    std::uint64_t act = 0, night = 0;
    for (const auto& r : score_towers(Rule::activities, s, ctx)) act += r.score;
    for (const auto& r : score_towers(Rule::time_window, s, ctx)) night += r.score;
    CHECK(act == total);
    CHECK(night == window);
  }
}

TEST_CASE("time-constrained rules detect a subset of their base rules") {
  Rng rng(43);
  const TowerNetwork net = homedet::testing::grid_network(6, 6, 800.0);
  const NeighborIndex idx(net, 1000.0);
  const RuleContext ctx{net, 1000.0, &idx};
  int detected_night = 0;
  for (int i = 0; i < 2000; ++i) {
    const auto s = random_summary(rng, net, "u");
    if (detect_home(Rule::time_window, s, ctx).has_value()) {
      ++detected_night;
      CHECK(detect_home(Rule::activities, s, ctx).has_value());
    }
    if (detect_home(Rule::time_space, s, ctx).has_value())
      CHECK(detect_home(Rule::space_radius, s, ctx).has_value());
  }
  CHECK(detected_night > 100);  // the property was actually exercised
}

TEST_CASE("table runs split by period and are worker independent") {
  Rng rng(44);
  const TowerNetwork net = homedet::testing::grid_network(5, 5, 1500.0);
  std::vector<ActivitySummary> summaries;
  for (int u = 0; u < 200; ++u) {
    char id[8];
    std::snprintf(id, sizeof id, "u%04d", u);
    for (std::uint32_t p = 0; p < 2; ++p) {
      if (rng.bernoulli(0.2)) continue;
      auto s = random_summary(rng, net, id);
      s.period = p;
      if (s.towers.empty()) continue;
      summaries.push_back(std::move(s));
    }
  }
  std::sort(summaries.begin(), summaries.end(), [](const auto& a, const auto& b) {
    return a.user_id != b.user_id ? a.user_id < b.user_id : a.period < b.period;
  });
  const std::vector<std::string> labels{"2026-01", "2026-02"};

  const auto tables = run_hda(Rule::activities, summaries, net, labels, 1000.0, 1);
  REQUIRE(tables.size() == 2);
  CHECK(tables[0].period == "2026-01");
  CHECK(tables[1].period == "2026-02");
  for (const auto& t : tables) {
    CHECK(std::is_sorted(t.rows.begin(), t.rows.end(),
                         [](const DetectionResult& a, const DetectionResult& b) {
                           return a.user_id < b.user_id;
                         }));
    std::uint64_t ties = 0;
    for (const auto& row : t.rows) ties += row.l1_tied;
    CHECK(ties == t.l1_ties);
  }

  const auto parallel = run_hda(Rule::activities, summaries, net, labels, 1000.0, 4);
  REQUIRE(parallel.size() == tables.size());
  for (std::size_t i = 0; i < tables.size(); ++i) {
    REQUIRE(parallel[i].rows.size() == tables[i].rows.size());
    for (std::size_t r = 0; r < tables[i].rows.size(); ++r) {
      CHECK(parallel[i].rows[r].user_id == tables[i].rows[r].user_id);
      CHECK(parallel[i].rows[r].towers == tables[i].rows[r].towers);
      CHECK(parallel[i].rows[r].scores == tables[i].rows[r].scores);
    }
  }
}

TEST_CASE("rank level counting") {
  const TowerNetwork net = homedet::testing::grid_network(4, 1, 5000.0);
  std::vector<ActivitySummary> summaries;
  // 3 users: one tower, two towers, three towers
  summaries.push_back(summary("u1", 0, {counts(0, 5, 1, 2, 1)}));
  summaries.push_back(summary("u2", 0, {counts(0, 5, 0, 2, 0), counts(1, 3, 0, 2, 0)}));
  summaries.push_back(summary("u3", 0, {counts(0, 5, 0, 2, 0), counts(1, 3, 0, 2, 0),
                                        counts(2, 1, 0, 1, 0)}));
  const std::vector<std::string> labels{"p0"};
  const auto tables = run_hda(Rule::activities, summaries, net, labels);
  const auto counts_by_rule = detection_counts(tables);
  REQUIRE(counts_by_rule.size() == 1);
  CHECK(counts_by_rule[0].l1 == 3);
  CHECK(counts_by_rule[0].l2 == 2);
  CHECK(counts_by_rule[0].l3 == 1);
  CHECK(counts_by_rule[0].l2_pct_of_l1() == doctest::Approx(200.0 / 3.0));
}

TEST_CASE("invalid radius is rejected") {
  const TowerNetwork net = near_far_network();
  const std::vector<std::string> labels{"p0"};
  std::vector<ActivitySummary> none;
  CHECK_THROWS_AS(run_hda(Rule::space_radius, none, net, labels, 0.0, 1), Error);
  CHECK_THROWS_AS(run_hda(Rule::space_radius, none, net, labels, -5.0, 1), Error);
}

}  // TEST_SUITE
