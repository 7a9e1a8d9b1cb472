// Apache License, Version 2.0, refer to LICENSE.txt
#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "homedet/csv.hpp"
#include "homedet/error.hpp"
#include "homedet/ingest.hpp"
#include "homedet/synth.hpp"
#include "homedet/timeutil.hpp"

using namespace homedet;
using homedet::testing::TempDir;

namespace {

SynthConfig small_config() {
  SynthConfig cfg;
  cfg.n_towers = 40;
  cfg.n_users = 200;
  cfg.region_width_km = 100;
  cfg.region_height_km = 100;
  cfg.rate_per_day = 4.0;
  cfg.seed = 9;
  return cfg;
}

Period one_month(double tz = 2.0) { return month_periods(2026, 1, 2026, 1, tz)[0]; }

// per-user slices of a simulated CSV body (rows are grouped per user)
std::map<std::string, std::string> rows_by_user(const std::string& csv) {
  std::map<std::string, std::string> out;
  for_each_csv_line(csv, [&](std::string_view line, std::size_t) {
    if (line.substr(0, 7) == "user_id") return true;
    const auto comma = line.find(',');
    out[std::string(line.substr(0, comma))] += std::string(line) + "\n";
    return true;
  });
  return out;
}

}  // namespace

TEST_SUITE("synth") {

TEST_CASE("world generation is deterministic") {
  const World a = generate_world(small_config());
  const World b = generate_world(small_config());
  REQUIRE(a.truth.users.size() == b.truth.users.size());
  CHECK(a.net.size() == 40);
  for (std::size_t i = 0; i < a.truth.users.size(); ++i) {
    CHECK(a.truth.users[i].user_id == b.truth.users[i].user_id);
    CHECK(a.truth.users[i].home_tower == b.truth.users[i].home_tower);
    CHECK(a.truth.users[i].rate_per_day == b.truth.users[i].rate_per_day);
  }
  for (std::size_t t = 0; t < a.net.size(); ++t) {
    CHECK(a.net.tower(t).lon == b.net.tower(t).lon);
    CHECK(a.net.tower(t).lat == b.net.tower(t).lat);
  }

  SynthConfig other = small_config();
  other.seed = 10;
  const World c = generate_world(other);
  bool differs = false;
  for (std::size_t i = 0; i < std::min(a.truth.users.size(), c.truth.users.size()); ++i)
    differs = differs || a.truth.users[i].home_tower != c.truth.users[i].home_tower;
  CHECK(differs);
}

TEST_CASE("ids are zero padded and towers stay in the region") {
  SynthConfig cfg = small_config();
  const World world = generate_world(cfg);
  CHECK(world.net.tower(0).id == "t00000");
  CHECK(world.truth.users.front().user_id == "u000000");
  CHECK(std::is_sorted(world.truth.users.begin(), world.truth.users.end(),
                       [](const UserTruth& a, const UserTruth& b) {
                         return a.user_id < b.user_id;
                       }));

  const double lat_half = 50.0 / 111.1949266;  // 100 km region
  for (std::size_t t = 0; t < world.net.size(); ++t) {
    CHECK(std::abs(world.net.tower(t).lat - cfg.center_lat) <= lat_half * 1.0001);
  }

  cfg.layout = SynthConfig::Layout::clustered;
  const World clustered = generate_world(cfg);
  for (std::size_t t = 0; t < clustered.net.size(); ++t)
    CHECK(std::abs(clustered.net.tower(t).lat - cfg.center_lat) <= lat_half * 1.0001);
}

TEST_CASE("commuter fraction boundaries") {
  SynthConfig cfg = small_config();
  cfg.commuter_fraction = 0.0;
  for (const auto& u : generate_world(cfg).truth.users) {
    CHECK_FALSE(u.is_commuter);
    CHECK_FALSE(u.work_tower.has_value());
  }
  cfg.commuter_fraction = 1.0;
  for (const auto& u : generate_world(cfg).truth.users) {
    CHECK(u.is_commuter);
    REQUIRE(u.work_tower.has_value());
    CHECK(*u.work_tower != u.home_tower);
  }
}

TEST_CASE("market share subsampling keeps retained users identical") {
  SynthConfig full_cfg = small_config();
  full_cfg.n_users = 400;
  SynthConfig half_cfg = full_cfg;
  half_cfg.market_share = 0.5;

  const World full = generate_world(full_cfg);
  const World half = generate_world(half_cfg);
  CHECK(half.truth.users.size() < full.truth.users.size());
  // retention is a Bernoulli(0.5) per user: stay within 4 sigma of the mean
  const double sd = std::sqrt(400 * 0.5 * 0.5);
  CHECK(std::abs(static_cast<double>(half.truth.users.size()) - 200.0) < 4 * sd);

  std::map<std::string, const UserTruth*> by_id;
  for (const auto& u : full.truth.users) by_id[u.user_id] = &u;
  for (const auto& u : half.truth.users) {
    REQUIRE(by_id.count(u.user_id) == 1);
    const UserTruth& ref = *by_id[u.user_id];
    CHECK(u.home_tower == ref.home_tower);
    CHECK(u.is_commuter == ref.is_commuter);
    CHECK(u.rate_per_day == ref.rate_per_day);
  }

  // the event streams of retained users are byte-identical too
  const auto full_rows = rows_by_user(simulate_cdr_csv(full, one_month()));
  const auto half_rows = rows_by_user(simulate_cdr_csv(half, one_month()));
  for (const auto& [user, rows] : half_rows) {
    REQUIRE(full_rows.count(user) == 1);
    CHECK(full_rows.at(user) == rows);
  }
}

TEST_CASE("simulated records parse cleanly and stay in period") {
  const World world = generate_world(small_config());
  const Period period = one_month();
  const std::string csv = simulate_cdr_csv(world, period);
  const ParseResult parsed = parse_cdr_text(csv, true);
  CHECK(parsed.report.rows_malformed == 0);
  CHECK(parsed.report.rows_ok > 10000);  // 200 users * 31 days * 4/day
  std::set<std::string> users;
  for (const auto& rec : parsed.records) {
    CHECK(rec.ts >= period.start);
    CHECK(rec.ts < period.end);
    CHECK(world.net.index_of(rec.tower_id).has_value());
    users.insert(rec.user_id);
  }
  CHECK(users.size() == world.truth.users.size());
}

TEST_CASE("commuters call from work by day and home by night") {
  SynthConfig cfg = small_config();
  cfg.commuter_fraction = 1.0;
  cfg.night_share = 0.4;
  const World world = generate_world(cfg);
  const Period period = one_month(cfg.tz_offset_hours);
  const ParseResult parsed = parse_cdr_text(simulate_cdr_csv(world, period), true);

  std::map<std::string, const UserTruth*> truth;
  for (const auto& u : world.truth.users) truth[u.user_id] = &u;
  const std::int64_t tz = tz_offset_seconds(cfg.tz_offset_hours);

  std::uint64_t night_rows = 0, work_rows = 0, weekend_day_rows = 0;
  for (const auto& rec : parsed.records) {
    const UserTruth& u = *truth.at(rec.user_id);
    const LocalTime lt = local_time(rec.ts, tz);
    const std::uint32_t tower = world.net.require_index(rec.tower_id);
    if (cfg.window.contains(lt.minute_of_day)) {
      ++night_rows;
      CHECK(tower == u.home_tower);  // nights are always spent at home
    } else {
      const int weekday = static_cast<int>(((lt.date_days % 7) + 7 + 3) % 7);  // 0 = Monday
      if (weekday < 5) {
        ++work_rows;
        CHECK(tower == *u.work_tower);
      } else {
        ++weekend_day_rows;
        CHECK(tower == u.home_tower);  // weekends at home by default
      }
    }
  }
  CHECK(night_rows > 1000);
  CHECK(work_rows > 1000);
  CHECK(weekend_day_rows > 100);
}

TEST_CASE("displaced users call from the holiday tower during the block") {
  SynthConfig cfg = small_config();
  cfg.commuter_fraction = 0.0;
  cfg.displaced_fraction = 1.0;
  cfg.holiday_start_day = *parse_date("2026-01-10");
  cfg.holiday_end_day = *parse_date("2026-01-20");
  const World world = generate_world(cfg);
  const Period period = one_month(cfg.tz_offset_hours);
  const ParseResult parsed = parse_cdr_text(simulate_cdr_csv(world, period), true);

  // every holiday tower sits in the southern strip, away from home
  const double lat0 = cfg.center_lat - 50.0 / 111.1949266;
  const double lat1 = cfg.center_lat + 50.0 / 111.1949266;
  const double strip_max = lat0 + cfg.holiday_region_fraction * (lat1 - lat0);
  std::map<std::string, const UserTruth*> truth;
  for (const auto& u : world.truth.users) {
    CHECK(u.is_displaced);
    CHECK(u.holiday_tower != u.home_tower);
    CHECK(world.net.tower(u.holiday_tower).lat <= strip_max + 1e-9);
    truth[u.user_id] = &u;
  }

  const std::int64_t tz = tz_offset_seconds(cfg.tz_offset_hours);
  std::uint64_t block_rows = 0, outside_rows = 0;
  for (const auto& rec : parsed.records) {
    const UserTruth& u = *truth.at(rec.user_id);
    const LocalTime lt = local_time(rec.ts, tz);
    // night calls spill past midnight; attribute those to the evening they
    // started on before testing block membership
    const std::int64_t gen_date =
        (lt.minute_of_day < cfg.window.end_min) ? lt.date_days - 1 : lt.date_days;
    const std::uint32_t tower = world.net.require_index(rec.tower_id);
    if (gen_date >= cfg.holiday_start_day && gen_date < cfg.holiday_end_day) {
      ++block_rows;
      CHECK(tower == u.holiday_tower);
    } else {
      ++outside_rows;
      CHECK(tower == u.home_tower);  // no commuters in this config
    }
  }
  CHECK(block_rows > 1000);
  CHECK(outside_rows > 1000);
}

TEST_CASE("daily volume tracks the configured rate") {
  SynthConfig cfg = small_config();
  cfg.n_users = 500;
  cfg.rate_sigma = 0.5;
  const World world = generate_world(cfg);
  const ParseResult parsed = parse_cdr_text(simulate_cdr_csv(world, one_month()), true);
  std::map<std::string, std::uint64_t> per_user;
  for (const auto& rec : parsed.records) ++per_user[rec.user_id];
  std::vector<double> daily;
  daily.reserve(per_user.size());
  for (const auto& [user, n] : per_user) daily.push_back(static_cast<double>(n) / 31.0);
  std::sort(daily.begin(), daily.end());
  const double median = daily[daily.size() / 2];
  CHECK(median > cfg.rate_per_day - 1.0);
  CHECK(median < cfg.rate_per_day + 1.0);
}

TEST_CASE("truth csv round trip") {
  SynthConfig cfg = small_config();
  cfg.commuter_fraction = 0.4;
  cfg.displaced_fraction = 0.3;
  cfg.holiday_start_day = *parse_date("2026-01-05");
  cfg.holiday_end_day = *parse_date("2026-01-15");
  const World world = generate_world(cfg);

  TempDir dir;
  const std::string path = dir.file("truth.csv");
  write_file(path, truth_csv_string(world.truth, world.net, "seed=9"));
  const GroundTruth back = read_truth_csv(path, world.net);
  REQUIRE(back.users.size() == world.truth.users.size());
  for (std::size_t i = 0; i < back.users.size(); ++i) {
    CHECK(back.users[i].user_id == world.truth.users[i].user_id);
    CHECK(back.users[i].home_tower == world.truth.users[i].home_tower);
    CHECK(back.users[i].work_tower == world.truth.users[i].work_tower);
    CHECK(back.users[i].is_commuter == world.truth.users[i].is_commuter);
    CHECK(back.users[i].is_displaced == world.truth.users[i].is_displaced);
  }

  const PopulationVector census = census_from_truth(world.truth, world.net);
  CHECK(census.values.sum() == static_cast<double>(world.truth.users.size()));
}

TEST_CASE("config file round trip") {
  SynthConfig cfg = small_config();
  cfg.layout = SynthConfig::Layout::clustered;
  cfg.commuter_fraction = 0.37;
  cfg.market_share = 0.8;
  cfg.holiday_start_day = *parse_date("2026-07-01");
  cfg.holiday_end_day = *parse_date("2026-08-01");
  cfg.displaced_fraction = 0.25;
  cfg.window = parse_window("20:00-08:00");

  const SynthConfig back = parse_synth_config(synth_config_string(cfg));
  CHECK(back.n_towers == cfg.n_towers);
  CHECK(back.layout == cfg.layout);
  CHECK(back.commuter_fraction == cfg.commuter_fraction);
  CHECK(back.market_share == cfg.market_share);
  CHECK(back.holiday_start_day == cfg.holiday_start_day);
  CHECK(back.holiday_end_day == cfg.holiday_end_day);
  CHECK(back.window.start_min == cfg.window.start_min);
  CHECK(back.window.end_min == cfg.window.end_min);
  CHECK(back.seed == cfg.seed);

  CHECK_THROWS_AS(parse_synth_config("nonsense = 1\n", "w.cfg"), Error);
  try {
    parse_synth_config("n_towers = x\n", "w.cfg");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("w.cfg:1") != std::string::npos);
  }
}

TEST_CASE("config validation") {
  SynthConfig cfg = small_config();
  cfg.n_towers = 2;
  CHECK_THROWS_AS(validate_config(cfg), Error);
  cfg = small_config();
  cfg.market_share = 0.0;
  CHECK_THROWS_AS(validate_config(cfg), Error);
  cfg = small_config();
  cfg.night_share = 1.5;
  CHECK_THROWS_AS(validate_config(cfg), Error);
  cfg = small_config();
  cfg.rate_per_day = 0.0;
  CHECK_THROWS_AS(validate_config(cfg), Error);
  cfg = small_config();
  validate_config(cfg);  // baseline passes
}

TEST_CASE("accuracy evaluation counts hits per subgroup") {
  // three towers: 0 and 1 are 800 m apart, 2 is far
  const TowerNetwork net =
      homedet::testing::offsets_network({{0, 0}, {800, 0}, {10000, 0}});
  GroundTruth truth;
  auto add_user = [&](const std::string& id, std::uint32_t home, bool commuter,
                      bool displaced) {
    UserTruth u;
    u.user_id = id;
    u.home_tower = home;
    u.is_commuter = commuter;
    u.is_displaced = displaced;
    truth.users.push_back(std::move(u));
  };
  add_user("u1", 0, false, false);
  add_user("u2", 0, true, false);
  add_user("u3", 2, false, true);

  HomeTable table;
  table.rule = Rule::activities;
  table.period = "p";
  auto add_row = [&](const std::string& id, std::uint32_t l1) {
    DetectionResult r;
    r.user_id = id;
    r.n_ranked = 1;
    r.towers[0] = l1;
    table.rows.push_back(std::move(r));
  };
  add_row("u1", 0);  // exact hit
  add_row("u2", 1);  // miss but within 1 km
  add_row("u3", 0);  // miss, far away

  const AccuracyReport report = evaluate(table, truth, net);
  CHECK(report.n_truth == 3);
  CHECK(report.n_detected == 3);
  CHECK(report.all().n == 3);
  CHECK(report.all().hits == 1);
  CHECK(report.all().within_m == 2);
  CHECK(report.all().hit_rate_pct() == doctest::Approx(100.0 / 3));

  REQUIRE(report.subgroups.size() == 4);  // all, commuters, non-commuters, displaced
  CHECK(report.subgroups[1].name == "commuters");
  CHECK(report.subgroups[1].n == 1);
  CHECK(report.subgroups[1].hits == 0);
  CHECK(report.subgroups[1].within_m == 1);
  CHECK(report.subgroups[2].n == 2);
  CHECK(report.subgroups[2].hits == 1);
  CHECK(report.subgroups[3].name == "displaced");
  CHECK(report.subgroups[3].n == 1);
  CHECK(report.subgroups[3].hits == 0);
  CHECK(report.subgroups[3].within_m == 0);

  add_row("u9", 0);  // unknown user
  CHECK_THROWS_AS(evaluate(table, truth, net), Error);
}

TEST_CASE("low-activity subgroup requires summaries") {
  const TowerNetwork net = homedet::testing::grid_network(2, 1, 800.0);
  GroundTruth truth;
  UserTruth u;
  u.user_id = "u1";
  u.home_tower = 0;
  truth.users.push_back(u);
  UserTruth v;
  v.user_id = "u2";
  v.home_tower = 0;
  truth.users.push_back(v);

  HomeTable table;
  table.rule = Rule::activities;
  table.period = "p";
  for (const char* id : {"u1", "u2"}) {
    DetectionResult r;
    r.user_id = id;
    r.n_ranked = 1;
    r.towers[0] = 0;
    table.rows.push_back(std::move(r));
  }

  std::vector<ActivitySummary> summaries;
  summaries.push_back(homedet::testing::summary("u1", 0, {homedet::testing::counts(0, 5)}));
  summaries.push_back(homedet::testing::summary("u2", 0, {homedet::testing::counts(0, 40)}));

  EvaluateOptions opts;
  opts.summaries = &summaries;
  opts.low_activity_max_records = 12;
  const AccuracyReport with = evaluate(table, truth, net, opts);
  REQUIRE(with.subgroups.size() == 5);
  CHECK(with.subgroups[4].name == "low_activity");
  CHECK(with.subgroups[4].n == 1);  // only u1 with 5 records

  const AccuracyReport without = evaluate(table, truth, net);
  CHECK(without.subgroups.size() == 4);
}

}  // TEST_SUITE
