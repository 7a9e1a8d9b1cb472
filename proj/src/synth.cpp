// Apache License, Version 2.0, refer to LICENSE.txt
#include "homedet/synth.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "homedet/csv.hpp"
#include "homedet/error.hpp"
#include "homedet/rng.hpp"

namespace homedet {

namespace {

constexpr std::uint64_t kSaltTowers = 1;
constexpr std::uint64_t kSaltUserAttrs = 2;
constexpr std::uint64_t kSaltRetention = 3;
constexpr std::uint64_t kSaltEvents = 4;

constexpr double kKmPerDegLat = kEarthRadiusM * M_PI / 180.0 / 1000.0;  // 111.1949...

int weekday_mon0(std::int64_t date_days) {
  return static_cast<int>(((date_days % 7) + 7 + 3) % 7);  // day 0 = Thursday
}

struct RegionDeg {
  double lon_half, lat_half;
};

RegionDeg region_degrees(const SynthConfig& cfg) {
  const double lat_half = (cfg.region_height_km / 2.0) / kKmPerDegLat;
  const double lon_half =
      (cfg.region_width_km / 2.0) / (kKmPerDegLat * std::cos(cfg.center_lat * M_PI / 180.0));
  return RegionDeg{lon_half, lat_half};
}

}  // namespace

void validate_config(const SynthConfig& cfg) {
  auto in01 = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (cfg.n_towers < 3 || cfg.n_towers > 99999)
    throw_data("n_towers must be in [3, 99999], got " + std::to_string(cfg.n_towers));
  if (cfg.n_users < 1 || cfg.n_users > 999999)
    throw_data("n_users must be in [1, 999999], got " + std::to_string(cfg.n_users));
  if (cfg.layout == SynthConfig::Layout::clustered) {
    if (cfg.n_clusters < 1) throw_data("n_clusters must be >= 1");
    if (!(cfg.cluster_sigma_km > 0.0)) throw_data("cluster_sigma_km must be > 0");
    if (!in01(cfg.urban_fraction)) throw_data("urban_fraction must be in [0,1]");
  }
  if (!(cfg.region_width_km > 0.0) || !(cfg.region_height_km > 0.0))
    throw_data("region dimensions must be > 0");
  if (!(std::abs(cfg.center_lat) < 85.0) || !(std::abs(cfg.center_lon) <= 180.0))
    throw_data("region center out of range");
  if (!(cfg.rate_per_day > 0.0)) throw_data("rate_per_day must be > 0");
  if (!(cfg.rate_sigma >= 0.0)) throw_data("rate_sigma must be >= 0");
  if (!in01(cfg.night_share)) throw_data("night_share must be in [0,1]");
  if (!in01(cfg.commuter_fraction)) throw_data("commuter_fraction must be in [0,1]");
  if (!in01(cfg.displaced_fraction)) throw_data("displaced_fraction must be in [0,1]");
  if (!(cfg.holiday_region_fraction > 0.0 && cfg.holiday_region_fraction <= 1.0))
    throw_data("holiday_region_fraction must be in (0,1]");
  if (!(cfg.market_share > 0.0 && cfg.market_share <= 1.0))
    throw_data("market_share must be in (0,1]");
  if (!(cfg.tz_offset_hours >= -14.0 && cfg.tz_offset_hours <= 14.0))
    throw_data("tz_offset_hours out of range");
  if (cfg.window.start_min == cfg.window.end_min)
    throw_data("night window must not be empty or the whole day");
}

World generate_world(const SynthConfig& cfg) {
  validate_config(cfg);
  const RegionDeg ext = region_degrees(cfg);
  const double lon0 = cfg.center_lon - ext.lon_half, lon1 = cfg.center_lon + ext.lon_half;
  const double lat0 = cfg.center_lat - ext.lat_half, lat1 = cfg.center_lat + ext.lat_half;

  std::vector<CellTower> towers;
  towers.reserve(cfg.n_towers);
  {
    Rng rng(derive_seed(cfg.seed, 0, kSaltTowers));
    std::vector<LonLat> centers;
    if (cfg.layout == SynthConfig::Layout::clustered) {
      centers.reserve(cfg.n_clusters);
      for (std::uint32_t c = 0; c < cfg.n_clusters; ++c)
        centers.push_back(LonLat{cfg.center_lon + 0.8 * ext.lon_half * (2.0 * rng.uniform() - 1.0),
                                 cfg.center_lat + 0.8 * ext.lat_half * (2.0 * rng.uniform() - 1.0)});
    }
    const double sigma_lat = cfg.cluster_sigma_km / kKmPerDegLat;
    const double sigma_lon =
        cfg.cluster_sigma_km / (kKmPerDegLat * std::cos(cfg.center_lat * M_PI / 180.0));
    char id[8];
    for (std::uint32_t t = 0; t < cfg.n_towers; ++t) {
      LonLat p;
      if (cfg.layout == SynthConfig::Layout::clustered && rng.bernoulli(cfg.urban_fraction)) {
        const LonLat c = centers[rng.uniform_index(centers.size())];
        int tries = 0;
        do {
          p.lon = c.lon + rng.normal(0.0, sigma_lon);
          p.lat = c.lat + rng.normal(0.0, sigma_lat);
        } while ((p.lon < lon0 || p.lon > lon1 || p.lat < lat0 || p.lat > lat1) && ++tries < 1000);
        p.lon = std::clamp(p.lon, lon0, lon1);
        p.lat = std::clamp(p.lat, lat0, lat1);
      } else {
        p.lon = rng.uniform(lon0, lon1);
        p.lat = rng.uniform(lat0, lat1);
      }
      std::snprintf(id, sizeof id, "t%05u", t);
      towers.push_back(CellTower{id, p.lon, p.lat});
    }
  }
  World world{cfg, TowerNetwork::build(std::move(towers)), GroundTruth{}};

  // holiday target candidates: towers in the southern strip
  std::vector<std::uint32_t> strip;
  if (cfg.holiday_enabled() && cfg.displaced_fraction > 0.0) {
    const double strip_max_lat = lat0 + cfg.holiday_region_fraction * (lat1 - lat0);
    for (std::uint32_t t = 0; t < world.net.size(); ++t)
      if (world.net.tower(t).lat <= strip_max_lat) strip.push_back(t);
    if (strip.size() < 2)
      throw_data("holiday target region holds " + std::to_string(strip.size()) +
                 " tower(s); need at least 2 so a displaced user can leave home");
  }

  world.truth.users.reserve(cfg.n_users);
  char uid[12];
  for (std::uint32_t u = 0; u < cfg.n_users; ++u) {
    // retention decided by its own stream so shrinking market_share keeps
    // retained users' attributes and events untouched
    if (!(Rng(derive_seed(cfg.seed, u, kSaltRetention)).uniform() < cfg.market_share)) continue;
    Rng rng(derive_seed(cfg.seed, u, kSaltUserAttrs));
    UserTruth user;
    std::snprintf(uid, sizeof uid, "u%06u", u);
    user.user_id = uid;
    user.seed_index = u;
    user.home_tower = static_cast<std::uint32_t>(rng.uniform_index(world.net.size()));
    user.is_commuter = rng.bernoulli(cfg.commuter_fraction);
    if (user.is_commuter) {
      std::uint32_t w;
      do {
        w = static_cast<std::uint32_t>(rng.uniform_index(world.net.size()));
      } while (w == user.home_tower);
      user.work_tower = w;
    }
    user.rate_per_day =
        cfg.rate_per_day *
        (cfg.rate_sigma > 0.0
             ? rng.lognormal(-0.5 * cfg.rate_sigma * cfg.rate_sigma, cfg.rate_sigma)
             : 1.0);
    user.is_displaced =
        cfg.holiday_enabled() && !strip.empty() && rng.bernoulli(cfg.displaced_fraction);
    user.holiday_tower = user.home_tower;
    if (user.is_displaced) {
      std::uint32_t h;
      do {
        h = strip[rng.uniform_index(strip.size())];
      } while (h == user.home_tower);
      user.holiday_tower = h;
    }
    world.truth.users.push_back(std::move(user));
  }
  return world;
}

void simulate_cdr(const World& world, const Period& period,
                  const std::function<void(std::string_view)>& sink) {
  const SynthConfig& cfg = world.cfg;
  if (period.start >= period.end) throw_data("period '" + period.label + "' has start >= end");
  const std::int64_t tz = tz_offset_seconds(cfg.tz_offset_hours);
  const std::int64_t first_day = local_time(period.start, tz).date_days;
  const std::int64_t last_day = local_time(period.end - 1, tz).date_days;

  const NightWindow& w = cfg.window;
  const int night_minutes =
      w.start_min <= w.end_min ? w.end_min - w.start_min : 1440 - (w.start_min - w.end_min);
  const std::int64_t night_secs = static_cast<std::int64_t>(night_minutes) * 60;
  const std::int64_t day_secs = 86400 - night_secs;
  const std::int64_t night_anchor = static_cast<std::int64_t>(w.start_min) * 60;
  const std::int64_t day_anchor = static_cast<std::int64_t>(w.end_min) * 60;

  std::string buf;
  buf.reserve(1 << 20);
  buf += "# seed=" + std::to_string(cfg.seed) + " period=" + period.label + "\n";
  buf += "user_id,ts,tower_id,direction,kind\n";

  for (const auto& user : world.truth.users) {
    Rng rng(derive_seed(cfg.seed, user.seed_index, kSaltEvents));
    for (std::int64_t day = first_day; day <= last_day; ++day) {
      const std::uint32_t n_events = rng.poisson(user.rate_per_day);
      const bool on_holiday =
          user.is_displaced && day >= cfg.holiday_start_day && day < cfg.holiday_end_day;
      const bool at_work = user.is_commuter && !on_holiday &&
                           (cfg.commuters_work_weekends || weekday_mon0(day) < 5);
      for (std::uint32_t e = 0; e < n_events; ++e) {
        const bool night = rng.bernoulli(cfg.night_share);
        const std::int64_t offset =
            night ? night_anchor + static_cast<std::int64_t>(rng.uniform_index(
                                       static_cast<std::uint64_t>(night_secs)))
                  : day_anchor + static_cast<std::int64_t>(rng.uniform_index(
                                     static_cast<std::uint64_t>(day_secs)));
        const std::int64_t ts = day * kSecondsPerDay + offset - tz;
        const bool outgoing = rng.bernoulli(0.5);
        const bool is_call = rng.bernoulli(0.7);
        if (ts < period.start || ts >= period.end) continue;
        const std::uint32_t tower =
            on_holiday ? user.holiday_tower : (night ? user.home_tower
                                                     : (at_work ? *user.work_tower
                                                                : user.home_tower));
        buf += user.user_id;
        buf += ',';
        buf += format_iso8601_utc(ts);
        buf += ',';
        buf += world.net.tower(tower).id;
        buf += outgoing ? ",out," : ",in,";
        buf += is_call ? "call\n" : "text\n";
        if (buf.size() >= (1 << 20)) {
          sink(buf);
          buf.clear();
        }
      }
    }
  }
  if (!buf.empty()) sink(buf);
}

std::string simulate_cdr_csv(const World& world, const Period& period) {
  std::string out;
  simulate_cdr(world, period, [&](std::string_view chunk) { out.append(chunk); });
  return out;
}

void simulate_cdr_file(const World& world, const Period& period, const std::string& path) {
  const bool gz = path.size() > 3 && path.compare(path.size() - 3, 3, ".gz") == 0;
  if (gz) {
    gzFile f = gzopen(path.c_str(), "wb");
    if (!f) throw_data("cannot create '" + path + "': " + std::strerror(errno));
    try {
      simulate_cdr(world, period, [&](std::string_view chunk) {
        if (gzwrite(f, chunk.data(), static_cast<unsigned>(chunk.size())) !=
            static_cast<int>(chunk.size()))
          throw_data("error writing '" + path + "'");
      });
    } catch (...) {
      gzclose(f);
      throw;
    }
    gzclose(f);
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw_data("cannot create '" + path + "': " + std::strerror(errno));
  simulate_cdr(world, period, [&](std::string_view chunk) {
    out.write(chunk.data(), static_cast<std::streamsize>(chunk.size()));
  });
  out.flush();
  if (!out) throw_data("error writing '" + path + "'");
}

std::string truth_csv_string(const GroundTruth& truth, const TowerNetwork& net,
                             const std::string& stamp) {
  std::string out;
  if (!stamp.empty()) out += "# " + stamp + "\n";
  out += "user_id,home_tower,work_tower,is_commuter,is_displaced\n";
  for (const auto& u : truth.users) {
    out += u.user_id;
    out += ',';
    out += net.tower(u.home_tower).id;
    out += ',';
    if (u.work_tower) out += net.tower(*u.work_tower).id;
    out += u.is_commuter ? ",1," : ",0,";
    out += u.is_displaced ? "1\n" : "0\n";
  }
  return out;
}

GroundTruth read_truth_csv(const std::string& path, const TowerNetwork& net) {
  const std::string text = read_file(path);
  constexpr std::string_view kHeader = "user_id,home_tower,work_tower,is_commuter,is_displaced";
  GroundTruth truth;
  bool seen_header = false;
  std::vector<std::string_view> fields;
  for_each_csv_line(text, [&](std::string_view line, std::size_t lineno) {
    if (!seen_header) {
      if (line != kHeader)
        throw_data(path + ": expected header '" + std::string(kHeader) + "'");
      seen_header = true;
      return true;
    }
    if (split_fields(line, fields) != 5)
      throw_data(path + ":" + std::to_string(lineno) + ": expected 5 fields");
    UserTruth u;
    if (!is_safe_id(fields[0]))
      throw_data(path + ":" + std::to_string(lineno) + ": bad user id");
    u.user_id.assign(fields[0]);
    const auto home = net.index_of(fields[1]);
    if (!home)
      throw_data(path + ":" + std::to_string(lineno) + ": unknown tower '" +
                 std::string(fields[1]) + "'");
    u.home_tower = *home;
    if (!fields[2].empty()) {
      const auto work = net.index_of(fields[2]);
      if (!work)
        throw_data(path + ":" + std::to_string(lineno) + ": unknown tower '" +
                   std::string(fields[2]) + "'");
      u.work_tower = *work;
    }
    if ((fields[3] != "0" && fields[3] != "1") || (fields[4] != "0" && fields[4] != "1"))
      throw_data(path + ":" + std::to_string(lineno) + ": booleans must be 0 or 1");
    u.is_commuter = fields[3] == "1";
    u.is_displaced = fields[4] == "1";
    u.holiday_tower = u.home_tower;
    truth.users.push_back(std::move(u));
    return true;
  });
  if (!seen_header) throw_data(path + ": empty input, missing header");
  std::sort(truth.users.begin(), truth.users.end(),
            [](const UserTruth& a, const UserTruth& b) { return a.user_id < b.user_id; });
  for (std::size_t i = 1; i < truth.users.size(); ++i)
    if (truth.users[i].user_id == truth.users[i - 1].user_id)
      throw_data(path + ": duplicate user '" + truth.users[i].user_id + "'");
  return truth;
}

PopulationVector census_from_truth(const GroundTruth& truth, const TowerNetwork& net) {
  if (truth.users.empty()) throw_data("empty ground truth");
  PopulationVector v;
  v.source = "census";
  v.values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(net.size()));
  for (const auto& u : truth.users) v.values[static_cast<Eigen::Index>(u.home_tower)] += 1.0;
  return v;
}

AccuracyReport evaluate(const HomeTable& table, const GroundTruth& truth, const TowerNetwork& net,
                        const EvaluateOptions& opts) {
  AccuracyReport report;
  report.rule = table.rule;
  report.period = table.period;
  report.within_radius_m = opts.within_radius_m;
  report.n_truth = truth.users.size();
  report.n_detected = table.rows.size();

  // truth is ascending by user_id
  auto find_truth = [&](std::string_view user) -> const UserTruth* {
    auto it = std::lower_bound(truth.users.begin(), truth.users.end(), user,
                               [](const UserTruth& u, std::string_view v) { return u.user_id < v; });
    if (it == truth.users.end() || it->user_id != user) return nullptr;
    return &*it;
  };

  // total in-period records per user, for the low-activity subgroup
  std::vector<std::pair<std::string_view, std::uint64_t>> activity;
  if (opts.summaries != nullptr) {
    for (const auto& s : *opts.summaries) {
      if (opts.period_index && s.period != *opts.period_index) continue;
      activity.emplace_back(s.user_id, s.total_records());
    }
    std::sort(activity.begin(), activity.end());
  }
  auto user_records = [&](std::string_view user) -> std::optional<std::uint64_t> {
    auto it = std::lower_bound(
        activity.begin(), activity.end(), user,
        [](const std::pair<std::string_view, std::uint64_t>& a, std::string_view v) {
          return a.first < v;
        });
    if (it == activity.end() || it->first != user) return std::nullopt;
    std::uint64_t total = it->second;
    // several periods may match when period_index is unset
    for (auto j = it + 1; j != activity.end() && j->first == user; ++j) total += j->second;
    return total;
  };

  enum GroupId { kAll = 0, kCommuters, kNonCommuters, kDisplaced, kLowActivity };
  report.subgroups = {
      SubgroupAccuracy{"all", 0, 0, 0},       SubgroupAccuracy{"commuters", 0, 0, 0},
      SubgroupAccuracy{"non_commuters", 0, 0, 0}, SubgroupAccuracy{"displaced", 0, 0, 0}};
  if (opts.summaries != nullptr) report.subgroups.push_back(SubgroupAccuracy{"low_activity", 0, 0, 0});

  for (const auto& row : table.rows) {
    const UserTruth* user = find_truth(row.user_id);
    if (user == nullptr)
      throw_data("detected user '" + row.user_id + "' is absent from the ground truth");
    const bool hit = row.l1() == user->home_tower;
    const bool within = hit || haversine_m(net.tower(row.l1()).position(),
                                           net.tower(user->home_tower).position()) <=
                                   opts.within_radius_m;
    auto tally = [&](GroupId g) {
      auto& sub = report.subgroups[g];
      ++sub.n;
      if (hit) ++sub.hits;
      if (within) ++sub.within_m;
    };
    tally(kAll);
    tally(user->is_commuter ? kCommuters : kNonCommuters);
    if (user->is_displaced) tally(kDisplaced);
    if (opts.summaries != nullptr) {
      const auto records = user_records(row.user_id);
      if (records && *records <= opts.low_activity_max_records) tally(kLowActivity);
    }
  }
  return report;
}

std::string accuracy_csv_string(const AccuracyReport& report, const std::string& stamp) {
  std::string out;
  if (!stamp.empty()) out += "# " + stamp + "\n";
  out += "# within_radius_m=" + std::to_string(report.within_radius_m) + "\n";
  out += "rule,period,subgroup,n_detected,n_truth,n,hits,hit_rate_pct,within_radius,within_pct\n";
  char buf[64];
  for (const auto& sub : report.subgroups) {
    out += std::string(rule_name(report.rule)) + "," + report.period + "," + sub.name + "," +
           std::to_string(report.n_detected) + "," + std::to_string(report.n_truth) + "," +
           std::to_string(sub.n) + "," + std::to_string(sub.hits);
    std::snprintf(buf, sizeof buf, ",%.6f,%llu,%.6f\n", sub.hit_rate_pct(),
                  static_cast<unsigned long long>(sub.within_m), sub.within_pct());
    out += buf;
  }
  return out;
}

namespace {

std::string layout_name(SynthConfig::Layout layout) {
  return layout == SynthConfig::Layout::uniform ? "uniform" : "clustered";
}

}  // namespace

SynthConfig parse_synth_config(const std::string& text, const std::string& source_name) {
  SynthConfig cfg;
  for_each_csv_line(text, [&](std::string_view line, std::size_t lineno) {
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos)
      throw_usage(source_name + ":" + std::to_string(lineno) + ": expected key=value");
    auto trim = [](std::string_view s) {
      while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
      while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
      return s;
    };
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    auto bad = [&](const std::string& what) {
      throw_usage(source_name + ":" + std::to_string(lineno) + ": " + what + " for key '" +
                  std::string(key) + "': '" + std::string(value) + "'");
    };
    auto as_f64 = [&]() {
      const auto v = parse_f64(value);
      if (!v) bad("expected a number");
      return *v;
    };
    auto as_u64 = [&]() {
      const auto v = parse_u64(value);
      if (!v) bad("expected a non-negative integer");
      return *v;
    };
    auto as_date = [&]() {
      const auto v = parse_date(value);
      if (!v) bad("expected a date YYYY-MM-DD");
      return *v;
    };
    auto as_bool = [&]() {
      if (value != "0" && value != "1") bad("expected 0 or 1");
      return value == "1";
    };
    if (key == "n_towers") cfg.n_towers = static_cast<std::uint32_t>(as_u64());
    else if (key == "layout") {
      if (value == "uniform") cfg.layout = SynthConfig::Layout::uniform;
      else if (value == "clustered") cfg.layout = SynthConfig::Layout::clustered;
      else bad("expected uniform or clustered");
    } else if (key == "urban_fraction") cfg.urban_fraction = as_f64();
    else if (key == "n_clusters") cfg.n_clusters = static_cast<std::uint32_t>(as_u64());
    else if (key == "cluster_sigma_km") cfg.cluster_sigma_km = as_f64();
    else if (key == "region_width_km") cfg.region_width_km = as_f64();
    else if (key == "region_height_km") cfg.region_height_km = as_f64();
    else if (key == "center_lon") cfg.center_lon = as_f64();
    else if (key == "center_lat") cfg.center_lat = as_f64();
    else if (key == "n_users") cfg.n_users = static_cast<std::uint32_t>(as_u64());
    else if (key == "rate_per_day") cfg.rate_per_day = as_f64();
    else if (key == "rate_sigma") cfg.rate_sigma = as_f64();
    else if (key == "night_share") cfg.night_share = as_f64();
    else if (key == "commuter_fraction") cfg.commuter_fraction = as_f64();
    else if (key == "commuters_work_weekends") cfg.commuters_work_weekends = as_bool();
    else if (key == "holiday_start") cfg.holiday_start_day = as_date();
    else if (key == "holiday_end") cfg.holiday_end_day = as_date();
    else if (key == "displaced_fraction") cfg.displaced_fraction = as_f64();
    else if (key == "holiday_region_fraction") cfg.holiday_region_fraction = as_f64();
    else if (key == "market_share") cfg.market_share = as_f64();
    else if (key == "tz_offset_hours") cfg.tz_offset_hours = as_f64();
    else if (key == "window") cfg.window = parse_window(value);
    else if (key == "seed") cfg.seed = as_u64();
    else throw_usage(source_name + ":" + std::to_string(lineno) + ": unknown key '" +
                     std::string(key) + "'");
    return true;
  });
  validate_config(cfg);
  return cfg;
}

std::string synth_config_string(const SynthConfig& cfg) {
  char buf[64];
  std::string out;
  auto put = [&](const char* key, const std::string& value) {
    out += key;
    out += '=';
    out += value;
    out += '\n';
  };
  auto put_f = [&](const char* key, double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    put(key, buf);
  };
  put("n_towers", std::to_string(cfg.n_towers));
  put("layout", layout_name(cfg.layout));
  if (cfg.layout == SynthConfig::Layout::clustered) {
    put_f("urban_fraction", cfg.urban_fraction);
    put("n_clusters", std::to_string(cfg.n_clusters));
    put_f("cluster_sigma_km", cfg.cluster_sigma_km);
  }
  put_f("region_width_km", cfg.region_width_km);
  put_f("region_height_km", cfg.region_height_km);
  put_f("center_lon", cfg.center_lon);
  put_f("center_lat", cfg.center_lat);
  put("n_users", std::to_string(cfg.n_users));
  put_f("rate_per_day", cfg.rate_per_day);
  put_f("rate_sigma", cfg.rate_sigma);
  put_f("night_share", cfg.night_share);
  put_f("commuter_fraction", cfg.commuter_fraction);
  put("commuters_work_weekends", cfg.commuters_work_weekends ? "1" : "0");
  if (cfg.holiday_enabled()) {
    put("holiday_start", format_date(cfg.holiday_start_day));
    put("holiday_end", format_date(cfg.holiday_end_day));
    put_f("displaced_fraction", cfg.displaced_fraction);
    put_f("holiday_region_fraction", cfg.holiday_region_fraction);
  }
  put_f("market_share", cfg.market_share);
  put_f("tz_offset_hours", cfg.tz_offset_hours);
  put("window", format_window(cfg.window));
  put("seed", std::to_string(cfg.seed));
  return out;
}

}  // namespace homedet
