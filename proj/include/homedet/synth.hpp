// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "homedet/geo.hpp"
#include "homedet/hda.hpp"
#include "homedet/ingest.hpp"
#include "homedet/timeutil.hpp"
#include "homedet/validate.hpp"

namespace homedet {

// Deliberately minimal behavioral world: every user has a home tower, some
// commute to a work tower on workdays, some decamp to a holiday tower inside
// a holiday block. Calls arrive Poisson per day, split between a night
// window (spent at home) and the complementary day window.
struct SynthConfig {
  // network
  std::uint32_t n_towers = 200;
  enum class Layout : std::uint8_t { uniform, clustered };
  Layout layout = Layout::uniform;
  double urban_fraction = 0.6;   // clustered: share of towers inside clusters
  std::uint32_t n_clusters = 3;  // clustered: number of urban clusters
  double cluster_sigma_km = 4.0;
  double region_width_km = 300.0;
  double region_height_km = 300.0;
  double center_lon = 2.0;
  double center_lat = 46.5;

  // population
  std::uint32_t n_users = 1000;
  double rate_per_day = 4.0;  // mean events/day across users
  double rate_sigma = 0.5;    // per-user log-normal rate multiplier (0 = equal rates)
  double night_share = 0.35;  // probability an event falls in the night window
  double commuter_fraction = 0.3;
  bool commuters_work_weekends = false;

  // holiday displacement block (local calendar days, half-open); inactive
  // when start >= end. Displaced users spend all events of the block at a
  // holiday tower drawn from the southern strip of the region.
  std::int64_t holiday_start_day = 0;
  std::int64_t holiday_end_day = 0;
  double displaced_fraction = 0.0;
  double holiday_region_fraction = 1.0 / 3.0;  // strip height as region share

  double market_share = 1.0;  // retained fraction of the population
  double tz_offset_hours = 2.0;
  NightWindow window;
  std::uint64_t seed = 1;

  bool holiday_enabled() const { return holiday_start_day < holiday_end_day; }
};

// Throws Error(data) on out-of-range values.
void validate_config(const SynthConfig& cfg);

// Flat key=value config file (comments '#', blank lines ignored).
SynthConfig parse_synth_config(const std::string& text, const std::string& source_name = "<config>");
std::string synth_config_string(const SynthConfig& cfg);

struct UserTruth {
  std::string user_id;
  std::uint32_t home_tower = 0;
  std::optional<std::uint32_t> work_tower;  // commuters only
  bool is_commuter = false;
  bool is_displaced = false;
  // simulation internals, regenerated with the world (not persisted)
  std::uint32_t seed_index = 0;  // population index the substreams key on
  std::uint32_t holiday_tower = 0;
  double rate_per_day = 0.0;
};

struct GroundTruth {
  std::vector<UserTruth> users;  // retained users only, ascending user_id
};

struct World {
  SynthConfig cfg;
  TowerNetwork net;
  GroundTruth truth;
};

// Fully determined by cfg (including seed). Changing only market_share
// subsamples users without altering retained users' attributes or event
// streams; each user draws from an own seed-derived substream.
World generate_world(const SynthConfig& cfg);

// CDR rows for one period, grouped per user, ingest schema
// `user_id,ts,tower_id,direction,kind`. `sink` receives large text chunks.
void simulate_cdr(const World& world, const Period& period,
                  const std::function<void(std::string_view)>& sink);
std::string simulate_cdr_csv(const World& world, const Period& period);
// plain or gzip by extension
void simulate_cdr_file(const World& world, const Period& period, const std::string& path);

// Ground truth CSV: `user_id,home_tower,work_tower,is_commuter,is_displaced`
// (work_tower empty for non-commuters, booleans as 0/1).
std::string truth_csv_string(const GroundTruth& truth, const TowerNetwork& net,
                             const std::string& stamp = {});
GroundTruth read_truth_csv(const std::string& path, const TowerNetwork& net);

// Per-tower count of true homes; the census an ideal register would report.
PopulationVector census_from_truth(const GroundTruth& truth, const TowerNetwork& net);

struct SubgroupAccuracy {
  std::string name;
  std::uint64_t n = 0;         // detected users in the subgroup
  std::uint64_t hits = 0;      // L1 equals the true home tower
  std::uint64_t within_m = 0;  // L1 within `radius_m` of the true home

  double hit_rate_pct() const { return n ? 100.0 * static_cast<double>(hits) / static_cast<double>(n) : 0.0; }
  double within_pct() const { return n ? 100.0 * static_cast<double>(within_m) / static_cast<double>(n) : 0.0; }
};

struct EvaluateOptions {
  double within_radius_m = 1000.0;
  // "low_activity" groups detected users by total in-period records; needs
  // summaries (of the same run) to be measurable, otherwise the row is absent
  std::uint32_t low_activity_max_records = 12;
  const std::vector<ActivitySummary>* summaries = nullptr;
  std::optional<std::uint32_t> period_index;  // restrict the record totals
};

struct AccuracyReport {
  Rule rule = Rule::activities;
  std::string period;
  double within_radius_m = 0.0;
  std::uint64_t n_truth = 0;
  std::uint64_t n_detected = 0;
  std::vector<SubgroupAccuracy> subgroups;  // "all" first

  const SubgroupAccuracy& all() const { return subgroups.front(); }
};

// Exact-tower and within-radius hit rates against planted homes, with
// subgroup rows for commuters / non-commuters / displaced (and low-activity
// users when summaries are supplied). Detected users missing from the truth
// raise Error(data).
AccuracyReport evaluate(const HomeTable& table, const GroundTruth& truth, const TowerNetwork& net,
                        const EvaluateOptions& opts = {});

std::string accuracy_csv_string(const AccuracyReport& report, const std::string& stamp = {});

}  // namespace homedet
