// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "homedet/geo.hpp"
#include "homedet/ingest.hpp"

namespace homedet {

// Single-step home detection decision rules. Each scores a user's towers
// from one ActivitySummary; the top-scoring tower is the presumed home.
enum class Rule : std::uint8_t {
  activities = 1,   // total record count per tower
  days = 2,         // distinct active days per tower
  time_window = 3,  // record count inside the night window
  space_radius = 4, // total records aggregated over towers within a radius
  time_space = 5,   // night-window records aggregated over the same radius
};

inline constexpr std::array<Rule, 5> kAllRules = {
    Rule::activities, Rule::days, Rule::time_window, Rule::space_radius, Rule::time_space};

std::string_view rule_name(Rule r);
std::optional<Rule> parse_rule(std::string_view token);  // "1".."5" or the name

// "all" or comma list ("1,3,5" / "activities,time"); throws Error(usage)
std::vector<Rule> parse_rules(std::string_view spec);

struct RankedTower {
  std::uint32_t tower = 0;  // network index
  std::uint64_t score = 0;
};

struct RuleContext {
  const TowerNetwork& net;
  double radius_m = 1000.0;
  // Precomputed per-tower neighbor lists for the space rules; when null those
  // rules fall back to pairwise distance checks among the user's own towers.
  const NeighborIndex* neighbors = nullptr;
};

// Scores of a user's towers under one rule, ascending tower index.
// Zero-score towers are dropped, so a user with no night records yields an
// empty result under the time-constrained rules.
std::vector<RankedTower> score_towers(Rule rule, const ActivitySummary& s, const RuleContext& ctx);

struct DetectionResult {
  std::string user_id;
  std::uint8_t n_ranked = 0;  // 1..3 towers actually ranked
  // True when the id tie-break alone decided L1: the runner-up matched on
  // score, n_total and distinct days.
  bool l1_tied = false;
  std::array<std::uint32_t, 3> towers{};  // L1,L2,L3; valid for [0, n_ranked)
  std::array<std::uint64_t, 3> scores{};

  std::uint32_t l1() const { return towers[0]; }
};

// Ranks by (score desc, n_total desc, distinct days desc, tower id asc) and
// keeps the top three. Returns nothing when every tower scores zero.
std::optional<DetectionResult> detect_home(Rule rule, const ActivitySummary& s,
                                           const RuleContext& ctx);

struct HomeTable {
  Rule rule = Rule::activities;
  std::string period;              // label, e.g. "2007-06"
  double radius_m = 1000.0;        // parameter of the space rules
  std::vector<DetectionResult> rows;  // ascending user_id
  std::uint64_t l1_ties = 0;       // rows where the id tie-break decided L1
};

// One table per period index present in `summaries` (label from
// `period_labels`). Summaries must be sorted by (user_id, period), the order
// `aggregate` emits. Output is independent of `workers`.
std::vector<HomeTable> run_hda(Rule rule, std::span<const ActivitySummary> summaries,
                               const TowerNetwork& net,
                               std::span<const std::string> period_labels,
                               double radius_m = 1000.0, unsigned workers = 1);

struct DetectionCounts {
  Rule rule = Rule::activities;
  std::uint64_t l1 = 0;
  std::uint64_t l2 = 0;
  std::uint64_t l3 = 0;

  double l2_pct_of_l1() const { return l1 ? 100.0 * static_cast<double>(l2) / static_cast<double>(l1) : 0.0; }
  double l3_pct_of_l1() const { return l1 ? 100.0 * static_cast<double>(l3) / static_cast<double>(l1) : 0.0; }
};

// Detected-user counts per rank level, summed across all tables of a rule.
std::vector<DetectionCounts> detection_counts(std::span<const HomeTable> tables);

}  // namespace homedet
