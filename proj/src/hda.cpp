// Apache License, Version 2.0, refer to LICENSE.txt
#include "homedet/hda.hpp"

#include <algorithm>
#include <thread>

#include "homedet/error.hpp"

namespace homedet {

std::string_view rule_name(Rule r) {
  switch (r) {
    case Rule::activities: return "activities";
    case Rule::days: return "days";
    case Rule::time_window: return "time";
    case Rule::space_radius: return "space";
    case Rule::time_space: return "timespace";
  }
  return "?";
}

std::optional<Rule> parse_rule(std::string_view token) {
  for (Rule r : kAllRules)
    if (token == rule_name(r) || (token.size() == 1 && token[0] == '0' + static_cast<int>(r)))
      return r;
  return std::nullopt;
}

std::vector<Rule> parse_rules(std::string_view spec) {
  if (spec == "all") return {kAllRules.begin(), kAllRules.end()};
  std::vector<Rule> out;
  std::size_t pos = 0;
  while (pos <= spec.size()) {
    std::size_t comma = spec.find(',', pos);
    if (comma == std::string_view::npos) comma = spec.size();
    const std::string_view token = spec.substr(pos, comma - pos);
    const auto rule = parse_rule(token);
    if (!rule)
      throw_usage("unknown rule '" + std::string(token) + "', expected all or 1..5 or " +
                  "activities/days/time/space/timespace");
    if (std::find(out.begin(), out.end(), *rule) == out.end()) out.push_back(*rule);
    pos = comma + 1;
  }
  if (out.empty()) throw_usage("empty rule list");
  return out;
}

namespace {

std::uint64_t base_count(const TowerActivityCounts& t, bool window) {
  return window ? t.n_window : t.n_total;
}

// Perimeter aggregation: each of the user's towers is scored with the sum of
// counts over the user's towers within radius (self included).
std::vector<RankedTower> space_scores(const ActivitySummary& s, const RuleContext& ctx,
                                      bool window) {
  std::vector<RankedTower> out;
  out.reserve(s.towers.size());
  const auto& towers = s.towers;
  for (const auto& t : towers) {
    std::uint64_t sum = 0;
    if (ctx.neighbors != nullptr) {
      const auto& nbrs = ctx.neighbors->neighbors(t.tower);
      // both sides ascending: intersect
      std::size_t i = 0, j = 0;
      while (i < nbrs.size() && j < towers.size()) {
        if (nbrs[i] < towers[j].tower) ++i;
        else if (towers[j].tower < nbrs[i]) ++j;
        else { sum += base_count(towers[j], window); ++i; ++j; }
      }
    } else {
      const LonLat p = ctx.net.tower(t.tower).position();
      for (const auto& u : towers)
        if (u.tower == t.tower || haversine_m(p, ctx.net.tower(u.tower).position()) <= ctx.radius_m)
          sum += base_count(u, window);
    }
    if (sum > 0) out.push_back(RankedTower{t.tower, sum});
  }
  return out;
}

}  // namespace

std::vector<RankedTower> score_towers(Rule rule, const ActivitySummary& s, const RuleContext& ctx) {
  std::vector<RankedTower> out;
  switch (rule) {
    case Rule::activities:
      out.reserve(s.towers.size());
      for (const auto& t : s.towers)
        if (t.n_total > 0) out.push_back(RankedTower{t.tower, t.n_total});
      break;
    case Rule::days:
      out.reserve(s.towers.size());
      for (const auto& t : s.towers)
        if (t.n_days_total > 0) out.push_back(RankedTower{t.tower, t.n_days_total});
      break;
    case Rule::time_window:
      for (const auto& t : s.towers)
        if (t.n_window > 0) out.push_back(RankedTower{t.tower, t.n_window});
      break;
    case Rule::space_radius:
      return space_scores(s, ctx, false);
    case Rule::time_space:
      return space_scores(s, ctx, true);
  }
  return out;
}

std::optional<DetectionResult> detect_home(Rule rule, const ActivitySummary& s,
                                           const RuleContext& ctx) {
  std::vector<RankedTower> scored = score_towers(rule, s, ctx);
  if (scored.empty()) return std::nullopt;

  // chain values for the tie-break; s.towers is ascending by tower index
  auto counts_of = [&](std::uint32_t tower) -> const TowerActivityCounts& {
    const auto it = std::lower_bound(s.towers.begin(), s.towers.end(), tower,
                                     [](const TowerActivityCounts& t, std::uint32_t v) {
                                       return t.tower < v;
                                     });
    return *it;
  };
  auto chain_less = [&](const RankedTower& a, const RankedTower& b) {
    if (a.score != b.score) return a.score > b.score;
    const auto& ca = counts_of(a.tower);
    const auto& cb = counts_of(b.tower);
    if (ca.n_total != cb.n_total) return ca.n_total > cb.n_total;
    if (ca.n_days_total != cb.n_days_total) return ca.n_days_total > cb.n_days_total;
    return a.tower < b.tower;
  };
  const std::size_t k = std::min<std::size_t>(3, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k), scored.end(),
                    chain_less);

  DetectionResult res;
  res.user_id = s.user_id;
  res.n_ranked = static_cast<std::uint8_t>(k);
  for (std::size_t i = 0; i < k; ++i) {
    res.towers[i] = scored[i].tower;
    res.scores[i] = scored[i].score;
  }
  if (scored.size() >= 2) {
    const auto& c0 = counts_of(scored[0].tower);
    const auto& c1 = counts_of(scored[1].tower);
    res.l1_tied = scored[0].score == scored[1].score && c0.n_total == c1.n_total &&
                  c0.n_days_total == c1.n_days_total;
  }
  return res;
}

std::vector<HomeTable> run_hda(Rule rule, std::span<const ActivitySummary> summaries,
                               const TowerNetwork& net,
                               std::span<const std::string> period_labels, double radius_m,
                               unsigned workers) {
  if (!(radius_m > 0.0)) throw_usage("radius must be positive");
  std::optional<NeighborIndex> nbrs;
  if (rule == Rule::space_radius || rule == Rule::time_space) nbrs.emplace(net, radius_m);
  const RuleContext ctx{net, radius_m, nbrs ? &*nbrs : nullptr};

  std::vector<std::optional<DetectionResult>> slots(summaries.size());
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) slots[i] = detect_home(rule, summaries[i], ctx);
  };
  workers = std::max(1u, workers);
  if (workers == 1 || summaries.size() < 2) {
    work(0, summaries.size());
  } else {
    const std::size_t n_threads = std::min<std::size_t>(workers, summaries.size());
    const std::size_t step = (summaries.size() + n_threads - 1) / n_threads;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) {
      const std::size_t begin = t * step;
      const std::size_t end = std::min(summaries.size(), begin + step);
      if (begin < end) pool.emplace_back(work, begin, end);
    }
    for (auto& th : pool) th.join();
  }

  std::uint32_t max_period = 0;
  for (const auto& s : summaries) max_period = std::max(max_period, s.period);
  std::vector<HomeTable> tables;
  std::vector<int> table_of;  // period index -> index into tables, -1 absent
  std::vector<std::uint32_t> table_period;
  if (!summaries.empty()) table_of.assign(max_period + 1, -1);
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    if (!slots[i]) continue;
    const std::uint32_t p = summaries[i].period;
    if (p >= period_labels.size())
      throw_data("summary period " + std::to_string(p) + " has no label");
    if (table_of[p] < 0) {
      table_of[p] = static_cast<int>(tables.size());
      table_period.push_back(p);
      HomeTable t;
      t.rule = rule;
      t.period = period_labels[p];
      t.radius_m = radius_m;
      tables.push_back(std::move(t));
    }
    HomeTable& t = tables[static_cast<std::size_t>(table_of[p])];
    if (slots[i]->l1_tied) ++t.l1_ties;
    t.rows.push_back(std::move(*slots[i]));
  }
  // summaries arrive sorted by (user_id, period); per-period subsequences are
  // therefore already ascending by user_id. Order tables by period index.
  std::vector<std::size_t> order(tables.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return table_period[a] < table_period[b]; });
  std::vector<HomeTable> sorted;
  sorted.reserve(tables.size());
  for (std::size_t i : order) sorted.push_back(std::move(tables[i]));
  return sorted;
}

std::vector<DetectionCounts> detection_counts(std::span<const HomeTable> tables) {
  std::vector<DetectionCounts> out;
  for (const auto& table : tables) {
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const DetectionCounts& c) { return c.rule == table.rule; });
    if (it == out.end()) {
      out.push_back(DetectionCounts{table.rule, 0, 0, 0});
      it = out.end() - 1;
    }
    for (const auto& row : table.rows) {
      ++it->l1;
      if (row.n_ranked >= 2) ++it->l2;
      if (row.n_ranked >= 3) ++it->l3;
    }
  }
  std::sort(out.begin(), out.end(), [](const DetectionCounts& a, const DetectionCounts& b) {
    return static_cast<int>(a.rule) < static_cast<int>(b.rule);
  });
  return out;
}

}  // namespace homedet
