// Apache License, Version 2.0, refer to LICENSE.txt
#include "homedet/compare.hpp"

#include <algorithm>

#include "homedet/error.hpp"

namespace homedet {

SmcResult smc(const HomeTable& a, const HomeTable& b, MissingPolicy policy) {
  if (a.period != b.period)
    throw_data("cannot compare tables of different periods ('" + a.period + "' vs '" + b.period +
               "')");
  SmcResult res;
  res.rule_a = a.rule;
  res.rule_b = b.rule;
  res.period = a.period;

  // rows are ascending by user_id: sorted join
  std::size_t i = 0, j = 0;
  while (i < a.rows.size() && j < b.rows.size()) {
    const int c = a.rows[i].user_id.compare(b.rows[j].user_id);
    if (c < 0) {
      if (policy == MissingPolicy::count_as_mismatch) ++res.n_joint;
      ++i;
    } else if (c > 0) {
      if (policy == MissingPolicy::count_as_mismatch) ++res.n_joint;
      ++j;
    } else {
      ++res.n_joint;
      if (a.rows[i].l1() == b.rows[j].l1()) ++res.n_match;
      ++i;
      ++j;
    }
  }
  if (policy == MissingPolicy::count_as_mismatch)
    res.n_joint += (a.rows.size() - i) + (b.rows.size() - j);

  if (res.n_joint == 0)
    throw_degenerate("SMC undefined: no user detected by both '" +
                     std::string(rule_name(a.rule)) + "' and '" + std::string(rule_name(b.rule)) +
                     "' in period '" + a.period + "'");
  res.smc_pct =
      100.0 * static_cast<double>(res.n_match) / static_cast<double>(res.n_joint);
  return res;
}

std::vector<SmcResult> smc_matrix(std::span<const HomeTable> tables, MissingPolicy policy) {
  if (tables.size() < 2) throw_data("matrix needs at least two tables");
  for (std::size_t i = 1; i < tables.size(); ++i) {
    if (tables[i].period != tables[0].period)
      throw_data("matrix tables span multiple periods ('" + tables[0].period + "' vs '" +
                 tables[i].period + "')");
    for (std::size_t j = 0; j < i; ++j)
      if (tables[i].rule == tables[j].rule)
        throw_data("duplicate rule '" + std::string(rule_name(tables[i].rule)) +
                   "' in matrix input");
  }
  std::vector<const HomeTable*> ordered;
  ordered.reserve(tables.size());
  for (const auto& t : tables) ordered.push_back(&t);
  std::sort(ordered.begin(), ordered.end(), [](const HomeTable* a, const HomeTable* b) {
    return static_cast<int>(a->rule) < static_cast<int>(b->rule);
  });

  std::vector<SmcResult> out;
  out.reserve(ordered.size() * (ordered.size() + 1) / 2);
  for (std::size_t i = 0; i < ordered.size(); ++i)
    for (std::size_t j = i; j < ordered.size(); ++j)
      out.push_back(smc(*ordered[i], *ordered[j], policy));
  return out;
}

}  // namespace homedet
