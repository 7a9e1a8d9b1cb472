// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "homedet/hda.hpp"

namespace homedet {

// Users absent from one of the two tables: dropped from the comparison
// (default), or kept in the denominator as guaranteed mismatches.
enum class MissingPolicy : std::uint8_t { omit, count_as_mismatch };

struct SmcResult {
  Rule rule_a = Rule::activities;
  Rule rule_b = Rule::activities;
  std::string period;
  std::uint64_t n_joint = 0;  // users entering the denominator
  std::uint64_t n_match = 0;  // users whose L1 agrees
  double smc_pct = 0.0;       // 100 * n_match / n_joint
};

// Fraction of users assigned the same L1 tower by both tables, in percent.
// Tables must share a period label. Under MissingPolicy::omit an empty joint
// set makes the value undefined: Error(degenerate), not 0%.
SmcResult smc(const HomeTable& a, const HomeTable& b,
              MissingPolicy policy = MissingPolicy::omit);

// All unordered rule pairs (diagonal included) for one period's tables,
// ordered by (rule_a, rule_b) id. Requires >= 2 tables of distinct rules
// sharing one period.
std::vector<SmcResult> smc_matrix(std::span<const HomeTable> tables,
                                  MissingPolicy policy = MissingPolicy::omit);

}  // namespace homedet
