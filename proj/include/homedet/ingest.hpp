// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "homedet/geo.hpp"
#include "homedet/timeutil.hpp"

namespace homedet {

enum class Direction : std::uint8_t { incoming, outgoing };
enum class RecordKind : std::uint8_t { call, text };

struct CdrRecord {
  std::string user_id;
  UnixSeconds ts = 0;
  std::string tower_id;
  Direction direction = Direction::incoming;
  RecordKind kind = RecordKind::call;
};

struct IngestReport {
  std::uint64_t rows_read = 0;
  std::uint64_t rows_ok = 0;
  std::uint64_t rows_malformed = 0;
  std::uint64_t rows_unknown_tower = 0;
  std::uint64_t rows_out_of_window = 0;

  // per-period distinct local dates that carried any resolvable record
  std::vector<std::uint32_t> observed_days;

  bool balanced() const {
    return rows_read == rows_ok + rows_malformed + rows_unknown_tower + rows_out_of_window;
  }
};

struct ParseResult {
  std::vector<CdrRecord> records;
  IngestReport report;  // only rows_read / rows_ok / rows_malformed are filled at parse time
};

// CDR CSV: header `user_id,ts,tower_id,direction,kind`, ts ISO 8601 UTC.
// strict=false skips and counts malformed rows; strict=true throws
// Error(data) naming the first bad line.
ParseResult parse_cdr(std::istream& in, bool strict);
ParseResult parse_cdr_text(std::string_view text, bool strict, const std::string& source_name = "<cdr>");

struct AggregateConfig {
  std::vector<Period> periods;
  double tz_offset_hours = 2.0;  // France, summer 2007
  NightWindow window;
};

// Per-tower counters of one (user, period); day counts are cardinalities of
// the distinct local calendar date sets accumulated during aggregation.
struct TowerActivityCounts {
  std::uint32_t tower = 0;  // network index
  std::uint32_t n_total = 0;
  std::uint32_t n_window = 0;
  std::uint32_t n_days_total = 0;
  std::uint32_t n_days_window = 0;
};

struct ActivitySummary {
  std::string user_id;
  std::uint32_t period = 0;  // index into AggregateConfig::periods
  std::vector<TowerActivityCounts> towers;  // ascending tower index

  std::uint64_t total_records() const {
    std::uint64_t s = 0;
    for (const auto& t : towers) s += t.n_total;
    return s;
  }
  std::uint64_t window_records() const {
    std::uint64_t s = 0;
    for (const auto& t : towers) s += t.n_window;
    return s;
  }
};

struct IngestResult {
  std::vector<ActivitySummary> summaries;  // sorted by (user_id, period)
  IngestReport report;
};

// One-pass reduction of records into ActivitySummary: counts, night-window
// counts and distinct-day sets per (user, period, tower). Records whose
// tower is unknown or whose timestamp falls outside every period are counted
// and excluded. The reduction is a commutative monoid, so any partitioning
// of the input yields identical output.
IngestResult aggregate(std::span<const CdrRecord> records, const TowerNetwork& net,
                       const AggregateConfig& cfg);

// Fused parse+aggregate over a CSV file (gzip by `.gz` extension), partitioned
// across `workers` threads; output is byte-identical for any worker count.
IngestResult ingest_file(const std::string& path, const TowerNetwork& net,
                         const AggregateConfig& cfg, bool strict, unsigned workers);

// Aggregates CSV: `user_id,period,tower_id,n_total,n_window,n_days_total,n_days_window`
// preceded by `#` metadata lines pinning window/tz/periods.
std::string aggregates_csv_string(const IngestResult& result, const TowerNetwork& net,
                                  const AggregateConfig& cfg);

struct AggregatesFile {
  std::vector<ActivitySummary> summaries;
  std::vector<std::string> period_labels;
  std::string window;      // empty when the metadata line is absent
  std::string tz;
};

AggregatesFile read_aggregates_csv(const std::string& path, const TowerNetwork& net);

}  // namespace homedet
