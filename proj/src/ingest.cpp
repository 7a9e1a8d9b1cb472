// Apache License, Version 2.0, refer to LICENSE.txt
#include "homedet/ingest.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <istream>
#include <map>
#include <sstream>
#include <thread>

#include "homedet/csv.hpp"
#include "homedet/error.hpp"

namespace homedet {

namespace {

constexpr std::string_view kCdrHeader = "user_id,ts,tower_id,direction,kind";

bool parse_direction(std::string_view s, Direction& out) {
  if (s == "in") { out = Direction::incoming; return true; }
  if (s == "out") { out = Direction::outgoing; return true; }
  return false;
}

bool parse_kind(std::string_view s, RecordKind& out) {
  if (s == "call") { out = RecordKind::call; return true; }
  if (s == "text") { out = RecordKind::text; return true; }
  return false;
}

// Returns false on any structural problem; `rec` is valid only on success.
// `fields` is caller-owned scratch so the hot loop does not reallocate.
bool parse_cdr_fields(std::string_view line, std::vector<std::string_view>& fields,
                      CdrRecord& rec) {
  if (split_fields(line, fields) != 5) return false;
  if (!is_safe_id(fields[0]) || !is_safe_id(fields[2])) return false;
  const auto ts = parse_iso8601_utc(fields[1]);
  if (!ts) return false;
  Direction dir;
  RecordKind kind;
  if (!parse_direction(fields[3], dir) || !parse_kind(fields[4], kind)) return false;
  rec.user_id.assign(fields[0]);
  rec.ts = *ts;
  rec.tower_id.assign(fields[2]);
  rec.direction = dir;
  rec.kind = kind;
  return true;
}

// Distinct local calendar dates, kept as a bitset offset from the first date
// seen. Periods span at most a few hundred days, so the vector stays small.
struct DaySet {
  std::int64_t base = 0;        // date_days of bit 0; meaningful when !bits.empty()
  std::vector<std::uint64_t> bits;

  void insert(std::int64_t day) {
    if (bits.empty()) {
      base = day;
      bits.assign(1, 1u);
      return;
    }
    if (day < base) {
      const std::size_t shift = static_cast<std::size_t>(base - day);
      const std::size_t word_shift = (shift + 63) / 64;
      bits.insert(bits.begin(), word_shift, 0);
      const std::size_t rem = word_shift * 64 - shift;
      base -= static_cast<std::int64_t>(word_shift * 64);
      (void)rem;
      insert(day);
      return;
    }
    const std::size_t off = static_cast<std::size_t>(day - base);
    const std::size_t word = off / 64;
    if (word >= bits.size()) bits.resize(word + 1, 0);
    bits[word] |= std::uint64_t{1} << (off % 64);
  }

  std::uint32_t count() const {
    std::uint32_t c = 0;
    for (auto w : bits) c += static_cast<std::uint32_t>(std::popcount(w));
    return c;
  }

  // Union; commutes and associates, so partial aggregates merge in any order.
  void merge(const DaySet& other) {
    if (other.bits.empty()) return;
    if (bits.empty()) { *this = other; return; }
    const std::int64_t lo = std::min(base, other.base);
    auto fold = [&](const DaySet& src, std::vector<std::uint64_t>& dst) {
      for (std::size_t w = 0; w < src.bits.size(); ++w) {
        std::uint64_t word = src.bits[w];
        while (word) {
          const int b = std::countr_zero(word);
          word &= word - 1;
          const std::int64_t day = src.base + static_cast<std::int64_t>(w * 64 + b);
          const std::size_t off = static_cast<std::size_t>(day - lo);
          if (off / 64 >= dst.size()) dst.resize(off / 64 + 1, 0);
          dst[off / 64] |= std::uint64_t{1} << (off % 64);
        }
      }
    };
    std::vector<std::uint64_t> merged;
    fold(*this, merged);
    fold(other, merged);
    base = lo;
    bits = std::move(merged);
  }
};

struct TowerAccum {
  std::uint32_t n_total = 0;
  std::uint32_t n_window = 0;
  DaySet days_total;
  DaySet days_window;
};

struct UserPeriodKey {
  std::string user_id;
  std::uint32_t period;
};

struct UserPeriodRef {
  std::string_view user_id;
  std::uint32_t period;
};

// Transparent comparison lets the hot loop probe with a string_view key and
// only materialize a string on first insertion.
struct UserPeriodLess {
  using is_transparent = void;
  static std::pair<std::string_view, std::uint32_t> view(const UserPeriodKey& k) {
    return {k.user_id, k.period};
  }
  static std::pair<std::string_view, std::uint32_t> view(const UserPeriodRef& k) {
    return {k.user_id, k.period};
  }
  template <class A, class B>
  bool operator()(const A& a, const B& b) const {
    return view(a) < view(b);
  }
};

// Ordered map keeps the final walk already sorted by (user_id, period);
// inner map keyed by tower index.
using AccumMap = std::map<UserPeriodKey, std::map<std::uint32_t, TowerAccum>, UserPeriodLess>;

struct PeriodIndex {
  std::vector<Period> periods;  // sorted by start

  explicit PeriodIndex(const std::vector<Period>& ps) : periods(ps) {
    std::sort(periods.begin(), periods.end(),
              [](const Period& a, const Period& b) { return a.start < b.start; });
  }

  // Index into the original (unsorted) config order is restored by the caller;
  // here we return the sorted position or -1.
  int find(UnixSeconds ts) const {
    auto it = std::upper_bound(periods.begin(), periods.end(), ts,
                               [](UnixSeconds t, const Period& p) { return t < p.start; });
    if (it == periods.begin()) return -1;
    --it;
    if (ts >= it->start && ts < it->end) return static_cast<int>(it - periods.begin());
    return -1;
  }
};

struct Shard {
  AccumMap accum;
  IngestReport report;
  std::vector<DaySet> observed;  // per period
};

class Folder {
 public:
  Folder(const TowerNetwork& net, const AggregateConfig& cfg)
      : net_(net), cfg_(cfg), index_(cfg.periods),
        tz_secs_(tz_offset_seconds(cfg.tz_offset_hours)) {
    // sorted-position -> config-position
    order_.resize(cfg.periods.size());
    std::vector<std::pair<UnixSeconds, std::uint32_t>> starts;
    starts.reserve(cfg.periods.size());
    for (std::uint32_t i = 0; i < cfg.periods.size(); ++i)
      starts.emplace_back(cfg.periods[i].start, i);
    std::sort(starts.begin(), starts.end());
    for (std::uint32_t i = 0; i < starts.size(); ++i) order_[i] = starts[i].second;
  }

  void fold(const CdrRecord& rec, Shard& shard) const {
    const auto tower_idx = net_.index_of(rec.tower_id);
    if (!tower_idx) {
      ++shard.report.rows_unknown_tower;
      return;
    }
    const int sorted_pos = index_.find(rec.ts);
    if (sorted_pos < 0) {
      ++shard.report.rows_out_of_window;
      return;
    }
    const std::uint32_t period = order_[static_cast<std::size_t>(sorted_pos)];
    ++shard.report.rows_ok;
    const LocalTime lt = local_time(rec.ts, tz_secs_);
    const UserPeriodRef ref{rec.user_id, period};
    auto it = shard.accum.lower_bound(ref);
    if (it == shard.accum.end() || UserPeriodLess{}(ref, it->first))
      it = shard.accum.emplace_hint(it, UserPeriodKey{rec.user_id, period},
                                    std::map<std::uint32_t, TowerAccum>{});
    auto& acc = it->second[*tower_idx];
    ++acc.n_total;
    acc.days_total.insert(lt.date_days);
    if (cfg_.window.contains(lt.minute_of_day)) {
      ++acc.n_window;
      acc.days_window.insert(lt.date_days);
    }
    if (shard.observed.size() < cfg_.periods.size()) shard.observed.resize(cfg_.periods.size());
    shard.observed[period].insert(lt.date_days);
  }

 private:
  const TowerNetwork& net_;
  const AggregateConfig& cfg_;
  PeriodIndex index_;
  std::vector<std::uint32_t> order_;
  std::int64_t tz_secs_;
};

void merge_shards(Shard& into, Shard& from) {
  into.report.rows_read += from.report.rows_read;
  into.report.rows_ok += from.report.rows_ok;
  into.report.rows_malformed += from.report.rows_malformed;
  into.report.rows_unknown_tower += from.report.rows_unknown_tower;
  into.report.rows_out_of_window += from.report.rows_out_of_window;
  if (into.observed.size() < from.observed.size()) into.observed.resize(from.observed.size());
  for (std::size_t p = 0; p < from.observed.size(); ++p)
    into.observed[p].merge(from.observed[p]);
  into.accum.merge(from.accum);  // moves nodes for keys absent from `into`
  for (auto& [key, towers] : from.accum) {
    auto& dst = into.accum.find(key)->second;
    for (auto& [tower, acc] : towers) {
      auto& d = dst[tower];
      d.n_total += acc.n_total;
      d.n_window += acc.n_window;
      d.days_total.merge(acc.days_total);
      d.days_window.merge(acc.days_window);
    }
  }
  from.accum.clear();
}

IngestResult finalize(Shard&& shard, std::size_t n_periods) {
  IngestResult result;
  result.report = shard.report;
  result.report.observed_days.assign(n_periods, 0);
  for (std::size_t p = 0; p < shard.observed.size() && p < n_periods; ++p)
    result.report.observed_days[p] = shard.observed[p].count();
  result.summaries.reserve(shard.accum.size());
  for (auto& [key, towers] : shard.accum) {
    ActivitySummary s;
    s.user_id = key.user_id;
    s.period = key.period;
    s.towers.reserve(towers.size());
    for (auto& [tower, acc] : towers) {
      TowerActivityCounts t;
      t.tower = tower;
      t.n_total = acc.n_total;
      t.n_window = acc.n_window;
      t.n_days_total = acc.days_total.count();
      t.n_days_window = acc.days_window.count();
      s.towers.push_back(t);
    }
    result.summaries.push_back(std::move(s));
  }
  return result;
}

void validate_config(const AggregateConfig& cfg) {
  validate_periods(cfg.periods);
  if (!(cfg.tz_offset_hours >= -14.0 && cfg.tz_offset_hours <= 14.0))
    throw_data("tz offset out of range: " + std::to_string(cfg.tz_offset_hours));
}

// Splits [0, size) into at most `workers` chunks whose boundaries fall just
// after a newline, so no line straddles two chunks.
std::vector<std::pair<std::size_t, std::size_t>> newline_chunks(std::string_view text,
                                                                unsigned workers) {
  std::vector<std::pair<std::size_t, std::size_t>> chunks;
  if (text.empty()) return chunks;
  const std::size_t target = std::max<std::size_t>(1, text.size() / std::max(1u, workers));
  std::size_t begin = 0;
  while (begin < text.size()) {
    std::size_t end = std::min(text.size(), begin + target);
    if (end < text.size()) {
      const std::size_t nl = text.find('\n', end);
      end = (nl == std::string_view::npos) ? text.size() : nl + 1;
    }
    chunks.emplace_back(begin, end);
    begin = end;
  }
  return chunks;
}

}  // namespace

ParseResult parse_cdr_text(std::string_view text, bool strict, const std::string& source_name) {
  ParseResult out;
  bool seen_header = false;
  std::vector<std::string_view> fields;
  for_each_csv_line(text, [&](std::string_view line, std::size_t lineno) {
    if (!seen_header) {
      if (line != kCdrHeader)
        throw_data(source_name + ": expected header '" + std::string(kCdrHeader) + "', got '" +
                   std::string(line) + "'");
      seen_header = true;
      return true;
    }
    ++out.report.rows_read;
    CdrRecord rec;
    if (!parse_cdr_fields(line, fields, rec)) {
      if (strict)
        throw_data(source_name + ":" + std::to_string(lineno) + ": malformed record: '" +
                   std::string(line) + "'");
      ++out.report.rows_malformed;
      return true;
    }
    ++out.report.rows_ok;
    out.records.push_back(std::move(rec));
    return true;
  });
  if (!seen_header) throw_data(source_name + ": empty input, missing header");
  return out;
}

ParseResult parse_cdr(std::istream& in, bool strict) {
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_cdr_text(buf.str(), strict);
}

IngestResult aggregate(std::span<const CdrRecord> records, const TowerNetwork& net,
                       const AggregateConfig& cfg) {
  validate_config(cfg);
  Folder folder(net, cfg);
  Shard shard;
  shard.report.rows_read = records.size();
  shard.report.rows_ok = 0;  // recounted by fold: only in-window known-tower rows
  for (const auto& rec : records) folder.fold(rec, shard);
  return finalize(std::move(shard), cfg.periods.size());
}

IngestResult ingest_file(const std::string& path, const TowerNetwork& net,
                         const AggregateConfig& cfg, bool strict, unsigned workers) {
  validate_config(cfg);
  const std::string text = read_file(path);

  // Header line handled once, before chunking.
  std::size_t body_begin = 0;
  std::size_t header_lineno = 0;
  bool seen_header = false;
  {
    std::size_t pos = 0;
    std::size_t lineno = 0;
    while (pos < text.size() && !seen_header) {
      std::size_t nl = text.find('\n', pos);
      if (nl == std::string::npos) nl = text.size();
      std::string_view line(text.data() + pos, nl - pos);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      ++lineno;
      if (!line.empty() && line[0] != '#') {
        if (line != kCdrHeader)
          throw_data(path + ": expected header '" + std::string(kCdrHeader) + "', got '" +
                     std::string(line) + "'");
        seen_header = true;
        header_lineno = lineno;
      }
      pos = (nl == text.size()) ? nl : nl + 1;
      body_begin = pos;
    }
    if (!seen_header) throw_data(path + ": empty input, missing header");
  }

  const std::string_view body(text.data() + body_begin, text.size() - body_begin);
  const Folder folder(net, cfg);

  auto process = [&](std::string_view chunk, std::size_t lineno_base, Shard& shard) {
    std::size_t pos = 0;
    std::size_t lineno = lineno_base;
    CdrRecord rec;
    std::vector<std::string_view> fields;
    while (pos < chunk.size()) {
      std::size_t nl = chunk.find('\n', pos);
      if (nl == std::string_view::npos) nl = chunk.size();
      std::string_view line(chunk.data() + pos, nl - pos);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      ++lineno;
      pos = (nl == chunk.size()) ? nl : nl + 1;
      if (line.empty() || line[0] == '#') continue;
      ++shard.report.rows_read;
      if (!parse_cdr_fields(line, fields, rec)) {
        if (strict)
          throw_data(path + ":" + std::to_string(lineno) + ": malformed record: '" +
                     std::string(line) + "'");
        ++shard.report.rows_malformed;
        continue;
      }
      folder.fold(rec, shard);
    }
  };

  workers = std::max(1u, workers);
  const auto chunks = newline_chunks(body, workers);

  // line numbers per chunk: count newlines before each chunk start
  std::vector<std::size_t> lineno_base(chunks.size(), header_lineno);
  for (std::size_t c = 1; c < chunks.size(); ++c) {
    lineno_base[c] = lineno_base[c - 1] +
        static_cast<std::size_t>(std::count(body.begin() + static_cast<std::ptrdiff_t>(chunks[c - 1].first),
                                            body.begin() + static_cast<std::ptrdiff_t>(chunks[c - 1].second), '\n'));
  }

  std::vector<Shard> shards(chunks.size());
  if (workers == 1 || chunks.size() <= 1) {
    for (std::size_t c = 0; c < chunks.size(); ++c)
      process(body.substr(chunks[c].first, chunks[c].second - chunks[c].first), lineno_base[c],
              shards[c]);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(chunks.size());
    std::atomic<std::size_t> next{0};
    const unsigned n_threads = std::min<unsigned>(workers, static_cast<unsigned>(chunks.size()));
    for (unsigned t = 0; t < n_threads; ++t) {
      pool.emplace_back([&]() {
        for (;;) {
          const std::size_t c = next.fetch_add(1);
          if (c >= chunks.size()) return;
          try {
            process(body.substr(chunks[c].first, chunks[c].second - chunks[c].first),
                    lineno_base[c], shards[c]);
          } catch (...) {
            errors[c] = std::current_exception();
            return;
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& err : errors)
      if (err) std::rethrow_exception(err);
  }

  Shard total;
  for (auto& shard : shards) merge_shards(total, shard);
  return finalize(std::move(total), cfg.periods.size());
}

std::string aggregates_csv_string(const IngestResult& result, const TowerNetwork& net,
                                  const AggregateConfig& cfg) {
  std::string out;
  out += "# window=" + format_window(cfg.window) + "\n";
  out += "# tz=" + format_tz(cfg.tz_offset_hours) + "\n";
  for (std::size_t p = 0; p < cfg.periods.size(); ++p) {
    const auto& per = cfg.periods[p];
    out += "# period " + std::to_string(p) + "=" + per.label + " [" +
           format_iso8601_utc(per.start) + "," + format_iso8601_utc(per.end) + ") days=" +
           std::to_string(p < result.report.observed_days.size() ? result.report.observed_days[p]
                                                                 : 0) +
           "\n";
  }
  out += "user_id,period,tower_id,n_total,n_window,n_days_total,n_days_window\n";
  for (const auto& s : result.summaries) {
    for (const auto& t : s.towers) {
      out += s.user_id;
      out += ',';
      out += std::to_string(s.period);
      out += ',';
      out += net.towers()[t.tower].id;
      out += ',';
      out += std::to_string(t.n_total);
      out += ',';
      out += std::to_string(t.n_window);
      out += ',';
      out += std::to_string(t.n_days_total);
      out += ',';
      out += std::to_string(t.n_days_window);
      out += '\n';
    }
  }
  return out;
}

AggregatesFile read_aggregates_csv(const std::string& path, const TowerNetwork& net) {
  const std::string text = read_file(path);
  AggregatesFile out;

  // metadata comments
  {
    std::size_t pos = 0;
    while (pos < text.size()) {
      std::size_t nl = text.find('\n', pos);
      if (nl == std::string::npos) nl = text.size();
      std::string_view line(text.data() + pos, nl - pos);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      pos = (nl == text.size()) ? nl : nl + 1;
      if (line.empty()) continue;
      if (line[0] != '#') break;
      std::string_view meta = line.substr(1);
      while (!meta.empty() && meta.front() == ' ') meta.remove_prefix(1);
      if (meta.starts_with("window=")) out.window = std::string(meta.substr(7));
      else if (meta.starts_with("tz=")) out.tz = std::string(meta.substr(3));
      else if (meta.starts_with("period ")) {
        const std::size_t eq = meta.find('=');
        const std::size_t sp = meta.find(' ', eq);
        if (eq != std::string_view::npos) {
          std::string label(meta.substr(eq + 1, (sp == std::string_view::npos ? meta.size() : sp) - eq - 1));
          out.period_labels.push_back(std::move(label));
        }
      }
    }
  }

  constexpr std::string_view kHeader =
      "user_id,period,tower_id,n_total,n_window,n_days_total,n_days_window";
  bool seen_header = false;
  std::map<std::pair<std::string, std::uint32_t>, ActivitySummary> acc;
  std::vector<std::string_view> fields;
  for_each_csv_line(text, [&](std::string_view line, std::size_t lineno) {
    if (!seen_header) {
      if (line != kHeader)
        throw_data(path + ": expected header '" + std::string(kHeader) + "'");
      seen_header = true;
      return true;
    }
    if (split_fields(line, fields) != 7)
      throw_data(path + ":" + std::to_string(lineno) + ": expected 7 fields");
    const auto period = parse_u64(fields[1]);
    const auto n_total = parse_u64(fields[3]);
    const auto n_window = parse_u64(fields[4]);
    const auto n_days_total = parse_u64(fields[5]);
    const auto n_days_window = parse_u64(fields[6]);
    if (!is_safe_id(fields[0]) || !period || !n_total || !n_window || !n_days_total ||
        !n_days_window)
      throw_data(path + ":" + std::to_string(lineno) + ": malformed row");
    const auto tower_idx = net.index_of(fields[2]);
    if (!tower_idx)
      throw_data(path + ":" + std::to_string(lineno) + ": unknown tower '" +
                 std::string(fields[2]) + "'");
    if (!out.period_labels.empty() && *period >= out.period_labels.size())
      throw_data(path + ":" + std::to_string(lineno) + ": period " + std::to_string(*period) +
                 " out of range");
    if (*n_window > *n_total || *n_days_window > *n_days_total)
      throw_data(path + ":" + std::to_string(lineno) + ": window counts exceed totals");
    auto key = std::make_pair(std::string(fields[0]), static_cast<std::uint32_t>(*period));
    auto& summary = acc[key];
    summary.user_id = key.first;
    summary.period = key.second;
    TowerActivityCounts t;
    t.tower = *tower_idx;
    t.n_total = static_cast<std::uint32_t>(*n_total);
    t.n_window = static_cast<std::uint32_t>(*n_window);
    t.n_days_total = static_cast<std::uint32_t>(*n_days_total);
    t.n_days_window = static_cast<std::uint32_t>(*n_days_window);
    summary.towers.push_back(t);
    return true;
  });
  if (!seen_header) throw_data(path + ": empty input, missing header");

  out.summaries.reserve(acc.size());
  for (auto& [key, summary] : acc) {
    std::sort(summary.towers.begin(), summary.towers.end(),
              [](const TowerActivityCounts& a, const TowerActivityCounts& b) {
                return a.tower < b.tower;
              });
    for (std::size_t i = 1; i < summary.towers.size(); ++i)
      if (summary.towers[i].tower == summary.towers[i - 1].tower)
        throw_data(path + ": duplicate tower row for user '" + summary.user_id + "'");
    out.summaries.push_back(std::move(summary));
  }
  return out;
}

}  // namespace homedet
