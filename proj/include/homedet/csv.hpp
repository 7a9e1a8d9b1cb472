// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <charconv>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace homedet {

// Minimal CSV layer for the fixed schemas this tool exchanges: comma
// separated, no quoting, '#' lines are comments, header row mandatory.
// Identifiers therefore must not contain ',' '#' or line breaks; writers
// validate that on the way out.

// Splits `line` on commas into `fields`. Returns field count. Does not trim.
inline std::size_t split_fields(std::string_view line, std::vector<std::string_view>& fields) {
  fields.clear();
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = line.find(',', pos);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(pos));
      break;
    }
    fields.push_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
  return fields.size();
}

inline std::optional<std::int64_t> parse_i64(std::string_view s) {
  std::int64_t v = 0;
  const auto* begin = s.data();
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end || s.empty()) return std::nullopt;
  return v;
}

inline std::optional<std::uint64_t> parse_u64(std::string_view s) {
  std::uint64_t v = 0;
  const auto* begin = s.data();
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end || s.empty()) return std::nullopt;
  return v;
}

std::optional<double> parse_f64(std::string_view s);

// valid as an id field in our CSV schemas
inline bool is_safe_id(std::string_view s) {
  if (s.empty()) return false;
  if (s.front() == '#') return false;
  for (char c : s)
    if (c == ',' || c == '\n' || c == '\r' || c == '"') return false;
  return true;
}

// Reads a whole file into memory; transparently inflates when the name ends
// in ".gz". Throws Error(data) on I/O problems.
std::string read_file(const std::string& path);

// Atomically-ish writes (write then flush) a whole file. Throws Error(data).
void write_file(const std::string& path, std::string_view content);

// Iterates lines of `text` (LF or CRLF), skipping blank and '#' lines.
// Callback receives (line, 1-based line number). Return false to stop.
void for_each_csv_line(std::string_view text,
                       const std::function<bool(std::string_view, std::size_t)>& fn);

// Lowercase hex SHA-256 of a file's contents (for run manifests).
std::string sha256_file_hex(const std::string& path);

}  // namespace homedet
