// Apache License, Version 2.0, refer to LICENSE.txt
#include "homedet/csv.hpp"

#include <openssl/evp.h>
#include <zlib.h>

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "homedet/error.hpp"

namespace homedet {

std::optional<double> parse_f64(std::string_view s) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto* begin = s.data();
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

namespace {

bool ends_with_gz(const std::string& path) {
  return path.size() > 3 && path.compare(path.size() - 3, 3, ".gz") == 0;
}

std::string read_gzip(const std::string& path) {
  gzFile f = gzopen(path.c_str(), "rb");
  if (!f) throw_data("cannot open '" + path + "': " + std::strerror(errno));
  std::string out;
  char buf[1 << 16];
  int n;
  while ((n = gzread(f, buf, sizeof buf)) > 0) out.append(buf, static_cast<std::size_t>(n));
  if (n < 0) {
    int errnum = 0;
    const char* msg = gzerror(f, &errnum);
    std::string err(msg ? msg : "gzip error");
    gzclose(f);
    throw_data("error reading '" + path + "': " + err);
  }
  gzclose(f);
  return out;
}

}  // namespace

std::string read_file(const std::string& path) {
  if (ends_with_gz(path)) return read_gzip(path);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_data("cannot open '" + path + "': " + std::strerror(errno));
  std::string out;
  in.seekg(0, std::ios::end);
  const auto size = in.tellg();
  if (size > 0) {
    out.resize(static_cast<std::size_t>(size));
    in.seekg(0);
    in.read(out.data(), size);
  }
  if (in.bad()) throw_data("error reading '" + path + "'");
  return out;
}

void write_file(const std::string& path, std::string_view content) {
  if (ends_with_gz(path)) {
    gzFile f = gzopen(path.c_str(), "wb");
    if (!f) throw_data("cannot create '" + path + "': " + std::strerror(errno));
    std::size_t off = 0;
    while (off < content.size()) {
      const unsigned chunk =
          static_cast<unsigned>(std::min<std::size_t>(content.size() - off, 1u << 24));
      if (gzwrite(f, content.data() + off, chunk) != static_cast<int>(chunk)) {
        gzclose(f);
        throw_data("error writing '" + path + "'");
      }
      off += chunk;
    }
    gzclose(f);
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw_data("cannot create '" + path + "': " + std::strerror(errno));
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) throw_data("error writing '" + path + "'");
}

void for_each_csv_line(std::string_view text,
                       const std::function<bool(std::string_view, std::size_t)>& fn) {
  std::size_t pos = 0;
  std::size_t lineno = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string_view line =
        nl == std::string_view::npos ? text.substr(pos) : text.substr(pos, nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    if (!fn(line, lineno)) return;
  }
}

std::string sha256_file_hex(const std::string& path) {
  const std::string data = read_file(path);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr))
    throw_data("sha256 failed for '" + path + "'");
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

}  // namespace homedet
