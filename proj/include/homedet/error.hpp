// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <stdexcept>
#include <string>

namespace homedet {

// Error categories map 1:1 onto CLI exit codes (0 = success is implicit).
enum class Errc : int {
  usage = 2,       // bad flags, unknown rule ids, malformed requests
  data = 3,        // unreadable/inconsistent input files, schema mismatches
  degenerate = 4,  // math that has no defined answer (zero-norm vector, constant field, ...)
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }
  int exit_code() const noexcept { return static_cast<int>(code_); }

 private:
  Errc code_;
};

[[noreturn]] inline void throw_usage(const std::string& msg) { throw Error(Errc::usage, msg); }
[[noreturn]] inline void throw_data(const std::string& msg) { throw Error(Errc::data, msg); }
[[noreturn]] inline void throw_degenerate(const std::string& msg) { throw Error(Errc::degenerate, msg); }

}  // namespace homedet
