#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace hkelab {

using Index = std::size_t;
using PointSet = std::vector<Index>;

enum class ErrorCode {
  invalid_argument,
  parse,
  validation,
  numerical,
  io,
  check_failed,
  internal,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorCode::invalid_argument, what);
}

}  // namespace hkelab
