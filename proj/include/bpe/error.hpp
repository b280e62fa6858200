#pragma once

#include <stdexcept>
#include <string>

namespace bpe {

enum class ErrorCode {
  InvalidArgument,
  HorizonExceeded,
  NotLeftInvertible,
  InfiniteKernel,
  DivergentSeries,
  Parse,
  Validation,
  Io,
};

const char* to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above; the
/// C layer maps them onto status values one to one.
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

}  // namespace bpe
