#include "bpe/error.hpp"

namespace bpe {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::HorizonExceeded: return "horizon-exceeded";
    case ErrorCode::NotLeftInvertible: return "not-left-invertible";
    case ErrorCode::InfiniteKernel: return "infinite-kernel";
    case ErrorCode::DivergentSeries: return "divergent-series";
    case ErrorCode::Parse: return "parse-error";
    case ErrorCode::Validation: return "validation-error";
    case ErrorCode::Io: return "io-error";
  }
  return "unknown";
}

}  // namespace bpe
