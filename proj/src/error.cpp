#include "fvc/error.hpp"

namespace fvc {

int Error::exit_code() const noexcept {
  switch (kind_) {
    case ErrorKind::kParse:
    case ErrorKind::kValidation:
    case ErrorKind::kResolution:
    case ErrorKind::kConsistency:
      return 2;
    case ErrorKind::kDomain:
    case ErrorKind::kDegenerateCohort:
    case ErrorKind::kDegenerateSample:
    case ErrorKind::kInsufficientSupport:
    case ErrorKind::kUndefinedPrecision:
      return 3;
    case ErrorKind::kArgument:
    case ErrorKind::kIo:
      return 1;
  }
  return 1;
}

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kParse: return "parse error";
    case ErrorKind::kValidation: return "validation error";
    case ErrorKind::kResolution: return "resolution error";
    case ErrorKind::kArgument: return "argument error";
    case ErrorKind::kDomain: return "domain error";
    case ErrorKind::kDegenerateCohort: return "degenerate cohort";
    case ErrorKind::kDegenerateSample: return "degenerate sample";
    case ErrorKind::kInsufficientSupport: return "insufficient support";
    case ErrorKind::kUndefinedPrecision: return "undefined precision";
    case ErrorKind::kConsistency: return "consistency error";
    case ErrorKind::kIo: return "i/o error";
  }
  return "error";
}

}  // namespace fvc
