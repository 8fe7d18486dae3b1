#pragma once

#include <stdexcept>
#include <string>

namespace fvc {

enum class ErrorKind {
  kParse,
  kValidation,
  kResolution,
  kArgument,
  kDomain,
  kDegenerateCohort,
  kDegenerateSample,
  kInsufficientSupport,
  kUndefinedPrecision,
  kConsistency,
  kIo,
};

// All library failures are reported through this type. The kind decides the
// process exit code used by the command-line tool.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  // 2 for dataset problems, 3 for numeric failures, 1 otherwise.
  int exit_code() const noexcept;

 private:
  ErrorKind kind_;
};

const char* to_string(ErrorKind kind) noexcept;

}  // namespace fvc
