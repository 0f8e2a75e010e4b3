#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dfw {

enum class ErrorKind {
  kInvalidArgument,
  kDimensionMismatch,
  kRankDeficient,
  kNoComplement,
  kUnstable,
  kNonConvergence,
  kNotPositiveDefinite,
  kSingularGram,
  kSingularCovariance,
  kSingularForcing,
  kBadSplit,
  kInfeasible,
  kIo,
};

std::string_view to_string(ErrorKind kind);

// Every library failure is reported through this type; `kind()` lets callers
// (and the Python layer) dispatch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), detail_(what) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// The message without the kind prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

}  // namespace dfw
