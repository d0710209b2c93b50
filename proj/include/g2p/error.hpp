#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace g2p {

enum class ErrorCode {
  Unreachable,
  OutOfLimits,
  InfeasibleShape,
  InvalidArgument,
  InvalidDuration,
  NumericalDivergence,
  NonFiniteInput,
  ShapeMismatch,
  DatasetTooSmall,
  DegenerateRegion,
  SeriesTooShort,
  ConstantSeries,
  InsufficientData,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries a stable, machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace g2p
