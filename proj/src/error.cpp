#include "g2p/error.hpp"

namespace g2p {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Unreachable: return "Unreachable";
    case ErrorCode::OutOfLimits: return "OutOfLimits";
    case ErrorCode::InfeasibleShape: return "InfeasibleShape";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidDuration: return "InvalidDuration";
    case ErrorCode::NumericalDivergence: return "NumericalDivergence";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::DatasetTooSmall: return "DatasetTooSmall";
    case ErrorCode::DegenerateRegion: return "DegenerateRegion";
    case ErrorCode::SeriesTooShort: return "SeriesTooShort";
    case ErrorCode::ConstantSeries: return "ConstantSeries";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace g2p
