#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ifport {

enum class ErrorKind {
  EmptySeries,
  NonFiniteInput,
  DimensionMismatch,
  DegenerateAsset,
  ParseError,
  InvariantViolation,
  InvalidWeights,
  ZeroVariance,
  DegenerateCriterion,
  IFConditionViolated,
  BadShape,
  SolverFailure,
  ResourceLimit,
  ConfigError,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::EmptySeries: return "EmptySeries";
    case ErrorKind::NonFiniteInput: return "NonFiniteInput";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::DegenerateAsset: return "DegenerateAsset";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::InvariantViolation: return "InvariantViolation";
    case ErrorKind::InvalidWeights: return "InvalidWeights";
    case ErrorKind::ZeroVariance: return "ZeroVariance";
    case ErrorKind::DegenerateCriterion: return "DegenerateCriterion";
    case ErrorKind::IFConditionViolated: return "IFConditionViolated";
    case ErrorKind::BadShape: return "BadShape";
    case ErrorKind::SolverFailure: return "SolverFailure";
    case ErrorKind::ResourceLimit: return "ResourceLimit";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

/// Single exception type for the library; `kind()` selects the failure class.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace ifport
