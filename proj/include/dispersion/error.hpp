#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dispersion {

enum class ErrorCode {
  NonPositiveDipole,
  PopulationNotNormalized,
  InconsistentTransitionEnergy,
  InvalidLevelIndex,
  DuplicateTransition,
  OnResonance,
  NonPositiveTemperature,
  NonPositiveFrequency,
  InvalidField,
  ZeroFrequency,
  ZeroSeparation,
  NonPositiveArgument,
  MissingImaginaryAxisRule,
  QuadratureFailure,
  BudgetExceeded,
  RatioBoundViolated,
  DegenerateResonance,
  DarkAssumptionViolated,
  SignChange,
  TooFewPoints,
  InvalidArgument,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonPositiveDipole: return "NonPositiveDipole";
    case ErrorCode::PopulationNotNormalized: return "PopulationNotNormalized";
    case ErrorCode::InconsistentTransitionEnergy: return "InconsistentTransitionEnergy";
    case ErrorCode::InvalidLevelIndex: return "InvalidLevelIndex";
    case ErrorCode::DuplicateTransition: return "DuplicateTransition";
    case ErrorCode::OnResonance: return "OnResonance";
    case ErrorCode::NonPositiveTemperature: return "NonPositiveTemperature";
    case ErrorCode::NonPositiveFrequency: return "NonPositiveFrequency";
    case ErrorCode::InvalidField: return "InvalidField";
    case ErrorCode::ZeroFrequency: return "ZeroFrequency";
    case ErrorCode::ZeroSeparation: return "ZeroSeparation";
    case ErrorCode::NonPositiveArgument: return "NonPositiveArgument";
    case ErrorCode::MissingImaginaryAxisRule: return "MissingImaginaryAxisRule";
    case ErrorCode::QuadratureFailure: return "QuadratureFailure";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::RatioBoundViolated: return "RatioBoundViolated";
    case ErrorCode::DegenerateResonance: return "DegenerateResonance";
    case ErrorCode::DarkAssumptionViolated: return "DarkAssumptionViolated";
    case ErrorCode::SignChange: return "SignChange";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Exception carrying a machine-checkable code next to the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace dispersion
