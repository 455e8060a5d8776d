#include "kds/errors.hpp"

namespace kds {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::NotSubextremal: return "NotSubextremal";
    case ErrorCode::ChartDomain: return "ChartDomain";
    case ErrorCode::FrameMismatch: return "FrameMismatch";
    case ErrorCode::DeltaSelection: return "DeltaSelection";
    case ErrorCode::GaugeInvalid: return "GaugeInvalid";
    case ErrorCode::StepFailure: return "StepFailure";
    case ErrorCode::PoleGuard: return "PoleGuard";
    case ErrorCode::EmptyCharacteristic: return "EmptyCharacteristic";
    case ErrorCode::SampleInvalid: return "SampleInvalid";
    case ErrorCode::SearchExhausted: return "SearchExhausted";
    case ErrorCode::Degenerate: return "Degenerate";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::EigensolveFailure: return "EigensolveFailure";
    case ErrorCode::EmptyWindow: return "EmptyWindow";
    case ErrorCode::ZeroVector: return "ZeroVector";
  }
  return "Unknown";
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::ConfigError:
    case ErrorCode::GridTooCoarse:
      return 1;
    case ErrorCode::NotSubextremal:
    case ErrorCode::DeltaSelection:
    case ErrorCode::GaugeInvalid:
    case ErrorCode::FrameMismatch:
    case ErrorCode::ChartDomain:
      return 2;
    default:
      return 4;
  }
}

}  // namespace kds
