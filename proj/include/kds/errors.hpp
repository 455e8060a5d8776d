#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kds {

enum class ErrorCode {
  InvalidArgument,
  ConfigError,
  NotSubextremal,
  ChartDomain,
  FrameMismatch,
  DeltaSelection,
  GaugeInvalid,
  StepFailure,
  PoleGuard,
  EmptyCharacteristic,
  SampleInvalid,
  SearchExhausted,
  Degenerate,
  GridTooCoarse,
  EigensolveFailure,
  EmptyWindow,
  ZeroVector,
};

std::string_view to_string(ErrorCode code);

// Exit code for the command-line contract: 1 usage/config, 2 mathematical
// precondition, 4 numerical failure.
int exit_code_for(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace kds
