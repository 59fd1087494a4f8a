#pragma once

#include <stdexcept>
#include <string>

namespace bcq {

enum class ErrorCode {
  NonPositiveRate,
  NegativeArrival,
  InvalidBlockSize,
  Unstable,
  TruncationTooSmall,
  InvalidGenerator,
  SolveDidNotConverge,
  TruncationDiverged,
  InvalidConfig,
  DegenerateRun,
  TooFewBatches,
  DegenerateMean,
  NegativeMean,
  SupportMismatch,
  MixedSpec,
  InvalidSpec,
};

const char* to_string(ErrorCode code);

// Input errors map to CLI exit code 1, numerical failures to exit code 2.
bool is_numerical(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace bcq
