#include "bcq/params.hpp"

#include <cmath>
#include <cstdio>

namespace bcq {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonPositiveRate: return "NonPositiveRate";
    case ErrorCode::NegativeArrival: return "NegativeArrival";
    case ErrorCode::InvalidBlockSize: return "InvalidBlockSize";
    case ErrorCode::Unstable: return "Unstable";
    case ErrorCode::TruncationTooSmall: return "TruncationTooSmall";
    case ErrorCode::InvalidGenerator: return "InvalidGenerator";
    case ErrorCode::SolveDidNotConverge: return "SolveDidNotConverge";
    case ErrorCode::TruncationDiverged: return "TruncationDiverged";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::DegenerateRun: return "DegenerateRun";
    case ErrorCode::TooFewBatches: return "TooFewBatches";
    case ErrorCode::DegenerateMean: return "DegenerateMean";
    case ErrorCode::NegativeMean: return "NegativeMean";
    case ErrorCode::SupportMismatch: return "SupportMismatch";
    case ErrorCode::MixedSpec: return "MixedSpec";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
  }
  return "Unknown";
}

bool is_numerical(ErrorCode code) {
  switch (code) {
    case ErrorCode::SolveDidNotConverge:
    case ErrorCode::TruncationDiverged:
    case ErrorCode::DegenerateRun:
    case ErrorCode::SupportMismatch:
      return true;
    default:
      return false;
  }
}

Params validate_params(const Params& p) {
  if (!(std::isfinite(p.mu1) && p.mu1 > 0.0) || !(std::isfinite(p.mu2) && p.mu2 > 0.0)) {
    throw Error(ErrorCode::NonPositiveRate, "mu1 and mu2 must be finite and > 0");
  }
  if (!(std::isfinite(p.lambda) && p.lambda >= 0.0)) {
    throw Error(ErrorCode::NegativeArrival, "lambda must be finite and >= 0");
  }
  if (p.b < 1) {
    throw Error(ErrorCode::InvalidBlockSize, "b must be >= 1");
  }
  return p;
}

StabilityReport stability_check(const Params& p) {
  validate_params(p);
  StabilityReport r;
  r.bound = static_cast<double>(p.b) * p.mu1 * p.mu2 / (p.mu1 + p.mu2);
  r.lambda = p.lambda;
  r.margin = r.bound - p.lambda;
  r.stable = r.bound > p.lambda;
  return r;
}

namespace {
std::string describe(const StabilityReport& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "lambda=%.12g is not below bound=%.12g (margin=%.12g)", r.lambda,
                r.bound, r.margin);
  return buf;
}
}  // namespace

StabilityError::StabilityError(const StabilityReport& report)
    : Error(ErrorCode::Unstable, describe(report)), report_(report) {}

}  // namespace bcq
