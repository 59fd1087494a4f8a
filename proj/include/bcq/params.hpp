#pragma once

#include "bcq/error.hpp"

namespace bcq {

/// Parameters of the two-stage blockchain queue.
///
/// Transactions arrive as a Poisson stream (rate `lambda`) into an unbounded
/// pool. A block of at most `b` transactions is mined at exponential rate `mu1`
/// and then pegged onto the chain at exponential rate `mu2`.
struct Params {
  double lambda = 0.0;
  double mu1 = 1.0;
  double mu2 = 1.0;
  int b = 1;
};

/// (i, j): transactions in the block, transactions in the pool.
struct State {
  int i = 0;
  int j = 0;

  friend bool operator==(const State&, const State&) = default;
};

struct StabilityReport {
  double bound = 0.0;  // b*mu1*mu2/(mu1+mu2)
  double lambda = 0.0;
  bool stable = false;
  double margin = 0.0;  // bound - lambda
};

/// Returns `p` unchanged or throws Error{NonPositiveRate | NegativeArrival | InvalidBlockSize}.
Params validate_params(const Params& p);

/// Strict inequality: lambda == bound is reported unstable.
StabilityReport stability_check(const Params& p);

/// Thrown by operations that require a stable system.
class StabilityError : public Error {
 public:
  explicit StabilityError(const StabilityReport& report);
  const StabilityReport& report() const noexcept { return report_; }

 private:
  StabilityReport report_;
};

}  // namespace bcq
