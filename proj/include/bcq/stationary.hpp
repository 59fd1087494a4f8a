#pragma once

#include <span>

#include "bcq/distribution.hpp"
#include "bcq/generator.hpp"
#include "bcq/gth.hpp"

namespace bcq {

struct SolveOptions {
  double residual_tol = 1e-10;
  Kernel kernel = Kernel::parallel;
};

/// Thrown when the solved vector misses the residual contract.
class SolveError : public Error {
 public:
  SolveError(double residual, double tol);
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Stationary distribution pi of the truncated chain, pi*Q = 0, sum(pi) = 1.
///
/// Block-stage states (i >= 1) whose internal transitions form a DAG are
/// censored out first; the remaining pool-stage chain is solved with GTH and
/// the censored states are recovered by forward substitution. Chains without
/// that structure fall back to GTH over every state.
JointDistribution solve_stationary(const SparseGenerator& g, const SolveOptions& options = {});

/// max_s |(pi*Q)_s|.
double stationary_residual(const SparseGenerator& g, std::span<const double> pi);

struct TruncationOptions {
  double tail_eps = 1e-10;
  double moment_rel_tol = 1e-8;
  // Doubling stops with TruncationDiverged once the next level would exceed this.
  int max_j_max = 4096;
  SolveOptions solve;
};

struct TruncationResult {
  int j_max = 0;
  JointDistribution distribution;  // solved at j_max
  Moments moments;                 // of `distribution`
  Moments refined;                 // at 2*j_max, used for the convergence test
  int levels_tried = 0;
};

/// Reports the last two moment iterates when the doubling search gives up.
class TruncationError : public Error {
 public:
  TruncationError(const std::string& why, Moments previous, Moments last, int last_level);
  Moments previous() const noexcept { return previous_; }
  Moments last() const noexcept { return last_; }
  int last_level() const noexcept { return last_level_; }

 private:
  Moments previous_;
  Moments last_;
  int last_level_;
};

/// Doubling search from max(4b, 64): returns the smallest tested level whose
/// boundary mass is <= tail_eps and whose moments move by < moment_rel_tol
/// (relative) when the level is doubled.
TruncationResult auto_truncate(const Params& p, const TruncationOptions& options = {});

/// The level the doubling search starts from.
int initial_truncation_level(int b);

}  // namespace bcq
