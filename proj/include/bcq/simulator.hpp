#pragma once

#include <cstdint>
#include <span>

#include "bcq/params.hpp"

namespace bcq {

struct SimConfig {
  double horizon = 1e6;
  double warmup = 1e5;
  int n_batches = 20;
  std::uint64_t seed = 1;

  /// Warmup defaults to 10% of the horizon.
  static SimConfig with_horizon(double horizon, std::uint64_t seed, int n_batches = 20) {
    return {horizon, 0.1 * horizon, n_batches, seed};
  }
};

struct SimEstimate {
  double block_mean = 0.0;  // I_hat
  double pool_mean = 0.0;   // J_hat
  double block_se = 0.0;
  double pool_se = 0.0;
  std::uint64_t n_events = 0;
  bool stable = true;  // echo of the stability check; unstable runs are allowed
  SimConfig config;
};

struct BatchStats {
  double mean = 0.0;
  double standard_error = 0.0;
};

/// Sample mean and standard error (n-1 denominator) of batch averages.
/// Throws Error{TooFewBatches} for fewer than 10 batches.
BatchStats batch_means(std::span<const double> batch_averages);

/// Seed of the k-th independent stream derived from `base` (splitmix64 of
/// base + k * golden-ratio increment). Stable across releases.
std::uint64_t stream_seed(std::uint64_t base, std::uint64_t stream);

/// Event-driven simulation of the same dynamics as build_generator, without
/// pool truncation. Time-average estimates of I and J over [warmup, horizon]
/// with batch-means standard errors.
///
/// The random stream is std::mt19937_64 seeded with stream_seed(config.seed, 0);
/// exponential variates use inversion on 53-bit uniforms, so a fixed seed
/// yields bit-identical output on every platform.
SimEstimate simulate(const Params& p, const SimConfig& config);

}  // namespace bcq
