#include "bcq/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

namespace bcq {

BatchStats batch_means(std::span<const double> xs) {
  if (xs.size() < 10) throw Error(ErrorCode::TooFewBatches, "batch means needs at least 10 batches");
  const double n = static_cast<double>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

std::uint64_t stream_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + (stream + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

constexpr double kNever = std::numeric_limits<double>::infinity();

class ExponentialClock {
 public:
  ExponentialClock(std::mt19937_64& rng, double rate) : rng_(rng), rate_(rate) {}

  double sample() {
    if (!(rate_ > 0.0)) return kNever;
    // u in (0, 1]
    const double u = static_cast<double>((rng_() >> 11) + 1) * 0x1.0p-53;
    return -std::log(u) / rate_;
  }

 private:
  std::mt19937_64& rng_;
  double rate_;
};

// Integrates piecewise-constant (i, j) paths into equal-width time batches.
class BatchAccumulator {
 public:
  BatchAccumulator(double start, double end, int n)
      : start_(start), end_(end), width_((end - start) / n), block_(n, 0.0), pool_(n, 0.0) {}

  void add(double t0, double t1, double i, double j) {
    t0 = std::max(t0, start_);
    t1 = std::min(t1, end_);
    while (t0 < t1) {
      auto k = static_cast<std::size_t>((t0 - start_) / width_);
      k = std::min(k, block_.size() - 1);
      const double edge = k + 1 == block_.size() ? end_ : start_ + width_ * static_cast<double>(k + 1);
      const double stop = std::min(t1, edge);
      const double dt = stop - t0;
      block_[k] += dt * i;
      pool_[k] += dt * j;
      t0 = stop;
    }
  }

  std::vector<double> block_averages() const { return scaled(block_); }
  std::vector<double> pool_averages() const { return scaled(pool_); }

 private:
  std::vector<double> scaled(const std::vector<double>& area) const {
    std::vector<double> out(area.size());
    for (std::size_t k = 0; k < area.size(); ++k) {
      const double lo = start_ + width_ * static_cast<double>(k);
      const double hi = k + 1 == area.size() ? end_ : start_ + width_ * static_cast<double>(k + 1);
      out[k] = area[k] / (hi - lo);
    }
    return out;
  }

  double start_, end_, width_;
  std::vector<double> block_, pool_;
};

void validate_config(const SimConfig& c) {
  if (!(std::isfinite(c.horizon) && c.horizon > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "horizon must be finite and > 0");
  }
  if (!(c.warmup >= 0.0 && c.warmup < c.horizon)) {
    throw Error(ErrorCode::InvalidConfig, "warmup must lie in [0, horizon)");
  }
  if (c.n_batches < 10) throw Error(ErrorCode::InvalidConfig, "n_batches must be >= 10");
}

}  // namespace

SimEstimate simulate(const Params& p, const SimConfig& config) {
  validate_params(p);
  validate_config(config);

  std::mt19937_64 rng(stream_seed(config.seed, 0));
  ExponentialClock arrival(rng, p.lambda);
  ExponentialClock generation(rng, p.mu1);
  ExponentialClock building(rng, p.mu2);
  BatchAccumulator acc(config.warmup, config.horizon, config.n_batches);

  int i = 0;
  long long j = 0;
  double t = 0.0;
  double next_arrival = arrival.sample();
  double next_generation = kNever;
  double next_building = kNever;
  std::uint64_t events = 0;
  std::uint64_t measured_events = 0;

  while (true) {
    const double t_next = std::min({next_arrival, next_generation, next_building});
    if (t_next > config.horizon) {
      acc.add(t, config.horizon, i, static_cast<double>(j));
      break;
    }
    acc.add(t, t_next, i, static_cast<double>(j));
    t = t_next;
    ++events;
    if (t >= config.warmup) ++measured_events;

    if (t_next == next_arrival) {
      ++j;
      next_arrival = t + arrival.sample();
      if (i == 0 && j == 1) next_generation = t + generation.sample();
    } else if (t_next == next_generation) {
      const long long m = std::min<long long>(j, p.b);
      i = static_cast<int>(m);
      j -= m;
      next_generation = kNever;
      next_building = t + building.sample();
    } else {
      i = 0;
      next_building = kNever;
      if (j >= 1) next_generation = t + generation.sample();
    }
  }

  if (measured_events == 0 && p.lambda > 0.0) {
    throw Error(ErrorCode::DegenerateRun, "no events after warmup");
  }

  const auto block_avg = acc.block_averages();
  const auto pool_avg = acc.pool_averages();
  const BatchStats bs = batch_means(block_avg);
  const BatchStats ps = batch_means(pool_avg);

  SimEstimate est;
  est.block_mean = bs.mean;
  est.pool_mean = ps.mean;
  est.block_se = bs.standard_error;
  est.pool_se = ps.standard_error;
  est.n_events = events;
  est.stable = stability_check(p).stable;
  est.config = config;
  return est;
}

}  // namespace bcq
