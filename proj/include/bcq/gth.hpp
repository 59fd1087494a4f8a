#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace bcq {

enum class Kernel { serial, parallel };

/// Dense row-major n x n matrix of off-diagonal transition rates. The
/// diagonal is ignored.
struct DenseRates {
  std::size_t n = 0;
  std::vector<double> data;

  explicit DenseRates(std::size_t size) : n(size), data(size * size, 0.0) {}
  double& operator()(std::size_t r, std::size_t c) { return data[r * n + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * n + c]; }

  /// max(r - c) over non-zero entries below the diagonal.
  std::size_t lower_bandwidth() const;
};

/// Stationary vector of an irreducible CTMC by GTH state reduction.
///
/// States are eliminated from n-1 down to 1; entries are only ever added, so
/// the result is accurate to working precision regardless of conditioning.
/// `lower_bw` bounds the sub-diagonal fill and is preserved by elimination.
/// The input is consumed. The returned vector sums to one.
///
/// Throws Error{SolveDidNotConverge} if some state cannot reach a lower-index
/// state (chain not irreducible over the eliminated set).
std::vector<double> gth_stationary_serial(DenseRates& rates, std::size_t lower_bw);
std::vector<double> gth_stationary_parallel(DenseRates& rates, std::size_t lower_bw);

inline std::vector<double> gth_stationary(DenseRates& rates, std::size_t lower_bw, Kernel kernel) {
  return kernel == Kernel::parallel ? gth_stationary_parallel(rates, lower_bw)
                                    : gth_stationary_serial(rates, lower_bw);
}

}  // namespace bcq
