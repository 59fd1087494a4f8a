#include "bcq/gth.hpp"

#include <string>

#include "bcq/error.hpp"

namespace bcq {

std::size_t DenseRates::lower_bandwidth() const {
  std::size_t bw = 0;
  for (std::size_t r = 1; r < n; ++r) {
    for (std::size_t c = 0; c + bw < r; ++c) {
      if (data[r * n + c] != 0.0) {
        bw = r - c;
        break;
      }
    }
  }
  return bw;
}

namespace {

// Flop count of one elimination step below which the parallel kernel stays serial.
constexpr std::size_t kParallelThreshold = 1 << 14;

[[noreturn]] void throw_reducible(std::size_t k) {
  throw Error(ErrorCode::SolveDidNotConverge,
              "state " + std::to_string(k) + " has no path to lower-index states (reducible chain)");
}

double outflow(const DenseRates& a, std::size_t k, std::size_t lo) {
  const double* row = &a.data[k * a.n];
  double s = 0.0;
  for (std::size_t v = lo; v < k; ++v) s += row[v];
  return s;
}

std::vector<double> back_substitute(const DenseRates& a, const std::vector<double>& out_rate) {
  const std::size_t n = a.n;
  std::vector<double> pi(n, 0.0);
  pi[0] = 1.0;
  double total = 1.0;
  for (std::size_t k = 1; k < n; ++k) {
    double acc = 0.0;
    for (std::size_t u = 0; u < k; ++u) acc += pi[u] * a(u, k);
    pi[k] = acc / out_rate[k];
    total += pi[k];
  }
  for (double& p : pi) p /= total;
  return pi;
}

}  // namespace

std::vector<double> gth_stationary_serial(DenseRates& a, std::size_t lower_bw) {
  const std::size_t n = a.n;
  if (n == 0) return {};
  std::vector<double> out_rate(n, 0.0);
  for (std::size_t k = n - 1; k >= 1; --k) {
    const std::size_t lo = k > lower_bw ? k - lower_bw : 0;
    const double s = outflow(a, k, lo);
    if (!(s > 0.0)) throw_reducible(k);
    out_rate[k] = s;
    const double* row_k = &a.data[k * n];
    for (std::size_t u = 0; u < k; ++u) {
      double* row_u = &a.data[u * n];
      const double f = row_u[k];
      if (f == 0.0) continue;
      const double scale = f / s;
      for (std::size_t v = lo; v < k; ++v) row_u[v] += scale * row_k[v];
    }
  }
  return back_substitute(a, out_rate);
}

std::vector<double> gth_stationary_parallel(DenseRates& a, std::size_t lower_bw) {
  const std::size_t n = a.n;
  if (n == 0) return {};
  std::vector<double> out_rate(n, 0.0);
  double* data = a.data.data();
  for (std::size_t k = n - 1; k >= 1; --k) {
    const std::size_t lo = k > lower_bw ? k - lower_bw : 0;
    const double s = outflow(a, k, lo);
    if (!(s > 0.0)) throw_reducible(k);
    out_rate[k] = s;
    const double* row_k = data + k * n;
    const auto rows = static_cast<std::ptrdiff_t>(k);
#pragma omp parallel for schedule(static) if (k * (k - lo) > kParallelThreshold)
    for (std::ptrdiff_t u = 0; u < rows; ++u) {
      double* row_u = data + static_cast<std::size_t>(u) * n;
      const double f = row_u[k];
      if (f == 0.0) continue;
      const double scale = f / s;
      for (std::size_t v = lo; v < k; ++v) row_u[v] += scale * row_k[v];
    }
  }
  return back_substitute(a, out_rate);
}

}  // namespace bcq
