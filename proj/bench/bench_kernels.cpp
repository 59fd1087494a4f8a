// Serial reference vs OpenMP kernels: GTH reduction of the censored pool
// chain, the full stationary solve, and a whole parameter sweep.
//
//   bcq_bench [b] [j_max] [repeats]

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <vector>

#include "bcq/experiments.hpp"
#include "bcq/generator.hpp"
#include "bcq/gth.hpp"
#include "bcq/stationary.hpp"

namespace {

double time_ms(const std::function<void()>& fn, int repeats) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

// Random irreducible chain with a banded lower part and dense upper part.
bcq::DenseRates random_chain(std::size_t n, std::size_t bw, unsigned seed) {
  bcq::DenseRates a(n);
  std::srand(seed);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      if (r == c) continue;
      if (c < r && r - c > bw) continue;
      if (c > r + 1 && std::rand() % 4 != 0) continue;
      a(r, c) = 0.1 + static_cast<double>(std::rand()) / RAND_MAX;
    }
  }
  return a;
}

}  // namespace

int main(int argc, char** argv) {
  const int b = argc > 1 ? std::atoi(argv[1]) : 160;
  const int j_max = argc > 2 ? std::atoi(argv[2]) : 1280;
  const int repeats = argc > 3 ? std::atoi(argv[3]) : 3;
  std::printf("threads=%d b=%d j_max=%d repeats=%d\n", omp_get_max_threads(), b, j_max, repeats);

  {
    const std::size_t n = static_cast<std::size_t>(j_max) + 1;
    const bcq::DenseRates base = random_chain(n, static_cast<std::size_t>(b), 7);
    std::vector<double> s_pi, p_pi;
    const double ts = time_ms([&] { auto a = base; s_pi = bcq::gth_stationary_serial(a, b); }, repeats);
    const double tp = time_ms([&] { auto a = base; p_pi = bcq::gth_stationary_parallel(a, b); }, repeats);
    double diff = 0.0;
    for (std::size_t k = 0; k < n; ++k) diff = std::max(diff, std::abs(s_pi[k] - p_pi[k]));
    std::printf("gth n=%zu bw=%d      serial %9.2f ms  parallel %9.2f ms  speedup %.2fx  max|diff|=%.1e\n", n, b,
                ts, tp, ts / tp, diff);
  }

  {
    const bcq::Params p{1.5, 2.0, 2.0, b};
    const bcq::SparseGenerator g = bcq::build_generator(p, j_max);
    bcq::SolveOptions serial{1e-10, bcq::Kernel::serial};
    bcq::SolveOptions parallel{1e-10, bcq::Kernel::parallel};
    const double ts = time_ms([&] { bcq::solve_stationary(g, serial); }, repeats);
    const double tp = time_ms([&] { bcq::solve_stationary(g, parallel); }, repeats);
    std::printf("stationary states=%zu  serial %9.2f ms  parallel %9.2f ms  speedup %.2fx\n", g.n_states, ts, tp,
                ts / tp);
  }

  {
    const bcq::SweepSpec spec = bcq::example_spec(3);
    const double ts = time_ms([&] { bcq::run_sweep(spec, {bcq::Execution::serial}); }, 1);
    const double tp = time_ms([&] { bcq::run_sweep(spec, {bcq::Execution::parallel}); }, 1);
    std::printf("sweep example3 (60 pts) serial %9.2f ms  parallel %9.2f ms  speedup %.2fx\n", ts, tp, ts / tp);
  }
  return 0;
}
