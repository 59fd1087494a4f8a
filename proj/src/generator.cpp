#include "bcq/generator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace bcq {

namespace {

void fill_diagonal(SparseGenerator& g) {
  g.diagonal.assign(g.n_states, 0.0);
  for (const auto& t : g.entries) g.diagonal[t.from] -= t.rate;
}

}  // namespace

SparseGenerator build_generator(const Params& p, int j_max, bool exploratory) {
  validate_params(p);
  if (j_max < p.b) {
    throw Error(ErrorCode::TruncationTooSmall, "j_max must be >= b");
  }
  if (const auto report = stability_check(p); !report.stable && !exploratory) {
    throw StabilityError(report);
  }

  SparseGenerator g;
  g.b = p.b;
  g.j_max = j_max;
  g.params = p;
  g.n_states = static_cast<std::size_t>(p.b + 1) * static_cast<std::size_t>(j_max + 1);
  g.entries.reserve(g.n_states * 2);

  for (int j = 0; j <= j_max; ++j) {
    for (int i = 0; i <= p.b; ++i) {
      const std::size_t s = g.index(i, j);
      if (j < j_max && p.lambda > 0.0) g.entries.push_back({s, g.index(i, j + 1), p.lambda});
      if (i == 0 && j >= 1) {
        const int m = std::min(j, p.b);
        g.entries.push_back({s, g.index(m, j - m), p.mu1});
      }
      if (i >= 1) g.entries.push_back({s, g.index(0, j), p.mu2});
    }
  }
  fill_diagonal(g);
  return g;
}

SparseGenerator make_generator(int b, int j_max, std::vector<Transition> entries) {
  if (b < 0 || j_max < 0) throw Error(ErrorCode::InvalidGenerator, "negative dimensions");
  SparseGenerator g;
  g.b = b;
  g.j_max = j_max;
  g.n_states = static_cast<std::size_t>(b + 1) * static_cast<std::size_t>(j_max + 1);
  for (const auto& t : entries) {
    if (t.from >= g.n_states || t.to >= g.n_states || t.from == t.to) {
      throw Error(ErrorCode::InvalidGenerator, "transition outside the state space or self-loop");
    }
    if (!(std::isfinite(t.rate) && t.rate >= 0.0)) {
      throw Error(ErrorCode::InvalidGenerator, "off-diagonal rates must be finite and >= 0");
    }
  }
  g.entries = std::move(entries);
  g.params.b = std::max(b, 1);
  fill_diagonal(g);
  return g;
}

double max_row_sum_error(const SparseGenerator& g) {
  std::vector<double> sums(g.diagonal);
  for (const auto& t : g.entries) sums[t.from] += t.rate;
  double worst = 0.0;
  for (double s : sums) worst = std::max(worst, std::abs(s));
  return worst;
}

void write_triplets(std::ostream& os, const SparseGenerator& g) {
  auto put = [&](std::size_t from, std::size_t to, double rate) {
    const State a = g.state(from);
    const State c = g.state(to);
    char buf[96];
    std::snprintf(buf, sizeof buf, "%d:%d %d:%d %.17g\n", a.i, a.j, c.i, c.j, rate);
    os << buf;
  };
  for (const auto& t : g.entries) put(t.from, t.to, t.rate);
  for (std::size_t s = 0; s < g.n_states; ++s) put(s, s, g.diagonal[s]);
}

}  // namespace bcq
