#include "bcq/stationary.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

namespace bcq {

namespace {

std::string format_residual(double residual, double tol) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "residual %.3e exceeds tolerance %.3e", residual, tol);
  return buf;
}

struct Arc {
  std::size_t other;
  double rate;
};

// Compressed adjacency, one list per state.
struct Adjacency {
  std::vector<std::size_t> offsets;
  std::vector<Arc> arcs;

  std::span<const Arc> operator[](std::size_t s) const {
    return {arcs.data() + offsets[s], offsets[s + 1] - offsets[s]};
  }
};

Adjacency build_adjacency(std::size_t n, const std::vector<Transition>& entries, bool outgoing) {
  Adjacency adj;
  adj.offsets.assign(n + 1, 0);
  for (const auto& t : entries) {
    if (t.rate > 0.0) ++adj.offsets[(outgoing ? t.from : t.to) + 1];
  }
  for (std::size_t s = 0; s < n; ++s) adj.offsets[s + 1] += adj.offsets[s];
  adj.arcs.resize(adj.offsets[n]);
  std::vector<std::size_t> cursor(adj.offsets.begin(), adj.offsets.end() - 1);
  for (const auto& t : entries) {
    if (t.rate <= 0.0) continue;
    const std::size_t key = outgoing ? t.from : t.to;
    adj.arcs[cursor[key]++] = {outgoing ? t.to : t.from, t.rate};
  }
  return adj;
}

// Topological order of the censored subgraph, or empty if it has a cycle.
std::vector<std::size_t> censored_order(const Adjacency& out, const std::vector<char>& censored) {
  const std::size_t n = censored.size();
  std::vector<std::size_t> indegree(n, 0);
  std::size_t count = 0;
  for (std::size_t s = 0; s < n; ++s) {
    if (!censored[s]) continue;
    ++count;
    for (const auto& a : out[s]) {
      if (censored[a.other]) ++indegree[a.other];
    }
  }
  std::vector<std::size_t> order;
  order.reserve(count);
  for (std::size_t s = 0; s < n; ++s) {
    if (censored[s] && indegree[s] == 0) order.push_back(s);
  }
  for (std::size_t head = 0; head < order.size(); ++head) {
    for (const auto& a : out[order[head]]) {
      if (censored[a.other] && --indegree[a.other] == 0) order.push_back(a.other);
    }
  }
  if (order.size() != count) order.clear();
  return order;
}

// Exit distribution of a censored state over the kept states, dense on [lo, lo + w.size()).
struct ExitVector {
  std::size_t lo = 0;
  std::vector<double> w;
};

}  // namespace

SolveError::SolveError(double residual, double tol)
    : Error(ErrorCode::SolveDidNotConverge, format_residual(residual, tol)), residual_(residual) {}

TruncationError::TruncationError(const std::string& why, Moments previous, Moments last, int last_level)
    : Error(ErrorCode::TruncationDiverged, why), previous_(previous), last_(last), last_level_(last_level) {}

double stationary_residual(const SparseGenerator& g, std::span<const double> pi) {
  std::vector<double> r(g.n_states, 0.0);
  for (const auto& t : g.entries) r[t.to] += pi[t.from] * t.rate;
  for (std::size_t s = 0; s < g.n_states; ++s) r[s] += pi[s] * g.diagonal[s];
  double worst = 0.0;
  for (double v : r) worst = std::max(worst, std::abs(v));
  return worst;
}

JointDistribution solve_stationary(const SparseGenerator& g, const SolveOptions& options) {
  const std::size_t n = g.n_states;
  if (n == 0 || g.diagonal.size() != n) {
    throw Error(ErrorCode::InvalidGenerator, "empty generator or missing diagonal");
  }
  const Adjacency out = build_adjacency(n, g.entries, true);
  const Adjacency in = build_adjacency(n, g.entries, false);

  std::vector<double> out_rate(n, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    for (const auto& a : out[s]) out_rate[s] += a.rate;
  }

  // Censor the block stage (i >= 1) when it is acyclic and has no absorbing state.
  const std::size_t width = static_cast<std::size_t>(g.b) + 1;
  std::vector<char> censored(n, 0);
  bool usable = true;
  for (std::size_t s = 0; s < n; ++s) {
    censored[s] = (s % width) != 0;
    if (censored[s] && !(out_rate[s] > 0.0)) usable = false;
  }
  std::vector<std::size_t> order;
  if (usable) order = censored_order(out, censored);
  if (order.empty()) std::fill(censored.begin(), censored.end(), 0);

  std::vector<std::size_t> kept_index(n, 0);
  std::size_t n_kept = 0;
  for (std::size_t s = 0; s < n; ++s) {
    if (!censored[s]) kept_index[s] = n_kept++;
  }

  DenseRates rates(n_kept);
  for (std::size_t s = 0; s < n; ++s) {
    if (censored[s]) continue;
    for (const auto& a : out[s]) {
      if (!censored[a.other]) rates(kept_index[s], kept_index[a.other]) += a.rate;
    }
  }

  // Fold every censored state into the kept chain, last-to-first in topological order.
  std::vector<std::size_t> pending_users(n, 0);
  for (std::size_t s : order) {
    for (const auto& a : in[s]) {
      if (censored[a.other]) ++pending_users[s];
    }
  }
  std::vector<ExitVector> exits(n);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const std::size_t s = *it;
    std::size_t lo = std::numeric_limits<std::size_t>::max();
    std::size_t hi = 0;
    for (const auto& a : out[s]) {
      if (censored[a.other]) {
        const auto& e = exits[a.other];
        lo = std::min(lo, e.lo);
        hi = std::max(hi, e.lo + e.w.size() - 1);
      } else {
        lo = std::min(lo, kept_index[a.other]);
        hi = std::max(hi, kept_index[a.other]);
      }
    }
    ExitVector& mine = exits[s];
    mine.lo = lo;
    mine.w.assign(hi - lo + 1, 0.0);
    for (const auto& a : out[s]) {
      const double p = a.rate / out_rate[s];
      if (!censored[a.other]) {
        mine.w[kept_index[a.other] - lo] += p;
        continue;
      }
      ExitVector& next = exits[a.other];
      double* dst = mine.w.data() + (next.lo - lo);
      for (std::size_t k = 0; k < next.w.size(); ++k) dst[k] += p * next.w[k];
      if (--pending_users[a.other] == 0) std::vector<double>().swap(next.w);
    }
    for (const auto& a : in[s]) {
      if (censored[a.other]) continue;
      double* row = &rates(kept_index[a.other], lo);
      for (std::size_t k = 0; k < mine.w.size(); ++k) row[k] += a.rate * mine.w[k];
    }
    if (pending_users[s] == 0) std::vector<double>().swap(mine.w);
  }

  const std::size_t bw = rates.lower_bandwidth();
  const std::vector<double> kept_pi = gth_stationary(rates, bw, options.kernel);

  std::vector<double> pi(n, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    if (!censored[s]) pi[s] = kept_pi[kept_index[s]];
  }
  for (std::size_t s : order) {
    double inflow = 0.0;
    for (const auto& a : in[s]) inflow += pi[a.other] * a.rate;
    pi[s] = inflow / out_rate[s];
  }
  double total = 0.0;
  for (double p : pi) total += p;
  for (double& p : pi) p /= total;

  const double residual = stationary_residual(g, pi);
  if (!(residual <= options.residual_tol)) throw SolveError(residual, options.residual_tol);

  JointDistribution d;
  d.b = g.b;
  d.j_max = g.j_max;
  d.probs = std::move(pi);
  d.tail_mass_estimate = boundary_mass(d);
  return d;
}

int initial_truncation_level(int b) { return std::max(4 * b, 64); }

namespace {

bool moments_settled(const Moments& a, const Moments& b, double rel_tol) {
  auto close = [rel_tol](double x, double y) {
    const double diff = std::abs(x - y);
    return diff == 0.0 || diff < rel_tol * std::max(std::abs(x), std::abs(y));
  };
  return close(a.block, b.block) && close(a.pool, b.pool);
}

}  // namespace

TruncationResult auto_truncate(const Params& p, const TruncationOptions& options) {
  const StabilityReport report = stability_check(p);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (!report.stable) {
    throw TruncationError("parameters violate the stability condition", {nan, nan}, {nan, nan}, 0);
  }

  int level = initial_truncation_level(p.b);
  JointDistribution current = solve_stationary(build_generator(p, level), options.solve);
  Moments current_m = moments(current);
  Moments previous_m{nan, nan};
  int tried = 1;

  while (true) {
    const int next_level = 2 * level;
    if (next_level > options.max_j_max) {
      throw TruncationError("no converged level up to j_max=" + std::to_string(options.max_j_max),
                            previous_m, current_m, level);
    }
    JointDistribution next = solve_stationary(build_generator(p, next_level), options.solve);
    const Moments next_m = moments(next);
    ++tried;
    if (current.tail_mass_estimate <= options.tail_eps &&
        moments_settled(current_m, next_m, options.moment_rel_tol)) {
      TruncationResult result;
      result.j_max = level;
      result.distribution = std::move(current);
      result.moments = current_m;
      result.refined = next_m;
      result.levels_tried = tried;
      return result;
    }
    previous_m = current_m;
    current = std::move(next);
    current_m = next_m;
    level = next_level;
  }
}

}  // namespace bcq
