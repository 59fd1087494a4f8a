#include "bcq/maxent.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "bcq/error.hpp"

namespace bcq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct BlockStats {
  double mean = 0.0;
  double var = 0.0;
};

// Mean and variance of i under weights w^i, i = 0..b, for 0 <= w <= 1.
BlockStats truncated_geometric_stats(double w, int b) {
  if (w == 1.0) {
    const double bb = b;
    return {bb / 2.0, bb * (bb + 2.0) / 12.0};
  }
  double s0 = 0.0, s1 = 0.0, p = 1.0;
  for (int i = 0; i <= b; ++i) {
    s0 += p;
    s1 += i * p;
    p *= w;
  }
  const double mean = s1 / s0;
  double s2 = 0.0;
  p = 1.0;
  for (int i = 0; i <= b; ++i) {
    s2 += (i - mean) * (i - mean) * p;
    p *= w;
  }
  return {mean, s2 / s0};
}

// y > 1 is evaluated through the reflection i -> b - i with weight 1/y.
BlockStats block_stats(double y, int b) {
  if (y <= 1.0) return truncated_geometric_stats(y, b);
  const BlockStats r = truncated_geometric_stats(1.0 / y, b);
  return {b - r.mean, r.var};
}

// ln of the normaliser seen by the block pmf: ln S_b(y) for y <= 1, ln S_b(1/y) for y > 1.
double log_reduced_sum(double y, int b) {
  return std::log(geometric_sum(y <= 1.0 ? y : 1.0 / y, b));
}

double pool_entropy(double z) {
  if (z == 0.0) return 0.0;
  return -std::log1p(-z) - (z / (1.0 - z)) * std::log(z);
}

}  // namespace

double geometric_sum(double y, int b) {
  if (y == 1.0) return b + 1.0;
  double s = 1.0;
  for (int i = 0; i < b; ++i) s = 1.0 + y * s;  // Horner
  return s;
}

double mean_block_given_y(double y, int b) { return block_stats(y, b).mean; }

RootResult solve_y_detailed(double block_mean, int b, double tol) {
  const double target = block_mean;
  if (!(target > 0.0 && target < b)) {
    throw Error(ErrorCode::DegenerateMean, "block mean must lie strictly inside (0, b)");
  }
  const double tol_abs = tol * std::max(1.0, target);
  const double half = b / 2.0;
  if (std::abs(target - half) <= tol_abs) return {1.0, 0};

  auto f = [&](double t) { return mean_block_given_y(std::exp(t), b) - target; };

  RootResult out;
  // Bracket in t = ln y by doubling/halving y from 1.
  const double step = std::log(2.0);
  double t_lo = 0.0, t_hi = 0.0;
  const bool below = target < half;
  for (int k = 0;; ++k) {
    if (k > 1100) throw Error(ErrorCode::DegenerateMean, "block mean too close to 0 or b to bracket");
    ++out.iterations;
    if (below) {
      t_hi = t_lo;
      t_lo -= step;
      if (f(t_lo) < 0.0) break;
    } else {
      t_lo = t_hi;
      t_hi += step;
      if (f(t_hi) > 0.0) break;
    }
  }

  while (t_hi - t_lo > 1e-6) {
    ++out.iterations;
    const double mid = 0.5 * (t_lo + t_hi);
    (f(mid) < 0.0 ? t_lo : t_hi) = mid;
  }

  // Newton in t: dm/dt = Var(i). Once within tolerance, keep polishing while
  // the residual still strictly shrinks; the polynomial form amplifies it by ~y^b.
  double t = 0.5 * (t_lo + t_hi);
  double best_t = t;
  double best_r = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 100; ++k) {
    ++out.iterations;
    const BlockStats st = block_stats(std::exp(t), b);
    const double r = st.mean - target;
    if (std::abs(r) >= best_r && best_r <= tol_abs) break;
    if (std::abs(r) < best_r) {
      best_r = std::abs(r);
      best_t = t;
    }
    if (r == 0.0) break;
    (r < 0.0 ? t_lo : t_hi) = t;
    double next = st.var > 0.0 ? t - r / st.var : 0.5 * (t_lo + t_hi);
    if (!(next > t_lo && next < t_hi)) next = 0.5 * (t_lo + t_hi);
    if (next == t) break;
    t = next;
  }
  out.y = std::exp(best_t);
  return out;
}

double solve_z(double pool_mean) {
  if (!(pool_mean >= 0.0 && std::isfinite(pool_mean))) {
    throw Error(ErrorCode::NegativeMean, "pool mean must be finite and >= 0");
  }
  return pool_mean / (1.0 + pool_mean);
}

double solve_x(double y, double z, int b) {
  if (y == 1.0) return (1.0 - z) / (b + 1.0);
  return (1.0 - z) / geometric_sum(y, b);
}

double MaxEntSolution::log_prob(int i, int j) const {
  if (i < 0 || i > b || j < 0) return -kInf;
  double pool_part;
  if (z == 0.0) {
    pool_part = j == 0 ? 0.0 : -kInf;
  } else {
    pool_part = std::log1p(-z) + j * std::log(z);
  }
  double block_part;
  switch (degeneracy) {
    case Degeneracy::block_empty: block_part = i == 0 ? 0.0 : -kInf; break;
    case Degeneracy::block_full: block_part = i == b ? 0.0 : -kInf; break;
    default:
      block_part = (y <= 1.0 ? i : i - b) * std::log(y) - log_reduced_sum(y, b);
  }
  return block_part + pool_part;
}

double MaxEntSolution::prob(int i, int j) const { return std::exp(log_prob(i, j)); }

double MaxEntSolution::block_pmf(int i) const {
  const double lp = log_prob(i, 0) - (z == 0.0 ? 0.0 : std::log1p(-z));
  return std::exp(lp);
}

Residuals constraint_residuals(const MaxEntSolution& s) {
  Residuals r;
  double mean = 0.0;
  switch (s.degeneracy) {
    case Degeneracy::block_empty: mean = 0.0; break;
    case Degeneracy::block_full: mean = s.b; break;
    default:
      r.norm = std::abs(s.x * geometric_sum(s.y, s.b) / (1.0 - s.z) - 1.0);
      mean = mean_block_given_y(s.y, s.b);
  }
  r.block = std::abs(mean - s.block_mean);
  r.pool = std::abs(s.z / (1.0 - s.z) - s.pool_mean);
  return r;
}

MaxEntSolution maxent_distribution(double block_mean, double pool_mean, int b, double tol) {
  if (b < 1) throw Error(ErrorCode::InvalidBlockSize, "b must be >= 1");
  if (!(block_mean >= 0.0 && block_mean <= b)) {
    throw Error(ErrorCode::DegenerateMean, "block mean must lie in [0, b]");
  }
  MaxEntSolution s;
  s.b = b;
  s.block_mean = block_mean;
  s.pool_mean = pool_mean;
  s.z = solve_z(pool_mean);

  if (block_mean == 0.0) {
    s.degeneracy = Degeneracy::block_empty;
    s.y = 0.0;
    s.x = 1.0 - s.z;
  } else if (block_mean == b) {
    s.degeneracy = Degeneracy::block_full;
    s.y = kInf;
    s.x = 0.0;
  } else {
    const RootResult root = solve_y_detailed(block_mean, b, tol);
    s.y = root.y;
    s.iterations = root.iterations;
    s.x = solve_x(s.y, s.z, b);
  }
  s.beta0 = -1.0 - std::log(s.x);
  s.beta1 = -std::log(s.y);
  s.beta2 = -std::log(s.z);
  s.residuals = constraint_residuals(s);
  return s;
}

double entropy_closed_form(const MaxEntSolution& s) {
  double block = 0.0;
  if (s.degeneracy == Degeneracy::none) {
    const double m = mean_block_given_y(s.y, s.b);
    const double ln_y = std::log(s.y);
    block = s.y <= 1.0 ? log_reduced_sum(s.y, s.b) - m * ln_y
                       : log_reduced_sum(s.y, s.b) + (s.b - m) * ln_y;
  }
  return block + pool_entropy(s.z);
}

double entropy_direct(const JointDistribution& d) {
  double h = 0.0;
  for (double p : d.probs) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

JointDistribution tabulate(const MaxEntSolution& s, int j_max) {
  JointDistribution d = JointDistribution::zeros(s.b, j_max);
  for (int j = 0; j <= j_max; ++j) {
    for (int i = 0; i <= s.b; ++i) d.at(i, j) = s.prob(i, j);
  }
  d.tail_mass_estimate = boundary_mass(d);
  return d;
}

KlResult kl_divergence(const JointDistribution& exact, const MaxEntSolution& s) {
  if (exact.b != s.b) throw Error(ErrorCode::InvalidConfig, "block capacities differ");
  KlResult r;
  for (int j = 0; j <= exact.j_max; ++j) {
    for (int i = 0; i <= exact.b; ++i) {
      const double p = exact.at(i, j);
      if (!(p > 0.0)) continue;
      const double lq = s.log_prob(i, j);
      if (lq == -kInf) {
        throw Error(ErrorCode::SupportMismatch,
                    "exact mass at (" + std::to_string(i) + "," + std::to_string(j) + ") outside approximation support");
      }
      r.kl += p * (std::log(p) - lq);
    }
  }
  r.exact_tail_mass = boundary_mass(exact);
  r.approx_tail_mass = s.z == 0.0 ? 0.0 : std::pow(s.z, exact.j_max + 1.0);
  return r;
}

double block_polynomial_residual(double y, double block_mean, int b) {
  using ld = long double;
  const ld yl = y;
  ld partial = 0.0L;  // sum_{n=1}^{b} y^n by Horner
  for (int n = 0; n < b; ++n) partial = yl * (1.0L + partial);
  const ld lead = std::pow(yl, static_cast<ld>(b + 1));
  const ld denom = static_cast<ld>(b) - static_cast<ld>(block_mean);
  return static_cast<double>(lead - partial / denom + static_cast<ld>(block_mean) / denom);
}

}  // namespace bcq
