#pragma once

#include "bcq/distribution.hpp"

namespace bcq {

/// Which coordinate, if any, collapses to a point mass.
enum class Degeneracy {
  none,
  block_empty,  // I == 0: all mass on i = 0
  block_full,   // I == b: all mass on i = b
};

struct Residuals {
  double norm = 0.0;   // |x * S_b(y) / (1 - z) - 1|
  double block = 0.0;  // |m(y) - I|
  double pool = 0.0;   // |z / (1 - z) - J|
};

/// Product-form maximum-entropy table p(i, j) = x * y^i * z^j over
/// 0 <= i <= b, j >= 0, matching a given block mean I and pool mean J.
///
/// beta0..beta2 are the Lagrange multipliers of the normalisation and the
/// two mean constraints: x = exp(-(1 + beta0)), y = exp(-beta1), z = exp(-beta2).
struct MaxEntSolution {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double beta0 = 0.0;
  double beta1 = 0.0;
  double beta2 = 0.0;
  double block_mean = 0.0;  // input I
  double pool_mean = 0.0;   // input J
  int b = 0;
  Residuals residuals;
  int iterations = 0;
  Degeneracy degeneracy = Degeneracy::none;

  /// ln p(i, j); -inf outside the support.
  double log_prob(int i, int j) const;
  double prob(int i, int j) const;
  /// Block marginal y^i / S_b(y), evaluated without overflow.
  double block_pmf(int i) const;
};

/// m(y) = sum_i i y^i / sum_i y^i over i = 0..b; exactly b/2 at y == 1.
double mean_block_given_y(double y, int b);

/// S_b(y) = sum_{i=0}^{b} y^i.
double geometric_sum(double y, int b);

struct RootResult {
  double y = 1.0;
  int iterations = 0;
};

/// Unique y > 0 with |m(y) - I| <= tol * max(1, I), via bracketing by doubling
/// from y = 1, bisection, then Newton in ln y.
/// Throws Error{DegenerateMean} unless 0 < I < b.
RootResult solve_y_detailed(double block_mean, int b, double tol = 1e-12);
inline double solve_y(double block_mean, int b, double tol = 1e-12) {
  return solve_y_detailed(block_mean, b, tol).y;
}

/// z = J / (1 + J). Throws Error{NegativeMean} for J < 0.
double solve_z(double pool_mean);

/// x = (1 - y)(1 - z) / (1 - y^{b+1}), with the y == 1 limit (1 - z)/(b + 1).
double solve_x(double y, double z, int b);

/// Composes solve_y, solve_z and solve_x. I == 0 or I == b yields a point
/// mass in the block coordinate, flagged through `degeneracy`.
MaxEntSolution maxent_distribution(double block_mean, double pool_mean, int b, double tol = 1e-12);

/// Closed-form constraint residuals (no truncation).
Residuals constraint_residuals(const MaxEntSolution& s);

/// H = -ln x - I ln y - J ln z, with I and J the means implied by (y, z).
double entropy_closed_form(const MaxEntSolution& s);

/// -sum p ln p with 0 ln 0 = 0.
double entropy_direct(const JointDistribution& d);

/// The product form tabulated on 0 <= j <= j_max (not renormalised).
JointDistribution tabulate(const MaxEntSolution& s, int j_max);

struct KlResult {
  double kl = 0.0;                // D(exact || approx) over the shared grid
  double exact_tail_mass = 0.0;   // exact mass on the boundary row
  double approx_tail_mass = 0.0;  // approx mass beyond the grid, z^{j_max+1}
};

/// Throws Error{SupportMismatch} if exact has mass where the approximation is zero.
KlResult kl_divergence(const JointDistribution& exact, const MaxEntSolution& s);

/// (b - I) y^{b+1} - sum_{n=1}^{b} y^n + I, divided by (b - I): the polynomial
/// form of the block-mean equation. Evaluated in extended precision.
double block_polynomial_residual(double y, double block_mean, int b);

}  // namespace bcq
