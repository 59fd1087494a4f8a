#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace bcq {

/// Probability table p(i, j) over 0 <= i <= b, 0 <= j <= j_max.
/// Storage is row-major by j then i: index = j*(b+1) + i.
struct JointDistribution {
  int b = 0;
  int j_max = 0;
  std::vector<double> probs;
  // Mass on the truncation boundary row j == j_max.
  double tail_mass_estimate = 0.0;

  std::size_t width() const { return static_cast<std::size_t>(b) + 1; }
  double at(int i, int j) const { return probs[static_cast<std::size_t>(j) * width() + i]; }
  double& at(int i, int j) { return probs[static_cast<std::size_t>(j) * width() + i]; }

  /// Zero table of the right shape.
  static JointDistribution zeros(int b, int j_max);
};

/// Mean transactions in the block (I) and in the pool (J).
struct Moments {
  double block = 0.0;
  double pool = 0.0;
};

struct Marginals {
  std::vector<double> block;  // over i = 0..b
  std::vector<double> pool;   // over j = 0..j_max
};

Moments moments(const JointDistribution& d);
Marginals marginals(const JointDistribution& d);

/// Sum of the boundary row j == j_max.
double boundary_mass(const JointDistribution& d);

}  // namespace bcq
