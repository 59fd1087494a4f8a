#include "bcq/distribution.hpp"

namespace bcq {

JointDistribution JointDistribution::zeros(int b, int j_max) {
  JointDistribution d;
  d.b = b;
  d.j_max = j_max;
  d.probs.assign(static_cast<std::size_t>(b + 1) * static_cast<std::size_t>(j_max + 1), 0.0);
  return d;
}

Marginals marginals(const JointDistribution& d) {
  Marginals m;
  m.block.assign(d.width(), 0.0);
  m.pool.assign(static_cast<std::size_t>(d.j_max) + 1, 0.0);
  for (int j = 0; j <= d.j_max; ++j) {
    for (int i = 0; i <= d.b; ++i) {
      const double p = d.at(i, j);
      m.block[i] += p;
      m.pool[j] += p;
    }
  }
  return m;
}

Moments moments(const JointDistribution& d) {
  const Marginals m = marginals(d);
  Moments out;
  for (std::size_t i = 0; i < m.block.size(); ++i) out.block += static_cast<double>(i) * m.block[i];
  for (std::size_t j = 0; j < m.pool.size(); ++j) out.pool += static_cast<double>(j) * m.pool[j];
  return out;
}

double boundary_mass(const JointDistribution& d) {
  double s = 0.0;
  for (int i = 0; i <= d.b; ++i) s += d.at(i, d.j_max);
  return s;
}

}  // namespace bcq
