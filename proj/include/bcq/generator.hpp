#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "bcq/params.hpp"

namespace bcq {

struct Transition {
  std::size_t from = 0;
  std::size_t to = 0;
  double rate = 0.0;
};

/// Level-truncated infinitesimal generator over states (i, j), 0 <= i <= b,
/// 0 <= j <= j_max, enumerated as index = j*(b+1) + i.
///
/// `entries` holds the off-diagonal rates; `diagonal` holds the negated row
/// sums so every row of Q sums to zero.
struct SparseGenerator {
  int b = 0;
  int j_max = 0;
  std::size_t n_states = 0;
  std::vector<Transition> entries;
  std::vector<double> diagonal;
  Params params;

  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * (static_cast<std::size_t>(b) + 1) + static_cast<std::size_t>(i);
  }
  State state(std::size_t index) const {
    const auto w = static_cast<std::size_t>(b) + 1;
    return {static_cast<int>(index % w), static_cast<int>(index / w)};
  }
};

/// Transition rules:
///  arrival      (i, j) -> (i, j+1)              rate lambda, j < j_max
///  generation   (0, j) -> (m, j-m), m=min(j,b)  rate mu1,    j >= 1
///  building     (i, j) -> (0, j)                rate mu2,    i >= 1
///
/// Unstable parameters throw StabilityError unless `exploratory` is set.
SparseGenerator build_generator(const Params& p, int j_max, bool exploratory = false);

/// Assembles a generator from raw off-diagonal entries (for hand-built chains).
/// Validates indices and rates and fills in the diagonal.
SparseGenerator make_generator(int b, int j_max, std::vector<Transition> entries);

/// Largest |row sum| of Q.
double max_row_sum_error(const SparseGenerator& g);

/// Debug dump, one "i:j i:j rate" triplet per line, diagonal included.
void write_triplets(std::ostream& os, const SparseGenerator& g);

}  // namespace bcq
