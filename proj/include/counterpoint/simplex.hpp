#pragma once

#include <cstddef>
#include <vector>

#include "counterpoint/rational.hpp"

namespace counterpoint::lp {

/// Equality-form feasibility problem: find x >= 0 with A x = b.
struct Problem {
  std::size_t cols = 0;
  std::vector<RationalVector> rows;  // each of size `cols`
  RationalVector rhs;                // one entry per row

  void add_row(RationalVector row, Rational value);
};

struct Solution {
  bool feasible = false;
  RationalVector x;  // meaningful only when feasible
  std::size_t pivots = 0;
};

/// Exact phase-one simplex. Rows are scaled to integers and pivoted with
/// fraction-free (integer-preserving) updates; Bland's rule selects entering
/// and leaving variables, so the method cannot cycle.
Solution solve(const Problem& problem);

}  // namespace counterpoint::lp
