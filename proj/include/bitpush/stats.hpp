#pragma once

#include "bitpush/types.hpp"

namespace bitpush {

// Per-bit aggregates from one round of reports.  `sums` hold unbiased report
// values, so under randomized response a mean may leave [0, 1].  `scores` are
// the variance scores beta_j = w2_j * m_j (1 - m_j) with means clamped to
// [0, 1] before scoring.
struct BitStatistics {
  ArrayXd counts;
  ArrayXd sums;
  ArrayXd means;
  ArrayXd scores;

  Index bits() const { return counts.size(); }
};

// Builds means (0 where a bit has no reports) and scores from raw tallies.
BitStatistics make_bit_statistics(ArrayXd counts, ArrayXd sums,
                                  const ArrayXd& squared_weights);

// Associative, commutative pooling of two rounds of tallies.
BitStatistics merge_bit_statistics(const BitStatistics& a,
                                   const BitStatistics& b,
                                   const ArrayXd& squared_weights);

}  // namespace bitpush
