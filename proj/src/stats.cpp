#include "bitpush/stats.hpp"

namespace bitpush {

BitStatistics make_bit_statistics(ArrayXd counts, ArrayXd sums,
                                  const ArrayXd& squared_weights) {
  if (counts.size() != sums.size() || counts.size() != squared_weights.size()) {
    throw std::invalid_argument("stats: tally length mismatch");
  }
  BitStatistics stats;
  stats.means = (counts > 0.0).select(sums / counts.max(1.0), ArrayXd::Zero(counts.size()));
  const ArrayXd clamped = stats.means.cwiseMax(0.0).cwiseMin(1.0);
  stats.scores = squared_weights * clamped * (1.0 - clamped);
  stats.counts = std::move(counts);
  stats.sums = std::move(sums);
  return stats;
}

BitStatistics merge_bit_statistics(const BitStatistics& a,
                                   const BitStatistics& b,
                                   const ArrayXd& squared_weights) {
  if (a.bits() != b.bits()) {
    throw std::invalid_argument("stats: merging mismatched rounds");
  }
  return make_bit_statistics(a.counts + b.counts, a.sums + b.sums,
                             squared_weights);
}

}  // namespace bitpush
