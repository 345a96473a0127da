#pragma once

#include <cstdint>
#include <vector>

#include "bitpush/types.hpp"

namespace bitpush {

// L1-normalized per-bit sampling probabilities.  Entries may be zero only for
// bits with no estimated signal (zero score or squashed).
struct SamplingDistribution {
  ArrayXd p;

  SamplingDistribution() = default;
  explicit SamplingDistribution(ArrayXd probabilities);

  Index bits() const { return p.size(); }
};

// client i -> logical bit index to report
using BitAssignment = std::vector<Index>;

// p_j = 1/b.
SamplingDistribution uniform_weights(Index bits);

// p_j proportional to 2^(alpha * j); alpha = 0 reduces to uniform.
SamplingDistribution geometric_weights(Index bits, double alpha);

// p_j proportional to |w_j|^alpha for explicit bit magnitudes; the
// generalization of the index form to split and fractional codecs, where a
// logical index does not equal a significance.
SamplingDistribution geometric_weights(const ArrayXd& bit_magnitudes,
                                       double alpha);

// p_j proportional to (w2_j * m_j (1 - m_j))^alpha with means clamped to
// [0, 1] first; zero-score bits get p_j = 0 and are never sampled.  Throws
// degenerate_distribution_error when every score vanishes.
SamplingDistribution optimal_weights(const ArrayXd& bit_means,
                                     const ArrayXd& squared_weights,
                                     double alpha);
// Convenience overload with integer-bit weights w2_j = 4^j.
SamplingDistribution optimal_weights(const ArrayXd& bit_means, double alpha);

// Largest-remainder allocation of p_j * n; deviates from the target by
// strictly less than one client per bit and sums to n exactly.
std::vector<std::int64_t> quasi_monte_carlo_counts(std::int64_t n,
                                                   const ArrayXd& p);

// Exact-count (quasi-Monte Carlo) assignment: counts are deterministic given
// the distribution, randomness only permutes which client gets which bit.
BitAssignment assign_central(std::int64_t n, const SamplingDistribution& dist,
                             Rng& rng);

// One inverse-CDF draw, the local-randomness alternative.
Index sample_local(const SamplingDistribution& dist, Rng& rng);

}  // namespace bitpush
