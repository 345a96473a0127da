#pragma once

#include <cstdint>
#include <vector>

#include "bitpush/stats.hpp"
#include "bitpush/types.hpp"

namespace bitpush {

// Binary randomized response: report the true bit with probability
// p = e^eps / (1 + e^eps), else its complement.  Satisfies eps-LDP.
class RandomizedResponse {
 public:
  explicit RandomizedResponse(double epsilon);

  double epsilon() const { return epsilon_; }
  double truth_probability() const { return truth_probability_; }
  // Variance of one unbiased report of a deterministic bit:
  // e^eps / (e^eps - 1)^2.
  double report_variance() const { return report_variance_; }

  int perturb(int bit, Rng& rng) const;
  // Affine unbiasing map r -> (r - (1 - p)) / (2p - 1).
  double unbias(double reported) const;

 private:
  double epsilon_;
  double truth_probability_;
  double report_variance_;
};

// Per-client tally of disclosed private bits.  A truthful bit costs 1.0; an
// RR-protected bit costs 2p - 1 (the probability the report is forced to be
// truthful rather than uniform noise).
class PrivacyMeter {
 public:
  explicit PrivacyMeter(std::int64_t clients);

  void charge(std::int64_t client, const RandomizedResponse* rr);

  double total() const;
  double per_client_average() const;
  const std::vector<double>& per_client() const { return charges_; }

 private:
  std::vector<double> charges_;
};

// Charge for one transmitted bit: 1.0 truthful, 2p - 1 under RR.
double private_bit_cost(const RandomizedResponse* rr);

// Zeroes bit means indistinguishable from DP noise.  The noise scale of bit j
// is tau_j = sqrt(e^eps / ((e^eps - 1)^2 c_j)); a bit is squashed when its
// clamped mean falls below k * tau_j.  k <= 0 disables squashing.
BitStatistics squash_bits(const BitStatistics& stats,
                          const RandomizedResponse& rr, double k,
                          const ArrayXd& squared_weights);

}  // namespace bitpush
