#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "bitpush/codec.hpp"
#include "bitpush/privacy.hpp"
#include "bitpush/sampling.hpp"
#include "bitpush/stats.hpp"
#include "bitpush/types.hpp"

namespace bitpush {

struct ProtocolConfig {
  int bits = 10;
  std::int64_t clients = 10000;
  // Round-1 weight exponent: p1 proportional to 2^(gamma * j).
  double gamma = 0.5;
  // Fraction of clients queried in round 1.
  double delta = 1.0 / 3.0;
  // Score exponent for the final (or only) weighted round.  Unset means the
  // conventional default: 1.0 for the two-round protocol, 0.5 single-round.
  std::optional<double> alpha;
  std::optional<double> epsilon;
  bool caching = true;
  // Squash threshold multiplier, in units of the per-bit noise scale tau_j.
  // Unset means 3 when epsilon is set (high enough that none of the noise
  // bits survive their own threshold), else off.
  std::optional<double> squash_k;
  int b_send = 1;

  double round2_alpha() const { return alpha.value_or(1.0); }
  double weighted_alpha() const { return alpha.value_or(0.5); }
  double effective_squash_k() const {
    return squash_k.value_or(epsilon.has_value() ? 3.0 : 0.0);
  }
  void validate() const;
};

struct ClientReport {
  Index bit_index = 0;
  std::uint8_t reported_bit = 0;
  bool rr_applied = false;
};

// One client's disclosure: the requested bit of its encoded value, optionally
// pushed through randomized response.  Charges `meter` when provided.
ClientReport client_report(double value, Index assigned,
                           const FixedPointCodec& codec,
                           const RandomizedResponse* rr, Rng& rng,
                           PrivacyMeter* meter = nullptr,
                           std::int64_t client_id = 0);

struct RoundResult {
  double estimate = 0.0;
  BitStatistics stats;
};

// Server side of one round: unbias RR reports, average per bit (bits with no
// reports contribute mean 0), decode.
RoundResult aggregate_round(std::span<const ClientReport> reports,
                            const FixedPointCodec& codec,
                            const RandomizedResponse* rr);

struct BasicResult {
  double estimate = 0.0;
  BitStatistics stats;
  std::int64_t clipped = 0;
};

// Single-round protocol under central (quasi-Monte Carlo) randomness.  Values
// outside the codec range are clipped and counted, not rejected; sweeps
// deliberately under-size the bit depth.
BasicResult run_basic(std::span<const double> population,
                      const FixedPointCodec& codec,
                      const ProtocolConfig& config,
                      const SamplingDistribution& dist, Rng& rng,
                      PrivacyMeter* meter = nullptr);

struct AdaptiveResult {
  double estimate = 0.0;
  BitStatistics round1;
  BitStatistics round2;
  BitStatistics combined;
  bool fell_back = false;  // degenerate round 2, estimate comes from round 1
  std::int64_t clipped = 0;
};

// Two-round protocol: round 1 samples with p1 ~ 2^(gamma j) over delta*n
// clients, round 2 reweights by the estimated scores over the rest.  With
// caching the rounds are pooled; squashing (when epsilon is set) is applied
// to round-1 means before weighting and to the decoded means at the end.
AdaptiveResult run_adaptive(std::span<const double> population,
                            const FixedPointCodec& codec,
                            const ProtocolConfig& config, Rng& rng,
                            PrivacyMeter* meter = nullptr);

// Lemma-style closed form (1/n) sum_j 4^j m_j (1 - m_j) / p_j.  Bits with
// zero score contribute nothing even when p_j = 0; a positive score with
// p_j = 0 is an infinite-variance configuration and throws.
double theoretical_variance(const ArrayXd& bit_means,
                            const SamplingDistribution& dist, std::int64_t n);
// Same with explicit squared bit weights (fractional or split codecs).
double theoretical_variance(const ArrayXd& bit_means,
                            const ArrayXd& squared_weights,
                            const SamplingDistribution& dist, std::int64_t n);

// Which bit-pushing flavor drives a mean estimate.
enum class PushMethod { Uniform, Geometric, Adaptive };

// Uniform dispatch used by the estimators and the benchmark harness.
BasicResult push_mean(std::span<const double> population,
                      const FixedPointCodec& codec,
                      const ProtocolConfig& config, PushMethod method,
                      Rng& rng, PrivacyMeter* meter = nullptr);

}  // namespace bitpush
