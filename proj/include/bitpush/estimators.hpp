#pragma once

#include <span>

#include "bitpush/protocol.hpp"

namespace bitpush {

// Case 1 estimates E[(X - xhat)^2] after broadcasting a first-phase mean
// estimate; Case 2 estimates E[X^2] - xhat^2 from two parallel pushes.
enum class VarianceMethod { CenteredSquare, SquareMinusSquaredMean };

enum class SignedEncoding { AdditiveShift, BitSplit };

// Mean of signed values.  AdditiveShift requires every value >= -shift (a
// violation is a range error); BitSplit splits the magnitude bits by sign and
// needs no bound beyond the bit depth.  config.bits sizes one side.
double estimate_signed_mean(std::span<const double> population,
                            const ProtocolConfig& config,
                            SignedEncoding encoding, double shift, Rng& rng,
                            PushMethod method = PushMethod::Adaptive);

// Population variance via two mean estimations of derived values.  Squared
// values use a 2b-bit codec.  `mean_phase_fraction` splits the client budget
// between the two phases.  Without differential privacy, Case 1 subtracts the
// phase-one estimator variance (the estimate of E[(X - xhat)^2] exceeds
// sigma^2 by exactly that much); under DP the correction is unavailable and
// the small upward bias is left in.
double estimate_variance(std::span<const double> population,
                         const ProtocolConfig& config, VarianceMethod method,
                         Rng& rng, PushMethod push = PushMethod::Adaptive,
                         double mean_phase_fraction = 0.5);

// exp(pushed mean of ln x).  Logs keep `log_fractional_bits` bits below the
// point and are shifted non-negative before encoding.
double estimate_geometric_mean(std::span<const double> population,
                               const ProtocolConfig& config, Rng& rng,
                               PushMethod method = PushMethod::Adaptive,
                               int log_fractional_bits = 8);

// Codec used internally for logarithms; exposed for the exact-means tests.
FixedPointCodec log_codec(int log_fractional_bits = 8);

}  // namespace bitpush
