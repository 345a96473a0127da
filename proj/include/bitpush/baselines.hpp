#pragma once

#include "bitpush/privacy.hpp"
#include "bitpush/types.hpp"

namespace bitpush {

// Input bounds assumed by the scaling-based mechanisms; values are mapped to
// [0, 1] via (x - low) / (high - low).
struct ValueRange {
  double low = 0.0;
  double high = 1.0;

  ValueRange() = default;
  ValueRange(double l, double h);

  double width() const { return high - low; }
  double to_unit(double x) const { return (x - low) / width(); }
  double from_unit(double u) const { return low + width() * u; }
};

// x plus Laplace noise with scale (high - low) / epsilon.  Reports are not
// clipped afterwards; clipping would bias the averaged estimate.
double laplace_report(double x, const ValueRange& range, double epsilon,
                      Rng& rng);

// Randomized rounding: Bernoulli(f(x)), then randomized response when given.
int randomized_rounding_report(double x, const ValueRange& range,
                               const RandomizedResponse* rr, Rng& rng);

// Subtractive dithering with a shared threshold h ~ U[0, 1]; the server knows
// h, so only the input-dependent bit is RR-protected.
struct DitherReport {
  int bit = 0;
  double threshold = 0.0;
};

DitherReport dithering_report(double x, const ValueRange& range,
                              const RandomizedResponse* rr, Rng& rng);

// Per-report server estimate b + h - 0.5 (bit unbiased first under RR),
// mapped back to the input range.
double dithering_estimate(const DitherReport& report, const ValueRange& range,
                          const RandomizedResponse* rr);

// Output bound of the piecewise mechanism: C = (e^(eps/2) + 1)/(e^(eps/2) - 1).
double piecewise_bound(double epsilon);

// Piecewise mechanism on the [-1, 1] scale: with probability
// e^(eps/2)/(e^(eps/2) + 1) the output is uniform on the length-(C-1) band
// centred on the scaled input, otherwise uniform on the complement in
// [-C, C].  The report is unbiased for the scaled input.
double piecewise_report(double x, const ValueRange& range, double epsilon,
                        Rng& rng);

// Maps a [-1, 1]-scale report back into the input range.
double piecewise_to_value(double t, const ValueRange& range);

}  // namespace bitpush
