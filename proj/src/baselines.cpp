#include "bitpush/baselines.hpp"

#include <cmath>

namespace bitpush {

ValueRange::ValueRange(double l, double h) : low(l), high(h) {
  if (!(high > low)) {
    throw std::invalid_argument("range: high must exceed low");
  }
}

double laplace_report(double x, const ValueRange& range, double epsilon,
                      Rng& rng) {
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("laplace: epsilon must be > 0");
  }
  const double scale = range.width() / epsilon;
  const double u = uniform01(rng) - 0.5;
  const double noise = -scale * std::copysign(1.0, u) *
                       std::log1p(-2.0 * std::abs(u));
  return x + noise;
}

int randomized_rounding_report(double x, const ValueRange& range,
                               const RandomizedResponse* rr, Rng& rng) {
  const double f = range.to_unit(x);
  int bit = uniform01(rng) < f ? 1 : 0;
  if (rr != nullptr) bit = rr->perturb(bit, rng);
  return bit;
}

DitherReport dithering_report(double x, const ValueRange& range,
                              const RandomizedResponse* rr, Rng& rng) {
  DitherReport report;
  report.threshold = uniform01(rng);
  report.bit = range.to_unit(x) >= report.threshold ? 1 : 0;
  if (rr != nullptr) report.bit = rr->perturb(report.bit, rng);
  return report;
}

double dithering_estimate(const DitherReport& report, const ValueRange& range,
                          const RandomizedResponse* rr) {
  const double bit = rr != nullptr
                         ? rr->unbias(static_cast<double>(report.bit))
                         : static_cast<double>(report.bit);
  return range.from_unit(bit + report.threshold - 0.5);
}

double piecewise_bound(double epsilon) {
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("piecewise: epsilon must be > 0");
  }
  const double s = std::exp(epsilon / 2.0);
  return (s + 1.0) / (s - 1.0);
}

double piecewise_report(double x, const ValueRange& range, double epsilon,
                        Rng& rng) {
  const double s = std::exp(epsilon / 2.0);
  const double c = piecewise_bound(epsilon);
  const double t = 2.0 * range.to_unit(x) - 1.0;  // [-1, 1]
  const double left = 0.5 * (c + 1.0) * t - 0.5 * (c - 1.0);
  const double right = left + c - 1.0;

  if (uniform01(rng) < s / (s + 1.0)) {
    return left + (right - left) * uniform01(rng);
  }
  // Complement [-c, left) u (right, c]; the two pieces have total length c+1.
  const double left_len = left + c;
  double u = (c + 1.0) * uniform01(rng);
  return u < left_len ? -c + u : right + (u - left_len);
}

double piecewise_to_value(double t, const ValueRange& range) {
  return range.from_unit(0.5 * (t + 1.0));
}

}  // namespace bitpush
