#include "bitpush/privacy.hpp"

#include <cmath>
#include <numeric>

namespace bitpush {

RandomizedResponse::RandomizedResponse(double epsilon) : epsilon_(epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw std::invalid_argument("randomized response: epsilon must be > 0");
  }
  const double e = std::exp(epsilon);
  truth_probability_ = e / (1.0 + e);
  report_variance_ = e / ((e - 1.0) * (e - 1.0));
}

int RandomizedResponse::perturb(int bit, Rng& rng) const {
  return uniform01(rng) < truth_probability_ ? bit : 1 - bit;
}

double RandomizedResponse::unbias(double reported) const {
  const double p = truth_probability_;
  return (reported - (1.0 - p)) / (2.0 * p - 1.0);
}

PrivacyMeter::PrivacyMeter(std::int64_t clients)
    : charges_(static_cast<std::size_t>(clients), 0.0) {
  if (clients < 0) throw std::invalid_argument("meter: negative client count");
}

double private_bit_cost(const RandomizedResponse* rr) {
  return rr == nullptr ? 1.0 : 2.0 * rr->truth_probability() - 1.0;
}

void PrivacyMeter::charge(std::int64_t client, const RandomizedResponse* rr) {
  charges_.at(static_cast<std::size_t>(client)) += private_bit_cost(rr);
}

double PrivacyMeter::total() const {
  return std::accumulate(charges_.begin(), charges_.end(), 0.0);
}

double PrivacyMeter::per_client_average() const {
  return charges_.empty() ? 0.0 : total() / static_cast<double>(charges_.size());
}

BitStatistics squash_bits(const BitStatistics& stats,
                          const RandomizedResponse& rr, double k,
                          const ArrayXd& squared_weights) {
  if (k <= 0.0) return stats;
  ArrayXd means = stats.means;
  for (Index j = 0; j < stats.bits(); ++j) {
    if (stats.counts[j] <= 0.0) {
      means[j] = 0.0;
      continue;
    }
    const double tau = std::sqrt(rr.report_variance() / stats.counts[j]);
    if (std::abs(means[j]) < k * tau) means[j] = 0.0;
  }
  BitStatistics out = stats;
  out.means = means;
  const ArrayXd clamped = means.cwiseMax(0.0).cwiseMin(1.0);
  out.scores = squared_weights * clamped * (1.0 - clamped);
  return out;
}

}  // namespace bitpush
