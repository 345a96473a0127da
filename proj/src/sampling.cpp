#include "bitpush/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bitpush {

namespace {

constexpr double kNormTolerance = 1e-12;

ArrayXd normalized(ArrayXd raw) {
  const double total = raw.sum();
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw degenerate_distribution_error(
        "sampling: weights have no positive mass");
  }
  return raw / total;
}

}  // namespace

SamplingDistribution::SamplingDistribution(ArrayXd probabilities)
    : p(std::move(probabilities)) {
  if (p.size() < 1) {
    throw std::invalid_argument("sampling: empty distribution");
  }
  if ((p < 0.0).any()) {
    throw std::invalid_argument("sampling: negative probability");
  }
  if (std::abs(p.sum() - 1.0) > kNormTolerance) {
    throw std::invalid_argument("sampling: probabilities must sum to 1");
  }
}

SamplingDistribution uniform_weights(Index bits) {
  if (bits < 1) throw std::invalid_argument("sampling: bits must be >= 1");
  return SamplingDistribution(ArrayXd::Constant(bits, 1.0 / static_cast<double>(bits)));
}

SamplingDistribution geometric_weights(Index bits, double alpha) {
  if (bits < 1) throw std::invalid_argument("sampling: bits must be >= 1");
  if (alpha < 0.0) throw std::invalid_argument("sampling: alpha must be >= 0");
  ArrayXd raw(bits);
  for (Index j = 0; j < bits; ++j) {
    raw[j] = std::exp2(alpha * static_cast<double>(j));
  }
  return SamplingDistribution(normalized(std::move(raw)));
}

SamplingDistribution geometric_weights(const ArrayXd& bit_magnitudes,
                                       double alpha) {
  if (bit_magnitudes.size() < 1) {
    throw std::invalid_argument("sampling: empty magnitude vector");
  }
  if (alpha < 0.0) throw std::invalid_argument("sampling: alpha must be >= 0");
  if ((bit_magnitudes <= 0.0).any()) {
    throw std::invalid_argument("sampling: magnitudes must be positive");
  }
  return SamplingDistribution(normalized(bit_magnitudes.pow(alpha)));
}

SamplingDistribution optimal_weights(const ArrayXd& bit_means,
                                     const ArrayXd& squared_weights,
                                     double alpha) {
  if (bit_means.size() != squared_weights.size()) {
    throw std::invalid_argument("sampling: means/weights length mismatch");
  }
  const ArrayXd m = bit_means.cwiseMax(0.0).cwiseMin(1.0);
  const ArrayXd score = squared_weights * m * (1.0 - m);
  if ((score > 0.0).count() == 0) {
    throw degenerate_distribution_error("sampling: all bit scores are zero");
  }
  ArrayXd raw = (score > 0.0).select(score.pow(alpha), ArrayXd::Zero(score.size()));
  return SamplingDistribution(normalized(std::move(raw)));
}

SamplingDistribution optimal_weights(const ArrayXd& bit_means, double alpha) {
  ArrayXd w2(bit_means.size());
  for (Index j = 0; j < bit_means.size(); ++j) {
    w2[j] = std::exp2(2.0 * static_cast<double>(j));
  }
  return optimal_weights(bit_means, w2, alpha);
}

std::vector<std::int64_t> quasi_monte_carlo_counts(std::int64_t n,
                                                   const ArrayXd& p) {
  if (n < 0) throw std::invalid_argument("sampling: negative client count");
  const Index b = p.size();
  std::vector<std::int64_t> counts(static_cast<std::size_t>(b), 0);
  std::vector<double> fraction(static_cast<std::size_t>(b), 0.0);
  std::int64_t assigned = 0;
  for (Index j = 0; j < b; ++j) {
    const double target = p[j] * static_cast<double>(n);
    const double base = std::floor(target);
    counts[static_cast<std::size_t>(j)] = static_cast<std::int64_t>(base);
    fraction[static_cast<std::size_t>(j)] = target - base;
    assigned += counts[static_cast<std::size_t>(j)];
  }
  std::vector<Index> order(static_cast<std::size_t>(b));
  std::iota(order.begin(), order.end(), Index{0});
  // Ties break toward lower index so counts are deterministic.
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index c) {
    return fraction[static_cast<std::size_t>(a)] >
           fraction[static_cast<std::size_t>(c)];
  });
  for (Index k = 0; assigned < n && k < b; ++k) {
    const std::size_t j = static_cast<std::size_t>(order[static_cast<std::size_t>(k)]);
    if (fraction[j] <= 0.0) continue;  // never lift an exact allocation
    ++counts[j];
    ++assigned;
  }
  // Floating-point shortfalls land on the largest cell.
  while (assigned < n) {
    const std::size_t j = static_cast<std::size_t>(
        std::max_element(counts.begin(), counts.end()) - counts.begin());
    ++counts[j];
    ++assigned;
  }
  return counts;
}

BitAssignment assign_central(std::int64_t n, const SamplingDistribution& dist,
                             Rng& rng) {
  if (n < 1) throw std::invalid_argument("sampling: need at least one client");
  const auto counts = quasi_monte_carlo_counts(n, dist.p);
  BitAssignment assignment;
  assignment.reserve(static_cast<std::size_t>(n));
  for (Index j = 0; j < dist.bits(); ++j) {
    assignment.insert(assignment.end(),
                      static_cast<std::size_t>(counts[static_cast<std::size_t>(j)]),
                      j);
  }
  std::shuffle(assignment.begin(), assignment.end(), rng);
  return assignment;
}

Index sample_local(const SamplingDistribution& dist, Rng& rng) {
  const double u = uniform01(rng);
  double cumulative = 0.0;
  Index last_positive = 0;
  for (Index j = 0; j < dist.bits(); ++j) {
    if (dist.p[j] <= 0.0) continue;
    cumulative += dist.p[j];
    last_positive = j;
    if (u < cumulative) return j;
  }
  return last_positive;  // u landed in the rounding slack at the top
}

}  // namespace bitpush
