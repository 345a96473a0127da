#include "bitpush/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace bitpush {

namespace {

// Exact variance of a decoded mean given realized per-bit counts: each bit
// mean carries m(1-m)/c_j, scaled by the squared decomposition weight.
double estimator_variance_from_counts(const BitStatistics& stats,
                                      const ArrayXd& squared_weights) {
  const ArrayXd m = stats.means.cwiseMax(0.0).cwiseMin(1.0);
  double total = 0.0;
  for (Index j = 0; j < stats.bits(); ++j) {
    if (stats.counts[j] <= 0.0) continue;
    total += squared_weights[j] * m[j] * (1.0 - m[j]) / stats.counts[j];
  }
  return total;
}

ProtocolConfig with_clients(ProtocolConfig config, std::int64_t n) {
  config.clients = n;
  return config;
}

}  // namespace

double estimate_signed_mean(std::span<const double> population,
                            const ProtocolConfig& config,
                            SignedEncoding encoding, double shift, Rng& rng,
                            PushMethod method) {
  const FixedPointCodec codec =
      encoding == SignedEncoding::AdditiveShift
          ? FixedPointCodec::additive_shift(config.bits, 0, shift)
          : FixedPointCodec::bit_split(config.bits, 0);
  if (encoding == SignedEncoding::AdditiveShift) {
    for (double x : population) {
      if (x < -shift) {
        throw std::out_of_range(
            "signed mean: value below the additive-shift bound");
      }
    }
  }
  return push_mean(population, codec,
                   with_clients(config, static_cast<std::int64_t>(population.size())),
                   method, rng)
      .estimate;
}

double estimate_variance(std::span<const double> population,
                         const ProtocolConfig& config, VarianceMethod method,
                         Rng& rng, PushMethod push,
                         double mean_phase_fraction) {
  const std::int64_t n = static_cast<std::int64_t>(population.size());
  if (n < 2) {
    throw std::invalid_argument(
        "variance estimation: need clients for two phases");
  }
  if (!(mean_phase_fraction > 0.0 && mean_phase_fraction < 1.0)) {
    throw std::invalid_argument("variance estimation: bad phase split");
  }

  std::vector<std::int64_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), std::int64_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  const std::int64_t na = std::clamp<std::int64_t>(
      std::llround(mean_phase_fraction * static_cast<double>(n)), 1, n - 1);

  std::vector<double> phase_a;
  phase_a.reserve(static_cast<std::size_t>(na));
  std::vector<double> phase_b;
  phase_b.reserve(static_cast<std::size_t>(n - na));
  for (std::int64_t i = 0; i < n; ++i) {
    (i < na ? phase_a : phase_b)
        .push_back(population[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])]);
  }

  const int squared_bits = std::min(2 * config.bits, 62);
  const FixedPointCodec value_codec = FixedPointCodec::make_unsigned(config.bits, 0);
  const FixedPointCodec square_codec = FixedPointCodec::make_unsigned(squared_bits, 0);

  if (method == VarianceMethod::CenteredSquare) {
    const BasicResult mean_phase =
        push_mean(phase_a, value_codec, with_clients(config, na), push, rng);
    const double xhat = mean_phase.estimate;

    std::vector<double> deviations;
    deviations.reserve(phase_b.size());
    for (double x : phase_b) {
      const double d = (x - xhat) * (x - xhat);
      deviations.push_back(square_codec.clamp(d));
    }
    ProtocolConfig b_config = with_clients(config, n - na);
    b_config.bits = squared_bits;
    const BasicResult z_phase =
        push_mean(deviations, square_codec, b_config, push, rng);

    double correction = 0.0;
    if (!config.epsilon) {
      correction = estimator_variance_from_counts(mean_phase.stats,
                                                  value_codec.squared_weights());
    }
    return std::max(0.0, z_phase.estimate - correction);
  }

  // Case 2: parallel pushes of x and x^2.
  const BasicResult mean_phase =
      push_mean(phase_a, value_codec, with_clients(config, na), push, rng);
  std::vector<double> squares;
  squares.reserve(phase_b.size());
  for (double x : phase_b) {
    squares.push_back(square_codec.clamp(x * x));
  }
  ProtocolConfig b_config = with_clients(config, n - na);
  b_config.bits = squared_bits;
  const BasicResult square_phase =
      push_mean(squares, square_codec, b_config, push, rng);
  return std::max(0.0,
                  square_phase.estimate - mean_phase.estimate * mean_phase.estimate);
}

FixedPointCodec log_codec(int log_fractional_bits) {
  // Shift 16 admits magnitudes down to e^-16; five integer bits cover logs of
  // values up to e^15 after the shift.
  return FixedPointCodec::additive_shift(5, log_fractional_bits, 16.0);
}

double estimate_geometric_mean(std::span<const double> population,
                               const ProtocolConfig& config, Rng& rng,
                               PushMethod method, int log_fractional_bits) {
  std::vector<double> logs;
  logs.reserve(population.size());
  const FixedPointCodec codec = log_codec(log_fractional_bits);
  for (double x : population) {
    if (!(x > 0.0)) {
      throw std::domain_error(
          "geometric mean: values must be strictly positive");
    }
    logs.push_back(codec.clamp(std::log(x)));
  }
  ProtocolConfig log_config = config;
  log_config.bits = codec.total_bits();
  log_config.clients = static_cast<std::int64_t>(population.size());
  const double log_mean = push_mean(logs, codec, log_config, method, rng).estimate;
  return std::exp(log_mean);
}

}  // namespace bitpush
