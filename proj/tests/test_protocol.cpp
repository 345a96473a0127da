#include "bitpush/protocol.hpp"

#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"

using namespace bitpush;

namespace {

// Exact per-bit means of a population under a codec, by enumeration.
ArrayXd exact_bit_means(const std::vector<double>& values,
                        const FixedPointCodec& codec) {
  ArrayXd means = ArrayXd::Zero(codec.logical_bits());
  for (double v : values) {
    for (Index j = 0; j < codec.logical_bits(); ++j) {
      means[j] += codec.bit_at(v, j);
    }
  }
  return means / static_cast<double>(values.size());
}

double population_mean(const std::vector<double>& values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

}  // namespace

TEST_CASE("theoretical variance closed form") {
  ArrayXd one(1);
  one << 0.5;
  ArrayXd p1(1);
  p1 << 1.0;
  CHECK(theoretical_variance(one, SamplingDistribution(p1), 100) ==
        doctest::Approx(0.0025));

  ArrayXd two(2);
  two << 0.5, 0.5;
  ArrayXd p2(2);
  p2 << 1.0 / 3, 2.0 / 3;
  CHECK(theoretical_variance(two, SamplingDistribution(p2), 1) ==
        doctest::Approx(2.25));

  ArrayXd deterministic(3);
  deterministic << 0.0, 1.0, 0.0;
  CHECK(theoretical_variance(deterministic, uniform_weights(3), 10) == 0.0);

  // A bit with signal but no sampling probability has unbounded variance.
  ArrayXd means(2);
  means << 0.5, 0.5;
  ArrayXd starved(2);
  starved << 1.0, 0.0;
  CHECK_THROWS_AS(
      theoretical_variance(means, SamplingDistribution(starved), 10),
      std::domain_error);
  // ...unless the starved bit carries no signal at all.
  ArrayXd silent(2);
  silent << 0.5, 1.0;
  CHECK(theoretical_variance(silent, SamplingDistribution(starved), 4) ==
        doctest::Approx(1.0 / 16));
}

TEST_CASE("client reports disclose the requested bit") {
  const auto codec = FixedPointCodec::make_unsigned(4);
  Rng rng(3);
  CHECK(client_report(5.0, 0, codec, nullptr, rng).reported_bit == 1);
  CHECK(client_report(5.0, 3, codec, nullptr, rng).reported_bit == 0);

  const RandomizedResponse rr(std::log(3.0));
  const int trials = 100000;
  int ones = 0;
  for (int i = 0; i < trials; ++i) {
    ones += client_report(5.0, 0, codec, &rr, rng).reported_bit;
  }
  const double sd = std::sqrt(0.75 * 0.25 / trials);
  CHECK(std::abs(ones / double(trials) - 0.75) <= 3.0 * sd);
}

TEST_CASE("aggregate_round averages per bit and decodes") {
  const auto codec = FixedPointCodec::make_unsigned(3);
  // Four clients all holding 5: one report per bit plus an extra on bit 2.
  std::vector<ClientReport> reports;
  Rng rng(1);
  for (Index bit : {0, 1, 2, 2}) {
    reports.push_back(client_report(5.0, bit, codec, nullptr, rng));
  }
  const RoundResult result = aggregate_round(reports, codec, nullptr);
  CHECK(result.stats.means[0] == doctest::Approx(1.0));
  CHECK(result.stats.means[1] == doctest::Approx(0.0));
  CHECK(result.stats.means[2] == doctest::Approx(1.0));
  CHECK(result.stats.counts[2] == doctest::Approx(2.0));
  CHECK(result.estimate == doctest::Approx(5.0));

  CHECK_THROWS_AS(aggregate_round({}, codec, nullptr), std::invalid_argument);
}

TEST_CASE("run_basic on degenerate populations") {
  ProtocolConfig config;
  config.bits = 1;
  config.clients = 1;
  Rng rng(5);
  const auto one_bit = FixedPointCodec::make_unsigned(1);
  const std::vector<double> single{1.0};
  CHECK(run_basic(single, one_bit, config, uniform_weights(1), rng).estimate ==
        doctest::Approx(1.0));

  config.bits = 6;
  config.clients = 50;
  const auto codec = FixedPointCodec::make_unsigned(6);
  const std::vector<double> zeros(50, 0.0);
  CHECK(run_basic(zeros, codec, config, geometric_weights(6, 1.0), rng)
            .estimate == doctest::Approx(0.0));
}

TEST_CASE("clipping is counted, not fatal") {
  ProtocolConfig config;
  config.bits = 4;
  config.clients = 4;
  Rng rng(9);
  const auto codec = FixedPointCodec::make_unsigned(4);
  const std::vector<double> values{3.0, 99.0, 7.0, 200.0};
  const auto result = run_basic(values, codec, config, uniform_weights(4), rng);
  CHECK(result.clipped == 2);
  CHECK(result.estimate <= 15.0);
}

TEST_CASE("basic estimate lands within the predicted band") {
  // Complete population 0..1023: every bit mean is exactly 1/2.
  std::vector<double> population(1024);
  for (int i = 0; i < 1024; ++i) population[static_cast<std::size_t>(i)] = i;
  std::vector<double> values;
  values.reserve(100000);
  for (int rep = 0; rep < 98; ++rep) {
    values.insert(values.end(), population.begin(), population.end());
  }
  ProtocolConfig config;
  config.bits = 10;
  config.clients = static_cast<std::int64_t>(values.size());
  const auto codec = FixedPointCodec::make_unsigned(10);
  const auto dist = geometric_weights(10, 1.0);
  Rng rng(11);
  const auto result = run_basic(values, codec, config, dist, rng);
  const ArrayXd means = ArrayXd::Constant(10, 0.5);
  const double sigma = std::sqrt(
      theoretical_variance(means, dist, config.clients));
  CHECK(std::abs(result.estimate - 511.5) <= 3.0 * sigma);
}

TEST_CASE("estimator is unbiased and tracks the variance formula") {
  Rng pop_rng(123);
  std::normal_distribution<double> normal(350.0, 50.0);
  const auto codec = FixedPointCodec::make_unsigned(10);
  std::vector<double> values(2000);
  for (auto& v : values) v = codec.snap(codec.clamp(normal(pop_rng)));
  const double truth = population_mean(values);
  const ArrayXd means = exact_bit_means(values, codec);

  ProtocolConfig config;
  config.bits = 10;
  config.clients = static_cast<std::int64_t>(values.size());
  const auto dist = geometric_weights(10, 1.0);
  const double predicted =
      theoretical_variance(means, dist, config.clients);

  const int reps = 800;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int r = 0; r < reps; ++r) {
    Rng rng = derived_rng(777, static_cast<std::uint64_t>(r));
    const double est =
        run_basic(values, codec, config, dist, rng).estimate;
    sum += est;
    sum_sq += est * est;
  }
  const double mean = sum / reps;
  const double variance = sum_sq / reps - mean * mean;
  CHECK(std::abs(mean - truth) <= 4.0 * std::sqrt(predicted / reps));
  CHECK(variance == doctest::Approx(predicted).epsilon(0.25));
}

TEST_CASE("allocation quality ordering on realistic data") {
  Rng pop_rng(2718);
  std::normal_distribution<double> normal(350.0, 50.0);
  const auto codec = FixedPointCodec::make_unsigned(10);
  std::vector<double> values(5000);
  for (auto& v : values) v = codec.snap(codec.clamp(normal(pop_rng)));
  const ArrayXd means = exact_bit_means(values, codec);
  const std::int64_t n = 5000;

  const double best = theoretical_variance(means, optimal_weights(means, 0.5), n);
  const double geometric =
      theoretical_variance(means, geometric_weights(10, 1.0), n);
  const double flat = theoretical_variance(means, uniform_weights(10), n);
  CHECK(best <= geometric);
  CHECK(geometric <= flat);
}

TEST_CASE("b_send gives each client distinct bits and halves the variance") {
  Rng pop_rng(321);
  std::normal_distribution<double> normal(120.0, 30.0);
  const auto codec = FixedPointCodec::make_unsigned(8);
  std::vector<double> values(2000);
  for (auto& v : values) v = codec.snap(codec.clamp(normal(pop_rng)));

  ProtocolConfig config;
  config.bits = 8;
  config.clients = static_cast<std::int64_t>(values.size());
  const auto dist = geometric_weights(8, 1.0);

  // Distinctness: with two slots, a client never reports the same bit twice.
  {
    Rng rng(13);
    config.b_send = 2;
    PrivacyMeter meter(config.clients);
    const auto result =
        run_basic(values, codec, config, dist, rng, &meter);
    CHECK(result.stats.counts.sum() ==
          doctest::Approx(2.0 * static_cast<double>(config.clients)));
    CHECK(meter.per_client()[0] == doctest::Approx(2.0));
  }

  // With two bits and two slots each client must cover both bits exactly
  // once, however skewed the distribution: counts pin to [n, n].
  {
    Rng rng(19);
    ProtocolConfig pair = config;
    pair.bits = 2;
    pair.b_send = 2;
    const auto two_bit = FixedPointCodec::make_unsigned(2);
    std::vector<double> small(301, 2.0);
    pair.clients = 301;
    ArrayXd skew(2);
    skew << 0.9, 0.1;
    const auto result = run_basic(small, two_bit, pair,
                                  SamplingDistribution(skew), rng);
    CHECK(result.stats.counts[0] == doctest::Approx(301.0));
    CHECK(result.stats.counts[1] == doctest::Approx(301.0));
    CHECK(result.estimate == doctest::Approx(2.0));
  }

  auto empirical_variance = [&](const FixedPointCodec& cdc,
                                const SamplingDistribution& d, int b_send,
                                std::uint64_t seed) {
    ProtocolConfig local = config;
    local.bits = cdc.total_bits();
    local.b_send = b_send;
    const int reps = 1000;
    double sum = 0.0;
    double sum_sq = 0.0;
    for (int r = 0; r < reps; ++r) {
      Rng rng = derived_rng(seed, static_cast<std::uint64_t>(r));
      const double est = run_basic(values, cdc, local, d, rng).estimate;
      sum += est;
      sum_sq += est * est;
    }
    const double mean = sum / reps;
    return sum_sq / reps - mean * mean;
  };

  // Doubling b_send halves the variance when no bit needs more reports than
  // there are clients (uniform weights keep every p_j well below 1/2).
  const auto wide = FixedPointCodec::make_unsigned(16);
  const auto flat = uniform_weights(16);
  const double single = empirical_variance(wide, flat, 1, 99);
  const double doubled = empirical_variance(wide, flat, 2, 101);
  CHECK(doubled / single == doctest::Approx(0.5).epsilon(0.2));

  // Under skewed weights the top bit saturates at one report per client and
  // becomes a census; that only improves on the halving.
  const double skew_single = empirical_variance(codec, dist, 1, 103);
  const double skew_double = empirical_variance(codec, dist, 2, 107);
  CHECK(skew_double < 0.7 * skew_single);
}

TEST_CASE("adaptive is exact on constant populations") {
  const std::vector<double> constant(400, 7.0);
  ProtocolConfig config;
  config.bits = 6;
  config.clients = 400;
  const auto codec = FixedPointCodec::make_unsigned(6);
  Rng rng(77);
  const auto result = run_adaptive(constant, codec, config, rng);
  // Zero-variance bits leave round 2 with nothing to sample.
  CHECK(result.fell_back);
  CHECK(result.estimate == doctest::Approx(7.0));
}

TEST_CASE("adaptive beats single-round weighted on normal data") {
  Rng pop_rng(555);
  std::normal_distribution<double> normal(350.0, 50.0);
  const auto codec = FixedPointCodec::make_unsigned(10);
  std::vector<double> values(4000);
  for (auto& v : values) v = codec.snap(codec.clamp(normal(pop_rng)));
  const double truth = population_mean(values);

  ProtocolConfig config;
  config.bits = 10;
  config.clients = static_cast<std::int64_t>(values.size());
  const int reps = 80;
  double adaptive_mse = 0.0;
  double weighted_mse = 0.0;
  const auto weighted_dist = geometric_weights(10, 1.0);
  for (int r = 0; r < reps; ++r) {
    Rng rng_a = derived_rng(2024, static_cast<std::uint64_t>(r));
    Rng rng_w = derived_rng(4048, static_cast<std::uint64_t>(r));
    const double a = run_adaptive(values, codec, config, rng_a).estimate;
    const double w =
        run_basic(values, codec, config, weighted_dist, rng_w).estimate;
    adaptive_mse += (a - truth) * (a - truth);
    weighted_mse += (w - truth) * (w - truth);
  }
  CHECK(adaptive_mse < weighted_mse);
}

TEST_CASE("caching pools both rounds") {
  Rng pop_rng(999);
  std::normal_distribution<double> normal(350.0, 50.0);
  const auto codec = FixedPointCodec::make_unsigned(10);
  std::vector<double> values(4000);
  for (auto& v : values) v = codec.snap(codec.clamp(normal(pop_rng)));
  const double truth = population_mean(values);

  ProtocolConfig config;
  config.bits = 10;
  config.clients = static_cast<std::int64_t>(values.size());

  const int reps = 200;
  for (double delta : {0.2, 1.0 / 3, 0.6}) {
    config.delta = delta;
    double cached_mse = 0.0;
    double uncached_mse = 0.0;
    for (int r = 0; r < reps; ++r) {
      Rng rng_c = derived_rng(31337, static_cast<std::uint64_t>(r));
      Rng rng_u = derived_rng(31337, static_cast<std::uint64_t>(r));
      config.caching = true;
      const auto cached = run_adaptive(values, codec, config, rng_c);
      config.caching = false;
      const auto uncached = run_adaptive(values, codec, config, rng_u);
      cached_mse += (cached.estimate - truth) * (cached.estimate - truth);
      uncached_mse += (uncached.estimate - truth) * (uncached.estimate - truth);
      // Pooled tallies must hold every report from both rounds.
      CHECK(cached.combined.counts.sum() ==
            doctest::Approx(static_cast<double>(config.clients)));
    }
    config.caching = true;
    CHECK(std::sqrt(cached_mse) <= 1.1 * std::sqrt(uncached_mse));
  }
}

TEST_CASE("config validation rejects bad parameter combinations") {
  ProtocolConfig config;
  config.delta = 0.0;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config = ProtocolConfig{};
  config.epsilon = -1.0;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config = ProtocolConfig{};
  config.b_send = 11;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config = ProtocolConfig{};
  config.squash_k = 0.5;
  CHECK(config.effective_squash_k() == doctest::Approx(0.5));
  config.squash_k.reset();
  CHECK(config.effective_squash_k() == 0.0);
  config.epsilon = 2.0;
  CHECK(config.effective_squash_k() == doctest::Approx(3.0));
}
