#include "bitpush/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace bitpush {

namespace {

// Clip a value into the codec range, bumping the counter when it moves.
double clip_counted(double x, const FixedPointCodec& codec,
                    std::int64_t& clipped) {
  const double c = codec.clamp(x);
  if (c != x) ++clipped;
  return c;
}

struct Tally {
  ArrayXd counts;
  ArrayXd sums;

  explicit Tally(Index bits)
      : counts(ArrayXd::Zero(bits)), sums(ArrayXd::Zero(bits)) {}

  void add(const ClientReport& report, const RandomizedResponse* rr) {
    const double value =
        report.rr_applied && rr != nullptr
            ? rr->unbias(static_cast<double>(report.reported_bit))
            : static_cast<double>(report.reported_bit);
    counts[report.bit_index] += 1.0;
    sums[report.bit_index] += value;
  }
};

// b_send > 1 keeps exact counts over the n * b_send report slots, with each
// bit capped at n reports so every client can hold distinct bits.  The slot
// stream is laid out in blocks of identical bits no longer than n and dealt
// to clients modulo n, which makes the copies of any bit land on different
// clients; randomness is a single client relabeling.
std::vector<BitAssignment> distinct_assignments(std::int64_t n,
                                                const SamplingDistribution& dist,
                                                int b_send, Rng& rng) {
  if (b_send <= 1) return {assign_central(n, dist, rng)};

  const Index b = dist.bits();
  auto counts = quasi_monte_carlo_counts(n * b_send, dist.p);
  std::int64_t excess = 0;
  for (auto& c : counts) {
    if (c > n) {
      excess += c - n;
      c = n;
    }
  }
  while (excess > 0) {
    std::size_t best = counts.size();
    for (std::size_t j = 0; j < counts.size(); ++j) {
      if (counts[j] < n && dist.p[static_cast<Index>(j)] > 0.0 &&
          (best == counts.size() || counts[j] > counts[best])) {
        best = j;
      }
    }
    if (best == counts.size()) {
      throw std::runtime_error(
          "protocol: b_send exceeds the number of sampled bits");
    }
    const std::int64_t room = std::min<std::int64_t>(excess, n - counts[best]);
    counts[best] += room;
    excess -= room;
  }

  std::vector<Index> stream;
  stream.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(b_send));
  for (Index j = 0; j < b; ++j) {
    stream.insert(stream.end(),
                  static_cast<std::size_t>(counts[static_cast<std::size_t>(j)]),
                  j);
  }

  std::vector<std::int64_t> relabel(static_cast<std::size_t>(n));
  std::iota(relabel.begin(), relabel.end(), std::int64_t{0});
  std::shuffle(relabel.begin(), relabel.end(), rng);

  std::vector<BitAssignment> rounds(
      static_cast<std::size_t>(b_send),
      BitAssignment(static_cast<std::size_t>(n)));
  for (int t = 0; t < b_send; ++t) {
    for (std::int64_t i = 0; i < n; ++i) {
      rounds[static_cast<std::size_t>(t)]
            [static_cast<std::size_t>(relabel[static_cast<std::size_t>(i)])] =
          stream[static_cast<std::size_t>(t) * static_cast<std::size_t>(n) +
                 static_cast<std::size_t>(i)];
    }
  }
  return rounds;
}

BasicResult run_round(std::span<const double> population,
                      const FixedPointCodec& codec,
                      const ProtocolConfig& config,
                      const SamplingDistribution& dist, Rng& rng,
                      PrivacyMeter* meter,
                      std::span<const std::int64_t> client_ids) {
  const std::int64_t n = static_cast<std::int64_t>(population.size());
  if (n < 1) throw std::invalid_argument("protocol: empty population");

  std::optional<RandomizedResponse> rr_storage;
  if (config.epsilon) rr_storage.emplace(*config.epsilon);
  const RandomizedResponse* rr = rr_storage ? &*rr_storage : nullptr;

  BasicResult result;
  const auto rounds = distinct_assignments(n, dist, config.b_send, rng);
  std::vector<ClientReport> reports;
  reports.reserve(static_cast<std::size_t>(n) * rounds.size());
  for (const auto& assignment : rounds) {
    for (std::int64_t i = 0; i < n; ++i) {
      const double value =
          clip_counted(population[static_cast<std::size_t>(i)], codec,
                       result.clipped);
      const std::int64_t id = client_ids.empty() ? i : client_ids[static_cast<std::size_t>(i)];
      reports.push_back(client_report(value, assignment[static_cast<std::size_t>(i)],
                                      codec, rr, rng, meter, id));
    }
  }
  auto round = aggregate_round(reports, codec, rr);
  result.estimate = round.estimate;
  result.stats = std::move(round.stats);
  // One value may be clipped once per b_send slot; count each value once.
  result.clipped /= static_cast<std::int64_t>(rounds.size());
  return result;
}

}  // namespace

void ProtocolConfig::validate() const {
  if (bits < 1 || bits > 62) {
    throw std::invalid_argument("config: bits must be in [1, 62]");
  }
  if (clients < 1) throw std::invalid_argument("config: clients must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("config: delta must be in (0, 1)");
  }
  if (gamma < 0.0) throw std::invalid_argument("config: gamma must be >= 0");
  if (epsilon && !(*epsilon > 0.0)) {
    throw std::invalid_argument("config: epsilon must be > 0");
  }
  if (b_send < 1 || b_send > bits) {
    throw std::invalid_argument("config: b_send must be in [1, bits]");
  }
}

ClientReport client_report(double value, Index assigned,
                           const FixedPointCodec& codec,
                           const RandomizedResponse* rr, Rng& rng,
                           PrivacyMeter* meter, std::int64_t client_id) {
  ClientReport report;
  report.bit_index = assigned;
  const int bit = codec.bit_at(value, assigned);
  report.reported_bit = static_cast<std::uint8_t>(
      rr != nullptr ? rr->perturb(bit, rng) : bit);
  report.rr_applied = rr != nullptr;
  if (meter != nullptr) meter->charge(client_id, rr);
  return report;
}

RoundResult aggregate_round(std::span<const ClientReport> reports,
                            const FixedPointCodec& codec,
                            const RandomizedResponse* rr) {
  if (reports.empty()) {
    throw std::invalid_argument("protocol: no reports to aggregate");
  }
  Tally tally(codec.logical_bits());
  for (const auto& report : reports) {
    if (report.bit_index < 0 || report.bit_index >= codec.logical_bits()) {
      throw std::out_of_range("protocol: report bit index out of range");
    }
    if (report.rr_applied && rr == nullptr) {
      throw std::invalid_argument(
          "protocol: randomized reports need the response parameters");
    }
    tally.add(report, rr);
  }
  RoundResult result;
  result.stats = make_bit_statistics(std::move(tally.counts),
                                     std::move(tally.sums),
                                     codec.squared_weights());
  result.estimate = codec.decode_means(result.stats.means);
  return result;
}

BasicResult run_basic(std::span<const double> population,
                      const FixedPointCodec& codec,
                      const ProtocolConfig& config,
                      const SamplingDistribution& dist, Rng& rng,
                      PrivacyMeter* meter) {
  config.validate();
  if (dist.bits() != codec.logical_bits()) {
    throw std::invalid_argument("protocol: distribution/codec width mismatch");
  }
  return run_round(population, codec, config, dist, rng, meter, {});
}

AdaptiveResult run_adaptive(std::span<const double> population,
                            const FixedPointCodec& codec,
                            const ProtocolConfig& config, Rng& rng,
                            PrivacyMeter* meter) {
  config.validate();
  const std::int64_t n = static_cast<std::int64_t>(population.size());
  if (n < 1) throw std::invalid_argument("protocol: empty population");

  const Index nb = codec.logical_bits();
  // Weight round 1 by bit significance; for split codecs this samples the
  // two halves symmetrically instead of by logical index.
  const SamplingDistribution p1 =
      geometric_weights(codec.bit_weights().abs(), config.gamma);

  std::vector<std::int64_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), std::int64_t{0});
  std::shuffle(order.begin(), order.end(), rng);

  std::int64_t n1 = std::llround(config.delta * static_cast<double>(n));
  n1 = std::clamp<std::int64_t>(n1, 1, n);
  std::vector<double> round1_values(static_cast<std::size_t>(n1));
  std::vector<std::int64_t> round1_ids(static_cast<std::size_t>(n1));
  for (std::int64_t i = 0; i < n1; ++i) {
    round1_ids[static_cast<std::size_t>(i)] = order[static_cast<std::size_t>(i)];
    round1_values[static_cast<std::size_t>(i)] =
        population[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
  }

  AdaptiveResult result;
  const BasicResult round1 =
      run_round(round1_values, codec, config, p1, rng, meter, round1_ids);
  result.round1 = round1.stats;
  result.clipped += round1.clipped;

  const double k = config.effective_squash_k();
  BitStatistics weight_source = result.round1;
  if (config.epsilon && k > 0.0) {
    weight_source = squash_bits(weight_source, RandomizedResponse(*config.epsilon),
                                k, codec.squared_weights());
  }

  SamplingDistribution p2;
  bool degenerate = false;
  try {
    p2 = optimal_weights(weight_source.means, codec.squared_weights(),
                         config.round2_alpha());
  } catch (const degenerate_distribution_error&) {
    degenerate = true;
  }

  const std::int64_t n2 = n - n1;
  if (degenerate || n2 < 1) {
    // Nothing left to learn in round 2; the round-1 decode is the estimate.
    result.fell_back = true;
    result.round2 = make_bit_statistics(ArrayXd::Zero(nb), ArrayXd::Zero(nb),
                                        codec.squared_weights());
    result.combined = result.round1;
    ArrayXd means = weight_source.means;
    result.estimate = codec.decode_means(means);
    return result;
  }

  std::vector<double> round2_values(static_cast<std::size_t>(n2));
  std::vector<std::int64_t> round2_ids(static_cast<std::size_t>(n2));
  for (std::int64_t i = 0; i < n2; ++i) {
    round2_ids[static_cast<std::size_t>(i)] = order[static_cast<std::size_t>(n1 + i)];
    round2_values[static_cast<std::size_t>(i)] =
        population[static_cast<std::size_t>(order[static_cast<std::size_t>(n1 + i)])];
  }
  const BasicResult round2 =
      run_round(round2_values, codec, config, p2, rng, meter, round2_ids);
  result.round2 = round2.stats;
  result.clipped += round2.clipped;

  result.combined = config.caching
                        ? merge_bit_statistics(result.round1, result.round2,
                                               codec.squared_weights())
                        : result.round2;

  BitStatistics final_stats = result.combined;
  if (config.epsilon && k > 0.0) {
    final_stats = squash_bits(final_stats, RandomizedResponse(*config.epsilon),
                              k, codec.squared_weights());
  }
  result.estimate = codec.decode_means(final_stats.means);
  return result;
}

double theoretical_variance(const ArrayXd& bit_means,
                            const ArrayXd& squared_weights,
                            const SamplingDistribution& dist, std::int64_t n) {
  if (bit_means.size() != dist.bits() ||
      bit_means.size() != squared_weights.size()) {
    throw std::invalid_argument("variance: length mismatch");
  }
  if (n < 1) throw std::invalid_argument("variance: n must be >= 1");
  const ArrayXd m = bit_means.cwiseMax(0.0).cwiseMin(1.0);
  double total = 0.0;
  for (Index j = 0; j < m.size(); ++j) {
    const double score = squared_weights[j] * m[j] * (1.0 - m[j]);
    if (score <= 0.0) continue;
    if (dist.p[j] <= 0.0) {
      throw std::domain_error(
          "variance: bit with positive score is never sampled");
    }
    total += score / dist.p[j];
  }
  return total / static_cast<double>(n);
}

double theoretical_variance(const ArrayXd& bit_means,
                            const SamplingDistribution& dist, std::int64_t n) {
  ArrayXd w2(bit_means.size());
  for (Index j = 0; j < bit_means.size(); ++j) {
    w2[j] = std::exp2(2.0 * static_cast<double>(j));
  }
  return theoretical_variance(bit_means, w2, dist, n);
}

BasicResult push_mean(std::span<const double> population,
                      const FixedPointCodec& codec,
                      const ProtocolConfig& config, PushMethod method,
                      Rng& rng, PrivacyMeter* meter) {
  switch (method) {
    case PushMethod::Uniform:
      return run_basic(population, codec, config,
                       uniform_weights(codec.logical_bits()), rng, meter);
    case PushMethod::Geometric:
      return run_basic(population, codec, config,
                       geometric_weights(codec.logical_bits(),
                                         config.weighted_alpha()),
                       rng, meter);
    case PushMethod::Adaptive: {
      const AdaptiveResult adaptive =
          run_adaptive(population, codec, config, rng, meter);
      BasicResult out;
      out.estimate = adaptive.estimate;
      out.stats = adaptive.combined;
      out.clipped = adaptive.clipped;
      return out;
    }
  }
  throw std::invalid_argument("protocol: unknown push method");
}

}  // namespace bitpush
