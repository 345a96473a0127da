#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>

namespace bitpush {

using Eigen::ArrayXd;
using Index = Eigen::Index;

// All protocol randomness flows through one generator type so that a run is
// reproducible from a single master seed.
using Rng = std::mt19937_64;

// splitmix64 finalizer; cheap way to spread a counter into an independent seed.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Stream `k` derived from `master`; streams are stable across runs and
// independent of how work is scheduled.
inline Rng derived_rng(std::uint64_t master, std::uint64_t k) {
  return Rng(mix64(master + 0x9e3779b97f4a7c15ull * (k + 1)));
}

// Uniform double in [0, 1) from the top 53 bits of one draw.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Thrown when a requested sampling distribution has no positive scores left.
class degenerate_distribution_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bitpush
