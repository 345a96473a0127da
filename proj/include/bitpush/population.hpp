#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bitpush/codec.hpp"
#include "bitpush/types.hpp"

namespace bitpush {

enum class Distribution { Normal, Uniform, Exponential, FromFile };

struct PopulationSpec {
  Distribution dist = Distribution::Normal;
  double mu = 350.0;
  double sigma = 50.0;
  double low = 0.0;
  double high = 1023.0;
  double rate = 1.0;
  std::string path;
  std::string column;  // name, or zero-based index as digits
  std::int64_t n = 10000;
  std::optional<std::uint64_t> seed;
};

struct Population {
  std::vector<double> values;
  std::int64_t malformed_rows = 0;
};

// Deterministic draw for a given seed.  FromFile ignores `n` and takes every
// parseable row, counting the rows it had to skip.
Population generate(const PopulationSpec& spec, std::uint64_t seed);

// Comma-separated text, optional header row; the column is selected by name
// (requires a header) or by zero-based index.
Population load_csv_column(const std::string& path, const std::string& column);

struct PreparedPopulation {
  std::vector<double> values;  // clipped to range and snapped to the grid
  std::int64_t clipped = 0;
  double mean = 0.0;      // of the prepared values
  double variance = 0.0;  // population (1/n) variance of the prepared values
};

// Clipping and grid truncation happen before the true target is computed, so
// encoding granularity is not charged to the protocols under test.
PreparedPopulation prepare(const std::vector<double>& raw,
                           const FixedPointCodec& codec);

}  // namespace bitpush
