#include "bitpush/population.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace bitpush {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    // Trim surrounding whitespace.
    const auto begin = cell.find_first_not_of(" \t\r");
    const auto end = cell.find_last_not_of(" \t\r");
    cells.push_back(begin == std::string::npos
                        ? std::string()
                        : cell.substr(begin, end - begin + 1));
  }
  return cells;
}

bool parse_double(const std::string& text, double& out) {
  if (text.empty()) return false;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

bool parse_index(const std::string& text, std::size_t& out) {
  if (text.empty()) return false;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

Population load_csv_column(const std::string& path,
                           const std::string& column) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("population: cannot open file " + path);
  }

  std::string line;
  std::vector<std::string> first_row;
  if (!std::getline(in, line)) {
    throw std::runtime_error("population: file is empty: " + path);
  }
  first_row = split_csv_line(line);

  std::size_t index = 0;
  bool first_row_is_data = false;
  if (parse_index(column, index)) {
    double probe = 0.0;
    first_row_is_data =
        index < first_row.size() && parse_double(first_row[index], probe);
  } else {
    bool found = false;
    for (std::size_t i = 0; i < first_row.size(); ++i) {
      if (first_row[i] == column) {
        index = i;
        found = true;
        break;
      }
    }
    if (!found) {
      throw std::runtime_error("population: column '" + column +
                               "' not found in header of " + path);
    }
  }

  Population pop;
  auto consume = [&](const std::vector<std::string>& cells) {
    double value = 0.0;
    if (index < cells.size() && parse_double(cells[index], value)) {
      pop.values.push_back(value);
    } else {
      ++pop.malformed_rows;
    }
  };
  if (first_row_is_data) consume(first_row);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    consume(split_csv_line(line));
  }
  if (pop.values.empty()) {
    throw std::runtime_error("population: no valid rows in " + path);
  }
  return pop;
}

Population generate(const PopulationSpec& spec, std::uint64_t seed) {
  if (spec.dist == Distribution::FromFile) {
    return load_csv_column(spec.path, spec.column);
  }
  if (spec.n < 1) {
    throw std::invalid_argument("population: n must be >= 1");
  }
  Population pop;
  pop.values.reserve(static_cast<std::size_t>(spec.n));
  Rng rng(seed);
  switch (spec.dist) {
    case Distribution::Normal: {
      std::normal_distribution<double> d(spec.mu, spec.sigma);
      for (std::int64_t i = 0; i < spec.n; ++i) pop.values.push_back(d(rng));
      break;
    }
    case Distribution::Uniform: {
      std::uniform_real_distribution<double> d(spec.low, spec.high);
      for (std::int64_t i = 0; i < spec.n; ++i) pop.values.push_back(d(rng));
      break;
    }
    case Distribution::Exponential: {
      if (!(spec.rate > 0.0)) {
        throw std::invalid_argument("population: rate must be > 0");
      }
      std::exponential_distribution<double> d(spec.rate);
      for (std::int64_t i = 0; i < spec.n; ++i) pop.values.push_back(d(rng));
      break;
    }
    case Distribution::FromFile:
      break;  // handled above
  }
  return pop;
}

PreparedPopulation prepare(const std::vector<double>& raw,
                           const FixedPointCodec& codec) {
  PreparedPopulation prepared;
  prepared.values.reserve(raw.size());
  for (double x : raw) {
    const double clipped = codec.clamp(x);
    if (clipped != x) ++prepared.clipped;
    prepared.values.push_back(codec.snap(clipped));
  }
  const auto n = static_cast<double>(prepared.values.size());
  double sum = 0.0;
  for (double v : prepared.values) sum += v;
  prepared.mean = sum / n;
  double ss = 0.0;
  for (double v : prepared.values) {
    ss += (v - prepared.mean) * (v - prepared.mean);
  }
  prepared.variance = ss / n;
  return prepared;
}

}  // namespace bitpush
