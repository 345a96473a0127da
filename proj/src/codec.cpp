#include "bitpush/codec.hpp"

#include <cmath>
#include <sstream>

namespace bitpush {

namespace {

constexpr int kMaxBits = 62;  // 2^j and 4^j stay exact in double arithmetic

}  // namespace

FixedPointCodec::FixedPointCodec(int integer_bits, int fractional_bits,
                                 SignedMode mode, double shift)
    : integer_bits_(integer_bits),
      fractional_bits_(fractional_bits),
      mode_(mode),
      shift_(shift) {
  const int b = integer_bits + fractional_bits;
  if (integer_bits < 0 || fractional_bits < 0 || b < 1 || b > kMaxBits) {
    throw std::invalid_argument("codec: total bits must be in [1, 62]");
  }
  if (mode == SignedMode::AdditiveShift && shift < 0.0) {
    throw std::invalid_argument("codec: additive shift must be non-negative");
  }

  resolution_ = std::ldexp(1.0, -fractional_bits);
  const double magnitude_max = std::ldexp(1.0, b) - 1.0;  // raw units
  const double value_max = magnitude_max * resolution_;

  switch (mode) {
    case SignedMode::Unsigned:
      min_value_ = 0.0;
      max_value_ = value_max;
      break;
    case SignedMode::AdditiveShift:
      min_value_ = -shift;
      max_value_ = value_max - shift;
      break;
    case SignedMode::BitSplit:
      min_value_ = -value_max;
      max_value_ = value_max;
      break;
  }

  const Index nb = (mode == SignedMode::BitSplit) ? 2 * b : b;
  weights_.resize(nb);
  for (Index j = 0; j < nb; ++j) {
    const int pos = static_cast<int>(j % b);
    const double w = std::ldexp(1.0, pos - fractional_bits);
    weights_[j] = (j < b) ? w : -w;
  }
  squared_weights_ = weights_.square();
}

FixedPointCodec FixedPointCodec::make_unsigned(int integer_bits,
                                               int fractional_bits) {
  return FixedPointCodec(integer_bits, fractional_bits, SignedMode::Unsigned,
                         0.0);
}

FixedPointCodec FixedPointCodec::additive_shift(int integer_bits,
                                                int fractional_bits,
                                                double shift) {
  return FixedPointCodec(integer_bits, fractional_bits,
                         SignedMode::AdditiveShift, shift);
}

FixedPointCodec FixedPointCodec::bit_split(int integer_bits,
                                           int fractional_bits) {
  return FixedPointCodec(integer_bits, fractional_bits, SignedMode::BitSplit,
                         0.0);
}

double FixedPointCodec::clamp(double x) const {
  if (x < min_value_) return min_value_;
  if (x > max_value_) return max_value_;
  return x;
}

std::uint64_t FixedPointCodec::raw_magnitude(double v, double original) const {
  const double scaled = std::floor(std::ldexp(v, fractional_bits_));
  const double limit = std::ldexp(1.0, total_bits());
  if (!(scaled >= 0.0) || scaled >= limit) {
    std::ostringstream os;
    os << "codec: value " << original << " outside representable range ["
       << min_value_ << ", " << max_value_ << "]";
    throw std::out_of_range(os.str());
  }
  return static_cast<std::uint64_t>(scaled);
}

double FixedPointCodec::snap(double x) const {
  switch (mode_) {
    case SignedMode::Unsigned:
      return static_cast<double>(raw_magnitude(x, x)) * resolution_;
    case SignedMode::AdditiveShift:
      return static_cast<double>(raw_magnitude(x + shift_, x)) * resolution_ -
             shift_;
    case SignedMode::BitSplit: {
      const double mag =
          static_cast<double>(raw_magnitude(std::abs(x), x)) * resolution_;
      return x < 0.0 ? -mag : mag;
    }
  }
  return 0.0;  // unreachable
}

BitVector FixedPointCodec::encode(double x) const {
  const int b = total_bits();
  BitVector bits(static_cast<std::size_t>(logical_bits()), 0);
  std::uint64_t pos_raw = 0;
  std::uint64_t neg_raw = 0;
  switch (mode_) {
    case SignedMode::Unsigned:
      pos_raw = raw_magnitude(x, x);
      break;
    case SignedMode::AdditiveShift:
      pos_raw = raw_magnitude(x + shift_, x);
      break;
    case SignedMode::BitSplit:
      if (x >= 0.0) {
        pos_raw = raw_magnitude(x, x);
      } else {
        neg_raw = raw_magnitude(-x, x);
      }
      break;
  }
  for (int j = 0; j < b; ++j) {
    bits[static_cast<std::size_t>(j)] =
        static_cast<std::uint8_t>((pos_raw >> j) & 1u);
  }
  if (mode_ == SignedMode::BitSplit) {
    for (int j = 0; j < b; ++j) {
      bits[static_cast<std::size_t>(b + j)] =
          static_cast<std::uint8_t>((neg_raw >> j) & 1u);
    }
  }
  return bits;
}

int FixedPointCodec::bit_at(double x, Index j) const {
  if (j < 0 || j >= logical_bits()) {
    throw std::out_of_range("codec: bit index out of range");
  }
  const int b = total_bits();
  switch (mode_) {
    case SignedMode::Unsigned:
      return static_cast<int>((raw_magnitude(x, x) >> j) & 1u);
    case SignedMode::AdditiveShift:
      return static_cast<int>((raw_magnitude(x + shift_, x) >> j) & 1u);
    case SignedMode::BitSplit: {
      const bool negative_part = j >= b;
      const Index pos = negative_part ? j - b : j;
      if ((x >= 0.0) == negative_part) {
        // Range still has to be checked for the silent half.
        raw_magnitude(std::abs(x), x);
        return 0;
      }
      return static_cast<int>((raw_magnitude(std::abs(x), x) >> pos) & 1u);
    }
  }
  return 0;  // unreachable
}

double FixedPointCodec::decode_means(const ArrayXd& bit_means) const {
  if (bit_means.size() != logical_bits()) {
    throw std::invalid_argument("codec: bit-means length mismatch");
  }
  const double linear = (weights_ * bit_means).sum();
  return mode_ == SignedMode::AdditiveShift ? linear - shift_ : linear;
}

}  // namespace bitpush
