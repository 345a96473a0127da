#pragma once

#include <cstdint>
#include <vector>

#include "bitpush/types.hpp"

namespace bitpush {

enum class SignedMode { Unsigned, AdditiveShift, BitSplit };

// LSB-first binary expansion; index j carries weight 2^(j - fractional_bits).
// BitSplit codecs expose 2b logical bits: [0, b) positive part, [b, 2b)
// negative part.
using BitVector = std::vector<std::uint8_t>;

// Fixed-point view of real values as b-bit expansions.  Encoding truncates
// toward zero, so |decode(encode(x)) - x| <= 2^-fractional_bits.
class FixedPointCodec {
 public:
  static FixedPointCodec make_unsigned(int integer_bits, int fractional_bits = 0);
  // `shift` is added before encoding and subtracted after decoding; it must
  // make every admissible input non-negative.
  static FixedPointCodec additive_shift(int integer_bits, int fractional_bits,
                                        double shift);
  static FixedPointCodec bit_split(int integer_bits, int fractional_bits = 0);

  int total_bits() const { return integer_bits_ + fractional_bits_; }
  int fractional_bits() const { return fractional_bits_; }
  SignedMode mode() const { return mode_; }
  double shift() const { return shift_; }

  // Number of logical bit indices the sampling machinery sees (b, or 2b for
  // BitSplit).
  Index logical_bits() const { return static_cast<Index>(weights_.size()); }

  // Signed linear-decomposition weight of logical bit j; reconstruction is
  // sum_j weight_j * bit_j + decode_offset().
  const ArrayXd& bit_weights() const { return weights_; }
  // Element-wise squared weights, the variance scale of each logical bit.
  const ArrayXd& squared_weights() const { return squared_weights_; }

  double min_value() const { return min_value_; }
  double max_value() const { return max_value_; }
  double resolution() const { return resolution_; }

  bool in_range(double x) const { return x >= min_value_ && x <= max_value_; }
  double clamp(double x) const;
  // Value the codec actually represents for x (truncation toward zero).
  double snap(double x) const;

  BitVector encode(double x) const;
  int bit_at(double x, Index j) const;
  // Inverse of the linear decomposition applied to per-bit means.  Means are
  // unrestricted reals: unbiased randomized-response means may leave [0, 1].
  double decode_means(const ArrayXd& bit_means) const;

 private:
  FixedPointCodec(int integer_bits, int fractional_bits, SignedMode mode,
                  double shift);

  // Truncated magnitude of a non-negative shifted value; throws out_of_range.
  std::uint64_t raw_magnitude(double v, double original) const;

  int integer_bits_;
  int fractional_bits_;
  SignedMode mode_;
  double shift_;
  double min_value_;
  double max_value_;
  double resolution_;
  ArrayXd weights_;
  ArrayXd squared_weights_;
};

}  // namespace bitpush
