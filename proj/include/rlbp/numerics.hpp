// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

#include "rlbp/direction.hpp"

namespace rlbp {

/// n-bit up/down saturating counter (2 <= n <= 8). Taken increments,
/// not-taken decrements, both clamped; the MSB is the prediction.
class SatCounter {
 public:
  SatCounter() : SatCounter(2) {}
  explicit SatCounter(unsigned bits, unsigned initial = 0);

  void update(Direction d) {
    if (d == Direction::T) {
      if (state_ < max_) ++state_;
    } else {
      if (state_ > 0) --state_;
    }
  }

  bool predicts_taken() const { return state_ >= (max_ + 1u) / 2u; }
  Direction prediction() const { return direction_of(predicts_taken()); }

  unsigned state() const { return state_; }
  unsigned max_state() const { return max_; }

 private:
  std::uint8_t state_;
  std::uint8_t max_;
};

/// Read the slot's prediction, then train it with the actual outcome.
inline Direction counter_predictor_step(SatCounter& slot, Direction actual) {
  const Direction predicted = slot.prediction();
  slot.update(actual);
  return predicted;
}

/// 8-bit minifloat: 1 sign bit, 5 exponent bits (bias 15), 2 mantissa bits.
/// There are no NaN or infinity codes; the top exponent pattern holds
/// ordinary finite values and encode saturates at the largest magnitude.
/// Subnormals are supported, so decode is total on all 256 codes.
namespace minifloat8 {

inline constexpr double kMaxFinite = 114688.0;  // (1 + 3/4) * 2^16

double decode(std::uint8_t code);

/// Round to nearest, ties to even mantissa; out-of-range magnitudes clamp
/// to the largest finite code. Pre: x is finite.
std::uint8_t encode(double x);

constexpr std::uint8_t negate(std::uint8_t code) { return code ^ 0x80u; }

}  // namespace minifloat8

/// 6-bit signed Q-value code in [-31, 31] (code -32 unused); value = c / 31,
/// covering [-1, 1] symmetrically so that negation is exact.
namespace q6 {

std::int8_t quantize(double x);  // clamps to [-1, 1]; nearest, ties away from zero
double dequantize(std::int8_t code);

}  // namespace q6

}  // namespace rlbp
