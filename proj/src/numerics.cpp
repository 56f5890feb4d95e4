// SPDX-License-Identifier: Apache-2.0
#include "rlbp/numerics.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

namespace rlbp {

SatCounter::SatCounter(unsigned bits, unsigned initial) {
  if (bits < 2 || bits > 8)
    throw std::invalid_argument("SatCounter width must be in [2, 8]");
  max_ = static_cast<std::uint8_t>((1u << bits) - 1u);
  if (initial > max_)
    throw std::invalid_argument("SatCounter initial state out of range");
  state_ = static_cast<std::uint8_t>(initial);
}

namespace minifloat8 {
namespace {

// Magnitude codes are continuous: code m = (exponent_field << 2) | mantissa,
// m in [0, 127], and the represented magnitude is monotone in m.
double magnitude(std::uint8_t m) {
  const int exp_field = m >> 2;
  const int mant = m & 3;
  if (exp_field == 0) return std::ldexp(mant, -16);        // subnormal: mant * 2^-16
  return std::ldexp(4 + mant, exp_field - 17);             // (1 + mant/4) * 2^(exp-15)
}

}  // namespace

double decode(std::uint8_t code) {
  const double mag = magnitude(code & 0x7Fu);
  return (code & 0x80u) ? -mag : mag;
}

std::uint8_t encode(double x) {
  assert(std::isfinite(x));
  const std::uint8_t sign = std::signbit(x) ? 0x80u : 0x00u;
  const double a = std::fabs(x);
  if (a == 0.0) return sign;

  // Scale so the nearest integer is the magnitude code's significand slot:
  // subnormals quantize on a 2^-16 grid, normals on [4, 8) per binade.
  int bin_exp;
  std::frexp(a, &bin_exp);           // a = f * 2^bin_exp, f in [0.5, 1)
  const int unbiased = bin_exp - 1;  // a = (2f) * 2^unbiased, 2f in [1, 2)
  int exp_field;
  double scaled;
  if (unbiased < -14) {
    exp_field = 0;
    scaled = std::ldexp(a, 16);
  } else {
    exp_field = unbiased + 15;
    scaled = std::ldexp(a, 2 - unbiased);
  }

  // Round half to even.
  const double floor_v = std::floor(scaled);
  const double frac = scaled - floor_v;
  long q = static_cast<long>(floor_v);
  if (frac > 0.5 || (frac == 0.5 && (q & 1)))
    ++q;

  long code = (exp_field == 0) ? q : exp_field * 4 + (q - 4);
  code = std::clamp(code, long{0}, long{127});
  return sign | static_cast<std::uint8_t>(code);
}

}  // namespace minifloat8

namespace q6 {

std::int8_t quantize(double x) {
  const double clamped = std::clamp(x, -1.0, 1.0);
  // std::lround rounds halfway cases away from zero, as required.
  return static_cast<std::int8_t>(std::lround(clamped * 31.0));
}

double dequantize(std::int8_t code) {
  assert(code >= -31 && code <= 31);
  return static_cast<double>(code) / 31.0;
}

}  // namespace q6

}  // namespace rlbp
