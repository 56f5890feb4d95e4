// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

namespace rlbp {

/// Branch outcome and, equally, predictor action: taken or not-taken.
enum class Direction : std::uint8_t { NT = 0, T = 1 };

constexpr Direction flip(Direction d) {
  return d == Direction::T ? Direction::NT : Direction::T;
}

/// +1 for taken, -1 for not-taken.
constexpr int signed_value(Direction d) { return d == Direction::T ? +1 : -1; }

constexpr bool is_taken(Direction d) { return d == Direction::T; }

constexpr Direction direction_of(bool taken) {
  return taken ? Direction::T : Direction::NT;
}

constexpr char direction_char(Direction d) {
  return d == Direction::T ? 'T' : 'N';
}

}  // namespace rlbp
