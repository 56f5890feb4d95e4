// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <vector>

#include "rlbp/direction.hpp"

namespace rlbp {

/// Fixed-capacity shift register of the most recent branch outcomes.
/// Bit 0 is the newest outcome; pushing at capacity drops the oldest bit.
/// Positions past the current length read as 0 in the +-1 view, so a cold
/// history contributes nothing to dot products.
class GlobalHistory {
 public:
  explicit GlobalHistory(std::size_t capacity)
      : bits_(capacity), head_(0), count_(0) {}

  void push(Direction d) {
    if (bits_.empty()) return;
    head_ = (head_ + bits_.size() - 1) % bits_.size();
    bits_[head_] = static_cast<std::uint8_t>(d);
    count_ = std::min(count_ + 1, bits_.size());
  }

  std::size_t capacity() const { return bits_.size(); }
  std::size_t size() const { return count_; }

  /// k = 0 is the newest outcome. Pre: k < size().
  Direction bit(std::size_t k) const {
    assert(k < count_);
    return static_cast<Direction>(bits_[(head_ + k) % bits_.size()]);
  }

  /// +1 taken, -1 not-taken, 0 beyond the current length.
  int signed_bit(std::size_t k) const {
    if (k >= count_) return 0;
    return signed_value(bit(k));
  }

  /// XOR-compress the newest `used` bits into `out_bits` bits by folding
  /// successive out_bits-sized chunks onto each other.
  std::uint64_t fold(std::size_t used, unsigned out_bits) const {
    if (out_bits == 0) return 0;
    std::uint64_t acc = 0;
    const std::size_t n = std::min(used, count_);
    for (std::size_t k = 0; k < n; ++k)
      if (bit(k) == Direction::T) acc ^= std::uint64_t{1} << (k % out_bits);
    return acc;
  }

  /// The +-1 view of the newest l bits, newest first, zero-padded.
  std::vector<std::int8_t> signed_view(std::size_t l) const {
    std::vector<std::int8_t> v(l);
    for (std::size_t k = 0; k < l; ++k)
      v[k] = static_cast<std::int8_t>(signed_bit(k));
    return v;
  }

  void clear() {
    head_ = 0;
    count_ = 0;
  }

 private:
  std::vector<std::uint8_t> bits_;
  std::size_t head_;
  std::size_t count_;
};

}  // namespace rlbp
