// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "rlbp/direction.hpp"

namespace rlbp {

/// One conditional-branch event. inst_gap counts the instructions since the
/// previous record, including this branch itself, so it is always >= 1.
struct BranchRecord {
  std::uint64_t pc = 0;
  Direction outcome = Direction::NT;
  std::uint32_t inst_gap = 1;

  bool operator==(const BranchRecord&) const = default;
};

struct Trace {
  std::string name;
  std::vector<BranchRecord> records;
  std::uint64_t total_instructions = 0;  // sum of inst_gap

  bool operator==(const Trace&) const = default;
};

class TraceFormatError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Trace-text format: CSV with header `pc_hex,taken,inst_gap`. pc carries a
/// 0x prefix, taken is 0/1, inst_gap is a positive decimal. The inst_gap
/// column may be omitted (header `pc_hex,taken`) and then defaults to 1.
Trace load_trace(const std::filesystem::path& path);
void save_trace(const Trace& trace, const std::filesystem::path& path);

enum class SyntheticKind : std::uint8_t {
  Pattern,
  XorOfHistory,
  NoisyLinear,
  RandomBias,
  Interleaved,
};

const char* synthetic_kind_name(SyntheticKind kind);
SyntheticKind synthetic_kind_from_name(const std::string& name);

/// Recipe for a synthetic workload with known ground-truth structure.
/// Interleaved specs round-robin their parts over distinct PCs; part
/// generators that read history read the history of the whole interleaved
/// stream, so parts can correlate across branches.
struct SyntheticSpec {
  SyntheticKind kind = SyntheticKind::RandomBias;
  std::string name = "synthetic";
  std::uint64_t pc = 0x400000;
  std::size_t length = 0;
  std::uint64_t seed = 1;

  std::string pattern;                 // Pattern: string over {T, N}
  std::size_t xor_i = 1;               // XorOfHistory offsets, >= 1
  std::size_t xor_j = 2;
  std::vector<double> weights;         // NoisyLinear: w_1..w_l
  double bias = 0.0;
  double flip_prob = 0.0;
  double taken_prob = 0.5;             // RandomBias
  std::vector<SyntheticSpec> parts;    // Interleaved sub-streams

  bool operator==(const SyntheticSpec&) const = default;
};

/// Throws std::invalid_argument on out-of-range fields.
void validate_spec(const SyntheticSpec& spec);

/// Deterministic for a fixed seed; all randomness comes from one generator
/// consumed in record order.
Trace generate_synthetic(const SyntheticSpec& spec);

}  // namespace rlbp
