// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "rlbp/direction.hpp"
#include "rlbp/history.hpp"
#include "rlbp/trace.hpp"

namespace rlbp {

/// The +-1 view of the global history at the moment the target branch is
/// reached, newest first, zero-padded while the history is cold.
using Observation = std::vector<std::int8_t>;

struct StepResult {
  Observation obs;  // next occurrence's snapshot; the final one repeats once done
  int reward = 0;   // +1 on a correct action, -1 otherwise
  bool done = false;
};

/// Per-branch episode over a recorded trace: the agent acts with a
/// direction, the environment returns the next observation, a +-1 reward,
/// and a done flag that fires exactly once, on the last occurrence of the
/// target branch. Actions never alter the trace; all global-history
/// snapshots are precomputed from the recorded outcomes in one pass.
class BranchEnv {
 public:
  /// Throws std::invalid_argument if target_pc never occurs or ghr_len == 0.
  BranchEnv(const Trace& trace, std::uint64_t target_pc, std::size_t ghr_len);

  Observation reset();
  StepResult step(Direction action);  // throws std::logic_error after done

  std::size_t occurrences() const { return outcomes_.size(); }
  std::size_t ghr_len() const { return ghr_len_; }
  bool done() const { return cursor_ >= outcomes_.size(); }

  /// Recorded outcome of occurrence i (handy for oracle agents in tests).
  Direction outcome(std::size_t i) const { return outcomes_[i]; }

 private:
  std::size_t ghr_len_;
  std::vector<Observation> snapshots_;
  std::vector<Direction> outcomes_;
  std::size_t cursor_ = 0;
};

/// Rebuild a history object from an observation so table predictors can be
/// driven as environment agents. Zero pad bits are skipped, matching a
/// history that simply has not filled up yet.
GlobalHistory history_from_observation(const Observation& obs);

}  // namespace rlbp
