// SPDX-License-Identifier: Apache-2.0
#include "rlbp/env.hpp"

#include <stdexcept>

namespace rlbp {

BranchEnv::BranchEnv(const Trace& trace, std::uint64_t target_pc, std::size_t ghr_len)
    : ghr_len_(ghr_len) {
  if (ghr_len == 0) throw std::invalid_argument("ghr_len must be >= 1");
  GlobalHistory hist(ghr_len);
  for (const auto& rec : trace.records) {
    if (rec.pc == target_pc) {
      snapshots_.push_back(hist.signed_view(ghr_len));
      outcomes_.push_back(rec.outcome);
    }
    hist.push(rec.outcome);
  }
  if (outcomes_.empty())
    throw std::invalid_argument("target pc does not occur in trace '" + trace.name + "'");
}

Observation BranchEnv::reset() {
  cursor_ = 0;
  return snapshots_.front();
}

StepResult BranchEnv::step(Direction action) {
  if (done()) throw std::logic_error("step() called after the episode ended");
  StepResult result;
  result.reward = action == outcomes_[cursor_] ? +1 : -1;
  ++cursor_;
  result.done = done();
  result.obs = result.done ? snapshots_.back() : snapshots_[cursor_];
  return result;
}

GlobalHistory history_from_observation(const Observation& obs) {
  GlobalHistory hist(obs.size());
  // Oldest first; stop at the zero padding, which marks unfilled positions.
  std::size_t filled = 0;
  while (filled < obs.size() && obs[filled] != 0) ++filled;
  for (std::size_t k = filled; k-- > 0;)
    hist.push(obs[k] > 0 ? Direction::T : Direction::NT);
  return hist;
}

}  // namespace rlbp
