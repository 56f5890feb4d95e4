// SPDX-License-Identifier: Apache-2.0
#pragma once

// Concrete predictor implementations. Most callers only need the factory in
// predictor.hpp; the classes are public so tests and bindings can inspect
// table state.

#include <optional>
#include <unordered_map>
#include <vector>

#include "rlbp/predictor.hpp"

namespace rlbp {

/// Bimodal / gshare: a table of saturating counters.
class CounterPredictor final : public Predictor {
 public:
  explicit CounterPredictor(const PredictorConfig& cfg);

  Direction predict(std::uint64_t pc, const GlobalHistory& h) override;
  void update(std::uint64_t pc, const GlobalHistory& h, Direction predicted,
              Direction actual) override;
  void reset() override;
  std::size_t history_length() const override { return cfg_.history_len; }
  std::uint64_t storage_bits() const override;

  std::size_t index(std::uint64_t pc, const GlobalHistory& h) const;
  const std::vector<SatCounter>& table() const { return table_; }

 private:
  PredictorConfig cfg_;
  std::vector<SatCounter> table_;
};

/// G-QLAg and the generic tabular Q-learning agent. Both keep a Q_T/Q_NT
/// pair per slot, indexed gshare-style. G-QLAg predicts by argmax with a
/// random tie-break and applies the reduced EMA rule; tabular_q selects
/// epsilon-greedily and, for gamma > 0, defers each update one step until
/// the successor state's best Q-value is known.
class QTablePredictor final : public Predictor {
 public:
  explicit QTablePredictor(const PredictorConfig& cfg);

  Direction predict(std::uint64_t pc, const GlobalHistory& h) override;
  void update(std::uint64_t pc, const GlobalHistory& h, Direction predicted,
              Direction actual) override;
  void reset() override;
  std::size_t history_length() const override { return cfg_.history_len; }
  std::uint64_t storage_bits() const override;

  const std::vector<QEntry>& table() const { return table_; }

 private:
  struct PendingUpdate {
    std::size_t index;
    Direction action;
    double reward;
  };

  PredictorConfig cfg_;
  std::mt19937_64 rng_;
  std::vector<QEntry> table_;
  std::optional<PendingUpdate> pending_;
};

/// Integer perceptron over the +-1 global-history view, int8 weights.
class PerceptronPredictor final : public Predictor {
 public:
  explicit PerceptronPredictor(const PredictorConfig& cfg);

  Direction predict(std::uint64_t pc, const GlobalHistory& h) override;
  void update(std::uint64_t pc, const GlobalHistory& h, Direction predicted,
              Direction actual) override;
  void reset() override;
  std::size_t history_length() const override { return cfg_.history_len; }
  std::uint64_t storage_bits() const override;

  int threshold() const { return theta_; }
  std::span<const std::int8_t> weights(std::uint64_t pc) const;

 private:
  std::span<std::int8_t> row(std::uint64_t pc);

  PredictorConfig cfg_;
  int theta_;
  std::vector<std::int8_t> rows_;  // bounded mode, entries x (l + 1)
  std::unordered_map<std::uint64_t, std::vector<std::int8_t>> by_pc_;
};

/// Softmax policy-gradient predictor with a per-PC parameter vector
/// (bias + l weights). The policy and update run in full precision; stored
/// elements are re-quantized to the configured format after each step.
class PolGAgPredictor final : public Predictor {
 public:
  explicit PolGAgPredictor(const PredictorConfig& cfg);

  Direction predict(std::uint64_t pc, const GlobalHistory& h) override;
  void update(std::uint64_t pc, const GlobalHistory& h, Direction predicted,
              Direction actual) override;
  void reset() override;
  std::size_t history_length() const override { return cfg_.history_len; }
  std::uint64_t storage_bits() const override;

  double pi_taken(std::uint64_t pc, const GlobalHistory& h);
  std::span<const double> theta(std::uint64_t pc) const;

 private:
  std::span<double> row(std::uint64_t pc);
  void requantize(std::span<double> theta);

  PredictorConfig cfg_;
  std::mt19937_64 rng_;
  std::vector<double> rows_;  // bounded mode, entries x (l + 1)
  std::unordered_map<std::uint64_t, std::vector<double>> by_pc_;
};

/// Simplified GEHL-style hashed perceptron: M int8 counter tables indexed
/// with geometrically deepening history slices, trained perceptron-style
/// under a fixed threshold.
class GehlPredictor final : public Predictor {
 public:
  explicit GehlPredictor(const PredictorConfig& cfg);

  Direction predict(std::uint64_t pc, const GlobalHistory& h) override;
  void update(std::uint64_t pc, const GlobalHistory& h, Direction predicted,
              Direction actual) override;
  void reset() override;
  std::size_t history_length() const override { return cfg_.history_len; }
  std::uint64_t storage_bits() const override;

  int output(std::uint64_t pc, const GlobalHistory& h) const;
  std::size_t table_index(std::size_t table, std::uint64_t pc,
                          const GlobalHistory& h) const;
  const std::vector<std::size_t>& history_lengths() const { return lens_; }
  std::vector<std::vector<std::int8_t>>& tables() { return tables_; }
  int threshold() const { return theta_; }

 private:
  PredictorConfig cfg_;
  int theta_;
  std::vector<std::size_t> lens_;  // per-table history depth, capped at l
  std::vector<std::vector<std::int8_t>> tables_;
};

/// Test double that replays the recorded outcomes in order.
class OraclePredictor final : public Predictor {
 public:
  explicit OraclePredictor(const Trace& trace);

  Direction predict(std::uint64_t pc, const GlobalHistory& h) override;
  void update(std::uint64_t, const GlobalHistory&, Direction, Direction) override {}
  void reset() override { cursor_ = 0; }
  std::size_t history_length() const override { return 0; }
  std::uint64_t storage_bits() const override { return 0; }

 private:
  std::vector<Direction> outcomes_;
  std::size_t cursor_ = 0;
};

}  // namespace rlbp
