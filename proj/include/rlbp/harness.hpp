// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rlbp/predictor.hpp"
#include "rlbp/trace.hpp"

namespace rlbp {

struct RunStats {
  std::uint64_t branches = 0;
  std::uint64_t mispredictions = 0;
  std::uint64_t instructions = 0;
  std::uint64_t warmup_skipped = 0;

  double mpki() const {
    return instructions ? 1000.0 * static_cast<double>(mispredictions) /
                              static_cast<double>(instructions)
                        : 0.0;
  }
  double mpkb() const {
    return branches ? 1000.0 * static_cast<double>(mispredictions) /
                          static_cast<double>(branches)
                    : 0.0;
  }

  bool operator==(const RunStats&) const = default;
};

/// Drive one predictor over one trace: predict, compare, update, then push
/// the actual outcome into the history. The first `warmup` records train the
/// predictor but are excluded from the counts.
RunStats run_single(Predictor& p, const Trace& trace, std::size_t warmup);

/// Largest power of two N with N * bits_per_entry <= budget_bits.
/// Throws std::invalid_argument when not even one entry fits.
std::uint64_t budget_to_entries(std::uint64_t bits_per_entry, std::uint64_t budget_bits);

/// Storage cost of one table entry (or one row for the per-PC predictors).
std::uint64_t bits_per_entry(const PredictorConfig& cfg);

/// Arithmetic mean and population standard deviation. Throws on empty input.
std::pair<double, double> aggregate_stats(std::span<const double> values);

enum class Metric : std::uint8_t { Auto, Mpki, Mpkb };

const char* metric_name(Metric m);
Metric metric_from_name(const std::string& name);

/// A sweep input: either a trace file or a synthetic recipe.
struct TraceSource {
  std::string label;
  std::filesystem::path file;          // used when spec is absent
  std::optional<SyntheticSpec> spec;
};

struct ExperimentConfig {
  std::vector<PredictorConfig> predictors;
  std::vector<TraceSource> traces;
  std::vector<std::size_t> history_lengths;  // strictly increasing
  std::optional<std::uint64_t> budget_bits;  // derive entries per predictor
  Metric metric = Metric::Auto;
  std::size_t warmup = 1000;
  std::uint64_t master_seed = 1;
  unsigned threads = 1;
};

void validate_experiment(const ExperimentConfig& cfg);

struct SweepCell {
  std::string predictor;  // config label
  std::string kind;
  std::size_t history_len = 0;
  std::string trace;
  std::uint64_t seed = 0;
  RunStats stats;
};

struct SweepAggregate {
  std::string predictor;
  std::string kind;
  std::size_t history_len = 0;
  double mean = 0.0;
  double stddev = 0.0;
};

struct SweepResult {
  std::vector<SweepCell> cells;            // deterministic grid order
  std::vector<SweepAggregate> aggregates;  // per (predictor, history length)
  Metric metric_used = Metric::Mpkb;
};

/// Cartesian product of predictors x history lengths x traces. Cells are
/// independent; `threads` > 1 runs them concurrently with results gathered
/// in grid order, and every cell's seed derives from (master seed, grid
/// index) via mix_seed, so the outcome is identical at any concurrency.
SweepResult sweep(const ExperimentConfig& cfg);

/// CSV per the documented contract: one row per cell, then aggregate rows
/// flagged trace=ALL carrying the mean and std columns.
std::string sweep_csv(const SweepResult& result);

extern const char* const kSweepCsvHeader;

}  // namespace rlbp
