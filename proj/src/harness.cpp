// SPDX-License-Identifier: Apache-2.0
#include "rlbp/harness.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <thread>

#include "rlbp/rng.hpp"

namespace rlbp {

RunStats run_single(Predictor& p, const Trace& trace, std::size_t warmup) {
  if (trace.records.empty()) throw std::invalid_argument("empty trace");
  RunStats stats;
  GlobalHistory hist(p.history_length());
  std::size_t i = 0;
  for (const auto& rec : trace.records) {
    const Direction predicted = p.predict(rec.pc, hist);
    if (i >= warmup) {
      ++stats.branches;
      stats.instructions += rec.inst_gap;
      if (predicted != rec.outcome) ++stats.mispredictions;
    } else {
      ++stats.warmup_skipped;
    }
    p.update(rec.pc, hist, predicted, rec.outcome);
    hist.push(rec.outcome);
    ++i;
  }
  return stats;
}

std::uint64_t budget_to_entries(std::uint64_t bits_per_entry, std::uint64_t budget_bits) {
  if (bits_per_entry == 0) throw std::invalid_argument("bits_per_entry must be > 0");
  if (budget_bits < bits_per_entry)
    throw std::invalid_argument("budget too small for one entry");
  const std::uint64_t max_entries = budget_bits / bits_per_entry;
  std::uint64_t n = 1;
  while (n * 2 <= max_entries) n *= 2;
  return n;
}

std::uint64_t bits_per_entry(const PredictorConfig& cfg) {
  switch (cfg.kind) {
    case PredictorKind::Bimodal:
    case PredictorKind::Gshare:
      return cfg.counter_bits;
    case PredictorKind::GQlag:
    case PredictorKind::TabularQ:
      return cfg.q_format == QFormat::Q6 ? 12u : 128u;  // two Q-values per entry
    case PredictorKind::Perceptron:
    case PredictorKind::PolGAg:
      return std::uint64_t{cfg.history_len + 1} * weight_type_bits(cfg.weight_type);
    case PredictorKind::Gehl:
      return std::uint64_t{cfg.gehl_tables} * 8u;  // one int8 slot per table
  }
  throw std::invalid_argument("unknown predictor kind");
}

std::pair<double, double> aggregate_stats(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("aggregate_stats: empty input");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(values.size());
  return {mean, std::sqrt(var)};
}

const char* metric_name(Metric m) {
  switch (m) {
    case Metric::Auto: return "auto";
    case Metric::Mpki: return "mpki";
    case Metric::Mpkb: return "mpkb";
  }
  return "?";
}

Metric metric_from_name(const std::string& name) {
  if (name == "auto") return Metric::Auto;
  if (name == "mpki") return Metric::Mpki;
  if (name == "mpkb") return Metric::Mpkb;
  throw std::invalid_argument("unknown metric: '" + name + "'");
}

void validate_experiment(const ExperimentConfig& cfg) {
  if (cfg.predictors.empty()) throw std::invalid_argument("sweep needs predictors");
  if (cfg.traces.empty()) throw std::invalid_argument("sweep needs traces");
  if (cfg.history_lengths.empty())
    throw std::invalid_argument("sweep needs history lengths");
  for (std::size_t i = 1; i < cfg.history_lengths.size(); ++i)
    if (cfg.history_lengths[i] <= cfg.history_lengths[i - 1])
      throw std::invalid_argument("history lengths must be strictly increasing");
  if (cfg.budget_bits && *cfg.budget_bits == 0)
    throw std::invalid_argument("budget must be > 0");
  for (const auto& p : cfg.predictors) validate_config(p);
  if (cfg.threads == 0) throw std::invalid_argument("threads must be >= 1");
}

namespace {

Trace materialize(const TraceSource& src) {
  if (src.spec) {
    Trace t = generate_synthetic(*src.spec);
    if (!src.label.empty()) t.name = src.label;
    return t;
  }
  Trace t = load_trace(src.file);
  if (!src.label.empty()) t.name = src.label;
  return t;
}

std::string format_metric(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

SweepResult sweep(const ExperimentConfig& cfg) {
  validate_experiment(cfg);

  std::vector<Trace> traces;
  traces.reserve(cfg.traces.size());
  for (const auto& src : cfg.traces) traces.push_back(materialize(src));

  const std::size_t n_pred = cfg.predictors.size();
  const std::size_t n_len = cfg.history_lengths.size();
  const std::size_t n_trace = traces.size();
  const std::size_t n_cells = n_pred * n_len * n_trace;

  // Resolve each cell's configuration up front; this also surfaces budget
  // errors before any work starts. The seed mixes the (predictor, length)
  // pair index, not the trace index, so identical traces see identical
  // predictor RNG streams and aggregate with zero spread.
  std::vector<PredictorConfig> cell_cfgs(n_cells);
  for (std::size_t ci = 0; ci < n_cells; ++ci) {
    const std::size_t li = (ci / n_trace) % n_len;
    const std::size_t pi = ci / (n_trace * n_len);
    PredictorConfig pc = cfg.predictors[pi];
    pc.history_len = cfg.history_lengths[li];
    if (cfg.budget_bits && !pc.unbounded)
      pc.entries = budget_to_entries(bits_per_entry(pc), *cfg.budget_bits);
    pc.seed = mix_seed(cfg.master_seed, pi * n_len + li);
    validate_config(pc);
    cell_cfgs[ci] = std::move(pc);
  }

  SweepResult result;
  result.cells.resize(n_cells);
  std::vector<std::string> errors(n_cells);

  auto run_cell = [&](std::size_t ci) {
    const std::size_t ti = ci % n_trace;
    const PredictorConfig& pc = cell_cfgs[ci];
    SweepCell cell;
    cell.predictor = pc.label();
    cell.kind = kind_name(pc.kind);
    cell.history_len = pc.history_len;
    cell.trace = traces[ti].name;
    cell.seed = pc.seed;
    try {
      auto predictor = make_predictor(pc);
      cell.stats = run_single(*predictor, traces[ti], cfg.warmup);
    } catch (const std::exception& e) {
      errors[ci] = std::string(e.what()) + " [cell predictor=" + cell.predictor +
                   " history_len=" + std::to_string(cell.history_len) +
                   " trace=" + cell.trace + "]";
    }
    result.cells[ci] = std::move(cell);
  };

  if (cfg.threads <= 1 || n_cells <= 1) {
    for (std::size_t ci = 0; ci < n_cells; ++ci) run_cell(ci);
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      while (true) {
        const std::size_t ci = next.fetch_add(1);
        if (ci >= n_cells) return;
        run_cell(ci);
      }
    };
    std::vector<std::thread> pool;
    const unsigned n_threads = std::min<unsigned>(cfg.threads, n_cells);
    pool.reserve(n_threads);
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (const auto& err : errors)
    if (!err.empty()) throw std::runtime_error("sweep cell failed: " + err);

  // Metric::Auto reports MPKI only when every trace carries real
  // instruction counts; otherwise it falls back to the honest MPKB.
  Metric metric = cfg.metric;
  if (metric == Metric::Auto) {
    bool has_gaps = true;
    for (const auto& t : traces)
      has_gaps = has_gaps && t.total_instructions > t.records.size();
    metric = has_gaps ? Metric::Mpki : Metric::Mpkb;
  }
  result.metric_used = metric;

  for (std::size_t pi = 0; pi < n_pred; ++pi) {
    for (std::size_t li = 0; li < n_len; ++li) {
      std::vector<double> values;
      values.reserve(n_trace);
      for (std::size_t ti = 0; ti < n_trace; ++ti) {
        const auto& stats = result.cells[(pi * n_len + li) * n_trace + ti].stats;
        values.push_back(metric == Metric::Mpki ? stats.mpki() : stats.mpkb());
      }
      const auto [mean, stddev] = aggregate_stats(values);
      result.aggregates.push_back(SweepAggregate{cfg.predictors[pi].label(),
                                                 kind_name(cfg.predictors[pi].kind),
                                                 cfg.history_lengths[li], mean, stddev});
    }
  }
  return result;
}

const char* const kSweepCsvHeader =
    "predictor,kind,history_len,trace,branches,mispred,instructions,mpki,mpkb,seed,"
    "mean,std";

std::string sweep_csv(const SweepResult& result) {
  std::string out(kSweepCsvHeader);
  out += '\n';
  for (const auto& cell : result.cells) {
    out += cell.predictor;
    out += ',';
    out += cell.kind;
    out += ',';
    out += std::to_string(cell.history_len);
    out += ',';
    out += cell.trace;
    out += ',';
    out += std::to_string(cell.stats.branches);
    out += ',';
    out += std::to_string(cell.stats.mispredictions);
    out += ',';
    out += std::to_string(cell.stats.instructions);
    out += ',';
    out += format_metric(cell.stats.mpki());
    out += ',';
    out += format_metric(cell.stats.mpkb());
    out += ',';
    out += std::to_string(cell.seed);
    out += ",,\n";
  }
  for (const auto& agg : result.aggregates) {
    out += agg.predictor;
    out += ',';
    out += agg.kind;
    out += ',';
    out += std::to_string(agg.history_len);
    out += ",ALL,,,,,,,";
    out += format_metric(agg.mean);
    out += ',';
    out += format_metric(agg.stddev);
    out += '\n';
  }
  return out;
}

}  // namespace rlbp
