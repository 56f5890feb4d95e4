// SPDX-License-Identifier: Apache-2.0
#include "rlbp/predictors.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <cmath>
#include <stdexcept>

#include "rlbp/rng.hpp"
#include "rlbp/trace.hpp"

namespace rlbp {

namespace {

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::int8_t sat_add8(std::int8_t v, int delta) {
  return static_cast<std::int8_t>(std::clamp(int{v} + delta, -127, 127));
}

double q6_roundtrip(double x) { return q6::dequantize(q6::quantize(x)); }

}  // namespace

unsigned log2_exact(std::size_t n) {
  assert(is_pow2(n));
  return static_cast<unsigned>(std::countr_zero(n));
}

Direction argmax_direction(double q_t, double q_nt, std::mt19937_64& rng) {
  if (q_t > q_nt) return Direction::T;
  if (q_t < q_nt) return Direction::NT;
  return (rng() & 1u) ? Direction::T : Direction::NT;
}

Direction epsilon_greedy_select(double q_t, double q_nt, double epsilon,
                                std::mt19937_64& rng) {
  if (epsilon > 0.0 && unit_double(rng) < epsilon)
    return (rng() & 1u) ? Direction::T : Direction::NT;
  return argmax_direction(q_t, q_nt, rng);
}

Direction gqlag_predict(const QEntry& e, std::mt19937_64& rng) {
  return argmax_direction(e.q_taken, e.q_not_taken, rng);
}

void gqlag_update(QEntry& e, Direction predicted, double reward, double alpha,
                  QFormat fmt) {
  double& side = predicted == Direction::T ? e.q_taken : e.q_not_taken;
  side = ema_update(side, reward, alpha);
  if (fmt == QFormat::Q6) side = q6_roundtrip(side);
}

int perceptron_output(std::span<const std::int8_t> w, const GlobalHistory& h) {
  int y = w[0];
  for (std::size_t k = 1; k < w.size(); ++k)
    y += int{w[k]} * h.signed_bit(k - 1);
  return y;
}

int perceptron_default_theta(std::size_t l) {
  return static_cast<int>(std::floor(1.93 * static_cast<double>(l) + 14.0));
}

void perceptron_train(std::span<std::int8_t> w, const GlobalHistory& h,
                      Direction actual, int y, int theta) {
  const Direction predicted = direction_of(y >= 0);
  if (predicted == actual && std::abs(y) > theta) return;
  const int t = signed_value(actual);
  w[0] = sat_add8(w[0], t);
  for (std::size_t k = 1; k < w.size(); ++k)
    w[k] = sat_add8(w[k], t * h.signed_bit(k - 1));
}

double polgag_pi_taken(std::span<const double> theta, const GlobalHistory& h) {
  double dot = theta[0];
  for (std::size_t k = 1; k < theta.size(); ++k)
    dot += theta[k] * h.signed_bit(k - 1);
  return 1.0 / (1.0 + std::exp(-2.0 * dot));
}

Direction polgag_select(double pi_taken, PolicyMode mode, std::mt19937_64& rng) {
  if (mode == PolicyMode::Greedy) return direction_of(pi_taken >= 0.5);
  return direction_of(coin(rng, pi_taken));
}

void polgag_update(std::span<double> theta, const GlobalHistory& h,
                   Direction action, double reward, double alpha) {
  const double pi_t = polgag_pi_taken(theta, h);
  const double pi_action = action == Direction::T ? pi_t : 1.0 - pi_t;
  const double pi_bar = 1.0 - pi_action;
  const double step = alpha * reward * pi_bar * signed_value(action);
  theta[0] += step;
  for (std::size_t k = 1; k < theta.size(); ++k)
    theta[k] += step * h.signed_bit(k - 1);
}

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

const char* kind_name(PredictorKind kind) {
  switch (kind) {
    case PredictorKind::Bimodal: return "bimodal";
    case PredictorKind::Gshare: return "gshare";
    case PredictorKind::GQlag: return "gqlag";
    case PredictorKind::TabularQ: return "tabular_q";
    case PredictorKind::Perceptron: return "perceptron";
    case PredictorKind::PolGAg: return "polgag";
    case PredictorKind::Gehl: return "gehl";
  }
  return "?";
}

PredictorKind kind_from_name(std::string_view name) {
  if (name == "bimodal") return PredictorKind::Bimodal;
  if (name == "gshare") return PredictorKind::Gshare;
  if (name == "gqlag") return PredictorKind::GQlag;
  if (name == "tabular_q") return PredictorKind::TabularQ;
  if (name == "perceptron") return PredictorKind::Perceptron;
  if (name == "polgag") return PredictorKind::PolGAg;
  if (name == "gehl") return PredictorKind::Gehl;
  throw std::invalid_argument("unknown predictor kind: '" + std::string(name) + "'");
}

const char* weight_type_name(WeightType t) {
  switch (t) {
    case WeightType::Int8: return "int8";
    case WeightType::MiniFloat8: return "minifloat8";
    case WeightType::Float32: return "float32";
  }
  return "?";
}

WeightType weight_type_from_name(std::string_view name) {
  if (name == "int8") return WeightType::Int8;
  if (name == "minifloat8") return WeightType::MiniFloat8;
  if (name == "float32") return WeightType::Float32;
  throw std::invalid_argument("unknown weight type: '" + std::string(name) + "'");
}

unsigned weight_type_bits(WeightType t) {
  return t == WeightType::Float32 ? 32u : 8u;
}

PredictorConfig default_config(PredictorKind kind) {
  PredictorConfig cfg;
  cfg.kind = kind;
  switch (kind) {
    case PredictorKind::Bimodal:
    case PredictorKind::Gshare:
      break;
    case PredictorKind::GQlag:
      cfg.alpha = 0.2;
      cfg.q_format = QFormat::Q6;
      break;
    case PredictorKind::TabularQ:
      cfg.alpha = 0.2;
      cfg.q_format = QFormat::Full;
      break;
    case PredictorKind::Perceptron:
      cfg.entries = 1024;
      cfg.weight_type = WeightType::Int8;
      break;
    case PredictorKind::PolGAg:
      cfg.entries = 1024;
      cfg.alpha = 0.01;
      cfg.weight_type = WeightType::MiniFloat8;
      break;
    case PredictorKind::Gehl:
      break;
  }
  return cfg;
}

void validate_config(const PredictorConfig& cfg) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
  };
  if (!cfg.unbounded) require(is_pow2(cfg.entries), "entries must be a power of two");
  require(cfg.alpha > 0.0, "alpha must be > 0");
  require(cfg.gamma >= 0.0 && cfg.gamma < 1.0, "gamma must be in [0, 1)");
  require(cfg.epsilon >= 0.0 && cfg.epsilon <= 1.0, "epsilon must be in [0, 1]");
  switch (cfg.kind) {
    case PredictorKind::Bimodal:
    case PredictorKind::Gshare:
      require(cfg.counter_bits >= 2 && cfg.counter_bits <= 8,
              "counter_bits must be in [2, 8]");
      require(!cfg.unbounded, "counter predictors are table based");
      break;
    case PredictorKind::GQlag:
    case PredictorKind::TabularQ:
      require(!cfg.unbounded, "Q-table predictors are table based");
      break;
    case PredictorKind::Perceptron:
      require(cfg.weight_type == WeightType::Int8, "perceptron weights are int8");
      break;
    case PredictorKind::PolGAg:
      require(cfg.weight_type != WeightType::Int8,
              "polgag weights must be minifloat8 or float32");
      break;
    case PredictorKind::Gehl:
      require(cfg.gehl_tables >= 1, "gehl needs at least one table");
      require(is_pow2(cfg.gehl_entries), "gehl_entries must be a power of two");
      require(cfg.gehl_ratio >= 1.0, "gehl_ratio must be >= 1");
      require(!cfg.unbounded, "gehl is table based");
      break;
  }
}

// ---------------------------------------------------------------------------
// CounterPredictor
// ---------------------------------------------------------------------------

CounterPredictor::CounterPredictor(const PredictorConfig& cfg) : cfg_(cfg) {
  validate_config(cfg_);
  table_.assign(cfg_.entries, SatCounter(cfg_.counter_bits));
}

std::size_t CounterPredictor::index(std::uint64_t pc, const GlobalHistory& h) const {
  if (cfg_.kind == PredictorKind::Bimodal) return index_bimodal(pc, table_.size());
  return index_gshare(pc, h, cfg_.history_len, table_.size());
}

Direction CounterPredictor::predict(std::uint64_t pc, const GlobalHistory& h) {
  return table_[index(pc, h)].prediction();
}

void CounterPredictor::update(std::uint64_t pc, const GlobalHistory& h, Direction,
                              Direction actual) {
  table_[index(pc, h)].update(actual);
}

void CounterPredictor::reset() {
  table_.assign(cfg_.entries, SatCounter(cfg_.counter_bits));
}

std::uint64_t CounterPredictor::storage_bits() const {
  return std::uint64_t{table_.size()} * cfg_.counter_bits;
}

// ---------------------------------------------------------------------------
// QTablePredictor
// ---------------------------------------------------------------------------

QTablePredictor::QTablePredictor(const PredictorConfig& cfg)
    : cfg_(cfg), rng_(cfg.seed), table_(cfg.entries) {
  validate_config(cfg_);
}

Direction QTablePredictor::predict(std::uint64_t pc, const GlobalHistory& h) {
  const std::size_t idx = index_gshare(pc, h, cfg_.history_len, table_.size());
  if (pending_) {
    // The successor state is now known; land the deferred update before
    // reading the entry so the bootstrap term sees fresh values.
    const QEntry& next = table_[idx];
    const double next_max = std::max(next.q_taken, next.q_not_taken);
    QEntry& e = table_[pending_->index];
    double& side = pending_->action == Direction::T ? e.q_taken : e.q_not_taken;
    side = q_learning_update(side, pending_->reward, cfg_.gamma, next_max, cfg_.alpha);
    if (cfg_.q_format == QFormat::Q6) side = q6_roundtrip(side);
    pending_.reset();
  }
  const QEntry& e = table_[idx];
  if (cfg_.kind == PredictorKind::GQlag) return gqlag_predict(e, rng_);
  return epsilon_greedy_select(e.q_taken, e.q_not_taken, cfg_.epsilon, rng_);
}

void QTablePredictor::update(std::uint64_t pc, const GlobalHistory& h,
                             Direction predicted, Direction actual) {
  const double reward = prediction_reward(predicted, actual);
  const std::size_t idx = index_gshare(pc, h, cfg_.history_len, table_.size());
  if (cfg_.kind == PredictorKind::TabularQ && cfg_.gamma > 0.0) {
    pending_ = PendingUpdate{idx, predicted, reward};
  } else {
    gqlag_update(table_[idx], predicted, reward, cfg_.alpha, cfg_.q_format);
  }
}

void QTablePredictor::reset() {
  table_.assign(cfg_.entries, QEntry{});
  rng_.seed(cfg_.seed);
  pending_.reset();
}

std::uint64_t QTablePredictor::storage_bits() const {
  const unsigned per_entry = cfg_.q_format == QFormat::Q6 ? 12u : 128u;
  return std::uint64_t{table_.size()} * per_entry;
}

// ---------------------------------------------------------------------------
// PerceptronPredictor
// ---------------------------------------------------------------------------

PerceptronPredictor::PerceptronPredictor(const PredictorConfig& cfg) : cfg_(cfg) {
  validate_config(cfg_);
  theta_ = cfg_.perceptron_theta >= 0 ? cfg_.perceptron_theta
                                      : perceptron_default_theta(cfg_.history_len);
  if (!cfg_.unbounded) rows_.assign(cfg_.entries * (cfg_.history_len + 1), 0);
}

std::span<std::int8_t> PerceptronPredictor::row(std::uint64_t pc) {
  const std::size_t width = cfg_.history_len + 1;
  if (cfg_.unbounded) {
    auto [it, inserted] = by_pc_.try_emplace(pc);
    if (inserted) it->second.assign(width, 0);
    return it->second;
  }
  return std::span<std::int8_t>(rows_).subspan(index_bimodal(pc, cfg_.entries) * width,
                                               width);
}

std::span<const std::int8_t> PerceptronPredictor::weights(std::uint64_t pc) const {
  return const_cast<PerceptronPredictor*>(this)->row(pc);
}

Direction PerceptronPredictor::predict(std::uint64_t pc, const GlobalHistory& h) {
  return direction_of(perceptron_output(row(pc), h) >= 0);
}

void PerceptronPredictor::update(std::uint64_t pc, const GlobalHistory& h, Direction,
                                 Direction actual) {
  auto w = row(pc);
  const int y = perceptron_output(w, h);
  perceptron_train(w, h, actual, y, theta_);
}

void PerceptronPredictor::reset() {
  std::fill(rows_.begin(), rows_.end(), std::int8_t{0});
  by_pc_.clear();
}

std::uint64_t PerceptronPredictor::storage_bits() const {
  const std::uint64_t nrows = cfg_.unbounded ? by_pc_.size() : cfg_.entries;
  return nrows * (cfg_.history_len + 1) * 8u;
}

// ---------------------------------------------------------------------------
// PolGAgPredictor
// ---------------------------------------------------------------------------

PolGAgPredictor::PolGAgPredictor(const PredictorConfig& cfg)
    : cfg_(cfg), rng_(cfg.seed) {
  validate_config(cfg_);
  if (!cfg_.unbounded) rows_.assign(cfg_.entries * (cfg_.history_len + 1), 0.0);
}

std::span<double> PolGAgPredictor::row(std::uint64_t pc) {
  const std::size_t width = cfg_.history_len + 1;
  if (cfg_.unbounded) {
    auto [it, inserted] = by_pc_.try_emplace(pc);
    if (inserted) it->second.assign(width, 0.0);
    return it->second;
  }
  return std::span<double>(rows_).subspan(index_bimodal(pc, cfg_.entries) * width,
                                          width);
}

std::span<const double> PolGAgPredictor::theta(std::uint64_t pc) const {
  return const_cast<PolGAgPredictor*>(this)->row(pc);
}

void PolGAgPredictor::requantize(std::span<double> theta) {
  switch (cfg_.weight_type) {
    case WeightType::MiniFloat8:
      for (double& x : theta) x = minifloat8::decode(minifloat8::encode(x));
      break;
    case WeightType::Float32:
      for (double& x : theta) x = static_cast<double>(static_cast<float>(x));
      break;
    case WeightType::Int8:
      break;  // rejected by validate_config
  }
}

double PolGAgPredictor::pi_taken(std::uint64_t pc, const GlobalHistory& h) {
  return polgag_pi_taken(row(pc), h);
}

Direction PolGAgPredictor::predict(std::uint64_t pc, const GlobalHistory& h) {
  return polgag_select(polgag_pi_taken(row(pc), h), cfg_.policy_mode, rng_);
}

void PolGAgPredictor::update(std::uint64_t pc, const GlobalHistory& h,
                             Direction predicted, Direction actual) {
  const double reward = prediction_reward(predicted, actual);
  auto theta = row(pc);
  polgag_update(theta, h, predicted, reward, cfg_.alpha);
  requantize(theta);
}

void PolGAgPredictor::reset() {
  std::fill(rows_.begin(), rows_.end(), 0.0);
  by_pc_.clear();
  rng_.seed(cfg_.seed);
}

std::uint64_t PolGAgPredictor::storage_bits() const {
  const std::uint64_t nrows = cfg_.unbounded ? by_pc_.size() : cfg_.entries;
  return nrows * (cfg_.history_len + 1) * weight_type_bits(cfg_.weight_type);
}

// ---------------------------------------------------------------------------
// GehlPredictor
// ---------------------------------------------------------------------------

GehlPredictor::GehlPredictor(const PredictorConfig& cfg) : cfg_(cfg) {
  validate_config(cfg_);
  theta_ = cfg_.gehl_theta >= 0 ? cfg_.gehl_theta
                                : perceptron_default_theta(cfg_.history_len);
  lens_.resize(cfg_.gehl_tables);
  double depth = static_cast<double>(cfg_.gehl_base_len);
  for (std::size_t i = 0; i < lens_.size(); ++i) {
    lens_[i] = std::min(cfg_.history_len, static_cast<std::size_t>(depth));
    depth *= cfg_.gehl_ratio;
  }
  tables_.assign(cfg_.gehl_tables, std::vector<std::int8_t>(cfg_.gehl_entries, 0));
}

std::size_t GehlPredictor::table_index(std::size_t table, std::uint64_t pc,
                                       const GlobalHistory& h) const {
  return index_gshare(pc, h, lens_[table], cfg_.gehl_entries);
}

int GehlPredictor::output(std::uint64_t pc, const GlobalHistory& h) const {
  int y = 0;
  for (std::size_t i = 0; i < tables_.size(); ++i)
    y += tables_[i][table_index(i, pc, h)];
  return y;
}

Direction GehlPredictor::predict(std::uint64_t pc, const GlobalHistory& h) {
  return direction_of(output(pc, h) >= 0);
}

void GehlPredictor::update(std::uint64_t pc, const GlobalHistory& h,
                           Direction predicted, Direction actual) {
  const int y = output(pc, h);
  if (predicted == actual && std::abs(y) > theta_) return;
  const int t = signed_value(actual);
  for (std::size_t i = 0; i < tables_.size(); ++i) {
    std::int8_t& c = tables_[i][table_index(i, pc, h)];
    c = sat_add8(c, t);
  }
}

void GehlPredictor::reset() {
  for (auto& table : tables_) std::fill(table.begin(), table.end(), std::int8_t{0});
}

std::uint64_t GehlPredictor::storage_bits() const {
  return std::uint64_t{tables_.size()} * cfg_.gehl_entries * 8u;
}

// ---------------------------------------------------------------------------
// OraclePredictor
// ---------------------------------------------------------------------------

OraclePredictor::OraclePredictor(const Trace& trace) {
  outcomes_.reserve(trace.records.size());
  for (const auto& rec : trace.records) outcomes_.push_back(rec.outcome);
}

Direction OraclePredictor::predict(std::uint64_t, const GlobalHistory&) {
  if (cursor_ >= outcomes_.size())
    throw std::logic_error("oracle predictor ran past the end of its trace");
  return outcomes_[cursor_++];
}

// ---------------------------------------------------------------------------
// Factory
// ---------------------------------------------------------------------------

std::unique_ptr<Predictor> make_predictor(const PredictorConfig& cfg) {
  validate_config(cfg);
  switch (cfg.kind) {
    case PredictorKind::Bimodal:
    case PredictorKind::Gshare:
      return std::make_unique<CounterPredictor>(cfg);
    case PredictorKind::GQlag:
    case PredictorKind::TabularQ:
      return std::make_unique<QTablePredictor>(cfg);
    case PredictorKind::Perceptron:
      return std::make_unique<PerceptronPredictor>(cfg);
    case PredictorKind::PolGAg:
      return std::make_unique<PolGAgPredictor>(cfg);
    case PredictorKind::Gehl:
      return std::make_unique<GehlPredictor>(cfg);
  }
  throw std::invalid_argument("unknown predictor kind");
}

std::unique_ptr<Predictor> make_oracle(const Trace& trace) {
  return std::make_unique<OraclePredictor>(trace);
}

}  // namespace rlbp
