// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <string_view>

#include "rlbp/direction.hpp"
#include "rlbp/history.hpp"
#include "rlbp/numerics.hpp"

namespace rlbp {

struct Trace;

// ---------------------------------------------------------------------------
// Table indexing
// ---------------------------------------------------------------------------

/// pc mod n. Pre: n is a power of two.
inline std::size_t index_bimodal(std::uint64_t pc, std::size_t n) {
  return static_cast<std::size_t>(pc & (n - 1));
}

unsigned log2_exact(std::size_t n);  // pre: n is a power of two

/// (pc XOR folded history) mod n, with the newest l_used bits XOR-folded
/// down to log2(n) bits. l_used = 0 degenerates to index_bimodal.
inline std::size_t index_gshare(std::uint64_t pc, const GlobalHistory& h,
                                std::size_t l_used, std::size_t n) {
  return static_cast<std::size_t>((pc ^ h.fold(l_used, log2_exact(n))) & (n - 1));
}

// ---------------------------------------------------------------------------
// Action-value updates and selection
// ---------------------------------------------------------------------------

/// Exponential moving average step: (1 - alpha) q + alpha r.
inline double ema_update(double q, double r, double alpha) {
  return (1.0 - alpha) * q + alpha * r;
}

/// One-step Q-learning target, Q <- Q + alpha (r + gamma max' - Q), written
/// in the algebraically equal form whose gamma = 0 case is bit-identical to
/// ema_update.
inline double q_learning_update(double q, double r, double gamma,
                                double next_max, double alpha) {
  return (1.0 - alpha) * q + alpha * (r + gamma * next_max);
}

/// +1 when the prediction matched the resolved outcome, -1 otherwise.
inline double prediction_reward(Direction predicted, Direction actual) {
  return predicted == actual ? 1.0 : -1.0;
}

enum class QFormat : std::uint8_t { Q6, Full };

/// Per-slot pair of action values, kept in [-1, 1].
struct QEntry {
  double q_taken = 0.0;
  double q_not_taken = 0.0;
};

/// Argmax over the two action values; exact ties resolve by fair coin.
Direction argmax_direction(double q_t, double q_nt, std::mt19937_64& rng);

/// Greedy with probability 1 - epsilon, uniform otherwise.
Direction epsilon_greedy_select(double q_t, double q_nt, double epsilon,
                                std::mt19937_64& rng);

Direction gqlag_predict(const QEntry& e, std::mt19937_64& rng);

/// Only the predicted side moves: q <- (1-alpha) q + alpha r, re-quantized
/// to 6-bit codes when fmt is Q6.
void gqlag_update(QEntry& e, Direction predicted, double reward, double alpha,
                  QFormat fmt);

// ---------------------------------------------------------------------------
// Linear predictors: integer perceptron and softmax policy gradient
// ---------------------------------------------------------------------------

/// y = w[0] + sum_k w[k] * q_k over the +-1 history view. Prediction is
/// taken iff y >= 0.
int perceptron_output(std::span<const std::int8_t> w, const GlobalHistory& h);

/// Classic training threshold heuristic, floor(1.93 l + 14).
int perceptron_default_theta(std::size_t l);

/// Apply the perceptron rule if the sign was wrong or |y| <= theta:
/// w[0] += t, w[k] += t q_k with t = +-1 for the actual outcome, saturating
/// at +-127.
void perceptron_train(std::span<std::int8_t> w, const GlobalHistory& h,
                      Direction actual, int y, int theta);

/// pi(T | s) = sigma(2 theta . q(T)) with q(T) = [1, q] over the +-1 view.
double polgag_pi_taken(std::span<const double> theta, const GlobalHistory& h);

enum class PolicyMode : std::uint8_t { Greedy, Sample };

/// Greedy: taken iff pi_taken >= 0.5 (tie predicts taken). Sample: Bernoulli.
Direction polgag_select(double pi_taken, PolicyMode mode, std::mt19937_64& rng);

/// theta += alpha r pi(flip(a) | s) q(a), with q(T) = [1, q] and
/// q(NT) = -q(T). Only the owner PC's block of the one-hot Kronecker state
/// vector is nonzero, so only these l + 1 coordinates move.
void polgag_update(std::span<double> theta, const GlobalHistory& h,
                   Direction action, double reward, double alpha);

// ---------------------------------------------------------------------------
// Predictor contract
// ---------------------------------------------------------------------------

enum class PredictorKind : std::uint8_t {
  Bimodal,
  Gshare,
  GQlag,
  TabularQ,
  Perceptron,
  PolGAg,
  Gehl,
};

const char* kind_name(PredictorKind kind);
PredictorKind kind_from_name(std::string_view name);

enum class WeightType : std::uint8_t { Int8, MiniFloat8, Float32 };

const char* weight_type_name(WeightType t);
WeightType weight_type_from_name(std::string_view name);
unsigned weight_type_bits(WeightType t);

struct PredictorConfig {
  PredictorKind kind = PredictorKind::Bimodal;
  std::string name;                 // report label; defaults to the kind name
  std::size_t entries = 16384;      // table rows, power of two
  bool unbounded = false;           // dedicated row per PC instead of hashing
  std::size_t history_len = 0;      // l
  unsigned counter_bits = 2;        // bimodal / gshare
  double alpha = 0.2;
  double gamma = 0.0;               // tabular_q only
  double epsilon = 0.0;             // tabular_q only
  QFormat q_format = QFormat::Q6;   // gqlag / tabular_q storage
  WeightType weight_type = WeightType::Int8;
  int perceptron_theta = -1;        // -1 derives floor(1.93 l + 14)
  std::size_t gehl_tables = 8;
  std::size_t gehl_entries = 8192;  // per table
  std::size_t gehl_base_len = 2;    // L(1)
  double gehl_ratio = 2.0;          // geometric ratio between table depths
  int gehl_theta = -1;              // -1 derives floor(1.93 l + 14)
  PolicyMode policy_mode = PolicyMode::Greedy;
  std::uint64_t seed = 1;

  std::string label() const { return name.empty() ? kind_name(kind) : name; }
};

/// Kind-appropriate defaults (learning rate, element type, storage mode).
PredictorConfig default_config(PredictorKind kind);

void validate_config(const PredictorConfig& cfg);  // throws std::invalid_argument

/// A predictor is single-owner mutable state driven strictly in trace order:
/// predict from (pc, history), then update with the resolved outcome, then
/// the caller pushes the actual outcome into the history.
class Predictor {
 public:
  virtual ~Predictor() = default;

  virtual Direction predict(std::uint64_t pc, const GlobalHistory& h) = 0;
  virtual void update(std::uint64_t pc, const GlobalHistory& h,
                      Direction predicted, Direction actual) = 0;

  /// Back to the initial tables and the seeded RNG state.
  virtual void reset() = 0;

  virtual std::size_t history_length() const = 0;
  virtual std::uint64_t storage_bits() const = 0;
};

std::unique_ptr<Predictor> make_predictor(const PredictorConfig& cfg);

/// Test double that replays the trace's actual outcomes (never mispredicts).
std::unique_ptr<Predictor> make_oracle(const Trace& trace);

}  // namespace rlbp
