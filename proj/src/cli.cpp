// SPDX-License-Identifier: Apache-2.0
#include "rlbp/cli.hpp"

#include <CLI11.hpp>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

#include "rlbp/cli_config.hpp"
#include "rlbp/env.hpp"
#include "rlbp/harness.hpp"
#include "rlbp/predictors.hpp"

namespace rlbp {

namespace {

std::uint64_t parse_u64_any(const std::string& raw, const char* what) {
  std::uint64_t v = 0;
  const char* first = raw.data();
  const char* last = raw.data() + raw.size();
  int base = 10;
  if (raw.size() > 2 && raw[0] == '0' && (raw[1] == 'x' || raw[1] == 'X')) {
    first += 2;
    base = 16;
  }
  auto [ptr, ec] = std::from_chars(first, last, v, base);
  if (ec != std::errc{} || ptr != last)
    throw std::invalid_argument(std::string(what) + " is not a valid integer: '" +
                                raw + "'");
  return v;
}

/// RLBP_SEED wins over flags and config files.
std::optional<std::uint64_t> env_seed() {
  if (const char* raw = std::getenv("RLBP_SEED"))
    return parse_u64_any(raw, "RLBP_SEED");
  return std::nullopt;
}

std::string format_metric(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write: " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

struct GenTraceArgs {
  std::string config_path;
  std::string section = "trace";
  std::string out;
  std::uint64_t seed = 0;
  std::uint64_t length = 0;
  bool seed_set = false;
  bool length_set = false;
};

int cmd_gen_trace(const GenTraceArgs& args) {
  const ConfigFile file = ConfigFile::parse_file(args.config_path);
  validate_config_file(file);
  const auto* section = file.find_section(args.section);
  if (!section) throw ConfigError("config has no [" + args.section + "] section");
  SyntheticSpec spec = synthetic_from_section(file, *section);
  if (args.seed_set) spec.seed = args.seed;
  if (args.length_set) spec.length = args.length;
  if (const auto s = env_seed()) spec.seed = *s;

  std::string out = args.out;
  if (out.empty() && section->find("out")) out = *section->find("out");
  if (out.empty()) throw ConfigError("no output path: pass --out or set out=");

  const Trace trace = generate_synthetic(spec);
  save_trace(trace, out);
  std::cout << "wrote " << trace.records.size() << " records to " << out << "\n";
  return 0;
}

struct RunArgs {
  std::string trace_path;
  std::string predictor = "bimodal";
  std::string config_path;
  std::size_t warmup = 1000;
  std::uint64_t history = 0;
  std::uint64_t entries = 0;
  std::uint64_t seed = 0;
  bool history_set = false;
  bool entries_set = false;
  bool seed_set = false;
};

PredictorConfig resolve_predictor(const std::string& name, const std::string& config_path) {
  if (!config_path.empty()) {
    const ConfigFile file = ConfigFile::parse_file(config_path);
    validate_config_file(file);
    if (const auto* section = file.find_section("predictor." + name))
      return predictor_from_section(*section);
  }
  return default_config(kind_from_name(name));
}

int cmd_run(const RunArgs& args) {
  PredictorConfig cfg = resolve_predictor(args.predictor, args.config_path);
  if (args.history_set) cfg.history_len = args.history;
  if (args.entries_set) cfg.entries = args.entries;
  if (args.seed_set) cfg.seed = args.seed;
  if (const auto s = env_seed()) cfg.seed = *s;

  const Trace trace = load_trace(args.trace_path);
  auto predictor = make_predictor(cfg);
  const RunStats stats = run_single(*predictor, trace, args.warmup);

  std::cout << "predictor,kind,history_len,trace,branches,mispred,instructions,"
               "mpki,mpkb,seed\n";
  std::cout << cfg.label() << ',' << kind_name(cfg.kind) << ',' << cfg.history_len
            << ',' << trace.name << ',' << stats.branches << ','
            << stats.mispredictions << ',' << stats.instructions << ','
            << format_metric(stats.mpki()) << ',' << format_metric(stats.mpkb())
            << ',' << cfg.seed << "\n";
  return 0;
}

struct SweepArgs {
  std::string config_path;
  std::string out;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  bool seed_set = false;
  bool threads_set = false;
};

int cmd_sweep(const SweepArgs& args) {
  const ConfigFile file = ConfigFile::parse_file(args.config_path);
  validate_config_file(file);
  SweepSpec spec = sweep_from_config(file);
  if (args.seed_set) spec.experiment.master_seed = args.seed;
  if (args.threads_set) spec.experiment.threads = args.threads;
  if (const auto s = env_seed()) spec.experiment.master_seed = *s;
  if (!args.out.empty()) spec.out_path = args.out;

  const SweepResult result = sweep(spec.experiment);
  const std::string csv = sweep_csv(result);
  if (spec.out_path.empty()) {
    std::cout << csv;
  } else {
    write_file(spec.out_path, csv);
    std::cout << "wrote " << result.cells.size() << " cells to " << spec.out_path
              << "\n";
  }
  return 0;
}

struct EnvDemoArgs {
  std::string trace_path;
  std::string pc;
  std::size_t ghr_len = 8;
  std::string agent = "gqlag";
  std::uint64_t seed = 1;
};

int cmd_env_demo(const EnvDemoArgs& args) {
  const Trace trace = load_trace(args.trace_path);
  const std::uint64_t pc = parse_u64_any(args.pc, "--pc");

  PredictorConfig cfg = default_config(kind_from_name(args.agent));
  cfg.history_len = args.ghr_len;
  if (cfg.kind == PredictorKind::Perceptron || cfg.kind == PredictorKind::PolGAg)
    cfg.unbounded = true;
  cfg.seed = args.seed;
  if (const auto s = env_seed()) cfg.seed = *s;
  auto agent = make_predictor(cfg);

  BranchEnv env(trace, pc, args.ghr_len);
  Observation obs = env.reset();
  long long cumulative = 0;
  std::cout << "step,action,reward,cumulative\n";
  for (std::size_t step = 0; !env.done(); ++step) {
    const GlobalHistory h = history_from_observation(obs);
    const Direction action = agent->predict(pc, h);
    const StepResult sr = env.step(action);
    // The env only reports the reward; recover the actual outcome from it.
    const Direction actual = sr.reward > 0 ? action : flip(action);
    agent->update(pc, h, action, actual);
    cumulative += sr.reward;
    std::cout << step << ',' << direction_char(action) << ',' << sr.reward << ','
              << cumulative << "\n";
    obs = sr.obs;
  }
  return 0;
}

struct BudgetArgs {
  std::string kind = "gshare";
  std::uint64_t bits = 0;
  std::uint64_t history = 0;
  unsigned counter_bits = 2;
  std::string weight_type;
  std::string q_format;
};

int cmd_budget(const BudgetArgs& args) {
  PredictorConfig cfg = default_config(kind_from_name(args.kind));
  cfg.history_len = args.history;
  cfg.counter_bits = args.counter_bits;
  if (!args.weight_type.empty())
    cfg.weight_type = weight_type_from_name(args.weight_type);
  if (!args.q_format.empty()) {
    if (args.q_format == "q6")
      cfg.q_format = QFormat::Q6;
    else if (args.q_format == "full")
      cfg.q_format = QFormat::Full;
    else
      throw std::invalid_argument("--q-format must be q6 or full");
  }
  std::cout << budget_to_entries(bits_per_entry(cfg), args.bits) << "\n";
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"Trace-driven branch-prediction laboratory"};
  app.require_subcommand(1);

  GenTraceArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-trace", "Generate a synthetic trace file");
  gen_cmd->add_option("--config", gen.config_path, "Config file with a [trace] section")
      ->required();
  gen_cmd->add_option("--section", gen.section, "Trace section name (default: trace)");
  gen_cmd->add_option("--out", gen.out, "Output trace-text path");
  auto* gen_seed = gen_cmd->add_option("--seed", gen.seed, "Generator seed override");
  auto* gen_len = gen_cmd->add_option("--length", gen.length, "Record count override");

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run one predictor over one trace");
  run_cmd->add_option("--trace", run.trace_path, "Trace-text file")->required();
  run_cmd->add_option("--predictor", run.predictor,
                      "Predictor kind, or a [predictor.NAME] from --config");
  run_cmd->add_option("--config", run.config_path, "Config file for named predictors");
  run_cmd->add_option("--warmup", run.warmup, "Branches trained but not counted");
  auto* run_hist = run_cmd->add_option("--history", run.history, "History length");
  auto* run_entries = run_cmd->add_option("--entries", run.entries, "Table entries");
  auto* run_seed = run_cmd->add_option("--seed", run.seed, "Predictor seed");

  SweepArgs swp;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run the configured history sweep");
  sweep_cmd->add_option("--config", swp.config_path, "Config file with a [sweep] section")
      ->required();
  sweep_cmd->add_option("--out", swp.out, "Output CSV path (default from config)");
  auto* sweep_seed = sweep_cmd->add_option("--seed", swp.seed, "Master seed override");
  auto* sweep_threads =
      sweep_cmd->add_option("--threads", swp.threads, "Concurrent sweep cells");

  EnvDemoArgs env_args;
  auto* env_cmd =
      app.add_subcommand("env-demo", "Run a built-in agent through the branch env");
  env_cmd->add_option("--trace", env_args.trace_path, "Trace-text file")->required();
  env_cmd->add_option("--pc", env_args.pc, "Target branch address (hex or decimal)")
      ->required();
  env_cmd->add_option("--ghr-len", env_args.ghr_len, "Observation width");
  env_cmd->add_option("--agent", env_args.agent, "Agent predictor kind");
  env_cmd->add_option("--seed", env_args.seed, "Agent seed");

  BudgetArgs budget;
  auto* budget_cmd =
      app.add_subcommand("budget", "Entries that fit a storage budget, power-of-two");
  budget_cmd->add_option("--kind", budget.kind, "Predictor kind")->required();
  budget_cmd->add_option("--bits", budget.bits, "Budget in bits")->required();
  budget_cmd->add_option("--history", budget.history, "History length (per-PC rows)");
  budget_cmd->add_option("--counter-bits", budget.counter_bits, "Counter width");
  budget_cmd->add_option("--weight-type", budget.weight_type,
                         "int8 | minifloat8 | float32");
  budget_cmd->add_option("--q-format", budget.q_format, "q6 | full");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (gen_cmd->parsed()) {
      gen.seed_set = gen_seed->count() > 0;
      gen.length_set = gen_len->count() > 0;
      return cmd_gen_trace(gen);
    }
    if (run_cmd->parsed()) {
      run.history_set = run_hist->count() > 0;
      run.entries_set = run_entries->count() > 0;
      run.seed_set = run_seed->count() > 0;
      return cmd_run(run);
    }
    if (sweep_cmd->parsed()) {
      swp.seed_set = sweep_seed->count() > 0;
      swp.threads_set = sweep_threads->count() > 0;
      return cmd_sweep(swp);
    }
    if (env_cmd->parsed()) return cmd_env_demo(env_args);
    if (budget_cmd->parsed()) return cmd_budget(budget);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace rlbp
