// SPDX-License-Identifier: Apache-2.0
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <random>

#include "rlbp/cli_config.hpp"
#include "rlbp/env.hpp"
#include "rlbp/harness.hpp"
#include "rlbp/predictors.hpp"
#include "rlbp/rng.hpp"

namespace py = pybind11;
using namespace rlbp;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Trace-driven branch-prediction laboratory";
  m.attr("__version__") = "0.1.0";

  py::enum_<Direction>(m, "Direction")
      .value("NT", Direction::NT)
      .value("T", Direction::T);
  m.def("flip", &flip);
  m.def("prediction_reward", &prediction_reward);
  m.def("signed_value", &signed_value);

  py::class_<GlobalHistory>(m, "GlobalHistory")
      .def(py::init<std::size_t>(), py::arg("capacity"))
      .def("push", &GlobalHistory::push)
      .def("bit", &GlobalHistory::bit)
      .def("signed_bit", &GlobalHistory::signed_bit)
      .def("fold", &GlobalHistory::fold)
      .def("signed_view", &GlobalHistory::signed_view)
      .def("clear", &GlobalHistory::clear)
      .def_property_readonly("capacity", &GlobalHistory::capacity)
      .def("__len__", &GlobalHistory::size);

  py::class_<BranchRecord>(m, "BranchRecord")
      .def(py::init<>())
      .def(py::init([](std::uint64_t pc, Direction outcome, std::uint32_t inst_gap) {
             return BranchRecord{pc, outcome, inst_gap};
           }),
           py::arg("pc"), py::arg("outcome"), py::arg("inst_gap") = 1)
      .def_readwrite("pc", &BranchRecord::pc)
      .def_readwrite("outcome", &BranchRecord::outcome)
      .def_readwrite("inst_gap", &BranchRecord::inst_gap)
      .def("__eq__", [](const BranchRecord& a, const BranchRecord& b) { return a == b; });

  py::class_<Trace>(m, "Trace")
      .def(py::init<>())
      .def_readwrite("name", &Trace::name)
      .def_readwrite("records", &Trace::records)
      .def_readwrite("total_instructions", &Trace::total_instructions)
      .def("__len__", [](const Trace& t) { return t.records.size(); })
      .def("__eq__", [](const Trace& a, const Trace& b) { return a == b; });

  m.def("load_trace", &load_trace, py::arg("path"));
  m.def("save_trace", &save_trace, py::arg("trace"), py::arg("path"));

  py::enum_<SyntheticKind>(m, "SyntheticKind")
      .value("Pattern", SyntheticKind::Pattern)
      .value("XorOfHistory", SyntheticKind::XorOfHistory)
      .value("NoisyLinear", SyntheticKind::NoisyLinear)
      .value("RandomBias", SyntheticKind::RandomBias)
      .value("Interleaved", SyntheticKind::Interleaved);

  py::class_<SyntheticSpec>(m, "SyntheticSpec")
      .def(py::init<>())
      .def_readwrite("kind", &SyntheticSpec::kind)
      .def_readwrite("name", &SyntheticSpec::name)
      .def_readwrite("pc", &SyntheticSpec::pc)
      .def_readwrite("length", &SyntheticSpec::length)
      .def_readwrite("seed", &SyntheticSpec::seed)
      .def_readwrite("pattern", &SyntheticSpec::pattern)
      .def_readwrite("xor_i", &SyntheticSpec::xor_i)
      .def_readwrite("xor_j", &SyntheticSpec::xor_j)
      .def_readwrite("weights", &SyntheticSpec::weights)
      .def_readwrite("bias", &SyntheticSpec::bias)
      .def_readwrite("flip_prob", &SyntheticSpec::flip_prob)
      .def_readwrite("taken_prob", &SyntheticSpec::taken_prob)
      .def_readwrite("parts", &SyntheticSpec::parts);

  m.def("generate_synthetic", &generate_synthetic, py::arg("spec"));

  // numerics
  py::class_<SatCounter>(m, "SatCounter")
      .def(py::init<unsigned, unsigned>(), py::arg("bits"), py::arg("initial") = 0)
      .def("update", &SatCounter::update)
      .def("predicts_taken", &SatCounter::predicts_taken)
      .def_property_readonly("state", &SatCounter::state);
  m.def("minifloat8_decode", &minifloat8::decode);
  m.def("minifloat8_encode", &minifloat8::encode);
  m.def("q6_quantize", &q6::quantize);
  m.def("q6_dequantize", &q6::dequantize);

  // predictors
  py::enum_<PredictorKind>(m, "PredictorKind")
      .value("Bimodal", PredictorKind::Bimodal)
      .value("Gshare", PredictorKind::Gshare)
      .value("GQlag", PredictorKind::GQlag)
      .value("TabularQ", PredictorKind::TabularQ)
      .value("Perceptron", PredictorKind::Perceptron)
      .value("PolGAg", PredictorKind::PolGAg)
      .value("Gehl", PredictorKind::Gehl);
  py::enum_<QFormat>(m, "QFormat")
      .value("Q6", QFormat::Q6)
      .value("Full", QFormat::Full);
  py::enum_<WeightType>(m, "WeightType")
      .value("Int8", WeightType::Int8)
      .value("MiniFloat8", WeightType::MiniFloat8)
      .value("Float32", WeightType::Float32);
  py::enum_<PolicyMode>(m, "PolicyMode")
      .value("Greedy", PolicyMode::Greedy)
      .value("Sample", PolicyMode::Sample);

  py::class_<PredictorConfig>(m, "PredictorConfig")
      .def(py::init<>())
      .def_readwrite("kind", &PredictorConfig::kind)
      .def_readwrite("name", &PredictorConfig::name)
      .def_readwrite("entries", &PredictorConfig::entries)
      .def_readwrite("unbounded", &PredictorConfig::unbounded)
      .def_readwrite("history_len", &PredictorConfig::history_len)
      .def_readwrite("counter_bits", &PredictorConfig::counter_bits)
      .def_readwrite("alpha", &PredictorConfig::alpha)
      .def_readwrite("gamma", &PredictorConfig::gamma)
      .def_readwrite("epsilon", &PredictorConfig::epsilon)
      .def_readwrite("q_format", &PredictorConfig::q_format)
      .def_readwrite("weight_type", &PredictorConfig::weight_type)
      .def_readwrite("perceptron_theta", &PredictorConfig::perceptron_theta)
      .def_readwrite("gehl_tables", &PredictorConfig::gehl_tables)
      .def_readwrite("gehl_entries", &PredictorConfig::gehl_entries)
      .def_readwrite("gehl_base_len", &PredictorConfig::gehl_base_len)
      .def_readwrite("gehl_ratio", &PredictorConfig::gehl_ratio)
      .def_readwrite("gehl_theta", &PredictorConfig::gehl_theta)
      .def_readwrite("policy_mode", &PredictorConfig::policy_mode)
      .def_readwrite("seed", &PredictorConfig::seed)
      .def("label", &PredictorConfig::label);

  m.def("default_config", &default_config, py::arg("kind"));
  m.def("validate_config", &validate_config);

  py::class_<Predictor>(m, "Predictor")
      .def("predict", &Predictor::predict, py::arg("pc"), py::arg("history"))
      .def("update", &Predictor::update, py::arg("pc"), py::arg("history"),
           py::arg("predicted"), py::arg("actual"))
      .def("reset", &Predictor::reset)
      .def("history_length", &Predictor::history_length)
      .def("storage_bits", &Predictor::storage_bits);

  m.def("make_predictor", &make_predictor, py::arg("config"));
  m.def("make_oracle", &make_oracle, py::arg("trace"), py::keep_alive<0, 1>());

  // environment
  py::class_<StepResult>(m, "StepResult")
      .def_readonly("obs", &StepResult::obs)
      .def_readonly("reward", &StepResult::reward)
      .def_readonly("done", &StepResult::done);

  py::class_<BranchEnv>(m, "BranchEnv")
      .def(py::init<const Trace&, std::uint64_t, std::size_t>(), py::arg("trace"),
           py::arg("target_pc"), py::arg("ghr_len"))
      .def("reset", &BranchEnv::reset)
      .def("step",
           [](BranchEnv& env, Direction action) {
             StepResult r = env.step(action);
             return py::make_tuple(r.obs, r.reward, r.done);
           })
      .def("outcome", &BranchEnv::outcome)
      .def_property_readonly("occurrences", &BranchEnv::occurrences)
      .def_property_readonly("done", &BranchEnv::done);

  m.def("history_from_observation", &history_from_observation);

  // harness
  py::class_<RunStats>(m, "RunStats")
      .def_readonly("branches", &RunStats::branches)
      .def_readonly("mispredictions", &RunStats::mispredictions)
      .def_readonly("instructions", &RunStats::instructions)
      .def_readonly("warmup_skipped", &RunStats::warmup_skipped)
      .def_property_readonly("mpki", &RunStats::mpki)
      .def_property_readonly("mpkb", &RunStats::mpkb);

  m.def("run_single", &run_single, py::arg("predictor"), py::arg("trace"),
        py::arg("warmup") = 1000);
  m.def("budget_to_entries", &budget_to_entries, py::arg("bits_per_entry"),
        py::arg("budget_bits"));
  m.def("bits_per_entry", &bits_per_entry, py::arg("config"));
  m.def("mix_seed", &mix_seed, py::arg("master"), py::arg("index"));

  py::enum_<Metric>(m, "Metric")
      .value("Auto", Metric::Auto)
      .value("Mpki", Metric::Mpki)
      .value("Mpkb", Metric::Mpkb);

  py::class_<TraceSource>(m, "TraceSource")
      .def(py::init<>())
      .def_readwrite("label", &TraceSource::label)
      .def_readwrite("file", &TraceSource::file)
      .def_readwrite("spec", &TraceSource::spec);

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def_readwrite("predictors", &ExperimentConfig::predictors)
      .def_readwrite("traces", &ExperimentConfig::traces)
      .def_readwrite("history_lengths", &ExperimentConfig::history_lengths)
      .def_readwrite("budget_bits", &ExperimentConfig::budget_bits)
      .def_readwrite("metric", &ExperimentConfig::metric)
      .def_readwrite("warmup", &ExperimentConfig::warmup)
      .def_readwrite("master_seed", &ExperimentConfig::master_seed)
      .def_readwrite("threads", &ExperimentConfig::threads);

  py::class_<SweepCell>(m, "SweepCell")
      .def_readonly("predictor", &SweepCell::predictor)
      .def_readonly("kind", &SweepCell::kind)
      .def_readonly("history_len", &SweepCell::history_len)
      .def_readonly("trace", &SweepCell::trace)
      .def_readonly("seed", &SweepCell::seed)
      .def_readonly("stats", &SweepCell::stats);

  py::class_<SweepAggregate>(m, "SweepAggregate")
      .def_readonly("predictor", &SweepAggregate::predictor)
      .def_readonly("kind", &SweepAggregate::kind)
      .def_readonly("history_len", &SweepAggregate::history_len)
      .def_readonly("mean", &SweepAggregate::mean)
      .def_readonly("stddev", &SweepAggregate::stddev);

  py::class_<SweepResult>(m, "SweepResult")
      .def_readonly("cells", &SweepResult::cells)
      .def_readonly("aggregates", &SweepResult::aggregates)
      .def_readonly("metric_used", &SweepResult::metric_used);

  m.def("sweep", &sweep, py::arg("config"),
        py::call_guard<py::gil_scoped_release>());
  m.def("sweep_csv", &sweep_csv, py::arg("result"));
}
