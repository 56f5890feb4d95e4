# SPDX-License-Identifier: Apache-2.0
"""Smoke tests for the rlbp Python module."""

import pytest

rlbp = pytest.importorskip("rlbp")


def test_version():
    assert rlbp.__version__


def test_direction_flip():
    assert rlbp.flip(rlbp.Direction.T) == rlbp.Direction.NT
    assert rlbp.signed_value(rlbp.Direction.NT) == -1


def test_synthetic_determinism():
    spec = rlbp.SyntheticSpec()
    spec.kind = rlbp.SyntheticKind.RandomBias
    spec.taken_prob = 0.5
    spec.length = 5000
    spec.seed = 42
    a = rlbp.generate_synthetic(spec)
    b = rlbp.generate_synthetic(spec)
    assert len(a) == 5000
    assert a == b


def test_trace_roundtrip(tmp_path):
    spec = rlbp.SyntheticSpec()
    spec.kind = rlbp.SyntheticKind.Pattern
    spec.pattern = "TTN"
    spec.length = 9
    trace = rlbp.generate_synthetic(spec)
    path = tmp_path / "t.csv"
    rlbp.save_trace(trace, path)
    back = rlbp.load_trace(path)
    assert [r.outcome for r in back.records] == [r.outcome for r in trace.records]


def test_bimodal_on_repeating_pattern():
    spec = rlbp.SyntheticSpec()
    spec.kind = rlbp.SyntheticKind.Pattern
    spec.pattern = "TTTN"
    spec.length = 100_000
    trace = rlbp.generate_synthetic(spec)

    cfg = rlbp.default_config(rlbp.PredictorKind.Bimodal)
    cfg.entries = 16
    stats = rlbp.run_single(rlbp.make_predictor(cfg), trace, warmup=100)
    assert stats.mpkb == pytest.approx(250.0, abs=1.0)


def test_budget_arithmetic():
    assert rlbp.budget_to_entries(2, 512 * 1024) == 262144
    assert rlbp.budget_to_entries(12, 512 * 1024) == 32768


def test_codecs():
    assert rlbp.minifloat8_decode(0b0_01111_00) == 1.0
    assert rlbp.minifloat8_encode(1.0) == 0b0_01111_00
    for code in range(256):
        assert rlbp.minifloat8_encode(rlbp.minifloat8_decode(code)) == code
    assert rlbp.q6_dequantize(rlbp.q6_quantize(1.0)) == 1.0


def test_env_episode():
    spec = rlbp.SyntheticSpec()
    spec.kind = rlbp.SyntheticKind.RandomBias
    spec.taken_prob = 0.7
    spec.length = 2000
    spec.pc = 0x42
    trace = rlbp.generate_synthetic(spec)

    env = rlbp.BranchEnv(trace, target_pc=0x42, ghr_len=8)
    obs = env.reset()
    assert len(obs) == 8

    cfg = rlbp.default_config(rlbp.PredictorKind.GQlag)
    cfg.history_len = 8
    agent = rlbp.make_predictor(cfg)

    total = 0
    steps = 0
    done = False
    while not done:
        hist = rlbp.history_from_observation(obs)
        action = agent.predict(0x42, hist)
        obs, reward, done = env.step(action)
        actual = action if reward > 0 else rlbp.flip(action)
        agent.update(0x42, hist, action, actual)
        total += reward
        steps += 1
    assert steps == env.occurrences == 2000
    # A biased coin is learnable well above chance.
    assert total > 0


def test_sweep_deterministic():
    spec = rlbp.SyntheticSpec()
    spec.kind = rlbp.SyntheticKind.NoisyLinear
    spec.weights = [1.0, 1.0, 1.0]
    spec.flip_prob = 0.05
    spec.length = 4000
    spec.seed = 7

    src = rlbp.TraceSource()
    src.label = "nl"
    src.spec = spec

    cfg = rlbp.ExperimentConfig()
    cfg.predictors = [
        rlbp.default_config(rlbp.PredictorKind.Gshare),
        rlbp.default_config(rlbp.PredictorKind.GQlag),
    ]
    cfg.traces = [src]
    cfg.history_lengths = [0, 2]
    cfg.warmup = 200
    cfg.master_seed = 5

    csv_a = rlbp.sweep_csv(rlbp.sweep(cfg))
    cfg.threads = 4
    csv_b = rlbp.sweep_csv(rlbp.sweep(cfg))
    assert csv_a == csv_b
    assert csv_a.startswith("predictor,kind,history_len,trace,")
