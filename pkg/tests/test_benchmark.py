import json
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from accel_denoise.benchmark import (
    ALL_MODELS,
    BenchmarkConfig,
    _counts,
    build_model,
    desk_config,
    make_windows,
    prepare,
    run_benchmark,
    split_indices,
)
from accel_denoise.exceptions import ConfigError
from accel_denoise.sim import SimConfig, build_dataset


def tiny_config(**changes):
    sim = SimConfig(angle_min_deg=-3, angle_max_deg=3, angle_step_deg=2.0, window_len=60)
    base = BenchmarkConfig(sim=sim, window=20, hidden_dim=4, epochs=1, batch_size=8)
    return replace(base, **changes)


class TestSplit:
    @given(st.lists(st.integers(0, 6), min_size=1, max_size=80), st.integers(0, 99))
    def test_partition(self, groups, seed):
        groups = np.array(groups)
        parts = split_indices(groups, (0.7, 0.1, 0.2), "windows", seed)
        allidx = np.concatenate(parts)
        assert sorted(allidx.tolist()) == list(range(len(groups)))

    @given(st.lists(st.integers(0, 6), min_size=1, max_size=80), st.integers(0, 99))
    def test_recording_mode_keeps_groups_whole(self, groups, seed):
        groups = np.array(groups)
        parts = split_indices(groups, (0.6, 0.2, 0.2), "recordings", seed)
        owners = [set(groups[p].tolist()) for p in parts]
        assert not (owners[0] & owners[1]) and not (owners[0] & owners[2]) and not (owners[1] & owners[2])
        assert sum(len(p) for p in parts) == len(groups)

    def test_every_recording_in_test_set(self):
        groups = np.repeat(np.arange(50), 10)
        tr, va, te = split_indices(groups, (0.7, 0.1, 0.2), "windows", 0)
        assert (len(tr), len(va), len(te)) == (350, 50, 100)
        assert set(groups[te]) == set(range(50))

    def test_deterministic(self):
        groups = np.repeat(np.arange(5), 7)
        a = split_indices(groups, (0.7, 0.1, 0.2), "windows", 3)
        b = split_indices(groups, (0.7, 0.1, 0.2), "windows", 3)
        for x, y in zip(a, b):
            np.testing.assert_array_equal(x, y)

    @pytest.mark.parametrize("n", range(1, 12))
    def test_counts(self, n):
        tr, va, te = _counts(n, (0.7, 0.1, 0.2))
        assert tr + va + te == n and tr >= 1
        if n >= 2:
            assert te >= 1

    def test_bad_mode(self):
        with pytest.raises(ConfigError):
            split_indices([0, 1], (0.5, 0.0, 0.5), "bogus")


class TestConfig:
    def test_roundtrip(self):
        cfg = desk_config(models=("kNN", "MA"), seed=4)
        back = BenchmarkConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
        assert back == cfg
        assert cfg.sim.angle_step_deg == 1.0

    @pytest.mark.parametrize(
        "changes",
        [
            {"window": 0},
            {"window": 10_000},
            {"split": (0.5, 0.5, 0.5)},
            {"split_mode": "random"},
            {"models": ("kNN", "CNN")},
            {"epochs": -1},
        ],
    )
    def test_invalid(self, changes):
        with pytest.raises(ConfigError):
            BenchmarkConfig(**changes)

    def test_unknown_key(self):
        with pytest.raises(ConfigError):
            BenchmarkConfig.from_dict({"learning_rate": 0.1})

    def test_build_every_model(self):
        cfg = BenchmarkConfig()
        for name in ALL_MODELS + ("Identity",):
            assert hasattr(build_model(name, cfg), "fit")
        with pytest.raises(ConfigError):
            build_model("nope", cfg)


class TestWindows:
    def test_cut(self):
        recs = build_dataset(SimConfig(angle_min_deg=0, angle_max_deg=2, angle_step_deg=1, window_len=45))
        w = make_windows(recs, 20)
        assert w.noisy.shape == (8, 20, 3)
        np.testing.assert_array_equal(w.recording, np.repeat(np.arange(4), 2))
        np.testing.assert_array_equal(w.noisy[1], recs[0].noisy[20:40])
        with pytest.raises(ConfigError):
            make_windows(recs, 100)


class TestRun:
    def test_tiny_run(self):
        cfg = tiny_config(models=("MA", "kNN", "GRU", "Identity"))
        result = run_benchmark(cfg)
        names = result.metrics.names()
        assert set(names) == {"MA", "kNN", "GRU", "Identity", "Noisy"}
        assert result.metrics["Identity"].rmse == result.metrics["Noisy"].rmse
        assert result.sca["Identity"].ratio_roll == 1.0
        assert result.predictions["kNN"].shape == result.splits.test.noisy.shape
        assert result.learning_names() == ["kNN", "GRU"]
        assert result.sp_names() == ["MA"]

    def test_reproducible(self):
        cfg = tiny_config(models=("SG", "kNN"))
        a = run_benchmark(cfg)
        b = run_benchmark(cfg)
        assert a.metrics == b.metrics

    def test_prepare_uses_given_recordings(self):
        cfg = tiny_config()
        recs = build_dataset(cfg.sim)
        splits = prepare(cfg, recs)
        total = len(splits.train) + len(splits.val) + len(splits.test)
        assert total == len(recs) * 3
