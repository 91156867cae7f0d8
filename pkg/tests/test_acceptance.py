"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run on its own with ``pytest tests/test_acceptance.py -v``; the lines are
printed even when output capture is on.
"""

import math
import time
from dataclasses import replace

import numpy as np
import pytest

from accel_denoise.benchmark import LEARNING_MODELS, SP_MODELS, desk_config, run_benchmark
from accel_denoise.knn import fit, predict_many, select_k
from accel_denoise.metrics import psnr
from accel_denoise.nn.cells import init_cell, sequence_backward, sequence_forward
from accel_denoise.sca import angular_error, pitch_from_f, roll_from_f, suppression_ratio
from accel_denoise.sim import NoiseSpec, gravity_projection_many
from accel_denoise.sp import DwtConfig, dwt_denoise, savgol_coeffs, savitzky_golay, waverec, wavedec


@pytest.fixture
def verdict(capsys):
    def announce(number, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
        assert ok, detail

    return announce


@pytest.fixture(scope="module")
def knn_run():
    """kNN alone on the 1-degree grid, timed from simulation to report."""
    t0 = time.perf_counter()
    result = run_benchmark(desk_config(models=("kNN",)))
    return result, time.perf_counter() - t0


@pytest.fixture(scope="module")
def full_run(knn_run):
    base, _ = knn_run
    return run_benchmark(desk_config(), splits=base.splits, fitted={"kNN": base.models["kNN"]})


def test_criterion_1_knn_suppression(knn_run, verdict):
    result, seconds = knn_run
    gamma = suppression_ratio(result.metrics["kNN"].rae, result.metrics["Noisy"].rae)
    verdict(1, gamma < 0.50 and seconds < 120,
            f"kNN RAE / noisy RAE = {gamma:.4f} (< 0.50), runtime {seconds:.1f} s (< 120 s)")


def test_criterion_2_ranking(full_run, verdict):
    m = full_run.metrics
    worst_learning = max(m[n].rmse for n in LEARNING_MODELS)
    best_sp = min(m[n].rmse for n in SP_MODELS)
    worst_sp = max(m[n].rmse for n in SP_MODELS)
    table = ", ".join(f"{r.model} {r.rmse:.5f}" for r in m.rows)
    verdict(2, worst_learning < best_sp and worst_sp <= m["Noisy"].rmse,
            f"max learning RMSE {worst_learning:.5f} < min SP RMSE {best_sp:.5f}, "
            f"max SP RMSE {worst_sp:.5f} <= noisy {m['Noisy'].rmse:.5f} [{table}]")


def test_criterion_3_bias_floor(verdict):
    cfg = desk_config(models=("kNN",) + SP_MODELS)
    sim = replace(cfg.sim, noisy_spec=NoiseSpec(vrw=0.0, bi=0.0, bo=0.05), bo_mode="per_recording")
    m = run_benchmark(replace(cfg, sim=sim)).metrics
    floor = 0.5 * 0.025
    sp_min = min(m[n].rmse for n in SP_MODELS)
    verdict(3, sp_min >= floor and m["kNN"].rmse < 0.01,
            f"min SP RMSE {sp_min:.5f} (>= {floor}), kNN RMSE {m['kNN'].rmse:.6f} (< 0.01)")


def test_criterion_4_sca(knn_run, verdict):
    result, seconds = knn_run
    row = result.sca["kNN"]
    worst = max(row.ratio_roll, row.ratio_pitch)
    verdict(4, worst < 0.95 and seconds < 300,
            f"kNN SCA RMSE ratio roll {row.ratio_roll:.4f}, pitch {row.ratio_pitch:.4f} (< 0.95), "
            f"runtime {seconds:.1f} s (< 300 s)")


def _fd_worst(kind, seed, m=4, H=5, eps=1e-5):
    r = np.random.default_rng(seed)
    params = init_cell(kind, 3, m, r)
    X = r.normal(size=(1, H, 3))
    proj = r.normal(size=(1, H, m))

    def loss():
        return float(np.sum(sequence_forward(kind, params, X)[0] * proj))

    grads, _ = sequence_backward(kind, sequence_forward(kind, params, X)[1], proj)
    worst = 0.0
    for name, value in params.items():
        for i in np.ndindex(value.shape):
            old = value[i]
            value[i] = old + eps
            up = loss()
            value[i] = old - eps
            down = loss()
            value[i] = old
            fd = (up - down) / (2 * eps)
            an = grads[name][i]
            worst = max(worst, abs(fd - an) / max(abs(fd), abs(an), 1e-12))
    return worst


def test_criterion_5_gradients(verdict):
    t0 = time.perf_counter()
    worst = {kind: max(_fd_worst(kind, s) for s in range(20)) for kind in ("lstm", "gru", "rnn")}
    detail = ", ".join(f"{k} {v:.2e}" for k, v in worst.items())
    verdict(5, max(worst.values()) < 1e-4,
            f"max relative error {detail} (< 1e-4), {time.perf_counter() - t0:.1f} s")


def _brute(points, targets, q, k):
    d2 = ((points - q) ** 2).sum(axis=1)
    chosen = sorted(range(len(points)), key=lambda i: (d2[i], i))[:k]
    acc = np.zeros(targets.shape[1])
    for i in sorted(chosen):
        acc = acc + targets[i]
    return acc / k


def test_criterion_6_knn_exact(verdict):
    rng = np.random.default_rng(2024)
    P, T, Q = rng.normal(size=(200, 3)), rng.normal(size=(200, 3)), rng.normal(size=(50, 3))
    ks = (1, select_k(200), 25)
    t0 = time.perf_counter()
    index = fit(P, T)
    preds = {k: predict_many(index, Q, k) for k in ks}
    seconds = time.perf_counter() - t0
    mismatches = sum(
        int(not np.array_equal(preds[k][i], _brute(P, T, Q[i], k))) for k in ks for i in range(50)
    )
    verdict(6, mismatches == 0 and seconds < 1.0,
            f"{mismatches} mismatches over k in {ks}, index + queries {seconds * 1e3:.1f} ms (< 1 s)")


def test_criterion_7_dwt_reconstruction(verdict):
    rng = np.random.default_rng(7)
    errors = {}
    for n in (64, 100, 1000):
        x = rng.normal(size=n)
        errors[n] = float(np.max(np.abs(dwt_denoise(x, DwtConfig(threshold=0.0)) - x)))
    x = rng.normal(size=64)
    errors["raw 64"] = float(np.max(np.abs(waverec(wavedec(x, 4)) - x)))
    detail = ", ".join(f"N={k}: {v:.1e}" for k, v in errors.items())
    verdict(7, max(errors.values()) < 1e-8, f"max reconstruction error {detail} (< 1e-8)")


def _normal_equation(m, p):
    half = (m - 1) // 2
    A = np.array([[float(t) ** j for j in range(p + 1)] for t in range(-half, half + 1)])
    return np.linalg.solve(A.T @ A, A.T)[0]


def test_criterion_8_savitzky_golay(verdict):
    coeff_err = float(np.max(np.abs(savgol_coeffs(5, 2) - _normal_equation(5, 2))))
    rng = np.random.default_rng(8)
    t = np.arange(200, dtype=float) / 10
    poly_err = 0.0
    for _ in range(20):
        a, b, c = rng.uniform(-2, 2, 3)
        x = a + b * t + c * t * t
        poly_err = max(poly_err, float(np.max(np.abs(savitzky_golay(x, 5, 2, mode="interp") - x))))
        poly_err = max(poly_err, float(np.max(np.abs(savitzky_golay(x, 5, 2)[2:-2] - x[2:-2]))))
    verdict(8, coeff_err < 1e-12 and poly_err < 1e-9,
            f"coefficient error {coeff_err:.1e} (< 1e-12), quadratic error {poly_err:.1e} (< 1e-9)")


def test_criterion_9_sca_roundtrip(verdict):
    rng = np.random.default_rng(9)
    roll = rng.uniform(-89, 89, 10_000)
    pitch = rng.uniform(-89, 89, 10_000)
    f = gravity_projection_many(roll, pitch)
    err = max(
        float(np.max(np.abs(angular_error(roll_from_f(f), roll)))),
        float(np.max(np.abs(pitch_from_f(f) - pitch))),
    )
    verdict(9, err < 1e-10, f"max angle error {err:.1e} deg over 10000 orientations (< 1e-10)")


def test_criterion_10_metric_spot_values(verdict):
    p = psnr(0.0251, 9.80)
    g = suppression_ratio(0.171414, 1.828244)
    verdict(10, abs(p - 51.83) <= 0.05 and abs(g - 0.0938) <= 0.0002,
            f"psnr {p:.4f} dB (51.83 +- 0.05), suppression ratio {g:.5f} (0.0938 +- 0.0002)")
    assert not math.isnan(p)
