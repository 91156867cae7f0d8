import time

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from accel_denoise.exceptions import InvalidArgumentError, InvalidDataError
from accel_denoise.knn import (
    KnnDenoiser,
    context_features,
    denoise_series,
    fit,
    load_index,
    predict,
    predict_many,
    save_index,
    select_k,
)


def brute_force(points, targets, q, k):
    """Full sort by (distance, index) and in-order averaging."""
    d2 = np.zeros(len(points))
    for j in range(points.shape[1]):
        d2 = d2 + (q[j] - points[:, j]) * (q[j] - points[:, j])
    order = sorted(range(len(points)), key=lambda i: (d2[i], i))[:k]
    acc = targets[min(order)].copy()
    for i in sorted(order)[1:]:
        acc += targets[i]
    return acc / k


class TestSelectK:
    @pytest.mark.parametrize("n,k", [(90_000, 134), (5, 1), (1, 1), (2, 1), (20, 2), (500, 10)])
    def test_values(self, n, k):
        assert select_k(n) == k

    def test_invalid(self):
        with pytest.raises(InvalidArgumentError):
            select_k(0)


class TestPredict:
    def test_matches_brute_force(self, rng):
        P = rng.standard_normal((200, 3))
        T = rng.standard_normal((200, 3))
        Q = rng.standard_normal((50, 3))
        index = fit(P, T)
        got = predict_many(index, Q, 7)
        for i in range(50):
            np.testing.assert_array_equal(got[i], brute_force(P, T, Q[i], 7))

    def test_single_pair(self):
        index = fit([[1.0, 2.0, 3.0]], [[9.0, 9.0, 9.0]])
        np.testing.assert_array_equal(predict(index, [100.0, 0.0, -5.0], 1), [9.0, 9.0, 9.0])

    def test_k1_nearest_target(self, rng):
        P = rng.standard_normal((30, 3))
        T = rng.standard_normal((30, 3))
        index = fit(P, T)
        np.testing.assert_array_equal(predict(index, P[4] + 1e-9, 1), T[4])

    def test_k_equals_n(self, rng):
        P = rng.standard_normal((25, 3))
        T = rng.standard_normal((25, 3))
        index = fit(P, T)
        a = predict(index, [0.0, 0.0, 0.0], 25)
        b = predict(index, [50.0, -3.0, 1.0], 25)
        np.testing.assert_array_equal(a, b)
        np.testing.assert_allclose(a, T.mean(axis=0), atol=1e-15)

    def test_duplicates_and_ties(self):
        P = np.array([[0.0, 0, 0], [0.0, 0, 0], [1.0, 0, 0], [-1.0, 0, 0]])
        T = np.array([[1.0, 0, 0], [3.0, 0, 0], [10.0, 0, 0], [20.0, 0, 0]])
        index = fit(P, T)
        np.testing.assert_array_equal(predict(index, [0, 0, 0], 2), [2.0, 0, 0])
        # equidistant neighbours 2 and 3: the lower index wins
        np.testing.assert_array_equal(predict(index, [0, 0, 0], 3), [14.0 / 3.0, 0, 0])

    def test_many_exact_ties(self):
        P = np.zeros((60, 3))
        T = np.arange(180, dtype=float).reshape(60, 3)
        index = fit(P, T)
        np.testing.assert_array_equal(predict(index, [0, 0, 0], 5), T[:5].mean(axis=0))

    @given(
        arrays(np.float64, (40, 3), elements=st.integers(-3, 3).map(float)),
        arrays(np.float64, (3,), elements=st.integers(-3, 3).map(float)),
        st.integers(1, 40),
    )
    def test_exact_on_tie_heavy_grids(self, P, q, k):
        T = np.arange(120, dtype=float).reshape(40, 3) * 0.37
        got = predict(fit(P, T), q, k)
        np.testing.assert_array_equal(got, brute_force(P, T, q, k))

    @given(st.integers(0, 10_000), st.integers(1, 15))
    def test_range_containment(self, seed, k):
        r = np.random.default_rng(seed)
        P = r.standard_normal((50, 3))
        T = r.standard_normal((50, 3))
        q = r.standard_normal(3)
        out = predict(fit(P, T), q, k)
        d = np.sum((P - q) ** 2, axis=1)
        nb = np.lexsort((np.arange(50), d))[:k]
        assert np.all(out >= T[nb].min(axis=0) - 1e-12)
        assert np.all(out <= T[nb].max(axis=0) + 1e-12)

    def test_permutation_invariance(self, rng):
        P = rng.standard_normal((100, 3))
        T = rng.standard_normal((100, 3))
        perm = rng.permutation(100)
        Q = rng.standard_normal((20, 3))
        np.testing.assert_allclose(
            predict_many(fit(P, T), Q, 6), predict_many(fit(P[perm], T[perm]), Q, 6), atol=1e-14
        )

    def test_errors(self, rng):
        index = fit(rng.standard_normal((10, 3)), rng.standard_normal((10, 3)))
        with pytest.raises(InvalidArgumentError):
            predict(index, [0, 0, 0], 0)
        with pytest.raises(InvalidArgumentError):
            predict(index, [0, 0, 0], 11)
        with pytest.raises(InvalidArgumentError):
            predict(index, [0, 0], 1)
        with pytest.raises(InvalidArgumentError):
            fit(np.zeros((0, 3)), np.zeros((0, 3)))
        with pytest.raises(InvalidArgumentError):
            fit([[np.nan, 0, 0]], [[0, 0, 0]])

    def test_faster_than_linear_scan(self, rng):
        P = rng.standard_normal((90_000, 3))
        T = rng.standard_normal((90_000, 3))
        Q = rng.standard_normal((200, 3))
        index = fit(P, T)
        k = select_k(90_000)
        t0 = time.perf_counter()
        fast = predict_many(index, Q, k)
        t_tree = time.perf_counter() - t0
        t0 = time.perf_counter()
        slow = []
        for q in Q:
            d = np.sum((P - q) ** 2, axis=1)
            slow.append(T[np.argpartition(d, k)[:k]].mean(axis=0))
        t_scan = time.perf_counter() - t0
        np.testing.assert_allclose(fast, slow, atol=1e-12)
        assert t_scan / t_tree >= 5.0


class TestSeries:
    def test_empty(self, rng):
        index = fit(rng.standard_normal((5, 3)), rng.standard_normal((5, 3)))
        assert denoise_series(index, np.zeros((0, 3)), 2).shape == (0, 3)

    def test_compositional(self, rng):
        index = fit(rng.standard_normal((80, 3)), rng.standard_normal((80, 3)))
        x = rng.standard_normal((100, 3))
        out = denoise_series(index, x, 4)
        assert out.shape == (100, 3)
        for i in (0, 17, 99):
            np.testing.assert_array_equal(out[i], predict(index, x[i], 4))
        np.testing.assert_array_equal(denoise_series(index, x[:1], 4)[0], predict(index, x[0], 4))


class TestContext:
    def test_context_one_is_identity(self, rng):
        X = rng.standard_normal((2, 6, 3))
        np.testing.assert_array_equal(context_features(X, 1), X.reshape(12, 3))

    def test_layout(self):
        X = np.arange(18, dtype=float).reshape(1, 6, 3)
        f = context_features(X, 3)
        assert f.shape == (6, 9)
        np.testing.assert_array_equal(f[2], np.concatenate([X[0, 1], X[0, 2], X[0, 3]]))
        # reflected at the left edge
        np.testing.assert_array_equal(f[0, :3], X[0, 1])

    def test_too_wide(self):
        with pytest.raises(InvalidArgumentError):
            context_features(np.zeros((1, 2, 3)), 7)


class TestDenoiser:
    def test_fit_predict_and_snapshot(self, rng, tmp_path):
        Y = np.tile(rng.standard_normal((1, 20, 3)), (10, 1, 1))
        X = Y + 0.01 * rng.standard_normal(Y.shape)
        model = KnnDenoiser(context=3).fit(X, Y)
        assert model.k_ == select_k(200)
        pred = model.predict(X)
        path = model.save(tmp_path / "knn.npz")
        loaded = KnnDenoiser.load(path)
        np.testing.assert_array_equal(loaded.predict(X), pred)
        assert (loaded.k_, loaded.context) == (model.k_, 3)
        np.testing.assert_array_equal(loaded.index_.points, model.index_.points)

    def test_threads_do_not_change_result(self, rng):
        X = rng.standard_normal((20, 10, 3))
        Y = rng.standard_normal((20, 10, 3))
        a = KnnDenoiser(k=5).fit(X, Y).predict(X)
        b = KnnDenoiser(k=5, n_jobs=2).fit(X, Y).predict(X)
        np.testing.assert_array_equal(a, b)

    def test_bad_snapshot(self, tmp_path):
        np.savez(tmp_path / "x.npz", header=np.frombuffer(b'{"format": "other"}', dtype=np.uint8))
        with pytest.raises(InvalidDataError):
            load_index(tmp_path / "x.npz")

    def test_snapshot_header(self, rng, tmp_path):
        index = fit(rng.standard_normal((4, 3)), rng.standard_normal((4, 3)))
        save_index(tmp_path / "i.npz", index, k=2)
        _, header = load_index(tmp_path / "i.npz")
        assert header["version"] == 1 and header["k"] == 2 and header["n"] == 4
