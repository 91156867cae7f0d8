"""Exact k-nearest-neighbour regression denoiser.

Each noisy sample (optionally with a few neighbouring samples as context) is
replaced by the unweighted mean ground-truth value of its ``k`` nearest
noisy training samples under the Euclidean distance.

Neighbour search runs on a kd-tree, but membership of the k-set is decided
on distances recomputed here, ties going to the lower training index, and
the ground-truth rows are accumulated in ascending index order. Predictions
therefore match a brute-force sort-and-average bit for bit.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from ._validation import check_int
from .base import BaseDenoiser
from .exceptions import InvalidArgumentError, InvalidDataError

SNAPSHOT_FORMAT = "accel-denoise-knn"
SNAPSHOT_VERSION = 1
_CHUNK = 4096


@dataclass(frozen=True, eq=False)
class KnnIndex:
    """Training pairs and the spatial index built over the noisy side."""

    points: np.ndarray
    targets: np.ndarray
    tree: cKDTree

    @property
    def n(self):
        return self.points.shape[0]

    @property
    def dim(self):
        return self.points.shape[1]


def fit(points, targets):
    """Build an exact index over ``(noisy, ground truth)`` pairs.

    Parameters
    ----------
    points : array_like, shape (n, r)
        Noisy feature vectors.
    targets : array_like, shape (n, 3)
        Ground-truth vectors returned by queries.
    """
    points = np.array(points, dtype=np.float64)
    targets = np.array(targets, dtype=np.float64)
    if points.ndim == 1:
        points = points[:, None]
    if targets.ndim == 1:
        targets = targets[:, None]
    if points.shape[0] == 0:
        raise InvalidArgumentError("cannot fit an index on zero pairs")
    if targets.shape[0] != points.shape[0]:
        raise InvalidArgumentError(
            f"{points.shape[0]} points but {targets.shape[0]} targets"
        )
    if not (np.all(np.isfinite(points)) and np.all(np.isfinite(targets))):
        raise InvalidArgumentError("training pairs must be finite")
    points.flags.writeable = False
    targets.flags.writeable = False
    return KnnIndex(points, targets, cKDTree(points, balanced_tree=False))


def select_k(n):
    """Neighbourhood size ``round(sqrt(n / 5))`` clamped to ``[1, n]``."""
    n = check_int(n, "n", min_value=1)
    return int(min(max(math.floor(math.sqrt(n / 5.0) + 0.5), 1), n))


def _sq_dist(queries, points):
    """Squared Euclidean distances, summed over coordinates in order."""
    diff = queries[:, None, :] - points
    acc = diff[..., 0] * diff[..., 0]
    for j in range(1, diff.shape[-1]):
        acc = acc + diff[..., j] * diff[..., j]
    return acc


def _ordered_mean(targets, sel):
    """Mean of ``targets[sel]`` per row of ``sel``, summed in ascending index order."""
    sel = np.sort(sel, axis=1)
    acc = targets[sel[:, 0]].copy()
    for j in range(1, sel.shape[1]):
        acc += targets[sel[:, j]]
    return acc / sel.shape[1]


def _neighbours(index, queries, k, workers):
    n = index.n
    if k == n:
        return np.broadcast_to(np.arange(n), (queries.shape[0], n))
    kk = k + 1
    tree_d, cand = index.tree.query(queries, kk, workers=workers)
    cand = np.asarray(cand, dtype=np.intp).reshape(queries.shape[0], kk)
    tree_d = np.asarray(tree_d).reshape(queries.shape[0], kk)
    d2 = _sq_dist(queries, index.points[cand])
    # stable ordering by (distance, training index)
    order = np.lexsort((cand, d2), axis=1)
    cand_sorted = np.take_along_axis(cand, order, axis=1)
    d2_sorted = np.take_along_axis(d2, order, axis=1)
    kth = d2_sorted[:, k - 1]
    # Every point outside the candidate set is at least as far as the last
    # tree candidate; if that is clearly beyond the k-th distance the k-set
    # is settled, otherwise fall back to a radius query.
    outer = tree_d[:, -1] ** 2
    settled = outer > kth * (1.0 + 1e-9) + 1e-300
    sel = cand_sorted[:, :k].copy()
    for i in np.flatnonzero(~settled):
        radius = math.sqrt(kth[i]) * (1.0 + 1e-7) + 1e-300
        ball = np.asarray(index.tree.query_ball_point(queries[i], radius), dtype=np.intp)
        bd = _sq_dist(queries[i : i + 1], index.points[ball])[0]
        sel[i] = ball[np.lexsort((ball, bd))[:k]]
    return sel


def predict_many(index, queries, k, workers=1):
    """Denoised vectors for a batch of queries, shape ``(q, 3)``."""
    queries = np.asarray(queries, dtype=np.float64)
    if queries.ndim == 1:
        queries = queries[None]
    if queries.shape[1] != index.dim:
        raise InvalidArgumentError(
            f"query dimension {queries.shape[1]} does not match index dimension {index.dim}"
        )
    if not np.all(np.isfinite(queries)):
        raise InvalidArgumentError("queries must be finite")
    k = check_int(k, "k", min_value=1, max_value=index.n)
    out = np.empty((queries.shape[0], index.targets.shape[1]))
    for s in range(0, queries.shape[0], _CHUNK):
        q = queries[s : s + _CHUNK]
        sel = _neighbours(index, q, k, workers)
        out[s : s + _CHUNK] = _ordered_mean(index.targets, sel)
    return out


def predict(index, x, k):
    """Mean ground truth of the ``k`` training samples nearest to ``x``."""
    return predict_many(index, np.asarray(x, dtype=np.float64)[None], k)[0]


def denoise_series(index, x, k, workers=1):
    """Apply :func:`predict` to every row of a series; empty in, empty out."""
    x = np.asarray(x, dtype=np.float64)
    if x.size == 0:
        return np.empty((0, index.targets.shape[1]))
    return predict_many(index, x, k, workers=workers)


def context_features(X, context):
    """Per-sample feature vectors from a batch of windows.

    Each sample is concatenated with its ``context - 1`` neighbours inside
    the same window (centred, reflected at the window edges), giving
    ``3 * context`` features. ``context=1`` is the bare 3-axis sample.

    Returns
    -------
    numpy.ndarray, shape (n_windows * H, 3 * context)
    """
    X = np.asarray(X, dtype=np.float64)
    W, H, A = X.shape
    if context == 1:
        return X.reshape(W * H, A)
    before = (context - 1) // 2
    after = context - 1 - before
    if max(before, after) >= H:
        raise InvalidArgumentError(f"context {context} too wide for windows of {H}")
    Xp = np.pad(X, ((0, 0), (before, after), (0, 0)), mode="reflect")
    feats = np.concatenate([Xp[:, j : j + H] for j in range(context)], axis=2)
    return feats.reshape(W * H, A * context)


def save_index(path, index, k=None, context=1):
    """Write a versioned binary snapshot (``.npz``) of a fitted index."""
    header = {
        "format": SNAPSHOT_FORMAT,
        "version": SNAPSHOT_VERSION,
        "n": int(index.n),
        "dim": int(index.dim),
        "k": None if k is None else int(k),
        "context": int(context),
    }
    path = Path(path)
    with path.open("wb") as fh:
        np.savez(
            fh,
            header=np.frombuffer(json.dumps(header).encode(), dtype=np.uint8),
            points=index.points,
            targets=index.targets,
        )
    return path


def load_index(path):
    """Read a snapshot written by :func:`save_index`.

    Returns
    -------
    (KnnIndex, dict)
        The rebuilt index and the snapshot header.
    """
    with np.load(path, allow_pickle=False) as data:
        try:
            header = json.loads(bytes(data["header"]).decode())
        except (KeyError, ValueError):
            raise InvalidDataError(f"{path}: not a kNN snapshot") from None
        if header.get("format") != SNAPSHOT_FORMAT:
            raise InvalidDataError(f"{path}: not a kNN snapshot")
        if header.get("version") != SNAPSHOT_VERSION:
            raise InvalidDataError(f"{path}: unsupported snapshot version {header.get('version')}")
        return fit(data["points"], data["targets"]), header


class KnnDenoiser(BaseDenoiser):
    """kNN regression denoiser over windows.

    Parameters
    ----------
    k : int or None
        Neighbourhood size; ``None`` uses :func:`select_k` on the number of
        training samples.
    context : int, default 1
        Samples per query vector (see :func:`context_features`).
    n_jobs : int, default 1
        Worker threads for the tree queries; ``-1`` uses every core.
    """

    name = "kNN"

    def __init__(self, k=None, context=1, n_jobs=1):
        self.k = k
        self.context = context
        self.n_jobs = n_jobs

    def fit(self, X, y):
        X = self._validate(X)
        y = self._validate(y, "y")
        if X.shape != y.shape:
            raise InvalidArgumentError(f"X and y differ in shape: {X.shape} vs {y.shape}")
        context = check_int(self.context, "context", min_value=1)
        feats = context_features(X, context)
        self.index_ = fit(feats, y.reshape(-1, y.shape[-1]))
        self.k_ = select_k(self.index_.n) if self.k is None else check_int(
            self.k, "k", min_value=1, max_value=self.index_.n
        )
        return self

    def predict(self, X):
        self._check_fitted("index_")
        X = self._validate(X)
        feats = context_features(X, self.context)
        out = predict_many(self.index_, feats, self.k_, workers=self.n_jobs)
        return out.reshape(X.shape)

    def save(self, path):
        self._check_fitted("index_")
        return save_index(path, self.index_, k=self.k_, context=self.context)

    @classmethod
    def load(cls, path, n_jobs=1):
        index, header = load_index(path)
        model = cls(k=header["k"], context=header["context"], n_jobs=n_jobs)
        model.index_ = index
        model.k_ = header["k"] if header["k"] is not None else select_k(index.n)
        return model
