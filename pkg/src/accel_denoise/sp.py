"""Signal-processing baseline denoisers.

Moving average, Savitzky-Golay and db4 wavelet hard thresholding. The
functional forms filter along axis 0 and treat every trailing column (x, y,
z, ...) independently. The estimator classes wrap them behind the common
denoiser interface and pick their hyperparameters by brute-force search on
the training windows.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ._validation import check_int
from .base import BaseDenoiser
from .exceptions import InvalidArgumentError


def _as_series(x, name="x"):
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 0:
        raise InvalidArgumentError(f"{name} must be at least 1-D")
    if arr.shape[0] == 0:
        raise InvalidArgumentError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f"{name} contains non-finite values")
    return arr


# --------------------------------------------------------------------------
# moving average


def moving_average(x, t_window):
    """Causal trailing mean over ``t_window`` samples.

    Sample ``i`` is the mean of ``x[i - t_window + 1 : i + 1]``. The first
    ``t_window - 1`` samples, where the full window is not yet available,
    use the mean of everything seen so far.
    """
    x = _as_series(x)
    n = x.shape[0]
    t_window = check_int(t_window, "t_window", min_value=1, max_value=n)
    ref = x[:1]
    c = np.cumsum(x - ref, axis=0)
    c = np.concatenate([np.zeros_like(x[:1]), c], axis=0)
    idx = np.arange(1, n + 1)
    lo = np.maximum(idx - t_window, 0)
    count = (idx - lo).reshape((-1,) + (1,) * (x.ndim - 1))
    return (c[idx] - c[lo]) / count + ref


# --------------------------------------------------------------------------
# Savitzky-Golay


def savgol_coeffs(m, p):
    """Least-squares smoothing weights for a centred window of ``m`` samples.

    Weight ``C[j]`` multiplies ``x[i + j - (m - 1) // 2]``; the weights
    reproduce any polynomial of degree ``<= p`` exactly and sum to one.
    """
    m = check_int(m, "m", min_value=1)
    p = check_int(p, "p", min_value=0)
    if m % 2 == 0:
        raise InvalidArgumentError(f"window length must be odd, got {m}")
    if p >= m:
        raise InvalidArgumentError(f"polynomial degree {p} must be < window length {m}")
    half = (m - 1) // 2
    t = np.arange(-half, half + 1, dtype=np.float64)
    A = np.vander(t, p + 1, increasing=True)
    # row 0 of the pseudo-inverse evaluates the fitted polynomial at t = 0
    coeffs = np.linalg.pinv(A)[0]
    return 0.5 * (coeffs + coeffs[::-1])


def savitzky_golay(x, m, p, mode="mirror"):
    """Savitzky-Golay smoothing.

    Parameters
    ----------
    x : array_like, shape (n,) or (n, d)
    m : int
        Odd window length.
    p : int
        Polynomial degree, ``p < m``.
    mode : {"mirror", "interp"}
        ``"mirror"`` reflects the signal about its end samples (without
        repeating them). ``"interp"`` evaluates the least-squares polynomial
        of the first/last full window at the edge samples instead.
    """
    x = _as_series(x)
    coeffs = savgol_coeffs(m, p)
    n = x.shape[0]
    if n < m:
        raise InvalidArgumentError(f"signal length {n} is shorter than window {m}")
    half = (m - 1) // 2
    if mode == "mirror":
        pad = [(half, half)] + [(0, 0)] * (x.ndim - 1)
        xp = np.pad(x, pad, mode="reflect") if half else x
        windows = sliding_window_view(xp, m, axis=0)
        return windows @ coeffs
    if mode == "interp":
        out = np.empty_like(x)
        windows = sliding_window_view(x, m, axis=0)
        out[half : n - half] = windows @ coeffs
        if half:
            t = np.arange(m, dtype=np.float64)
            A = np.vander(t, p + 1, increasing=True)
            pinv = np.linalg.pinv(A)
            head = np.vander(t[:half], p + 1, increasing=True) @ pinv
            tail = np.vander(t[m - half :], p + 1, increasing=True) @ pinv
            out[:half] = np.tensordot(head, x[:m], axes=(1, 0))
            out[n - half :] = np.tensordot(tail, x[n - m :], axes=(1, 0))
        return out
    raise InvalidArgumentError(f"unknown edge mode {mode!r}")


# --------------------------------------------------------------------------
# discrete wavelet transform

# Daubechies wavelet with four vanishing moments, reconstruction low-pass.
DB4 = np.array(
    [
        0.2303778133088965,
        0.7148465705529157,
        0.6308807679298589,
        -0.027983769416859854,
        -0.18703481171909309,
        0.030841381835560764,
        0.0328830116668852,
        -0.010597401785069032,
    ]
)


def qmf(h):
    """High-pass partner of an orthonormal low-pass filter."""
    L = len(h)
    return np.array([(-1) ** n * h[L - 1 - n] for n in range(L)])


WAVELETS = {"db4": DB4}


def _filters(name):
    try:
        h = WAVELETS[name]
    except KeyError:
        raise InvalidArgumentError(f"unsupported wavelet {name!r}") from None
    return h, qmf(h)


def _periodic_index(M, L):
    k = np.arange(M // 2)[:, None]
    n = np.arange(L)[None, :]
    return (2 * k + n) % M


def dwt_periodic(y, h, g):
    """One analysis step of the periodised orthogonal DWT along axis 0."""
    M = y.shape[0]
    idx = _periodic_index(M, len(h))
    taps = y[idx]  # (M/2, L, ...)
    return np.tensordot(h, taps, axes=(0, 1)), np.tensordot(g, taps, axes=(0, 1))


def idwt_periodic(a, d, h, g):
    """Inverse of :func:`dwt_periodic`."""
    half = a.shape[0]
    M = 2 * half
    out = np.zeros((M,) + a.shape[1:])
    even = 2 * np.arange(half)
    for n in range(len(h)):
        # indices are distinct for a fixed tap, so fancy += is safe
        out[(even + n) % M] += h[n] * a + g[n] * d
    return out


def wavedec(y, levels, wavelet="db4"):
    """Multilevel periodised decomposition; ``len(y)`` must divide by ``2**levels``.

    Returns ``[a_J, d_J, ..., d_1]``.
    """
    h, g = _filters(wavelet)
    if y.shape[0] % (2**levels):
        raise InvalidArgumentError("length must be a multiple of 2**levels")
    details = []
    a = y
    for _ in range(levels):
        a, d = dwt_periodic(a, h, g)
        details.append(d)
    return [a] + details[::-1]


def waverec(coeffs, wavelet="db4"):
    h, g = _filters(wavelet)
    a = coeffs[0]
    for d in coeffs[1:]:
        a = idwt_periodic(a, d, h, g)
    return a


def hard_threshold(c, value):
    """Zero every coefficient with magnitude below ``value``."""
    return np.where(np.abs(c) < value, 0.0, c)


@dataclass(frozen=True)
class DwtConfig:
    """Wavelet denoiser settings.

    ``threshold`` is either a non-negative number or ``"universal"``
    (``sigma * sqrt(2 ln N)`` with sigma from the finest detail level's
    median absolute value). ``threshold_scale`` multiplies the universal
    value.
    """

    wavelet: str = "db4"
    levels: int = 4
    threshold: object = "universal"
    threshold_scale: float = 1.0

    def __post_init__(self):
        check_int(self.levels, "levels", min_value=1)
        _filters(self.wavelet)
        if isinstance(self.threshold, str):
            if self.threshold != "universal":
                raise InvalidArgumentError(f"unknown threshold rule {self.threshold!r}")
        elif not (self.threshold >= 0):
            raise InvalidArgumentError("threshold must be >= 0")


def _extend(x, levels, support):
    """Symmetric extension to a length divisible by ``2**levels``."""
    n = x.shape[0]
    block = 2**levels
    base = (support - 1) * 2 ** (levels - 1)
    total = n + 2 * base
    total += (-total) % block
    left = (total - n) // 2
    right = total - n - left
    pad = [(left, right)] + [(0, 0)] * (x.ndim - 1)
    return np.pad(x, pad, mode="symmetric"), left


def dwt_denoise(x, cfg=None):
    """Hard-threshold wavelet denoising; output has the input's length.

    The signal is symmetrically extended, decomposed with a periodised db4
    transform over ``cfg.levels`` dyadic scales, detail coefficients below
    the threshold are zeroed and the inverse transform is cropped back.
    """
    cfg = cfg or DwtConfig()
    x = _as_series(x)
    n = x.shape[0]
    if n < 2**cfg.levels:
        raise InvalidArgumentError(
            f"signal of length {n} is too short for {cfg.levels} levels"
        )
    h, _ = _filters(cfg.wavelet)
    y, left = _extend(x, cfg.levels, len(h))
    coeffs = wavedec(y, cfg.levels, cfg.wavelet)
    if cfg.threshold == "universal":
        sigma = np.median(np.abs(coeffs[-1]), axis=0) / 0.6745
        thr = cfg.threshold_scale * sigma * math.sqrt(2.0 * math.log(max(n, 2)))
    else:
        thr = float(cfg.threshold)
    if np.any(thr > 0):
        coeffs = [coeffs[0]] + [hard_threshold(d, thr) for d in coeffs[1:]]
    return waverec(coeffs, cfg.wavelet)[left : left + n]


# --------------------------------------------------------------------------
# estimators


def _apply_windows(func, X):
    """Apply a column-wise filter to every window of a ``(W, H, 3)`` batch."""
    W, H, A = X.shape
    flat = np.moveaxis(X, 1, 0).reshape(H, W * A)
    out = func(flat)
    return np.moveaxis(out.reshape(H, W, A), 0, 1)


class _TunedFilter(BaseDenoiser):
    """Shared brute-force hyperparameter search on training windows."""

    def _candidates(self, H):
        raise NotImplementedError

    def _filter(self, params, X):
        raise NotImplementedError

    def _fixed_params(self):
        return None

    def fit(self, X, y=None):
        X = self._validate(X)
        fixed = self._fixed_params()
        H = X.shape[1]
        if fixed is not None or y is None:
            params = fixed if fixed is not None else self._candidates(H)[0]
            self.params_ = params
            self.search_results_ = []
            return self
        y = self._validate(y, "y")
        results = []
        for params in self._candidates(H):
            pred = self._filter(params, X)
            results.append((float(np.sqrt(np.mean((pred - y) ** 2))), params))
        best = min(results, key=lambda r: r[0])
        self.params_ = best[1]
        self.search_results_ = results
        return self

    def predict(self, X):
        self._check_fitted("params_")
        X = self._validate(X)
        return self._filter(self.params_, X)


class MovingAverageDenoiser(_TunedFilter):
    """Trailing moving average; ``window=None`` selects it on the training set."""

    name = "MA"

    def __init__(self, window=None, candidates=(2, 3, 5, 8, 10, 15, 20, 25, 30, 40, 50, 75, 100)):
        self.window = window
        self.candidates = candidates

    def _fixed_params(self):
        return None if self.window is None else {"window": int(self.window)}

    def _candidates(self, H):
        return [{"window": int(t)} for t in self.candidates if t <= H] or [{"window": H}]

    def _filter(self, params, X):
        return _apply_windows(lambda s: moving_average(s, min(params["window"], s.shape[0])), X)


class SavitzkyGolayDenoiser(_TunedFilter):
    """Savitzky-Golay smoother with mirror edges."""

    name = "SG"

    def __init__(
        self,
        window_length=None,
        polyorder=None,
        window_candidates=(5, 7, 9, 11, 15, 21, 31, 41, 51, 71, 99),
        polyorder_candidates=(0, 1, 2, 3),
        mode="mirror",
    ):
        self.window_length = window_length
        self.polyorder = polyorder
        self.window_candidates = window_candidates
        self.polyorder_candidates = polyorder_candidates
        self.mode = mode

    def _fixed_params(self):
        if self.window_length is None or self.polyorder is None:
            return None
        return {"m": int(self.window_length), "p": int(self.polyorder)}

    def _candidates(self, H):
        out = [
            {"m": m, "p": p}
            for m, p in itertools.product(self.window_candidates, self.polyorder_candidates)
            if p < m and m <= H and (m - 1) // 2 < H
        ]
        if not out:
            m = H if H % 2 else H - 1
            out = [{"m": max(m, 1), "p": 0}]
        return out

    def _filter(self, params, X):
        return _apply_windows(
            lambda s: savitzky_golay(s, params["m"], params["p"], mode=self.mode), X
        )


class DwtDenoiser(_TunedFilter):
    """db4 hard-threshold wavelet denoiser."""

    name = "DWT"

    def __init__(
        self,
        levels=None,
        threshold="universal",
        threshold_scale=None,
        level_candidates=(1, 2, 3, 4, 5),
        scale_candidates=(0.5, 1.0, 2.0, 4.0, 8.0),
        wavelet="db4",
    ):
        self.levels = levels
        self.threshold = threshold
        self.threshold_scale = threshold_scale
        self.level_candidates = level_candidates
        self.scale_candidates = scale_candidates
        self.wavelet = wavelet

    def _fixed_params(self):
        if self.levels is None:
            return None
        if self.threshold == "universal" and self.threshold_scale is None:
            return None
        return {"levels": int(self.levels), "scale": float(self.threshold_scale or 1.0)}

    def _candidates(self, H):
        levels = [self.levels] if self.levels is not None else self.level_candidates
        if self.threshold != "universal":
            scales = [1.0]
        elif self.threshold_scale is not None:
            scales = [self.threshold_scale]
        else:
            scales = self.scale_candidates
        out = [
            {"levels": int(j), "scale": float(s)}
            for j in levels
            for s in scales
            if 2**j <= H
        ]
        return out or [{"levels": 1, "scale": 1.0}]

    def _config(self, params):
        return DwtConfig(
            wavelet=self.wavelet,
            levels=params["levels"],
            threshold=self.threshold,
            threshold_scale=params["scale"],
        )

    def _filter(self, params, X):
        cfg = self._config(params)
        return _apply_windows(lambda s: dwt_denoise(s, cfg), X)


class IdentityDenoiser(BaseDenoiser):
    """Returns its input; scores the raw noisy signal through the same path."""

    name = "Identity"

    def fit(self, X, y=None):
        self._validate(X)
        self.fitted_ = True
        return self

    def predict(self, X):
        self._check_fitted("fitted_")
        return self._validate(X).copy()


__all__ = [
    "DwtConfig",
    "DwtDenoiser",
    "IdentityDenoiser",
    "MovingAverageDenoiser",
    "SavitzkyGolayDenoiser",
    "dwt_denoise",
    "hard_threshold",
    "moving_average",
    "savgol_coeffs",
    "savitzky_golay",
]
