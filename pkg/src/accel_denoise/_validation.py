"""Input validation helpers in the spirit of ``sklearn.utils.validation``."""

from __future__ import annotations

import math
import numbers

import numpy as np

from .exceptions import InvalidArgumentError, InvalidDataError


def check_positive(value, name, strict=True):
    if not isinstance(value, numbers.Real) or not math.isfinite(value):
        raise InvalidArgumentError(f"{name} must be a finite number, got {value!r}")
    if strict and value <= 0:
        raise InvalidArgumentError(f"{name} must be > 0, got {value!r}")
    if not strict and value < 0:
        raise InvalidArgumentError(f"{name} must be >= 0, got {value!r}")
    return value


def check_int(value, name, min_value=None, max_value=None):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise InvalidArgumentError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if min_value is not None and value < min_value:
        raise InvalidArgumentError(f"{name} must be >= {min_value}, got {value}")
    if max_value is not None and value > max_value:
        raise InvalidArgumentError(f"{name} must be <= {max_value}, got {value}")
    return value


def check_series(x, name="x", allow_empty=False):
    """Return ``x`` as a float64 array of shape ``(n,)`` or ``(n, d)``.

    Raises
    ------
    InvalidArgumentError
        If the array is empty (unless allowed), has more than two
        dimensions, or contains non-finite values.
    """
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim not in (1, 2):
        raise InvalidArgumentError(f"{name} must be 1-D or 2-D, got shape {arr.shape}")
    if arr.shape[0] == 0 and not allow_empty:
        raise InvalidArgumentError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f"{name} contains non-finite values")
    return arr


def check_windows(X, name="X", n_axes=3):
    """Return a batch of windows as float64 ``(n_windows, H, n_axes)``.

    A single window ``(H, n_axes)`` is promoted to a batch of one.
    """
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[None]
    if arr.ndim != 3 or arr.shape[-1] != n_axes:
        raise InvalidArgumentError(
            f"{name} must have shape (n_windows, H, {n_axes}), got {np.shape(X)}"
        )
    if arr.shape[0] == 0 or arr.shape[1] == 0:
        raise InvalidDataError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise InvalidDataError(f"{name} contains non-finite values")
    return arr


def check_same_shape(a, b, names=("pred", "gt")):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise InvalidArgumentError(
            f"{names[0]} and {names[1]} differ in shape: {a.shape} vs {b.shape}"
        )
    if a.size == 0:
        raise InvalidArgumentError(f"{names[0]} is empty")
    return a, b
