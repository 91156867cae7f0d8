"""Stationary coarse alignment: roll and pitch from averaged specific force."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numpy as np

from ._validation import check_int, check_positive
from .exceptions import InvalidArgumentError

COLUMNS = (
    "Model",
    "RMSE roll [deg]",
    "RMSE pitch [deg]",
    "ratio roll [%]",
    "ratio pitch [%]",
)


def _vector(f):
    f = np.asarray(f, dtype=np.float64)
    if f.shape[-1] != 3:
        raise InvalidArgumentError(f"specific force must have 3 components, got shape {f.shape}")
    if not np.all(np.isfinite(f)):
        raise InvalidArgumentError("specific force must be finite")
    return f


def _wrap(deg):
    """Map angles to (-180, 180]."""
    out = np.mod(deg + 180.0, 360.0) - 180.0
    return np.where(out == -180.0, 180.0, out)


def roll_from_f(f):
    """Roll in degrees, ``atan2(-f_y, -f_z)`` in (-180, 180].

    Accepts one vector or an array of vectors ``(..., 3)``.
    """
    f = _vector(f)
    fy, fz = f[..., 1], f[..., 2]
    if np.any((fy == 0) & (fz == 0)):
        raise InvalidArgumentError("roll is undefined when f_y and f_z are both zero")
    out = _wrap(np.degrees(np.arctan2(-fy, -fz)))
    return float(out) if out.ndim == 0 else out


def pitch_from_f(f):
    """Pitch in degrees, in (-90, 90).

    With the sensed force ``g * [sin(theta), ...]`` of a north-east-down
    frame, pitch is the elevation of ``f_x`` over the y-z magnitude.
    """
    f = _vector(f)
    horiz = np.hypot(f[..., 1], f[..., 2])
    if np.any(horiz == 0):
        raise InvalidArgumentError("pitch is undefined when f_y and f_z are both zero")
    out = np.degrees(np.arctan2(f[..., 0], horiz))
    return float(out) if out.ndim == 0 else out


def angular_error(computed_deg, gt_deg):
    """Signed angle difference wrapped to (-180, 180]."""
    out = _wrap(np.asarray(computed_deg, dtype=np.float64) - np.asarray(gt_deg, dtype=np.float64))
    return float(out) if out.ndim == 0 else out


def suppression_ratio(model_rae, noisy_rae):
    """Denoised RAE over noisy RAE; below one means the noise was reduced."""
    check_positive(model_rae, "model_rae", strict=False)
    check_positive(noisy_rae, "noisy_rae")
    return model_rae / noisy_rae


def window_angles(series, averaging_len=None):
    """Roll and pitch of the mean specific force of each window.

    Parameters
    ----------
    series : array_like, shape (n_windows, H, 3) or (H, 3)
    averaging_len : int, optional
        Average only the first ``averaging_len`` samples.

    Returns
    -------
    numpy.ndarray, shape (n_windows, 2)
        Roll and pitch in degrees.
    """
    x = np.asarray(series, dtype=np.float64)
    if x.ndim == 2:
        x = x[None]
    if averaging_len is not None:
        averaging_len = check_int(averaging_len, "averaging_len", min_value=1)
        x = x[:, :averaging_len]
    f = x.mean(axis=1)
    return np.stack([roll_from_f(f), pitch_from_f(f)], axis=-1).reshape(-1, 2)


@dataclass(frozen=True)
class ScaRow:
    model: str
    rmse_roll_deg: float
    rmse_pitch_deg: float
    ratio_roll: float
    ratio_pitch: float

    def cells(self):
        return (
            self.model,
            f"{self.rmse_roll_deg:.6f}",
            f"{self.rmse_pitch_deg:.6f}",
            f"{100.0 * self.ratio_roll:.3f}",
            f"{100.0 * self.ratio_pitch:.3f}",
        )


@dataclass(frozen=True)
class ScaReport:
    rows: tuple

    def __getitem__(self, name):
        for row in self.rows:
            if row.model == name:
                return row
        raise KeyError(name)

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(COLUMNS)
        for row in self.rows:
            writer.writerow(row.cells())
        return buf.getvalue()

    def to_dict(self):
        return {"columns": list(COLUMNS), "rows": [r.__dict__.copy() for r in self.rows]}

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, data):
        return cls(tuple(ScaRow(**r) for r in data["rows"]))


def _angle_rmse(series, gt_angles, averaging_len):
    est = window_angles(series, averaging_len)
    err = angular_error(est, gt_angles)
    return np.sqrt(np.mean(np.square(err), axis=0))


def evaluate_sca(models, noisy, gt_angles, averaging_len=None):
    """Coarse-alignment accuracy of every denoiser relative to the raw input.

    Parameters
    ----------
    models : list of (name, array of shape (n_windows, H, 3))
    noisy : array, shape (n_windows, H, 3)
    gt_angles : array, shape (n_windows, 2)
        True roll and pitch of each window in degrees.
    averaging_len : int, optional
        Samples averaged before leveling; the whole window by default.
    """
    gt_angles = np.asarray(gt_angles, dtype=np.float64).reshape(-1, 2)
    base = _angle_rmse(noisy, gt_angles, averaging_len)
    if np.any(base == 0):
        raise InvalidArgumentError("noisy input has zero alignment error; ratios undefined")
    rows = []
    for name, series in list(models) + [("Noisy", noisy)]:
        r = _angle_rmse(series, gt_angles, averaging_len)
        rows.append(ScaRow(name, float(r[0]), float(r[1]), float(r[0] / base[0]), float(r[1] / base[1])))
    return ScaReport(tuple(rows))

