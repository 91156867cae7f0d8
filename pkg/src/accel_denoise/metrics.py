"""Reconstruction-quality metrics and the model comparison table."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np

from ._validation import check_positive, check_same_shape
from .exceptions import InvalidArgumentError, InvalidDataError

COLUMNS = ("Model", "RMSE [m/s²]", "MAE [m/s²]", "PSNR [dB]", "RAE [%]")
NOISY = "Noisy"


def rmse(pred, gt):
    """Root of the mean squared residual over all samples and axes."""
    pred, gt = check_same_shape(pred, gt)
    return float(np.sqrt(np.mean((pred - gt) ** 2)))


def mae(pred, gt):
    """Mean absolute residual over all samples and axes."""
    pred, gt = check_same_shape(pred, gt)
    return float(np.mean(np.abs(pred - gt)))


def psnr(rmse_value, max_ref):
    """Peak signal-to-noise ratio in dB; ``inf`` for a perfect reconstruction."""
    check_positive(rmse_value, "rmse", strict=False)
    check_positive(max_ref, "max_ref")
    if rmse_value == 0:
        return math.inf
    return 20.0 * math.log10(max_ref / rmse_value)


def max_reference(gt):
    """Largest absolute ground-truth value, the peak used by :func:`psnr`."""
    return float(np.max(np.abs(np.asarray(gt, dtype=np.float64))))


def rae(pred, gt):
    """Relative absolute error as a fraction.

    The denominator is the total absolute deviation of the ground truth from
    a single mean taken over every sample and axis.

    Raises
    ------
    InvalidDataError
        If the ground truth is constant.
    """
    pred, gt = check_same_shape(pred, gt)
    denom = float(np.sum(np.abs(gt - gt.mean())))
    if denom == 0.0:
        raise InvalidDataError("relative absolute error is undefined for a constant ground truth")
    return float(np.sum(np.abs(pred - gt)) / denom)


@dataclass(frozen=True)
class MetricsRow:
    model: str
    rmse: float
    mae: float
    psnr: float
    rae: float

    def cells(self):
        return (
            self.model,
            f"{self.rmse:.6f}",
            f"{self.mae:.6f}",
            "inf" if math.isinf(self.psnr) else f"{self.psnr:.4f}",
            f"{100.0 * self.rae:.5f}",
        )


@dataclass(frozen=True)
class MetricsReport:
    """Rows sorted by ascending RMSE, one of them the ``Noisy`` baseline."""

    rows: tuple
    max_ref: float

    def __getitem__(self, name):
        for row in self.rows:
            if row.model == name:
                return row
        raise KeyError(name)

    def names(self):
        return [r.model for r in self.rows]

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(COLUMNS)
        for row in self.rows:
            writer.writerow(row.cells())
        return buf.getvalue()

    def to_dict(self):
        return {
            "max_ref": self.max_ref,
            "columns": list(COLUMNS),
            "rows": [
                {
                    "model": r.model,
                    "rmse": r.rmse,
                    "mae": r.mae,
                    "psnr": None if math.isinf(r.psnr) else r.psnr,
                    "rae": r.rae,
                }
                for r in self.rows
            ],
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, data):
        rows = tuple(
            MetricsRow(
                r["model"], r["rmse"], r["mae"],
                math.inf if r["psnr"] is None else r["psnr"], r["rae"],
            )
            for r in data["rows"]
        )
        return cls(rows, data["max_ref"])


def score(name, pred, gt, max_ref):
    r = rmse(pred, gt)
    return MetricsRow(name, r, mae(pred, gt), psnr(r, max_ref), rae(pred, gt))


def compare(models, noisy, gt, max_ref=None):
    """Score every ``(name, denoised)`` pair against ``gt``.

    A ``Noisy`` row scoring the raw input is always added. Rows are sorted
    by RMSE; ties keep the input order (the baseline goes last among
    equals).
    """
    gt = np.asarray(gt, dtype=np.float64)
    if max_ref is None:
        max_ref = max_reference(gt)
    names = [name for name, _ in models]
    if len(set(names)) != len(names) or NOISY in names:
        raise InvalidArgumentError("model names must be unique and differ from 'Noisy'")
    rows = [score(name, pred, gt, max_ref) for name, pred in models]
    rows.append(score(NOISY, noisy, gt, max_ref))
    rows.sort(key=lambda r: r.rmse)
    return MetricsReport(tuple(rows), float(max_ref))
