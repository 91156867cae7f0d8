"""Stationary accelerometer dataset simulation.

A simulated recording is the gravity vector projected on the body axes at a
fixed (roll, pitch) orientation, plus additive sensor errors: white noise
(velocity random walk), a first-order Gauss-Markov bias (bias instability)
and a constant offset. Two sensor grades are simulated for every
orientation, a noisy unit under test and a near-perfect ground truth.

Angles cross the public API in degrees and are converted to radians
internally.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.signal import lfilter

from ._validation import check_int, check_positive
from .exceptions import InvalidArgumentError, InvalidDataError

logger = logging.getLogger(__name__)

STANDARD_GRAVITY = 9.80665

CSV_HEADER = (
    "roll_deg",
    "pitch_deg",
    "yaw_deg",
    "t_s",
    "gt_x",
    "gt_y",
    "gt_z",
    "noisy_x",
    "noisy_y",
    "noisy_z",
)

BO_MODES = ("per_dataset", "per_recording")


@dataclass(frozen=True)
class EulerAngles:
    """Roll, pitch and yaw in degrees (z-y-x rotation sequence)."""

    roll_deg: float
    pitch_deg: float
    yaw_deg: float = 0.0

    def __post_init__(self):
        for name in ("roll_deg", "pitch_deg", "yaw_deg"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise InvalidArgumentError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, float(value))

    def radians(self):
        return (
            math.radians(self.roll_deg),
            math.radians(self.pitch_deg),
            math.radians(self.yaw_deg),
        )


@dataclass(frozen=True)
class NoiseSpec:
    """Accelerometer error magnitudes for one sensor grade.

    Parameters
    ----------
    vrw : float
        Velocity random walk, m/s/sqrt(s). The per-sample white-noise
        standard deviation is ``vrw * sqrt(sample_rate)``.
    bi : float
        Bias instability, m/s^2: steady-state standard deviation of the
        Gauss-Markov bias.
    bo : float
        Bias offset bound, m/s^2. Offsets are drawn uniformly from
        ``[-bo, bo]`` per axis.
    sample_rate : float
        Sampling frequency in Hz.
    bi_corr_time : float
        Correlation time of the Gauss-Markov bias in seconds.
    """

    vrw: float = 0.0
    bi: float = 0.0
    bo: float = 0.0
    sample_rate: float = 100.0
    bi_corr_time: float = 60.0

    def __post_init__(self):
        for name in ("vrw", "bi", "bo"):
            check_positive(getattr(self, name), name, strict=False)
        check_positive(self.sample_rate, "sample_rate")
        check_positive(self.bi_corr_time, "bi_corr_time")

    @property
    def white_std(self):
        return self.vrw * math.sqrt(self.sample_rate)


# Simulation column of the error-source table.
NOISY_SPEC = NoiseSpec(vrw=0.005, bi=0.001, bo=0.05)
GT_SPEC = NoiseSpec(vrw=1e-5, bi=1e-5, bo=1e-5)


@dataclass(frozen=True, eq=False)
class Recording:
    """Paired ground-truth / noisy specific-force series at one orientation.

    ``gt`` and ``noisy`` are read-only ``(N, 3)`` float64 arrays in m/s^2.
    """

    angles: EulerAngles
    gt: np.ndarray
    noisy: np.ndarray
    sample_rate: float = 100.0

    def __post_init__(self):
        gt = np.array(self.gt, dtype=np.float64)
        noisy = np.array(self.noisy, dtype=np.float64)
        if gt.ndim != 2 or gt.shape[1] != 3:
            raise InvalidDataError(f"gt must have shape (N, 3), got {gt.shape}")
        if noisy.shape != gt.shape:
            raise InvalidDataError(
                f"gt and noisy differ in shape: {gt.shape} vs {noisy.shape}"
            )
        if gt.shape[0] == 0:
            raise InvalidDataError("recording is empty")
        if not (np.all(np.isfinite(gt)) and np.all(np.isfinite(noisy))):
            raise InvalidDataError("recording contains non-finite samples")
        check_positive(self.sample_rate, "sample_rate")
        gt.flags.writeable = False
        noisy.flags.writeable = False
        object.__setattr__(self, "gt", gt)
        object.__setattr__(self, "noisy", noisy)
        object.__setattr__(self, "sample_rate", float(self.sample_rate))

    def __len__(self):
        return self.gt.shape[0]

    def __eq__(self, other):
        if not isinstance(other, Recording):
            return NotImplemented
        return (
            self.angles == other.angles
            and self.sample_rate == other.sample_rate
            and np.array_equal(self.gt, other.gt)
            and np.array_equal(self.noisy, other.noisy)
        )

    __hash__ = None

    @property
    def time(self):
        return np.arange(len(self)) / self.sample_rate


@dataclass(frozen=True)
class SimConfig:
    """Parameters of a simulated dataset.

    ``window_len`` is the number of samples per recording. ``bo_mode``
    selects whether the constant offset is one draw per sensor for the whole
    dataset (``"per_dataset"``) or redrawn for every recording.
    """

    angle_min_deg: float = -15.0
    angle_max_deg: float = 15.0
    angle_step_deg: float = 0.1
    window_len: int = 100
    noisy_spec: NoiseSpec = field(default_factory=lambda: NOISY_SPEC)
    gt_spec: NoiseSpec = field(default_factory=lambda: GT_SPEC)
    gravity: float = STANDARD_GRAVITY
    seed: int = 0
    bo_mode: str = "per_dataset"

    def __post_init__(self):
        check_positive(self.angle_step_deg, "angle_step_deg")
        check_int(self.window_len, "window_len", min_value=1)
        check_positive(self.gravity, "gravity")
        check_int(self.seed, "seed", min_value=0, max_value=2**64 - 1)
        if self.bo_mode not in BO_MODES:
            raise InvalidArgumentError(f"bo_mode must be one of {BO_MODES}")
        if self.noisy_spec.sample_rate != self.gt_spec.sample_rate:
            raise InvalidArgumentError("noisy and GT sample rates differ")

    @property
    def sample_rate(self):
        return self.noisy_spec.sample_rate

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        for key in ("noisy_spec", "gt_spec"):
            if key in data and isinstance(data[key], dict):
                data[key] = NoiseSpec(**data[key])
        return cls(**data)


def body_to_nav_matrix(angles):
    """Rotation matrix from body to navigation frame (z-y-x sequence).

    Parameters
    ----------
    angles : EulerAngles

    Returns
    -------
    numpy.ndarray, shape (3, 3)
    """
    phi, theta, psi = angles.radians()
    cf, sf = math.cos(phi), math.sin(phi)
    ct, st = math.cos(theta), math.sin(theta)
    cp, sp = math.cos(psi), math.sin(psi)
    return np.array(
        [
            [ct * cp, sf * st * cp - cf * sp, cf * st * cp + sf * sp],
            [ct * sp, sf * st * sp + cf * cp, cf * st * sp - sf * cp],
            [-st, sf * ct, cf * ct],
        ]
    )


def gravity_projection(angles, gravity=STANDARD_GRAVITY):
    """Specific force sensed by a stationary accelerometer, in m/s^2.

    The navigation frame is north-east-down, so a level sensor reads
    ``[0, 0, -g]``. Yaw has no effect.
    """
    check_positive(gravity, "gravity")
    phi, theta, _ = angles.radians()
    return np.array(
        [
            math.sin(theta),
            -math.sin(phi) * math.cos(theta),
            -math.cos(phi) * math.cos(theta),
        ]
    ) * gravity


def gravity_projection_many(roll_deg, pitch_deg, gravity=STANDARD_GRAVITY):
    """Vectorised :func:`gravity_projection` over arrays of angles."""
    phi = np.radians(np.asarray(roll_deg, dtype=np.float64))
    theta = np.radians(np.asarray(pitch_deg, dtype=np.float64))
    return np.stack(
        [np.sin(theta), -np.sin(phi) * np.cos(theta), -np.cos(phi) * np.cos(theta)],
        axis=-1,
    ) * gravity


def _axis_values(lo, hi, step):
    span = (hi - lo) / step
    count = round(span)
    if abs(span - count) > 1e-9 * max(1.0, abs(span)):
        raise InvalidArgumentError(
            f"angle range [{lo}, {hi}) is not a whole number of {step} steps"
        )
    if count < 0:
        raise InvalidArgumentError("angle_max_deg must be >= angle_min_deg")
    if count == 0:
        return [float(lo)]
    return [lo + i * step for i in range(count)]


def generate_grid(config):
    """Roll x pitch grid on the half-open interval ``[min, max)``, yaw 0.

    With the default config this yields ``300**2 = 90000`` orientations.
    """
    values = _axis_values(config.angle_min_deg, config.angle_max_deg, config.angle_step_deg)
    return [EulerAngles(r, p, 0.0) for r in values for p in values]


def draw_offset(spec, rng):
    return rng.uniform(-spec.bo, spec.bo, size=3) if spec.bo > 0 else np.zeros(3)


def synthesize_errors(spec, n, rng, offset=None):
    """Additive accelerometer errors for ``n`` samples.

    Sum of white noise, a stationary first-order Gauss-Markov bias and a
    constant offset, independently per axis.

    Parameters
    ----------
    spec : NoiseSpec
    n : int
        Number of samples.
    rng : numpy.random.Generator
    offset : array-like of shape (3,), optional
        Use this constant offset instead of drawing one from ``rng``.

    Returns
    -------
    numpy.ndarray, shape (n, 3)
    """
    n = check_int(n, "n", min_value=1)
    white = rng.standard_normal((n, 3)) * spec.white_std

    # stationary start, AR(1) recursion via lfilter
    a = math.exp(-1.0 / (spec.sample_rate * spec.bi_corr_time))
    drive = rng.standard_normal((n, 3))
    drive[1:] *= spec.bi * math.sqrt(1.0 - a * a)
    drive[0] *= spec.bi
    bias = lfilter([1.0], [1.0, -a], drive, axis=0)

    if offset is None:
        offset = rng.uniform(-1.0, 1.0, size=3) * spec.bo
    return white + bias + np.asarray(offset, dtype=np.float64)


def recording_rng(seed, index):
    """Independent generator for grid point ``index``.

    Substreams are keyed on ``(seed, index)`` so serial and parallel
    generation agree bit for bit.
    """
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def dataset_offsets(config):
    """Shared (gt, noisy) offsets used when ``bo_mode == "per_dataset"``."""
    rng = np.random.default_rng(np.random.SeedSequence(config.seed))
    gt_off = rng.uniform(-1.0, 1.0, size=3) * config.gt_spec.bo
    noisy_off = rng.uniform(-1.0, 1.0, size=3) * config.noisy_spec.bo
    return gt_off, noisy_off


def _make_recording(config, index, angles, offsets):
    rng = recording_rng(config.seed, index)
    clean = gravity_projection(angles, config.gravity)
    gt_off, noisy_off = offsets
    n = config.window_len
    gt = clean + synthesize_errors(config.gt_spec, n, rng, offset=gt_off)
    noisy = clean + synthesize_errors(config.noisy_spec, n, rng, offset=noisy_off)
    return Recording(angles, gt, noisy, config.sample_rate)


def build_dataset(config, workers=1):
    """One :class:`Recording` per grid point, reproducible from ``config.seed``.

    Parameters
    ----------
    config : SimConfig
    workers : int, default 1
        Thread pool size. Output does not depend on it.
    """
    grid = generate_grid(config)
    if config.bo_mode == "per_dataset":
        offsets = dataset_offsets(config)
    else:
        offsets = (None, None)
    logger.info("simulating %d recordings of %d samples", len(grid), config.window_len)

    def make(item):
        index, angles = item
        return _make_recording(config, index, angles, offsets)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(make, enumerate(grid)))
    return [make(item) for item in enumerate(grid)]


def rotate_recording(rec, new_angles):
    """Re-express ``rec`` as if the sensor sat at ``new_angles``."""
    old = body_to_nav_matrix(rec.angles)
    new = body_to_nav_matrix(new_angles)
    rot = new.T @ old  # old body -> new body
    return Recording(new_angles, rec.gt @ rot.T, rec.noisy @ rot.T, rec.sample_rate)


def augment(rec, angle_jitter_deg, extra_noise_std, rng):
    """Angular plus additive-noise augmentation of one recording.

    Roll and pitch are perturbed by independent uniform draws from
    ``[-angle_jitter_deg, angle_jitter_deg]``; both channels are rotated
    consistently and the stored angles updated. White Gaussian noise of
    ``extra_noise_std`` is then added to the noisy channel only.
    """
    check_positive(angle_jitter_deg, "angle_jitter_deg", strict=False)
    check_positive(extra_noise_std, "extra_noise_std", strict=False)
    if angle_jitter_deg == 0 and extra_noise_std == 0:
        return rec
    d_roll, d_pitch = rng.uniform(-1.0, 1.0, size=2) * angle_jitter_deg
    out = rec
    if angle_jitter_deg > 0:
        a = rec.angles
        out = rotate_recording(
            rec, EulerAngles(a.roll_deg + d_roll, a.pitch_deg + d_pitch, a.yaw_deg)
        )
    if extra_noise_std > 0:
        noise = rng.standard_normal(out.noisy.shape) * extra_noise_std
        out = Recording(out.angles, out.gt, out.noisy + noise, out.sample_rate)
    return out


def _fmt(value):
    return repr(float(value))


def iter_csv_rows(rec):
    a = rec.angles
    head = [_fmt(a.roll_deg), _fmt(a.pitch_deg), _fmt(a.yaw_deg)]
    t = rec.time.tolist()
    gt = rec.gt.tolist()
    noisy = rec.noisy.tolist()
    for i in range(len(rec)):
        yield head + [repr(t[i])] + [repr(v) for v in gt[i]] + [repr(v) for v in noisy[i]]


def write_recordings_csv(path, recordings: Iterable[Recording]):
    """Write recordings to one CSV file, rows grouped by recording.

    Floats use the shortest round-trip representation so reading the file
    back reproduces every value exactly.
    """
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for rec in recordings:
            writer.writerows(iter_csv_rows(rec))
    return path


def write_dataset(out_dir, recordings: Sequence[Recording], config, name="dataset"):
    """Write ``<name>.csv`` plus a ``<name>.json`` metadata sidecar."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = write_recordings_csv(out_dir / f"{name}.csv", recordings)
    meta = {
        "format": "accel-denoise-dataset",
        "version": 1,
        "n_recordings": len(recordings),
        "n_samples": int(sum(len(r) for r in recordings)),
        "sim_config": config.to_dict() if config is not None else None,
    }
    meta_path = out_dir / f"{name}.json"
    meta_path.write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    return csv_path, meta_path


def with_overrides(config, **overrides):
    """Copy of ``config`` with non-``None`` overrides applied."""
    return replace(config, **{k: v for k, v in overrides.items() if v is not None})
