"""Loading recorded datasets and cutting them into windows."""

from __future__ import annotations

import csv
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._validation import check_int
from .exceptions import InvalidArgumentError, InvalidDataError, ParseError
from .sim import CSV_HEADER, EulerAngles, Recording

logger = logging.getLogger(__name__)

SIGNAL_COLUMNS = ("gt_x", "gt_y", "gt_z", "noisy_x", "noisy_y", "noisy_z")


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    roll_deg: float
    pitch_deg: float
    sample_rate: float
    yaw_deg: float = 0.0


@dataclass(frozen=True)
class FieldManifest:
    """List of recorded files with their reference orientation.

    ``columns`` optionally maps canonical column names (``gt_x`` ...
    ``noisy_z``) to the names used in the files.
    """

    entries: tuple
    columns: dict = field(default_factory=dict)
    root: str = "."

    def __post_init__(self):
        entries = tuple(
            e if isinstance(e, ManifestEntry) else ManifestEntry(**e) for e in self.entries
        )
        paths = [e.path for e in entries]
        if len(set(paths)) != len(paths):
            raise InvalidArgumentError("manifest paths must be unique")
        for e in entries:
            if not (e.sample_rate > 0):
                raise InvalidArgumentError(f"{e.path}: sample_rate must be > 0")
        unknown = set(self.columns) - set(SIGNAL_COLUMNS)
        if unknown:
            raise InvalidArgumentError(f"unknown column mapping keys: {sorted(unknown)}")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def from_json(cls, path):
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise FileNotFoundError(f"manifest not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ParseError(str(exc), path=str(path), line=exc.lineno) from None
        return cls(
            entries=tuple(data["entries"]),
            columns=data.get("columns", {}),
            root=str(path.parent),
        )

    def to_json(self, path):
        data = {
            "entries": [e.__dict__ for e in self.entries],
            "columns": dict(self.columns),
        }
        Path(path).write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")


def _parse_float(text, path, line, column):
    try:
        return float(text)
    except ValueError:
        raise ParseError(f"column {column!r}: not a number: {text!r}", path, line) from None


def _read_rows(path, wanted):
    """Yield ``(line_no, {name: float})`` for the ``wanted`` column names."""
    try:
        fh = open(path, newline="", encoding="utf-8")
    except FileNotFoundError:
        raise FileNotFoundError(f"recording not found: {path}") from None
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("file is empty", str(path), 1) from None
        header = [h.strip() for h in header]
        missing = [w for w in wanted if w not in header]
        if missing:
            raise ParseError(f"missing columns {missing}", str(path), 1)
        idx = {w: header.index(w) for w in wanted}
        for row in reader:
            line = reader.line_num
            if not row:
                continue
            if len(row) != len(header):
                raise ParseError(
                    f"expected {len(header)} fields, got {len(row)}", str(path), line
                )
            yield line, {w: _parse_float(row[i], str(path), line, w) for w, i in idx.items()}


def _load_entry(entry, root, columns):
    path = Path(root) / entry.path
    names = [columns.get(c, c) for c in SIGNAL_COLUMNS]
    values = []
    dropped = 0
    for _, row in _read_rows(path, names):
        sample = [row[n] for n in names]
        if not all(math.isfinite(v) for v in sample):
            dropped += 1
            continue
        values.append(sample)
    if dropped:
        logger.warning("%s: rejected %d rows with non-finite values", path, dropped)
    if not values:
        raise InvalidDataError(f"{path}: recording is empty")
    arr = np.asarray(values, dtype=np.float64)
    angles = EulerAngles(entry.roll_deg, entry.pitch_deg, entry.yaw_deg)
    return Recording(angles, arr[:, :3], arr[:, 3:], entry.sample_rate)


def load_recordings(manifest, workers=1):
    """Load every manifest entry as a validated :class:`Recording`.

    Raises
    ------
    FileNotFoundError
        A listed file does not exist (message carries the path).
    ParseError
        A row does not match the schema (message carries the line number).
    InvalidDataError
        A file holds no usable samples.
    """
    def load(entry):
        return _load_entry(entry, manifest.root, manifest.columns)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(load, manifest.entries))
    return [load(e) for e in manifest.entries]


def read_recordings_csv(path, sample_rate=None):
    """Read a multi-recording CSV written by :func:`~accel_denoise.sim.write_recordings_csv`.

    A new recording starts whenever the angle columns change or ``t_s``
    returns to zero. If ``sample_rate`` is not given it is taken from the
    ``.json`` sidecar next to the file, falling back to the first time step.
    """
    path = Path(path)
    if sample_rate is None:
        meta = path.with_suffix(".json")
        if meta.exists():
            cfg = json.loads(meta.read_text(encoding="utf-8")).get("sim_config") or {}
            sample_rate = (cfg.get("noisy_spec") or {}).get("sample_rate")

    groups = []
    key = None
    for _, row in _read_rows(path, CSV_HEADER):
        k = (row["roll_deg"], row["pitch_deg"], row["yaw_deg"])
        if k != key or row["t_s"] == 0.0:
            groups.append((k, [], []))
            key = k
        _, ts, samples = groups[-1]
        ts.append(row["t_s"])
        samples.append([row[c] for c in SIGNAL_COLUMNS])

    recordings = []
    for (roll, pitch, yaw), ts, samples in groups:
        rate = sample_rate
        if rate is None:
            rate = 1.0 / (ts[1] - ts[0]) if len(ts) > 1 else 1.0
        arr = np.asarray(samples, dtype=np.float64)
        recordings.append(
            Recording(EulerAngles(roll, pitch, yaw), arr[:, :3], arr[:, 3:], rate)
        )
    if not recordings:
        raise InvalidDataError(f"{path}: no recordings")
    return recordings


def window(rec, h, stride):
    """Cut ``rec`` into consecutive windows of ``h`` samples.

    Windows start every ``stride`` samples; a trailing partial window is
    dropped.
    """
    n = len(rec)
    h = check_int(h, "h", min_value=1)
    stride = check_int(stride, "stride", min_value=1)
    if h > n:
        raise InvalidArgumentError(f"window length {h} exceeds recording length {n}")
    return [
        Recording(rec.angles, rec.gt[s : s + h], rec.noisy[s : s + h], rec.sample_rate)
        for s in range(0, n - h + 1, stride)
    ]
