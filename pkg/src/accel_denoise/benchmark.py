"""End-to-end benchmark: simulate, window, split, fit every denoiser, score."""

from __future__ import annotations

import logging
import time
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from ._validation import check_int
from .exceptions import ConfigError
from .knn import KnnDenoiser
from .metrics import compare
from .nn import RecurrentDenoiser
from .sca import evaluate_sca
from .sim import NoiseSpec, SimConfig, build_dataset
from .sp import DwtDenoiser, IdentityDenoiser, MovingAverageDenoiser, SavitzkyGolayDenoiser

logger = logging.getLogger(__name__)

SP_MODELS = ("DWT", "SG", "MA")
LEARNING_MODELS = ("kNN", "GRU", "LSTM", "RNN")
ALL_MODELS = LEARNING_MODELS + SP_MODELS
SPLIT_MODES = ("windows", "recordings")
RECORDING_LEN = 500
DESK_GRID_STEP = 1.0
_RNN_KIND = {"GRU": "bigru", "LSTM": "lstm2", "RNN": "birnn"}


@dataclass(frozen=True)
class BenchmarkConfig:
    """Everything that defines one benchmark run.

    ``window`` is the number of samples each denoiser sees at once. Each
    simulated recording (``sim.window_len`` samples) is cut into
    non-overlapping windows of that length. With ``split_mode="windows"``
    the windows of every recording are divided between the train,
    validation and test sets in the given proportions; with
    ``"recordings"`` whole recordings are assigned instead.
    """

    sim: SimConfig = field(default_factory=lambda: SimConfig(window_len=RECORDING_LEN))
    window: int = 50
    split: tuple = (0.7, 0.1, 0.2)
    split_mode: str = "windows"
    models: tuple = ALL_MODELS
    knn_k: int = None
    knn_context: int = 5
    hidden_dim: int = 32
    epochs: int = 20
    batch_size: int = 64
    step_size: float = 1e-2
    step_decay: float = 0.9
    sca_averaging: int = None
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if isinstance(self.sim, dict):
            object.__setattr__(self, "sim", SimConfig.from_dict(self.sim))
        object.__setattr__(self, "split", tuple(float(s) for s in self.split))
        object.__setattr__(self, "models", tuple(self.models))
        try:
            check_int(self.window, "window", min_value=1)
            check_int(self.knn_context, "knn_context", min_value=1)
            check_int(self.hidden_dim, "hidden_dim", min_value=1)
            check_int(self.epochs, "epochs", min_value=0)
            check_int(self.batch_size, "batch_size", min_value=1)
            check_int(self.threads, "threads", min_value=1)
            check_int(self.seed, "seed", min_value=0)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if self.window > self.sim.window_len:
            raise ConfigError(
                f"window {self.window} is longer than the recordings ({self.sim.window_len})"
            )
        if len(self.split) != 3 or any(s < 0 for s in self.split) or abs(sum(self.split) - 1) > 1e-9:
            raise ConfigError("split must be three non-negative fractions summing to 1")
        if self.split_mode not in SPLIT_MODES:
            raise ConfigError(f"split_mode must be one of {SPLIT_MODES}")
        unknown = [m for m in self.models if m not in ALL_MODELS + ("Identity",)]
        if unknown:
            raise ConfigError(f"unknown models {unknown}; choose from {ALL_MODELS}")

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        known = set(cls.__dataclass_fields__)
        extra = set(data) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        try:
            if "sim" in data and isinstance(data["sim"], dict):
                sim = dict(data["sim"])
                for key in ("noisy_spec", "gt_spec"):
                    if isinstance(sim.get(key), dict):
                        sim[key] = NoiseSpec(**sim[key])
                data["sim"] = SimConfig(**sim)
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from None

    def replace(self, **changes):
        return replace(self, **changes)


def desk_config(**changes):
    """Default configuration on the coarse 1-degree grid (900 recordings)."""
    cfg = BenchmarkConfig()
    cfg = replace(cfg, sim=replace(cfg.sim, angle_step_deg=DESK_GRID_STEP))
    return replace(cfg, **changes)


@dataclass
class WindowSet:
    """Windows cut from a list of recordings."""

    noisy: np.ndarray
    gt: np.ndarray
    angles: np.ndarray
    recording: np.ndarray

    def __len__(self):
        return self.noisy.shape[0]

    def subset(self, idx):
        return WindowSet(self.noisy[idx], self.gt[idx], self.angles[idx], self.recording[idx])


def make_windows(recordings, h, stride=None):
    """Stack non-overlapping (or ``stride``-spaced) windows of all recordings."""
    stride = h if stride is None else stride
    noisy, gt, angles, rec_ids = [], [], [], []
    for i, rec in enumerate(recordings):
        n = len(rec)
        for s in range(0, n - h + 1, stride):
            noisy.append(rec.noisy[s : s + h])
            gt.append(rec.gt[s : s + h])
            angles.append((rec.angles.roll_deg, rec.angles.pitch_deg))
            rec_ids.append(i)
    if not noisy:
        raise ConfigError(f"no window of {h} samples fits the recordings")
    return WindowSet(
        np.asarray(noisy), np.asarray(gt), np.asarray(angles, dtype=np.float64),
        np.asarray(rec_ids, dtype=np.intp),
    )


def _counts(n, split):
    n_test = int(round(split[2] * n))
    if n_test == 0 and split[2] > 0 and n >= 2:
        n_test = 1  # tiny groups still contribute to the test set
    n_val = min(int(round(split[1] * n)), n - n_test - 1)
    n_val = max(n_val, 0)
    return n - n_val - n_test, n_val, n_test


def split_indices(groups, split, mode="windows", seed=0):
    """Train / validation / test index arrays over windows.

    ``groups`` holds the recording of each window. In ``"windows"`` mode
    every recording contributes its own windows to all three parts; in
    ``"recordings"`` mode each recording lands wholly in one part.
    """
    groups = np.asarray(groups)
    rng = np.random.default_rng(seed)
    parts = ([], [], [])
    if mode == "recordings":
        ids = np.unique(groups)
        perm = rng.permutation(ids)
        n_tr, n_va, _ = _counts(len(ids), split)
        chosen = (perm[:n_tr], perm[n_tr : n_tr + n_va], perm[n_tr + n_va :])
        return tuple(np.flatnonzero(np.isin(groups, c)) for c in chosen)
    if mode != "windows":
        raise ConfigError(f"split_mode must be one of {SPLIT_MODES}")
    order = np.argsort(groups, kind="stable")
    _, starts = np.unique(groups[order], return_index=True)
    for members in np.split(order, starts[1:]):
        perm = members[rng.permutation(len(members))]
        n_tr, n_va, _ = _counts(len(members), split)
        parts[0].append(perm[:n_tr])
        parts[1].append(perm[n_tr : n_tr + n_va])
        parts[2].append(perm[n_tr + n_va :])
    return tuple(np.sort(np.concatenate(p)) for p in parts)


def build_model(name, cfg):
    """Unfitted estimator for a model name of the benchmark suite."""
    if name == "MA":
        return MovingAverageDenoiser()
    if name == "SG":
        return SavitzkyGolayDenoiser()
    if name == "DWT":
        return DwtDenoiser()
    if name == "Identity":
        return IdentityDenoiser()
    if name == "kNN":
        return KnnDenoiser(k=cfg.knn_k, context=cfg.knn_context, n_jobs=cfg.threads)
    if name in _RNN_KIND:
        return RecurrentDenoiser(
            kind=_RNN_KIND[name],
            hidden_dim=cfg.hidden_dim,
            epochs=cfg.epochs,
            batch_size=cfg.batch_size,
            step_size=cfg.step_size,
            step_decay=cfg.step_decay,
            random_state=cfg.seed,
        )
    raise ConfigError(f"unknown model {name!r}")


@dataclass
class Splits:
    train: WindowSet
    val: WindowSet
    test: WindowSet


def prepare(cfg, recordings=None):
    """Simulate (unless ``recordings`` is given), window and split."""
    if recordings is None:
        recordings = build_dataset(cfg.sim, workers=cfg.threads)
    windows = make_windows(recordings, cfg.window)
    tr, va, te = split_indices(windows.recording, cfg.split, cfg.split_mode, cfg.seed)
    if len(tr) == 0 or len(te) == 0:
        raise ConfigError("split leaves the training or test set empty")
    return Splits(windows.subset(tr), windows.subset(va), windows.subset(te))


def fit_model(name, cfg, splits):
    model = build_model(name, cfg)
    if isinstance(model, RecurrentDenoiser) and len(splits.val):
        model.fit(splits.train.noisy, splits.train.gt, splits.val.noisy, splits.val.gt)
    else:
        model.fit(splits.train.noisy, splits.train.gt)
    return model


@dataclass
class BenchmarkResult:
    config: BenchmarkConfig
    splits: Splits
    models: dict
    predictions: dict
    metrics: object
    sca: object
    fit_seconds: dict

    def learning_names(self):
        return [n for n in self.predictions if n in LEARNING_MODELS]

    def sp_names(self):
        return [n for n in self.predictions if n in SP_MODELS]


def run_benchmark(cfg, recordings=None, splits=None, fitted=None):
    """Fit and score every configured model on the test windows.

    ``fitted`` may map model names to already fitted estimators, which are
    then only evaluated.
    """
    if splits is None:
        splits = prepare(cfg, recordings)
    fitted = dict(fitted or {})
    models, preds, seconds = {}, {}, {}
    for name in cfg.models:
        t0 = time.perf_counter()
        model = fitted.get(name) or fit_model(name, cfg, splits)
        seconds[name] = time.perf_counter() - t0
        models[name] = model
        preds[name] = model.predict(splits.test.noisy)
        logger.info("%s fitted in %.1f s", name, seconds[name])
    test = splits.test
    report = compare(list(preds.items()), test.noisy, test.gt)
    sca = evaluate_sca(list(preds.items()), test.noisy, test.angles, cfg.sca_averaging)
    return BenchmarkResult(cfg, splits, models, preds, report, sca, seconds)
