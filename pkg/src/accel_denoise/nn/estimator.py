"""Estimator wrapper around the recurrent models."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .._validation import check_int
from ..base import BaseDenoiser
from ..exceptions import InvalidArgumentError, InvalidDataError
from .model import KINDS, RecurrentModel, forward, init_model
from .train import LossCurve, TrainConfig, train

CHECKPOINT_FORMAT = "accel-denoise-rnn"
CHECKPOINT_VERSION = 1

DISPLAY_NAMES = {"lstm2": "LSTM", "birnn": "RNN", "bigru": "GRU"}


def save_checkpoint(path, model, scaler=None, extra=None):
    """Write ``model`` (and optional standardization constants) to ``.npz``."""
    header = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "kind": model.kind,
        "hidden_dim": model.hidden_dim,
        "input_dim": model.input_dim,
        "params": sorted(model.params),
        "extra": extra or {},
    }
    arrays = {f"p:{k}": v for k, v in model.params.items()}
    if scaler is not None:
        for k, v in scaler.items():
            arrays[f"s:{k}"] = v
    path = Path(path)
    with path.open("wb") as fh:
        np.savez(fh, header=np.frombuffer(json.dumps(header).encode(), dtype=np.uint8), **arrays)
    return path


def load_checkpoint(path):
    """Inverse of :func:`save_checkpoint`; returns ``(model, scaler, header)``."""
    with np.load(path, allow_pickle=False) as data:
        try:
            header = json.loads(bytes(data["header"]).decode())
        except (KeyError, ValueError):
            raise InvalidDataError(f"{path}: not a model checkpoint") from None
        if header.get("format") != CHECKPOINT_FORMAT:
            raise InvalidDataError(f"{path}: not a model checkpoint")
        if header.get("version") != CHECKPOINT_VERSION:
            raise InvalidDataError(f"{path}: unsupported checkpoint version {header.get('version')}")
        params = {k: np.array(data[f"p:{k}"]) for k in header["params"]}
        scaler = {k[2:]: np.array(data[k]) for k in data.files if k.startswith("s:")}
    model = RecurrentModel(header["kind"], header["hidden_dim"], params, header["input_dim"])
    return model, (scaler or None), header


class RecurrentDenoiser(BaseDenoiser):
    """Recurrent sequence-to-sequence denoiser.

    Inputs and targets are standardized per axis with statistics of the
    training windows; predictions are mapped back to physical units.

    Parameters
    ----------
    kind : {"lstm2", "birnn", "bigru"}
    hidden_dim : int, default 32
    epochs, batch_size, step_size, clip_norm, step_decay :
        Passed to :class:`~accel_denoise.nn.train.TrainConfig`.
    random_state : int, default 0
        Seeds both the initialisation and the batch order.
    """

    def __init__(
        self,
        kind="bigru",
        hidden_dim=32,
        epochs=50,
        batch_size=64,
        step_size=1e-3,
        clip_norm=5.0,
        step_decay=1.0,
        random_state=0,
    ):
        self.kind = kind
        self.hidden_dim = hidden_dim
        self.epochs = epochs
        self.batch_size = batch_size
        self.step_size = step_size
        self.clip_norm = clip_norm
        self.step_decay = step_decay
        self.random_state = random_state

    @property
    def name(self):
        return DISPLAY_NAMES.get(self.kind, self.kind)

    def _train_config(self, window_len):
        return TrainConfig(
            epochs=self.epochs,
            batch_size=self.batch_size,
            step_size=self.step_size,
            seed=self.random_state,
            window_len=window_len,
            clip_norm=self.clip_norm,
            step_decay=self.step_decay,
        )

    def fit(self, X, y, X_val=None, y_val=None):
        if self.kind not in KINDS:
            raise InvalidArgumentError(f"unknown kind {self.kind!r}")
        check_int(self.hidden_dim, "hidden_dim", min_value=1)
        X = self._validate(X)
        y = self._validate(y, "y")
        if X.shape != y.shape:
            raise InvalidArgumentError(f"X and y differ in shape: {X.shape} vs {y.shape}")
        cfg = self._train_config(X.shape[1])

        x_mean = X.mean(axis=(0, 1))
        x_std = X.std(axis=(0, 1))
        y_mean = y.mean(axis=(0, 1))
        y_std = y.std(axis=(0, 1))
        x_std = np.where(x_std > 0, x_std, 1.0)
        y_std = np.where(y_std > 0, y_std, 1.0)
        self.scaler_ = {"x_mean": x_mean, "x_std": x_std, "y_mean": y_mean, "y_std": y_std}

        Xs = (X - x_mean) / x_std
        ys = (y - y_mean) / y_std
        val = (None, None)
        if X_val is not None:
            Xv = self._validate(X_val, "X_val")
            yv = self._validate(y_val, "y_val")
            val = ((Xv - x_mean) / x_std, (yv - y_mean) / y_std)

        model = init_model(self.kind, self.hidden_dim, X.shape[-1], y.shape[-1], self.random_state)
        self.model_, self.loss_curve_ = train(model, Xs, ys, cfg, *val)
        return self

    def predict(self, X, batch_size=512):
        self._check_fitted("model_")
        X = self._validate(X)
        s = self.scaler_
        out = np.empty(X.shape[:2] + (s["y_mean"].shape[0],))
        for i in range(0, X.shape[0], batch_size):
            z = forward(self.model_, (X[i : i + batch_size] - s["x_mean"]) / s["x_std"])
            out[i : i + batch_size] = z * s["y_std"] + s["y_mean"]
        return out

    def save(self, path):
        self._check_fitted("model_")
        return save_checkpoint(path, self.model_, self.scaler_, extra=self.get_params())

    @classmethod
    def load(cls, path):
        model, scaler, header = load_checkpoint(path)
        params = dict(header.get("extra") or {})
        params["kind"] = model.kind
        params["hidden_dim"] = model.hidden_dim
        est = cls(**params)
        est.model_ = model
        est.scaler_ = scaler
        est.loss_curve_ = LossCurve([], [])
        return est
