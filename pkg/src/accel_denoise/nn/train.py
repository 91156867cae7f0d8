"""Mini-batch training with Adam and global-norm gradient clipping."""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass

import numpy as np

from .._validation import check_int, check_positive
from ..exceptions import DivergenceError, InvalidArgumentError
from .model import forward, loss_and_grad, mse_loss

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 50
    batch_size: int = 64
    step_size: float = 1e-3
    seed: int = 0
    window_len: int = 100
    clip_norm: float = 5.0
    step_decay: float = 1.0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        check_int(self.epochs, "epochs", min_value=0)
        check_int(self.batch_size, "batch_size", min_value=1)
        check_int(self.window_len, "window_len", min_value=1)
        check_int(self.seed, "seed", min_value=0)
        check_positive(self.step_size, "step_size")
        check_positive(self.clip_norm, "clip_norm")
        check_positive(self.step_decay, "step_decay")

    def to_dict(self):
        return asdict(self)


@dataclass
class LossCurve:
    train_mse: list
    val_mse: list

    def __len__(self):
        return len(self.train_mse)

    def to_csv(self, path):
        lines = ["epoch,train_mse,val_mse"]
        for i, (t, v) in enumerate(zip(self.train_mse, self.val_mse), start=1):
            lines.append(f"{i},{t!r},{'' if v is None else repr(v)}")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")


class Adam:
    def __init__(self, params, step_size, beta1=0.9, beta2=0.999, eps=1e-8):
        self.step_size = step_size
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}

    def step(self, params, grads):
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        lr = self.step_size * math.sqrt(1.0 - b2**self.t) / (1.0 - b1**self.t)
        for k in sorted(params):
            g = grads[k]
            m = self.m[k]
            v = self.v[k]
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            params[k] -= lr * m / (np.sqrt(v) + self.eps)


def clip_by_global_norm(grads, max_norm):
    """Scale ``grads`` in place so their joint L2 norm is at most ``max_norm``."""
    norm = math.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))
    if norm > max_norm:
        scale = max_norm / norm
        for g in grads.values():
            g *= scale
    return norm


def _check_finite(value, what, epoch):
    if not math.isfinite(value):
        raise DivergenceError(f"non-finite {what} ({value}) in epoch {epoch}")


def evaluate_mse(model, X, Y, batch_size=256):
    """Mean squared error of ``model`` over windows ``X`` against ``Y``."""
    total = 0.0
    for s in range(0, X.shape[0], batch_size):
        pred = forward(model, X[s : s + batch_size])
        total += float(np.sum((pred - Y[s : s + batch_size]) ** 2))
    return total / Y.size


def train(model, X, Y, cfg, X_val=None, Y_val=None, callback=None):
    """Fit ``model`` in place to windows ``X -> Y`` (both ``(W, H, d)``).

    Each epoch visits the training windows once in a seeded random order.
    The recorded training MSE is the sample-weighted mean of the batch
    losses seen during the epoch.

    Returns
    -------
    (RecurrentModel, LossCurve)

    Raises
    ------
    DivergenceError
        A batch loss or gradient norm becomes non-finite.
    """
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if X.shape[:2] != Y.shape[:2] or X.ndim != 3:
        raise InvalidArgumentError(f"incompatible training arrays {X.shape} and {Y.shape}")
    rng = np.random.default_rng(cfg.seed)
    opt = Adam(model.params, cfg.step_size, cfg.beta1, cfg.beta2, cfg.eps)
    curve = LossCurve([], [])
    n = X.shape[0]
    for epoch in range(1, cfg.epochs + 1):
        opt.step_size = cfg.step_size * cfg.step_decay ** (epoch - 1)
        order = rng.permutation(n)
        seen = 0
        acc = 0.0
        for s in range(0, n, cfg.batch_size):
            idx = np.sort(order[s : s + cfg.batch_size])
            loss, grads = loss_and_grad(model, X[idx], Y[idx])
            _check_finite(loss, "training loss", epoch)
            norm = clip_by_global_norm(grads, cfg.clip_norm)
            _check_finite(norm, "gradient norm", epoch)
            opt.step(model.params, grads)
            acc += loss * len(idx)
            seen += len(idx)
        train_mse = acc / seen
        val_mse = None
        if X_val is not None and len(X_val):
            val_mse = evaluate_mse(model, X_val, Y_val)
            _check_finite(val_mse, "validation loss", epoch)
        curve.train_mse.append(train_mse)
        curve.val_mse.append(val_mse)
        logger.info("%s epoch %d: train %.6g val %s", model.kind, epoch, train_mse, val_mse)
        if callback is not None:
            callback(epoch, model, curve)
    return model, curve


__all__ = [
    "Adam",
    "LossCurve",
    "TrainConfig",
    "clip_by_global_norm",
    "evaluate_mse",
    "mse_loss",
    "train",
]
