"""Sequence-to-sequence recurrent models with a linear output head.

Three layouts are supported:

``lstm2``
    two stacked forward LSTM layers; the second consumes the hidden states
    of the first.
``birnn`` / ``bigru``
    one forward and one time-reversed cell of the same kind. Their hidden
    states are concatenated as ``[forward, backward]`` at every step before
    the head.

Parameters live in plain dictionaries keyed ``"<cell>.<name>"`` so that the
optimizer, checkpoints and the gradient check can treat them uniformly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..exceptions import InvalidArgumentError
from .cells import init_cell, sequence_backward, sequence_forward

KINDS = ("lstm2", "birnn", "bigru")

_LAYOUT = {
    "lstm2": (("l1", "lstm"), ("l2", "lstm")),
    "birnn": (("fwd", "rnn"), ("bwd", "rnn")),
    "bigru": (("fwd", "gru"), ("bwd", "gru")),
}


@dataclass
class RecurrentModel:
    """A recurrent denoiser's parameters.

    Attributes
    ----------
    kind : str
        One of ``"lstm2"``, ``"birnn"``, ``"bigru"``.
    hidden_dim : int
        Units per recurrent cell.
    params : dict[str, numpy.ndarray]
        Every trainable array, including ``head.W`` and ``head.b``.
    input_dim : int
        Features per time step (3 for a triaxial accelerometer).
    """

    kind: str
    hidden_dim: int
    params: dict
    input_dim: int = 3

    @property
    def bidirectional(self):
        return self.kind != "lstm2"

    @property
    def head_input_dim(self):
        return 2 * self.hidden_dim if self.bidirectional else self.hidden_dim

    def cell(self, name):
        """Parameters of one cell as a ``{"W_f": ..., ...}`` dictionary."""
        prefix = name + "."
        return {k[len(prefix):]: v for k, v in self.params.items() if k.startswith(prefix)}

    def copy(self):
        return RecurrentModel(
            self.kind, self.hidden_dim, {k: v.copy() for k, v in self.params.items()},
            self.input_dim,
        )

    def n_params(self):
        return int(sum(v.size for v in self.params.values()))


def init_model(kind, hidden_dim=32, input_dim=3, output_dim=3, rng=None):
    """Randomly initialised model of the given ``kind``."""
    if kind not in KINDS:
        raise InvalidArgumentError(f"unknown model kind {kind!r}; expected one of {KINDS}")
    if int(hidden_dim) < 1:
        raise InvalidArgumentError("hidden_dim must be >= 1")
    rng = np.random.default_rng(rng)
    params = {}
    for name, cell_kind in _LAYOUT[kind]:
        d = hidden_dim if (kind == "lstm2" and name == "l2") else input_dim
        for key, value in init_cell(cell_kind, d, hidden_dim, rng).items():
            params[f"{name}.{key}"] = value
    head_in = hidden_dim if kind == "lstm2" else 2 * hidden_dim
    bound = 1.0 / np.sqrt(head_in)
    params["head.W"] = rng.uniform(-bound, bound, (output_dim, head_in))
    params["head.b"] = np.zeros(output_dim)
    return RecurrentModel(kind, int(hidden_dim), params, input_dim)


def _as_batch(X):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 2:
        return X[None], True
    if X.ndim != 3:
        raise InvalidArgumentError(f"expected (H, d) or (B, H, d) input, got shape {X.shape}")
    if X.shape[1] < 1:
        raise InvalidArgumentError("sequences must have at least one step")
    return X, False


def _hidden(model, X):
    """Head input ``(B, H, head_in)`` plus whatever backward needs."""
    (n1, k1), (n2, k2) = _LAYOUT[model.kind]
    if model.kind == "lstm2":
        H1, c1 = sequence_forward(k1, model.cell(n1), X)
        H2, c2 = sequence_forward(k2, model.cell(n2), H1)
        return H2, (c1, c2)
    Hf, cf = sequence_forward(k1, model.cell(n1), X)
    Hb_rev, cb = sequence_forward(k2, model.cell(n2), X[:, ::-1])
    return np.concatenate([Hf, Hb_rev[:, ::-1]], axis=-1), (cf, cb)


def forward(model, X):
    """Denoised sequence(s) for input of shape ``(H, 3)`` or ``(B, H, 3)``."""
    X, single = _as_batch(X)
    Hcat, _ = _hidden(model, X)
    out = Hcat @ model.params["head.W"].T + model.params["head.b"]
    return out[0] if single else out


def mse_loss(pred, gt):
    """Mean squared residual over every step and axis."""
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    if pred.shape != gt.shape:
        raise InvalidArgumentError(f"shape mismatch: {pred.shape} vs {gt.shape}")
    return float(np.mean((pred - gt) ** 2))


def loss_and_grad(model, X, Y):
    """MSE of ``forward(model, X)`` against ``Y`` and its exact gradient.

    Returns
    -------
    loss : float
    grads : dict[str, numpy.ndarray]
        Same keys and shapes as ``model.params``.
    """
    X, _ = _as_batch(X)
    Y, _ = _as_batch(Y)
    Hcat, caches = _hidden(model, X)
    W, b = model.params["head.W"], model.params["head.b"]
    pred = Hcat @ W.T + b
    if pred.shape != Y.shape:
        raise InvalidArgumentError(f"shape mismatch: {pred.shape} vs {Y.shape}")
    resid = pred - Y
    loss = float(np.mean(resid**2))

    dpred = resid * (2.0 / resid.size)
    flat_d = dpred.reshape(-1, dpred.shape[-1])
    grads = {
        "head.W": flat_d.T @ Hcat.reshape(-1, Hcat.shape[-1]),
        "head.b": flat_d.sum(axis=0),
    }
    dHcat = dpred @ W
    (n1, k1), (n2, k2) = _LAYOUT[model.kind]
    m = model.hidden_dim
    if model.kind == "lstm2":
        c1, c2 = caches
        g2, dH1 = sequence_backward(k2, c2, dHcat)
        g1, _ = sequence_backward(k1, c1, dH1)
    else:
        cf, cb = caches
        g1, _ = sequence_backward(k1, cf, np.ascontiguousarray(dHcat[..., :m]))
        g2, _ = sequence_backward(k2, cb, np.ascontiguousarray(dHcat[:, ::-1, m:]))
    for name, g in ((n1, g1), (n2, g2)):
        for key, value in g.items():
            grads[f"{name}.{key}"] = value
    return loss, grads


def backward(model, X, Y):
    """Gradient of :func:`mse_loss` with respect to every parameter."""
    return loss_and_grad(model, X, Y)[1]
