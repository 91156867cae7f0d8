"""Recurrent cells: single-step forward maps and their hand-derived backward.

Every step works on a leading batch dimension or on plain vectors. Gate
pre-activations use the concatenation ``[x_t, h_{t-1}]`` (input first), and
each gate owns a ``(hidden, input + hidden)`` weight matrix and a bias.
"""

from __future__ import annotations

import numpy as np

GATES = {
    "rnn": ("h",),
    "gru": ("r", "z", "h"),
    "lstm": ("f", "i", "c", "o"),
}


def sigmoid(a):
    # tanh form: no overflow for large |a|
    return 0.5 * (1.0 + np.tanh(0.5 * a))


def init_cell(kind, input_dim, hidden_dim, rng):
    """Uniform ``[-1/sqrt(m), 1/sqrt(m)]`` weights, zero biases.

    The LSTM forget-gate bias starts at one.
    """
    bound = 1.0 / np.sqrt(hidden_dim)
    params = {}
    for g in GATES[kind]:
        params[f"W_{g}"] = rng.uniform(-bound, bound, (hidden_dim, input_dim + hidden_dim))
        params[f"b_{g}"] = np.zeros(hidden_dim)
    if kind == "lstm":
        params["b_f"][:] = 1.0
    return params


def zero_cell(kind, input_dim, hidden_dim):
    return {
        name: np.zeros_like(v)
        for name, v in init_cell(kind, input_dim, hidden_dim, np.random.default_rng(0)).items()
    }


def _fused(params, gates):
    W = np.concatenate([params[f"W_{g}"] for g in gates], axis=0)
    b = np.concatenate([params[f"b_{g}"] for g in gates])
    return W, b


# --------------------------------------------------------------------------
# single steps (public API)


def lstm_step(params, x_t, h_prev, c_prev):
    """One LSTM step; returns ``(h, c)``."""
    (h, c), _ = lstm_forward_step(_fused(params, GATES["lstm"]), x_t, h_prev, c_prev)
    return h, c


def rnn_step(params, x_t, h_prev):
    """One sigmoid RNN step; returns ``h``."""
    h, _ = rnn_forward_step((params["W_h"], params["b_h"]), x_t, h_prev)
    return h


def gru_step(params, x_t, h_prev):
    """One GRU step; returns ``h``."""
    h, _ = gru_forward_step(
        (_fused(params, ("r", "z")), (params["W_h"], params["b_h"])), x_t, h_prev
    )
    return h


# --------------------------------------------------------------------------
# forward steps with caches


def rnn_forward_step(fused, x, h_prev):
    W, b = fused
    z = np.concatenate([x, h_prev], axis=-1)
    h = sigmoid(z @ W.T + b)
    return h, (z, h)


def rnn_backward_step(fused, cache, dh, grads, d_in):
    W, _ = fused
    z, h = cache
    da = dh * h * (1.0 - h)
    grads[0] += da.T @ z
    grads[1] += da.sum(axis=0)
    dz = da @ W
    return dz[:, :d_in], dz[:, d_in:]


def gru_forward_step(fused, x, h_prev):
    (Wrz, brz), (Wh, bh) = fused
    m = h_prev.shape[-1]
    z = np.concatenate([x, h_prev], axis=-1)
    rz = sigmoid(z @ Wrz.T + brz)
    r, u = rz[..., :m], rz[..., m:]
    zc = np.concatenate([x, r * h_prev], axis=-1)
    hc = np.tanh(zc @ Wh.T + bh)
    h = (1.0 - u) * h_prev + u * hc
    return h, (z, zc, r, u, hc, h_prev)


def gru_backward_step(fused, cache, dh, grads, d_in):
    (Wrz, _), (Wh, _) = fused
    z, zc, r, u, hc, h_prev = cache
    dh_prev = dh * (1.0 - u)
    du = dh * (hc - h_prev)
    dac = dh * u * (1.0 - hc * hc)
    grads[2] += dac.T @ zc
    grads[3] += dac.sum(axis=0)
    dzc = dac @ Wh
    dx = dzc[:, :d_in]
    dhr = dzc[:, d_in:]
    dh_prev = dh_prev + dhr * r
    drz = np.concatenate([dhr * h_prev * r * (1.0 - r), du * u * (1.0 - u)], axis=-1)
    grads[0] += drz.T @ z
    grads[1] += drz.sum(axis=0)
    dz = drz @ Wrz
    return dx + dz[:, :d_in], dh_prev + dz[:, d_in:]


def lstm_forward_step(fused, x, h_prev, c_prev):
    W, b = fused
    m = h_prev.shape[-1]
    z = np.concatenate([x, h_prev], axis=-1)
    a = z @ W.T + b
    f = sigmoid(a[..., :m])
    i = sigmoid(a[..., m : 2 * m])
    g = np.tanh(a[..., 2 * m : 3 * m])
    o = sigmoid(a[..., 3 * m :])
    c = f * c_prev + i * g
    tc = np.tanh(c)
    h = o * tc
    return (h, c), (z, f, i, g, o, c_prev, tc)


def lstm_backward_step(fused, cache, dh, dc, grads, d_in):
    W, _ = fused
    z, f, i, g, o, c_prev, tc = cache
    dc = dc + dh * o * (1.0 - tc * tc)
    da = np.concatenate(
        [
            dc * c_prev * f * (1.0 - f),
            dc * g * i * (1.0 - i),
            dc * i * (1.0 - g * g),
            dh * tc * o * (1.0 - o),
        ],
        axis=-1,
    )
    grads[0] += da.T @ z
    grads[1] += da.sum(axis=0)
    dz = da @ W
    return dz[:, :d_in], dz[:, d_in:], dc * f


# --------------------------------------------------------------------------
# whole sequences


def _fuse_cell(kind, params):
    if kind == "rnn":
        return (params["W_h"], params["b_h"])
    if kind == "gru":
        return (_fused(params, ("r", "z")), (params["W_h"], params["b_h"]))
    return _fused(params, GATES["lstm"])


def _unfuse_grads(kind, grads, m):
    if kind == "rnn":
        return {"W_h": grads[0], "b_h": grads[1]}
    if kind == "gru":
        return {
            "W_r": grads[0][:m],
            "W_z": grads[0][m:],
            "b_r": grads[1][:m],
            "b_z": grads[1][m:],
            "W_h": grads[2],
            "b_h": grads[3],
        }
    out = {}
    for j, gate in enumerate(GATES["lstm"]):
        out[f"W_{gate}"] = grads[0][j * m : (j + 1) * m]
        out[f"b_{gate}"] = grads[1][j * m : (j + 1) * m]
    return out


def sequence_forward(kind, params, X):
    """Run a cell over ``X`` of shape ``(B, T, d)`` from zero state.

    Returns the hidden states ``(B, T, m)`` and a cache for
    :func:`sequence_backward`.
    """
    B, T, _ = X.shape
    m = params[f"b_{GATES[kind][0]}"].shape[0]
    fused = _fuse_cell(kind, params)
    h = np.zeros((B, m))
    c = np.zeros((B, m))
    out = np.empty((B, T, m))
    caches = []
    for t in range(T):
        x = X[:, t]
        if kind == "lstm":
            (h, c), cache = lstm_forward_step(fused, x, h, c)
        elif kind == "gru":
            h, cache = gru_forward_step(fused, x, h)
        else:
            h, cache = rnn_forward_step(fused, x, h)
        out[:, t] = h
        caches.append(cache)
    return out, (fused, caches, X.shape)


def sequence_backward(kind, cache, dH):
    """Backpropagate ``dL/dH`` of shape ``(B, T, m)`` through time.

    Returns ``(param_grads, dX)``.
    """
    fused, caches, (B, T, d_in) = cache
    m = dH.shape[-1]
    if kind == "rnn":
        grads = [np.zeros_like(fused[0]), np.zeros_like(fused[1])]
    elif kind == "gru":
        grads = [np.zeros_like(a) for pair in fused for a in pair]
    else:
        grads = [np.zeros_like(fused[0]), np.zeros_like(fused[1])]
    dX = np.empty((B, T, d_in))
    dh_next = np.zeros((B, m))
    dc_next = np.zeros((B, m))
    for t in range(T - 1, -1, -1):
        dh = dH[:, t] + dh_next
        if kind == "lstm":
            dX[:, t], dh_next, dc_next = lstm_backward_step(
                fused, caches[t], dh, dc_next, grads, d_in
            )
        elif kind == "gru":
            dX[:, t], dh_next = gru_backward_step(fused, caches[t], dh, grads, d_in)
        else:
            dX[:, t], dh_next = rnn_backward_step(fused, caches[t], dh, grads, d_in)
    return _unfuse_grads(kind, grads, m), dX
