"""Recurrent-network primitives in numpy with hand-written backward passes.

Everything runs in float64; gradients accumulate into caller-provided dicts
so a whole sentence's backward pass touches each parameter tensor once.
"""

from __future__ import annotations

import numpy as np


def sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def init_lstm(params: dict, rng: np.random.Generator, prefix: str,
              input_dim: int, hidden_dim: int) -> None:
    """Allocate LSTM weights under ``prefix``: W (input), U (recurrent), b.

    Gates are stacked input/forget/output/candidate; the forget-gate bias
    starts at 1 to keep early cell states alive.
    """
    def glorot(rows, cols):
        bound = np.sqrt(6.0 / (rows + cols))
        return rng.uniform(-bound, bound, size=(rows, cols))

    params[f"{prefix}.W"] = glorot(4 * hidden_dim, input_dim)
    params[f"{prefix}.U"] = glorot(4 * hidden_dim, hidden_dim)
    b = np.zeros(4 * hidden_dim)
    b[hidden_dim:2 * hidden_dim] = 1.0
    params[f"{prefix}.b"] = b


def lstm_step(params: dict, prefix: str, x: np.ndarray,
              h_prev: np.ndarray, c_prev: np.ndarray):
    """One LSTM update; returns (h, c, cache) with cache for the backward pass."""
    hid = h_prev.shape[0]
    z = params[f"{prefix}.W"] @ x + params[f"{prefix}.U"] @ h_prev + params[f"{prefix}.b"]
    i = sigmoid(z[:hid])
    f = sigmoid(z[hid:2 * hid])
    o = sigmoid(z[2 * hid:3 * hid])
    g = np.tanh(z[3 * hid:])
    c = f * c_prev + i * g
    t = np.tanh(c)
    h = o * t
    cache = (x, h_prev, c_prev, i, f, o, g, t)
    return h, c, cache


def lstm_step_backward(params: dict, grads: dict, prefix: str, cache,
                       dh: np.ndarray, dc: np.ndarray):
    """Backward through one LSTM step.

    Returns (dx, dh_prev, dc_prev) and accumulates parameter gradients.
    """
    x, h_prev, c_prev, i, f, o, g, t = cache
    do = dh * t
    dcell = dc + dh * o * (1.0 - t * t)
    di = dcell * g
    df = dcell * c_prev
    dg = dcell * i
    dc_prev = dcell * f
    dz = np.concatenate([
        di * i * (1.0 - i),
        df * f * (1.0 - f),
        do * o * (1.0 - o),
        dg * (1.0 - g * g),
    ])
    grads[f"{prefix}.W"] += np.outer(dz, x)
    grads[f"{prefix}.U"] += np.outer(dz, h_prev)
    grads[f"{prefix}.b"] += dz
    dx = params[f"{prefix}.W"].T @ dz
    dh_prev = params[f"{prefix}.U"].T @ dz
    return dx, dh_prev, dc_prev


def masked_log_softmax(scores: np.ndarray, excluded: np.ndarray):
    """Stable softmax over the non-excluded entries.

    Returns (probabilities, log-probabilities); excluded entries come out as
    exactly 0 probability and -inf log-probability.
    """
    if excluded.all():
        raise ValueError("all candidate positions are masked")
    keep = ~excluded
    shift = scores[keep].max()
    exp = np.zeros_like(scores)
    exp[keep] = np.exp(scores[keep] - shift)
    total = exp.sum()
    probs = exp / total
    logp = np.full_like(scores, -np.inf)
    logp[keep] = (scores[keep] - shift) - np.log(total)
    return probs, logp


class Adam:
    """Adaptive moment estimation over a named-parameter dict."""

    def __init__(self, params: dict, lr: float = 2e-3, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.step_count = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}

    def step(self, params: dict, grads: dict) -> None:
        self.step_count += 1
        b1 = 1.0 - self.beta1 ** self.step_count
        b2 = 1.0 - self.beta2 ** self.step_count
        for name, g in grads.items():
            m = self.m[name]
            v = self.v[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            params[name] -= self.lr * (m / b1) / (np.sqrt(v / b2) + self.eps)
