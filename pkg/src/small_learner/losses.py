"""Log-loss, its soft-max envelope u, the conjugate u*, and the SMaLL objectives.

Conventions: ``W`` is a (p, n) prototype matrix, ``assign`` is a length-m
integer array holding j(i) for positive examples and -1 for negatives.
"""

from __future__ import annotations

import numpy as np

from .data import Dataset

# s vectors violating the conjugate's domain by at most this are snapped onto it
SNAP_TOL = 1e-12


def log_loss(z):
    """l(z) = log(1 + exp(-z)), stable for any finite z (scalar or array)."""
    z = np.asarray(z, dtype=float)
    out = np.logaddexp(0.0, -z)
    return out if out.ndim else float(out)


def softmax_u(t) -> float:
    """u(t) = log(1 + sum_j exp(-t_j)).

    Shifted by the largest exponent so that |t| in the thousands is fine.
    """
    t = np.asarray(t, dtype=float).ravel()
    if t.size == 0:
        raise ValueError("softmax_u of an empty vector")
    e = np.concatenate(([0.0], -t))
    top = e.max()
    return float(top + np.log(np.exp(e - top).sum()))


def softmax_u_rows(T: np.ndarray) -> np.ndarray:
    """Row-wise u for a (m, p) array."""
    T = np.asarray(T, dtype=float)
    E = np.concatenate([np.zeros((T.shape[0], 1)), -T], axis=1)
    top = E.max(axis=1, keepdims=True)
    return (top + np.log(np.exp(E - top).sum(axis=1, keepdims=True))).ravel()


def _xlogx(v: np.ndarray) -> np.ndarray:
    # 0 log 0 = 0
    out = np.zeros_like(v)
    pos = v > 0
    out[pos] = v[pos] * np.log(v[pos])
    return out


def u_conjugate(s) -> float:
    """u*(s) = sum_j (-s_j) log(-s_j) + (1 + 1's) log(1 + 1's) on its domain.

    The domain is ``s <= 0, 1's >= -1``; outside it the value is ``inf``.
    Violations up to ``SNAP_TOL`` are treated as roundoff and snapped.
    """
    s = np.asarray(s, dtype=float).ravel()
    if np.any(s > SNAP_TOL) or s.sum() < -1 - SNAP_TOL:
        return float("inf")
    neg = np.maximum(-s, 0.0)
    rest = max(1.0 - neg.sum(), 0.0)
    return float(_xlogx(neg).sum() + _xlogx(np.array([rest]))[0])


def u_conjugate_columns(S: np.ndarray) -> np.ndarray:
    """u* applied to every column of a (p, m) dual matrix."""
    S = np.asarray(S, dtype=float)
    out = np.full(S.shape[1], np.inf)
    ok = ~np.any(S > SNAP_TOL, axis=0) & (S.sum(axis=0) >= -1 - SNAP_TOL)
    neg = np.maximum(-S[:, ok], 0.0)
    rest = np.maximum(1.0 - neg.sum(axis=0), 0.0)
    out[ok] = _xlogx(neg).sum(axis=0) + _xlogx(rest)
    return out


def u_conjugate_grad(S: np.ndarray, delta: float = 1e-12) -> np.ndarray:
    """Gradient of u* column-wise: log(1 + 1's) - log(-s_j).

    Columns are first pushed ``delta`` inside the domain, where the logs
    are finite.
    """
    S = np.minimum(np.asarray(S, dtype=float), -delta)
    rest = np.maximum(1.0 + S.sum(axis=0, keepdims=True), delta)
    return np.log(rest) - np.log(-S)


def _check_assignment(W: np.ndarray, d: Dataset, assign: np.ndarray) -> np.ndarray:
    assign = np.asarray(assign, dtype=int)
    if W.ndim != 2 or W.shape[1] != d.n:
        raise ValueError(f"W has shape {W.shape}, dataset has n={d.n}")
    if assign.shape != (d.m,):
        raise ValueError("assignment must have one entry per example")
    pos = d.labels > 0
    missing = np.flatnonzero(pos & ((assign < 0) | (assign >= W.shape[0])))
    if missing.size:
        raise ValueError(f"positive example {missing[0]} has no valid prototype")
    return assign


def surrogate_loss(W, d: Dataset, assign) -> float:
    """h(W): log-loss of the dedicated prototype on positives plus the
    worst prototype's log-loss on negatives."""
    W = np.asarray(W, dtype=float)
    assign = _check_assignment(W, d, assign)
    scores = d.features @ W.T  # (m, p)
    pos, neg = d.positives, d.negatives
    total = log_loss(scores[pos, assign[pos]]).sum() if pos.size else 0.0
    if neg.size:
        total += log_loss(-scores[neg]).max(axis=1).sum()
    return float(total)


def smoothed_loss(W, d: Dataset, assign) -> float:
    """h~(W): as ``surrogate_loss`` with the negative-example max replaced
    by u(-W x_i)."""
    W = np.asarray(W, dtype=float)
    assign = _check_assignment(W, d, assign)
    scores = d.features @ W.T
    pos, neg = d.positives, d.negatives
    total = log_loss(scores[pos, assign[pos]]).sum() if pos.size else 0.0
    if neg.size:
        total += softmax_u_rows(-scores[neg]).sum()
    return float(total)


def smoothed_loss_grad(W, d: Dataset, assign) -> np.ndarray:
    W = np.asarray(W, dtype=float)
    X = d.features
    scores = X @ W.T
    G = np.zeros_like(W)
    pos, neg = d.positives, d.negatives
    if pos.size:
        # d/dz l(z) = -sigmoid(-z)
        coef = -0.5 * (1.0 - np.tanh(0.5 * scores[pos, assign[pos]]))
        np.add.at(G, assign[pos], coef[:, None] * X[pos])
    if neg.size:
        # d/dt_j u(-t) at t = W x: softmax weights of exp(t_j) against 1
        T = scores[neg]
        E = np.concatenate([np.zeros((T.shape[0], 1)), T], axis=1)
        E = np.exp(E - E.max(axis=1, keepdims=True))
        P = E[:, 1:] / E.sum(axis=1, keepdims=True)
        G += P.T @ X[neg]
    return G


def primal_objective(W, d: Dataset, assign, lam: float) -> float:
    """(1/m) h~(W) + (lam/2) ||W||_F^2."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    W = np.asarray(W, dtype=float)
    return smoothed_loss(W, d, assign) / d.m + 0.5 * lam * float(np.sum(W * W))
