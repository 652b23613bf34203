"""The saddle function Phi(W, eps, S), its reduced form phi(eps, S), and gradients.

Notation: X is (m, n), y is (m,), W and eps are (p, n), S is (p, m) with
column i the dual vector s_i. The recurring aggregate is
M = sum_i y_i s_i x_i^T = (S * y) @ X.

Two gradient modes are supported. ``"consistent"`` is the exact
elimination of W from Phi:

    phi(eps, S) = -1/(2 m^2 lam) <M*M, eps> - (1/m) sum_i u*(s_i)

and its true partial gradients. ``"paper"`` keeps the unscaled variant

    phi(eps, S) = -1/(m lam) <M*M, eps> - sum_i u*(s_i)

with gradients that omit the u* term.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .losses import u_conjugate_columns, u_conjugate_grad

GRADIENT_MODES = ("consistent", "paper")
# u* gradients are evaluated this far inside the dual domain
DUAL_DELTA = 1e-12


@dataclass(frozen=True)
class SaddleProblem:
    data: Dataset
    assign: np.ndarray  # j(i) for positives, -1 for negatives
    lam: float
    k: int
    gradient_mode: str = "consistent"

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("lambda must be positive")
        if not 1 <= self.k <= self.data.n:
            raise ValueError(f"k={self.k} must lie in [1, {self.data.n}]")
        if self.gradient_mode not in GRADIENT_MODES:
            raise ValueError(f"gradient_mode must be one of {GRADIENT_MODES}")
        assign = np.asarray(self.assign, dtype=int)
        if assign.shape != (self.data.m,):
            raise ValueError("assignment must have one entry per example")
        if np.any((assign >= 0) != (self.data.labels > 0)):
            raise ValueError("assignment must cover exactly the positive examples")
        object.__setattr__(self, "assign", assign)

    @property
    def m(self):
        return self.data.m

    @property
    def n(self):
        return self.data.n

    @property
    def X(self):
        return self.data.features

    @property
    def y(self):
        return self.data.labels


def aggregate_M(S, d: Dataset) -> np.ndarray:
    """M[j, l] = sum_i y_i S[j, i] X[i, l]."""
    S = np.asarray(S, dtype=float)
    if S.shape[1] != d.m:
        raise ValueError(f"S has {S.shape[1]} columns, dataset has m={d.m}")
    return (S * d.labels) @ d.features


def _dual_conjugate_sum(S) -> float:
    vals = u_conjugate_columns(S)
    return float(vals.sum())


def big_phi(W, eps, S, prob: SaddleProblem) -> float:
    W = np.asarray(W, dtype=float)
    eps = np.asarray(eps, dtype=float)
    if W.shape != eps.shape or W.shape[1] != prob.n:
        raise ValueError(f"W {W.shape} and eps {eps.shape} must both be (p, {prob.n})")
    M = aggregate_M(S, prob.data)
    if M.shape != W.shape:
        raise ValueError(f"S has {M.shape[0]} rows, W has {W.shape[0]}")
    bilinear = float(np.sum(M * eps * W))
    return (bilinear - _dual_conjugate_sum(S)) / prob.m + 0.5 * prob.lam * float(np.sum(W * W))


def recover_W(eps, S, prob: SaddleProblem) -> np.ndarray:
    """Minimizer of Phi over W: -(1/(m lam)) M(S) * eps."""
    M = aggregate_M(S, prob.data)
    return -(M * np.asarray(eps, dtype=float)) / (prob.m * prob.lam)


def phi_value(eps, S, prob: SaddleProblem) -> float:
    eps = np.asarray(eps, dtype=float)
    M = aggregate_M(S, prob.data)
    quad = float(np.sum(M * M * eps))
    if prob.gradient_mode == "consistent":
        return -quad / (2.0 * prob.m**2 * prob.lam) - _dual_conjugate_sum(S) / prob.m
    return -quad / (prob.m * prob.lam) - _dual_conjugate_sum(S)


def grad_eps(eps, S, prob: SaddleProblem, M=None) -> np.ndarray:
    if M is None:
        M = aggregate_M(S, prob.data)
    if prob.gradient_mode == "consistent":
        return -(M * M) / (2.0 * prob.m**2 * prob.lam)
    return -(M * M) / (prob.m * prob.lam)


def grad_duals(eps, S, prob: SaddleProblem, M=None) -> np.ndarray:
    S = np.asarray(S, dtype=float)
    if M is None:
        M = aggregate_M(S, prob.data)
    # column i: y_i (M * eps) x_i
    G = ((M * np.asarray(eps, dtype=float)) @ prob.X.T) * prob.y
    if prob.gradient_mode == "consistent":
        return -G / (prob.m**2 * prob.lam) - u_conjugate_grad(S, DUAL_DELTA) / prob.m
    return -G / (prob.m * prob.lam)
