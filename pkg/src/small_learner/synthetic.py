"""Synthetic datasets for experiments and tests."""

from __future__ import annotations

import numpy as np

from .data import Dataset
from .dnf import DnfFormula, dnf_satisfied


def random_kdnf(n: int, p: int, k: int, rng, disjoint: bool = True) -> DnfFormula:
    """A random strict p-term k-DNF over n variables with random literal signs."""
    if disjoint and p * k > n:
        raise ValueError("not enough variables for disjoint terms")
    terms = []
    pool = rng.permutation(n)
    for j in range(p):
        vars_ = pool[j * k:(j + 1) * k] if disjoint else rng.choice(n, size=k, replace=False)
        terms.append(tuple((int(v), int(rng.choice([-1, 1]))) for v in vars_))
    return DnfFormula(tuple(terms), n, tuple(f"x{i}" for i in range(n)))


def planted_dnf(m: int = 500, n: int = 20, p: int = 2, k: int = 3, noise: float = 0.1,
                literal_rate: float = 0.75, seed: int = 0):
    """Examples in {-1,+1}^n labeled by a random disjoint p-term k-DNF.

    Variables outside the formula are fair coins. Each literal of the formula
    is true with probability ``literal_rate``; above 2/3 a conjunction of
    three standardized literals is exactly sign(sum of literals), so the
    formula is representable without a bias term. Labels are then flipped
    with probability ``noise``. Returns (Dataset, formula).
    """
    rng = np.random.default_rng(seed)
    f = random_kdnf(n, p, k, rng)
    rate = np.full(n, 0.5)
    for term in f.terms:
        for v, s in term:
            rate[v] = literal_rate if s > 0 else 1.0 - literal_rate
    X = np.where(rng.random((m, n)) < rate, 1.0, -1.0)
    y = np.array([1.0 if dnf_satisfied(f, x) else -1.0 for x in X])
    flip = rng.random(m) < noise
    y[flip] = -y[flip]
    return Dataset(X, y, f.names, f"planted-dnf-{seed}"), f


def gaussian_blobs(m_per_blob: int = 50, n: int = 4, spread: float = 0.5, seed: int = 0) -> Dataset:
    """Two positive and two negative Gaussian blobs at the corners of a square.

    Positives sit at (+2, +2, ...) and (-2, +2, ...)-type corners that no
    single half-space through the origin separates from the negatives.
    """
    rng = np.random.default_rng(seed)
    base = np.zeros(n)
    centers_pos = [base.copy(), base.copy()]
    centers_pos[0][:2] = (3.0, 0.0)
    centers_pos[1][:2] = (0.0, 3.0)
    centers_neg = [base.copy(), base.copy()]
    centers_neg[0][:2] = (-3.0, 0.0)
    centers_neg[1][:2] = (0.0, -3.0)
    X, y = [], []
    for c, label in [(c, 1.0) for c in centers_pos] + [(c, -1.0) for c in centers_neg]:
        X.append(c + spread * rng.standard_normal((m_per_blob, n)))
        y.append(np.full(m_per_blob, label))
    return Dataset(np.vstack(X), np.concatenate(y), tuple(f"f{i}" for i in range(n)), f"blobs-{seed}")


def desk_instance(m: int = 60, n: int = 10, p: int = 2, k: int = 3, noise: float = 0.1,
                  seed: int = 0) -> Dataset:
    """Gaussian features labeled by a random k-sparse p-prototype model, with
    a fraction ``noise`` of labels flipped."""
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((m, n))
    W = np.zeros((p, n))
    for j in range(p):
        W[j, rng.choice(n, size=k, replace=False)] = rng.standard_normal(k)
    y = np.where((X @ W.T).max(axis=1) > 0, 1.0, -1.0)
    flip = rng.random(m) < noise
    y[flip] = -y[flip]
    return Dataset(X, y, tuple(f"f{i}" for i in range(n)), f"desk-{seed}")
