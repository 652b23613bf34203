"""Brute-force reference implementations used by the tests.

Deliberately slow and independent of the package internals.
"""

import itertools
import math

import numpy as np


def capped_box_qp(a, k, tol=1e-12):
    """Projection onto {v in [0,1]^n : sum v <= k} by enumerating active sets.

    Every coordinate is pinned at 0, pinned at 1 or free; the budget is
    either slack (free coordinates copy a) or tight (free coordinates share
    one shift). The nearest feasible candidate is the projection.
    """
    a = np.asarray(a, dtype=float)
    n = a.size
    best, best_d = None, math.inf
    for pattern in itertools.product((0, 1, 2), repeat=n):  # 0: at 0, 1: at 1, 2: free
        pat = np.array(pattern)
        free = pat == 2
        ones = int(np.sum(pat == 1))
        cands = []
        v = np.where(free, a, pat.astype(float))
        cands.append(v)
        if free.any():
            shift = (a[free].sum() + ones - k) / free.sum()
            cands.append(np.where(free, a - shift, pat.astype(float)))
        for v in cands:
            if v.min() < -tol or v.max() > 1 + tol or v.sum() > k + 1e-9:
                continue
            d = float(np.sum((v - a) ** 2))
            if d < best_d:
                best, best_d = v, d
    return best


def dual_negative_qp(s, tol=1e-12):
    """Projection onto {s <= 0, sum s >= -1} by active-set enumeration."""
    s = np.asarray(s, dtype=float)
    p = s.size
    best, best_d = None, math.inf
    for pattern in itertools.product((False, True), repeat=p):  # True: pinned at 0
        zero = np.array(pattern)
        free = ~zero
        cands = [np.where(zero, 0.0, s)]
        if free.any():
            nu = (-1.0 - s[free].sum()) / free.sum()
            cands.append(np.where(zero, 0.0, s + nu))
        for v in cands:
            if v.max() > tol or v.sum() < -1 - 1e-9:
                continue
            d = float(np.sum((v - s) ** 2))
            if d < best_d:
                best, best_d = v, d
    return best


def dnf_truth(terms, x):
    """Literal-by-literal evaluation of a DNF on x in {-1,+1}^n."""
    return any(all((x[v] > 0) == (s > 0) for v, s in term) for term in terms)


def conjugate_loop(s):
    """u*(s) written out with an explicit loop and 0 log 0 = 0."""
    total = 0.0
    rest = 1.0
    for v in s:
        if v > 0:
            return math.inf
        if v < 0:
            total += -v * math.log(-v)
        rest += v
    if rest < 0:
        return math.inf
    if rest > 0:
        total += rest * math.log(rest)
    return total


def error_count(W, X, y):
    scores = np.max(X @ W.T, axis=1)
    pred = np.where(scores > 0, 1.0, -1.0)
    return int(np.sum(pred != y))


def central_diff(f, x, h=1e-6):
    """Central finite-difference gradient of a scalar function of an array."""
    x = np.array(x, dtype=float)
    g = np.zeros_like(x)
    for idx in np.ndindex(x.shape):
        xp, xm = x.copy(), x.copy()
        xp[idx] += h
        xm[idx] -= h
        g[idx] = (f(xp) - f(xm)) / (2 * h)
    return g
