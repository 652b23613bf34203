"""Euclidean projections onto the mask polytope and the dual feasible sets.

The capped box {v in [0,1]^n : sum(v) <= k} is handled by clipping and, when
the budget is violated, bisecting on the shift lam in clip(a - lam, 0, 1).
Each bisection step also tries the exact shift implied by the current
free set; the clipped sum is piecewise linear in lam, so once the free set
is right that guess lands on the root and the loop exits early.
"""

from __future__ import annotations

import numpy as np

DEFAULT_TOL = 1e-10


try:
    from numba import njit
except ImportError:  # pragma: no cover
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


class ProjectionStats:
    """Bisection bookkeeping for the most recent projection call.

    ``low`` and ``high`` are the nominal initial bracket
    (before any widening); ``iterations`` is the largest loop count over rows.
    """

    def __init__(self):
        self.iterations = 0
        self.low = None
        self.high = None


@njit(cache=True)
def _clipped_sum(a, lam):
    s = 0.0
    for v in a:
        v = v - lam
        if v >= 1.0:
            s += 1.0
        elif v > 0.0:
            s += v
    return s


@njit(cache=True)
def _fill(a, lam, out):
    for i in range(a.shape[0]):
        out[i] = min(max(a[i] - lam, 0.0), 1.0)


@njit(cache=True)
def _project_row(a, k, tol, out, bracket):
    """Project ``a`` onto the capped box, writing into ``out``; returns the
    number of bisection steps (0 when clipping suffices)."""
    n = a.shape[0]
    total = 0.0
    for i in range(n):
        out[i] = min(max(a[i], 0.0), 1.0)
        total += out[i]
    bracket[0] = np.nan
    bracket[1] = np.nan
    if total <= k:
        return 0

    low = (a.sum() - k) / n
    high = a.max() - k / n
    bracket[0] = low
    bracket[1] = high
    # The nominal bracket can miss the root when many coordinates clip at 1.
    if _clipped_sum(a, low) < k:
        low = a.min() - k / n
    if _clipped_sum(a, high) > k:
        high = a.max()
    if low < 0.0:
        low = 0.0

    width = max(high - low, tol)
    max_iter = int(np.ceil(np.log2(width / tol))) + 1
    it = 0
    while it < max_iter:
        it += 1
        mid = 0.5 * (low + high)
        s = 0.0
        free_sum = 0.0
        n_free = 0
        n_ones = 0
        for i in range(n):
            v = a[i] - mid
            if v >= 1.0:
                n_ones += 1
                s += 1.0
            elif v > 0.0:
                n_free += 1
                free_sum += a[i]
                s += v
        if abs(s - k) < tol:
            _fill(a, mid, out)
            return it
        # the clipped sum is linear in lam while the free set is fixed,
        # so this shift is the root whenever the free set at mid is right
        if n_free > 0:
            guess = (free_sum + n_ones - k) / n_free
            if guess >= 0.0 and abs(_clipped_sum(a, guess) - k) < tol:
                _fill(a, guess, out)
                return it
        if s > k:
            low = mid
        else:
            high = mid
    _fill(a, high, out)
    return it


@njit(cache=True)
def _project_rows(A, k, tol, out, brackets, iters):
    for r in range(A.shape[0]):
        iters[r] = _project_row(A[r], k, tol, out[r], brackets[r])


def project_rows_capped_box(A, k, tol: float = DEFAULT_TOL, stats: ProjectionStats | None = None):
    """Project every row of ``A`` onto {v in [0,1]^n : sum(v) <= k}."""
    A = np.ascontiguousarray(np.atleast_2d(np.asarray(A, dtype=float)))
    n = A.shape[1]
    if not 1 <= k <= n:
        raise ValueError(f"budget k={k} must satisfy 1 <= k <= n={n}")
    if not tol > 0:
        raise ValueError("tol must be positive")
    out = np.empty_like(A)
    brackets = np.empty((A.shape[0], 2))
    iters = np.zeros(A.shape[0], dtype=np.int64)
    _project_rows(A, float(k), float(tol), out, brackets, iters)
    if stats is not None:
        stats.iterations = int(iters.max()) if iters.size else 0
        stats.low, stats.high = brackets[:, 0].copy(), brackets[:, 1].copy()
    return out


def project_row_capped_box(a, k, tol: float = DEFAULT_TOL, stats: ProjectionStats | None = None):
    """Project a vector onto {v in [0,1]^n : sum(v) <= k}.

    If clipping to the box already meets the budget the clip is returned
    as is. Otherwise the sum is driven to within ``tol`` of ``k``.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 1:
        raise ValueError("expected a 1-d vector")
    return project_rows_capped_box(a[None, :], k, tol, stats)[0]


def project_mask(eps, k, tol: float = DEFAULT_TOL):
    """Row-wise projection of a (p, n) mask onto the capped box."""
    eps = np.asarray(eps, dtype=float)
    if eps.ndim != 2:
        raise ValueError("mask must be a 2-d array")
    return project_rows_capped_box(eps, k, tol)


def project_dual_positive(s, j: int):
    """Keep only coordinate j, clamped to [-1, 0]."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    out[j] = min(max(s[j], -1.0), 0.0)
    return out


def project_dual_negative(s, tol: float = DEFAULT_TOL):
    """Project onto {s <= 0, 1's >= -1}.

    Negating maps this set onto the capped box with budget 1, so the same
    shift-and-clip bisection applies.
    """
    s = np.asarray(s, dtype=float)
    return -project_row_capped_box(-s, 1, tol)


def project_duals(S, assign, tol: float = DEFAULT_TOL):
    """Project each column of a (p, m) dual matrix onto its feasible set.

    ``assign[i]`` is the dedicated prototype of a positive example and -1
    for a negative one.
    """
    S = np.asarray(S, dtype=float)
    assign = np.asarray(assign, dtype=int)
    out = np.zeros_like(S)
    pos = np.flatnonzero(assign >= 0)
    if pos.size:
        out[assign[pos], pos] = np.clip(S[assign[pos], pos], -1.0, 0.0)
    neg = np.flatnonzero(assign < 0)
    if neg.size:
        out[:, neg] = -project_rows_capped_box(-S[:, neg].T, 1, tol).T
    return out
