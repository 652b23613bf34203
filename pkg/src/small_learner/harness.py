"""Sparse logistic-regression baselines, evaluation and grid cross-validation."""

from __future__ import annotations

import dataclasses
import itertools
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .data import Dataset, SplitPlan, apply_standardizer, fit_standardizer, make_splits
from .losses import log_loss
from .solver import SolverConfig, train

C_GRID = (1e-1, 1e-2, 1e-3, 1e-4)
SMALL_GRID = {"alpha": (0.1, 1e-2, 1e-3), "beta": (1e-3, 1e-4)}


class DivergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class BaselineConfig:
    penalty: str = "l1"  # "l1" | "elasticnet"
    c: float = 1e-2
    retrain_budget: int | None = None  # None: n // 2
    inner_l2: float = 1e-2
    max_iter: int = 5000
    tol: float = 1e-9

    def __post_init__(self):
        if self.penalty not in ("l1", "elasticnet"):
            raise ValueError(f"unknown penalty {self.penalty!r}")
        if not (self.c > 0 and self.inner_l2 > 0):
            raise ValueError("regularization coefficients must be positive")
        if self.retrain_budget is not None and self.retrain_budget < 1:
            raise ValueError("retrain budget must be at least 1")


@dataclass(frozen=True)
class LinearModel:
    weights: np.ndarray
    bias: float

    def decision_function(self, X):
        return np.asarray(X, dtype=float) @ self.weights + self.bias

    def predict(self, X):
        return np.where(self.decision_function(X) > 0, 1.0, -1.0)

    @property
    def feature_count(self) -> int:
        return int(np.count_nonzero(self.weights))


def soft_threshold(v, tau):
    """Proximal map of tau * ||.||_1."""
    v = np.asarray(v, dtype=float)
    return np.sign(v) * np.maximum(np.abs(v) - tau, 0.0)


def _logistic_objective(w, b, X, y, l1, l2):
    return float(np.mean(log_loss(y * (X @ w + b))) + l1 * np.abs(w).sum() + 0.5 * l2 * w @ w)


def _prox_grad(X, y, l1, l2, max_iter, tol, support=None):
    """ISTA on mean log-loss + l1 |w|_1 + l2/2 |w|^2 with an unpenalized bias."""
    m, n = X.shape
    if support is not None:
        X = X[:, support]
    # curvature of the mean log-loss in (w, b) is at most ||[X 1]||^2 / (4m)
    Xb = np.hstack([X, np.ones((m, 1))])
    L = np.linalg.norm(Xb, 2) ** 2 / (4.0 * m) + l2
    step = 1.0 / L
    w = np.zeros(X.shape[1])
    b = 0.0
    f = _logistic_objective(w, b, X, y, l1, l2)
    rising = 0
    for _ in range(max_iter):
        z = y * (X @ w + b)
        r = -y * 0.5 * (1.0 - np.tanh(0.5 * z)) / m  # d/dmargin of the mean loss
        gw = X.T @ r + l2 * w
        gb = r.sum()
        w = soft_threshold(w - step * gw, step * l1)
        b = b - step * gb
        f_new = _logistic_objective(w, b, X, y, l1, l2)
        rising = rising + 1 if f_new > f else 0
        if rising >= 100:
            raise DivergenceError("objective increased for 100 consecutive steps")
        done = abs(f - f_new) < tol
        f = f_new
        if done:
            break
    if support is not None:
        full = np.zeros(n)
        full[support] = w
        w = full
    return w, b


def train_l1_logreg(d: Dataset, cfg: BaselineConfig) -> LinearModel:
    """Minimize mean log-loss + c |w|_1 (+ c/2 |w|^2 for the elastic net)."""
    l2 = cfg.c if cfg.penalty == "elasticnet" else 0.0
    w, b = _prox_grad(d.features, d.labels, cfg.c, l2, cfg.max_iter, cfg.tol)
    return LinearModel(w, b)


def top_features(weights, budget: int) -> np.ndarray:
    weights = np.asarray(weights, dtype=float)
    if budget < 1:
        raise ValueError("budget must be at least 1")
    if budget > weights.size:
        raise ValueError(f"budget {budget} exceeds {weights.size} features")
    order = np.argsort(-np.abs(weights), kind="stable")
    return np.sort(order[:budget])


def retrain_top_features(d: Dataset, weights, budget: int, l2: float = 1e-2,
                         max_iter: int = 5000, tol: float = 1e-9) -> LinearModel:
    """Keep the ``budget`` largest |weights| and refit an L2 logistic model on them."""
    support = top_features(weights, budget)
    w, b = _prox_grad(d.features, d.labels, 0.0, l2, max_iter, tol, support=support)
    return LinearModel(w, b)


def sparse_baseline(d: Dataset, cfg: BaselineConfig) -> LinearModel:
    """L1 (or elastic-net) fit followed by retraining on the top features."""
    first = train_l1_logreg(d, cfg)
    budget = cfg.retrain_budget if cfg.retrain_budget is not None else max(1, d.n // 2)
    return retrain_top_features(d, first.weights, min(budget, d.n), cfg.inner_l2,
                                cfg.max_iter, cfg.tol)


def normalized_accuracy(accuracy: float, features: float) -> float:
    """100 * accuracy / feature count; nan when no features are used."""
    return 100.0 * accuracy / features if features > 0 else float("nan")


@dataclass
class EvalReport:
    accuracies: list
    feature_counts: list = field(default_factory=list)
    dataset: str = ""
    method: str = ""
    params: dict = field(default_factory=dict)

    @property
    def mean(self) -> float:
        return float(np.mean(self.accuracies))

    @property
    def std(self) -> float:
        return float(np.std(self.accuracies))

    @property
    def features(self) -> float:
        return float(np.mean(self.feature_counts)) if self.feature_counts else float("nan")

    @property
    def normalized(self) -> float:
        return normalized_accuracy(self.mean, self.features)

    def row(self) -> str:
        return "\t".join([
            self.dataset, self.method, repr(self.mean), repr(self.std),
            repr(self.features), repr(self.normalized),
        ])


ROW_HEADER = "dataset\tmethod\tmean\tstd\tfeatures\tnormalized"


def format_table(reports) -> str:
    head = f"{'dataset':<24} {'method':<8} {'accuracy':>16} {'features':>9} {'normalized':>11}"
    lines = [head, "-" * len(head)]
    for r in reports:
        acc = f"{r.mean:.3f} +- {r.std:.3f}"
        lines.append(f"{r.dataset:<24} {r.method:<8} {acc:>16} {r.features:>9.2f} {r.normalized:>11.2f}")
    return "\n".join(lines)


def expand_grid(grid) -> list[dict]:
    """``{"a": (1, 2), "b": (3,)}`` -> ``[{"a": 1, "b": 3}, {"a": 2, "b": 3}]``;
    a list of dicts is returned unchanged."""
    if isinstance(grid, dict):
        keys = list(grid)
        return [dict(zip(keys, vals)) for vals in itertools.product(*(grid[k] for k in keys))]
    return [dict(g) for g in grid]


Trainer = Callable[[Dataset, dict], object]


def accuracy(model, d: Dataset) -> float:
    return float(np.mean(model.predict(d.features) == d.labels))


def cross_validate(d: Dataset, grid, folds: int, trainer: Trainer, seed: int = 0):
    """Pick the grid point with the best mean validation accuracy.

    Ties go to the smaller model (fewer features on average), then to the
    earlier grid point. Returns (best params, EvalReport of that point).
    """
    points = expand_grid(grid)
    if not points:
        raise ValueError("empty grid")
    splits = make_splits(d, SplitPlan("kfold", seed, folds=folds))
    best = None
    for params in points:
        accs, feats = [], []
        for tr, te in splits:
            model = trainer(d.subset(tr), params)
            accs.append(accuracy(model, d.subset(te)))
            feats.append(model.feature_count)
        report = EvalReport(accs, feats, d.id, params=params)
        key = (-round(report.mean, 12), round(report.features, 12))
        if best is None or key < best[0]:
            best = (key, params, report)
    return best[1], best[2]


def small_trainer(base: SolverConfig) -> Trainer:
    def fit(d, params):
        return train(d, dataclasses.replace(base, **params))[0]
    return fit


def baseline_trainer(base: BaselineConfig) -> Trainer:
    def fit(d, params):
        return sparse_baseline(d, dataclasses.replace(base, **params))
    return fit


def benchmark(d: Dataset, methods: dict, n_splits: int = 5, ratio: float = 0.8,
              folds: int = 5, seed: int = 0, progress=None) -> list[EvalReport]:
    """Evaluate each method over seeded holdout splits.

    ``methods`` maps a name to ``(trainer, grid)``. On each split the data are
    standardized with training statistics, the grid is searched by
    ``folds``-fold cross-validation on the training part, and the chosen
    point is refit on the whole training part and scored on the test part.
    """
    reports = {name: EvalReport([], [], d.id, name) for name in methods}
    for s in range(n_splits):
        tr, te = make_splits(d, SplitPlan("holdout", seed + s, ratio))[0]
        std = fit_standardizer(d.subset(tr))
        d_tr, d_te = apply_standardizer(std, d.subset(tr)), apply_standardizer(std, d.subset(te))
        for name, (trainer, grid) in methods.items():
            points = expand_grid(grid)
            if len(points) > 1:
                params, _ = cross_validate(d_tr, points, folds, trainer, seed + s)
            else:
                params = points[0]
            model = trainer(d_tr, params)
            reports[name].accuracies.append(accuracy(model, d_te))
            reports[name].feature_counts.append(model.feature_count)
            reports[name].params = params
            if progress:
                progress(s, name, reports[name].accuracies[-1], params)
    return list(reports.values())
