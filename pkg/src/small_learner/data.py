"""Labeled datasets: CSV loading, standardization, train/test splitting."""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

SCALE_FLOOR = 1e-12


class DataError(ValueError):
    pass


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray  # (m, n)
    labels: np.ndarray  # (m,) in {-1, +1}
    feature_names: tuple[str, ...]
    id: str = ""

    def __post_init__(self):
        X = np.array(self.features, dtype=float)
        y = np.array(self.labels, dtype=float).ravel()
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise DataError(f"features must be a non-empty 2-d array, got shape {X.shape}")
        if y.shape[0] != X.shape[0]:
            raise DataError(f"{X.shape[0]} feature rows but {y.shape[0]} labels")
        if not np.all((y == 1) | (y == -1)):
            raise DataError("labels must be -1 or +1")
        if not np.all(np.isfinite(X)):
            raise DataError("features contain non-finite values")
        names = tuple(str(s) for s in self.feature_names)
        if len(names) != X.shape[1]:
            raise DataError(f"{len(names)} feature names for {X.shape[1]} columns")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "feature_names", names)

    @property
    def m(self) -> int:
        return self.features.shape[0]

    @property
    def n(self) -> int:
        return self.features.shape[1]

    @property
    def positives(self) -> np.ndarray:
        return np.flatnonzero(self.labels > 0)

    @property
    def negatives(self) -> np.ndarray:
        return np.flatnonzero(self.labels < 0)

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx, dtype=int)
        return Dataset(self.features[idx], self.labels[idx], self.feature_names, self.id)


def _parse_label(raw: str, row: int, column: str) -> float:
    try:
        v = float(raw)
    except ValueError:
        raise DataError(f"row {row}, column {column!r}: label {raw!r} is not numeric") from None
    if v == 1:
        return 1.0
    if v == -1 or v == 0:
        return -1.0
    raise DataError(f"row {row}, column {column!r}: label {raw!r} not in {{-1, +1}} or {{0, 1}}")


def load_csv(path, label_column: str = "last") -> Dataset:
    """Read a headered, comma-separated file into a Dataset.

    ``label_column`` is a header name or ``"last"``. Labels may be given as
    -1/+1 or 0/1; 0 is mapped to -1. Row numbers in error messages are
    1-based and count the header as row 1.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such data file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DataError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if label_column == "last":
        li = len(header) - 1
    else:
        if label_column not in header:
            raise DataError(f"{path}: label column {label_column!r} not in header")
        li = header.index(label_column)
    feature_cols = [j for j in range(len(header)) if j != li]
    if not feature_cols:
        raise DataError(f"{path}: no feature columns")

    X, y = [], []
    for r, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise DataError(f"{path}: row {r} has {len(row)} cells, header has {len(header)}")
        feats = []
        for j in feature_cols:
            cell = row[j].strip()
            try:
                v = float(cell)
            except ValueError:
                raise DataError(
                    f"{path}: row {r}, column {header[j]!r}: non-numeric cell {cell!r}"
                ) from None
            if not math.isfinite(v):
                raise DataError(f"{path}: row {r}, column {header[j]!r}: non-finite value {cell!r}")
            feats.append(v)
        X.append(feats)
        y.append(_parse_label(row[li].strip(), r, header[li]))
    if not X:
        raise DataError(f"{path}: no data rows")
    return Dataset(np.array(X), np.array(y), tuple(header[j] for j in feature_cols), str(path))


@dataclass(frozen=True)
class Standardizer:
    mean: np.ndarray
    scale: np.ndarray

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float).ravel()
        scale = np.array(self.scale, dtype=float).ravel()
        if mean.shape != scale.shape:
            raise DataError("mean and scale lengths differ")
        if not np.all(scale > 0):
            raise DataError("scale entries must be positive")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "scale", scale)

    @property
    def n(self) -> int:
        return self.mean.shape[0]

    @classmethod
    def identity(cls, n: int) -> "Standardizer":
        return cls(np.zeros(n), np.ones(n))

    def transform(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.shape[-1] != self.n:
            raise DataError(f"standardizer has {self.n} columns, input has {X.shape[-1]}")
        return (X - self.mean) / self.scale

    def inverse(self, Z) -> np.ndarray:
        Z = np.asarray(Z, dtype=float)
        if Z.shape[-1] != self.n:
            raise DataError(f"standardizer has {self.n} columns, input has {Z.shape[-1]}")
        return Z * self.scale + self.mean


def fit_standardizer(d: Dataset) -> Standardizer:
    # population sd; constant columns get the floor and map to 0
    X = d.features
    mean = X.mean(axis=0)
    sd = X.std(axis=0)
    # the computed mean of a constant column can be off by roundoff, which
    # the floored scale would blow up
    constant = np.ptp(X, axis=0) == 0
    mean[constant] = X[0, constant]
    sd[constant] = 0.0
    return Standardizer(mean, np.maximum(sd, SCALE_FLOOR))


def apply_standardizer(s: Standardizer, d: Dataset) -> Dataset:
    return Dataset(s.transform(d.features), d.labels, d.feature_names, d.id)


@dataclass(frozen=True)
class SplitPlan:
    kind: str = "holdout"  # "holdout" | "kfold"
    seed: int = 0
    ratio: float = 0.8
    folds: int = 5

    def __post_init__(self):
        if self.kind not in ("holdout", "kfold"):
            raise DataError(f"unknown split kind {self.kind!r}")
        if self.seed < 0:
            raise DataError("seed must be non-negative")
        if self.kind == "holdout" and not 0 < self.ratio < 1:
            raise DataError("holdout ratio must lie in (0, 1)")
        if self.kind == "kfold" and self.folds < 2:
            raise DataError("k-fold needs at least 2 folds")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "seed": self.seed, "ratio": self.ratio, "folds": self.folds}


def make_splits(d: Dataset, plan: SplitPlan) -> list[tuple[np.ndarray, np.ndarray]]:
    """Return (train, test) index arrays; deterministic in ``plan.seed``.

    Holdout gives one pair with ``round(ratio * m)`` training rows. K-fold
    gives ``plan.folds`` pairs whose test parts partition ``range(m)``.
    """
    m = d.m
    rng = np.random.default_rng(plan.seed)
    perm = rng.permutation(m)
    if plan.kind == "holdout":
        n_train = int(round(plan.ratio * m))
        if not 0 < n_train < m:
            raise DataError(f"holdout ratio {plan.ratio} leaves an empty part for m={m}")
        return [(np.sort(perm[:n_train]), np.sort(perm[n_train:]))]

    if plan.folds > m:
        raise DataError(f"{plan.folds} folds for {m} examples")
    smallest = min(len(d.positives), len(d.negatives))
    if plan.folds > smallest:
        warnings.warn(
            f"{plan.folds} folds exceed the smaller class count ({smallest}); "
            "some folds will miss a class",
            stacklevel=2,
        )
    parts = np.array_split(perm, plan.folds)
    out = []
    for f, test in enumerate(parts):
        train = np.concatenate([p for g, p in enumerate(parts) if g != f])
        out.append((np.sort(train), np.sort(test)))
    return out
