"""Trained k-sparse p-prototype predictors and their on-disk format."""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .data import Standardizer

FORMAT_NAME = "small-learner-model"
FORMAT_VERSION = 1
REQUIRED_FIELDS = (
    "format", "version", "p", "n", "k", "lambda",
    "feature_names", "mean", "scale", "prototypes", "config", "metadata",
)


class ModelFormatError(ValueError):
    pass


class ModelVersionError(ModelFormatError):
    pass


@dataclass(frozen=True)
class TrainedModel:
    W: np.ndarray
    standardizer: Standardizer
    feature_names: tuple[str, ...]
    k: int
    lam: float
    config: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        W = np.array(self.W, dtype=float)
        if W.ndim != 2 or W.shape[0] < 1:
            raise ValueError("W must be a (p, n) matrix with p >= 1")
        if not np.all(np.isfinite(W)):
            raise ValueError("W has non-finite entries")
        if self.standardizer.n != W.shape[1] or len(self.feature_names) != W.shape[1]:
            raise ValueError("standardizer, feature names and W disagree on n")
        support = np.count_nonzero(W, axis=1)
        if np.any(support > self.k):
            raise ValueError(f"a prototype uses {support.max()} features, budget is {self.k}")
        W.setflags(write=False)
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))

    @property
    def p(self) -> int:
        return self.W.shape[0]

    @property
    def n(self) -> int:
        return self.W.shape[1]

    def scores(self, X, standardized: bool = False) -> np.ndarray:
        """Prototype scores W x for each row of X, shape (rows, p)."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n:
            raise ValueError(f"expected {self.n} features, got {X.shape[1]}")
        Z = X if standardized else self.standardizer.transform(X)
        return Z @ self.W.T

    def predict(self, X, standardized: bool = False) -> np.ndarray:
        return np.where(self.scores(X, standardized).max(axis=1) > 0, 1.0, -1.0)

    @property
    def feature_count(self) -> int:
        return int(np.count_nonzero(self.W))


def decision_values(model: TrainedModel, x, standardized: bool = False):
    """Return (max score, winning prototype, all scores) for one input.

    The winner is the first prototype attaining the max.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] != model.n:
        raise ValueError(f"expected a vector of length {model.n}")
    s = model.scores(x[None, :], standardized)[0]
    j = int(np.argmax(s))
    return float(s[j]), j, s


def predict(model: TrainedModel, x, standardized: bool = False) -> int:
    top, _, _ = decision_values(model, x, standardized)
    return 1 if top > 0 else -1


def sparsity_report(model: TrainedModel):
    """(per-prototype support sizes, total with multiplicity, distinct features)."""
    nz = model.W != 0
    per_row = [int(c) for c in nz.sum(axis=1)]
    return per_row, int(nz.sum()), int(np.any(nz, axis=0).sum())


def to_dict(model: TrainedModel) -> dict:
    return {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "p": model.p,
        "n": model.n,
        "k": model.k,
        "lambda": model.lam,
        "feature_names": list(model.feature_names),
        "mean": [float(v) for v in model.standardizer.mean],
        "scale": [float(v) for v in model.standardizer.scale],
        "prototypes": [[float(v) for v in row] for row in model.W],
        "config": model.config,
        "metadata": model.metadata,
    }


def from_dict(doc: dict) -> TrainedModel:
    if not isinstance(doc, dict):
        raise ModelFormatError("model document must be a JSON object")
    for name in REQUIRED_FIELDS:
        if name not in doc:
            raise ModelFormatError(f"model file is missing field {name!r}")
    if doc["format"] != FORMAT_NAME:
        raise ModelFormatError(f"not a model file (format {doc['format']!r})")
    if doc["version"] != FORMAT_VERSION:
        raise ModelVersionError(
            f"unsupported model version {doc['version']!r} (this build reads {FORMAT_VERSION})"
        )
    try:
        W = np.array(doc["prototypes"], dtype=float)
        std = Standardizer(doc["mean"], doc["scale"])
        p, n = int(doc["p"]), int(doc["n"])
    except (TypeError, ValueError) as exc:
        raise ModelFormatError(f"malformed model field: {exc}") from None
    if W.shape != (p, n):
        raise ModelFormatError(f"prototypes have shape {W.shape}, header says ({p}, {n})")
    try:
        return TrainedModel(
            W, std, tuple(doc["feature_names"]), int(doc["k"]), float(doc["lambda"]),
            dict(doc["config"]), dict(doc["metadata"]),
        )
    except ValueError as exc:
        raise ModelFormatError(str(exc)) from None


def dumps(model: TrainedModel) -> str:
    return json.dumps(to_dict(model), indent=2, sort_keys=False) + "\n"


def save(model: TrainedModel, path) -> None:
    """Write atomically: the target either keeps its old content or gets the full model."""
    path = Path(path)
    text = dumps(model)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load(path) -> TrainedModel:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: corrupted model file ({exc})") from None
    return from_dict(doc)
