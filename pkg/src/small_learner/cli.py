"""Command-line interface: train, predict, eval, cv, explain, bench.

Exit status is 0 on success, 2 for usage errors and 1 for runtime errors.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import sys
import time
from importlib import resources
from pathlib import Path

import numpy as np

from . import model as model_io
from .data import DataError, Dataset, apply_standardizer, fit_standardizer, load_csv
from .dnf import extract_rules
from .harness import (
    C_GRID,
    SMALL_GRID,
    ROW_HEADER,
    BaselineConfig,
    baseline_trainer,
    benchmark,
    cross_validate,
    expand_grid,
    format_table,
    small_trainer,
)
from .solver import SolverConfig, train

BUNDLED = {"breast_cancer": "breast_cancer.csv"}
GRID_KEYS = {"alpha": float, "beta": float, "lambda": float, "lam": float, "k": int, "p": int,
             "iters": int, "restarts": int}


class UsageError(Exception):
    pass


def resolve_data(spec: str) -> Path:
    """A file path, or ``bundled:<name>`` for a dataset shipped with the package."""
    if spec.startswith("bundled:"):
        name = spec.split(":", 1)[1]
        if name not in BUNDLED:
            raise DataError(f"no bundled dataset {name!r}; have {sorted(BUNDLED)}")
        return Path(str(resources.files("small_learner") / "datasets" / BUNDLED[name]))
    return Path(spec)


def parse_grid(text: str) -> dict:
    """``"alpha=0.1,0.01;beta=1e-3"`` -> ``{"alpha": (0.1, 0.01), "beta": (0.001,)}``."""
    grid = {}
    for part in filter(None, (p.strip() for p in text.split(";"))):
        if "=" not in part:
            raise UsageError(f"bad grid entry {part!r}; expected name=v1,v2")
        key, vals = (s.strip() for s in part.split("=", 1))
        if key not in GRID_KEYS:
            raise UsageError(f"unknown grid parameter {key!r}")
        try:
            values = tuple(GRID_KEYS[key](v) for v in vals.split(",") if v.strip())
        except ValueError:
            raise UsageError(f"bad value in grid entry {part!r}") from None
        if not values:
            raise UsageError(f"grid entry {key!r} has no values")
        grid["lam" if key == "lambda" else key] = values
    if not grid:
        raise UsageError("empty grid")
    return grid


def solver_config(args) -> SolverConfig:
    return SolverConfig(
        lam=args.lam, k=args.k, p=args.p, alpha=args.alpha, beta=args.beta, iters=args.iters,
        tol=args.tol, seed=args.seed, gradient_mode=args.gradient_mode, refit=args.refit,
        restarts=args.restarts, reassign=args.reassign,
    )


def _load(args) -> Dataset:
    return load_csv(resolve_data(args.data), args.label_col)


def _align(d: Dataset, m: model_io.TrainedModel) -> np.ndarray:
    """Features of ``d`` in the model's column order."""
    have, want = list(d.feature_names), list(m.feature_names)
    missing = [nm for nm in want if nm not in have]
    extra = [nm for nm in have if nm not in want]
    if missing or extra:
        parts = []
        if missing:
            parts.append("missing " + ", ".join(missing))
        if extra:
            parts.append("unexpected " + ", ".join(extra))
        raise DataError("feature names differ from the model: " + "; ".join(parts))
    return d.features[:, [have.index(nm) for nm in want]]


def _write(path, text: str):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def cmd_train(args) -> int:
    if not args.model:
        raise UsageError("train needs --model")
    cfg = dataclasses.replace(solver_config(args), checkpoint_every=args.checkpoint_every,
                              trace_gap=args.trace_gap)
    raw = _load(args)
    started = time.perf_counter()
    std = fit_standardizer(raw)
    d = apply_standardizer(std, raw)
    m, trace = train(d, cfg, std)
    elapsed = time.perf_counter() - started
    model_io.save(m, args.model)
    trace_path = args.out or f"{args.model}.trace.tsv"
    Path(trace_path).write_text(trace.to_tsv(), encoding="utf-8")

    acc = float(np.mean(m.predict(raw.features) == raw.labels))
    per_row, total, distinct = model_io.sparsity_report(m)
    print(f"train accuracy: {acc:.4f}")
    print(f"support per prototype: {per_row}  total: {total}  distinct: {distinct}")
    print(f"objective: {m.metadata['objective']:.6g}")
    print(f"wall time: {elapsed:.2f}s")
    for w in trace.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return 0


def _surface_rows(m, raw: Dataset, args) -> str:
    names = [s.strip() for s in args.surface.split(",")]
    if len(names) != 2 or any(nm not in m.feature_names for nm in names):
        raise UsageError("--surface needs two model feature names, e.g. --surface a,b")
    idx = [m.feature_names.index(nm) for nm in names]
    X = _align(raw, m)
    lo, hi = X[:, idx].min(axis=0), X[:, idx].max(axis=0)
    steps = args.surface_steps
    gx, gy = np.linspace(lo[0], hi[0], steps), np.linspace(lo[1], hi[1], steps)
    base = m.standardizer.mean.copy()
    pts = np.tile(base, (steps * steps, 1))
    pts[:, idx[0]] = np.repeat(gx, steps)
    pts[:, idx[1]] = np.tile(gy, steps)
    scores = m.scores(pts).max(axis=1)
    lines = [f"{names[0]}\t{names[1]}\tscore"]
    lines += [f"{a!r}\t{b!r}\t{s!r}"
              for a, b, s in zip(pts[:, idx[0]].tolist(), pts[:, idx[1]].tolist(), scores.tolist())]
    return "\n".join(lines) + "\n"


def cmd_predict(args) -> int:
    m = model_io.load(args.model)
    raw = _load(args)
    if args.surface:
        _write(args.out, _surface_rows(m, raw, args))
        return 0
    X = _align(raw, m)
    S = m.scores(X)
    lines = ["row\tprediction\tscore\tprototype\t" + "\t".join(f"score_{j + 1}" for j in range(m.p))]
    for i, s in enumerate(S):
        j = int(np.argmax(s))
        pred = 1 if s[j] > 0 else -1
        lines.append(f"{i}\t{pred}\t{float(s[j])!r}\t{j + 1}\t" + "\t".join(repr(float(v)) for v in s))
    _write(args.out, "\n".join(lines) + "\n")
    return 0


def cmd_eval(args) -> int:
    m = model_io.load(args.model)
    raw = _load(args)
    pred = m.predict(_align(raw, m))
    acc = float(np.mean(pred == raw.labels))
    tp = int(np.sum((pred > 0) & (raw.labels > 0)))
    tn = int(np.sum((pred < 0) & (raw.labels < 0)))
    if args.format == "rows":
        _write(args.out, f"examples\taccuracy\ttrue_pos\ttrue_neg\n{raw.m}\t{acc!r}\t{tp}\t{tn}\n")
    else:
        _write(args.out, f"examples: {raw.m}\naccuracy: {acc:.4f}\ntrue positives: {tp}\n"
                         f"true negatives: {tn}\n")
    return 0


def cmd_cv(args) -> int:
    grid = parse_grid(args.grid) if args.grid else SMALL_GRID
    raw = _load(args)
    d = apply_standardizer(fit_standardizer(raw), raw)
    params, report = cross_validate(d, grid, args.folds, small_trainer(solver_config(args)), args.seed)
    report.method = "SMaLL"
    if args.format == "rows":
        _write(args.out, "params\tmean\tstd\tfeatures\n"
                         f"{params}\t{report.mean!r}\t{report.std!r}\t{report.features!r}\n")
    else:
        _write(args.out, f"best: {params}\nvalidation accuracy: {report.mean:.4f} +- {report.std:.4f}\n"
                         f"features: {report.features:.2f}\n")
    return 0


def cmd_explain(args) -> int:
    m = model_io.load(args.model)
    report = extract_rules(m, args.top)
    lines = report.rows() if args.format == "rows" else report.lines()
    _write(args.out, "\n".join(lines) + "\n")
    return 0


def cmd_bench(args) -> int:
    grid = parse_grid(args.grid) if args.grid else SMALL_GRID
    try:
        c_grid = {"c": tuple(float(c) for c in args.c_grid.split(","))}
    except ValueError:
        raise UsageError(f"bad --c-grid {args.c_grid!r}") from None
    raw = _load(args)
    base_b = BaselineConfig(retrain_budget=args.retrain_budget)
    methods = {
        "SMaLL": (small_trainer(solver_config(args)), grid),
        "L1L": (baseline_trainer(dataclasses.replace(base_b, penalty="l1")), c_grid),
        "ENL": (baseline_trainer(dataclasses.replace(base_b, penalty="elasticnet")), c_grid),
    }
    name = Path(args.data).stem if not args.data.startswith("bundled:") else args.data.split(":", 1)[1]
    raw = Dataset(raw.features, raw.labels, raw.feature_names, name)

    def progress(split, method, acc, params):
        print(f"split {split} {method}: {acc:.4f} {params}", file=sys.stderr)

    reports = benchmark(raw, methods, args.splits, 0.8, args.folds, args.seed,
                        progress if args.verbose else None)
    if args.format == "rows":
        text = ROW_HEADER + "\n" + "\n".join(r.row() for r in reports) + "\n"
    else:
        text = format_table(reports) + "\n"
    _write(args.out, text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="small-learner", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def data_flags(p, required=True):
        p.add_argument("--data", required=required, help="CSV file or bundled:<name>")
        p.add_argument("--label-col", default="last", help='label column name or "last"')

    def solver_flags(p):
        p.add_argument("--k", type=int, default=3)
        p.add_argument("--p", type=int, default=2)
        p.add_argument("--lambda", dest="lam", type=float, default=0.1)
        p.add_argument("--alpha", type=float, default=0.01)
        p.add_argument("--beta", type=float, default=0.001)
        p.add_argument("--iters", type=int, default=2000)
        p.add_argument("--tol", type=float, default=1e-10)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--refit", action="store_true")
        p.add_argument("--restarts", type=int, default=1, help="clusterings tried (lowest objective wins)")
        p.add_argument("--reassign", type=int, default=0,
                       help="rounds of moving positives to their best prototype and re-solving")
        p.add_argument("--gradient-mode", choices=("consistent", "paper"), default="consistent")

    def fmt(p):
        p.add_argument("--format", choices=("table", "rows"), default="table")
        p.add_argument("--out", help="output path (default stdout)")

    p = sub.add_parser("train", help="train a model and write it with its trace")
    data_flags(p)
    solver_flags(p)
    p.add_argument("--model", required=True, help="model file to write")
    p.add_argument("--out", help="trace TSV path (default <model>.trace.tsv)")
    p.add_argument("--checkpoint-every", type=int, default=0)
    p.add_argument("--trace-gap", action="store_true", help="estimate the duality gap at checkpoints")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="per-row predictions, or a decision-surface grid")
    data_flags(p)
    p.add_argument("--model", required=True)
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--surface", help="two feature names; write (x, y, score) grid rows")
    p.add_argument("--surface-steps", type=int, default=50)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", help="accuracy of a model on a labeled file")
    data_flags(p)
    p.add_argument("--model", required=True)
    fmt(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("cv", help="grid search by k-fold cross-validation")
    data_flags(p)
    solver_flags(p)
    p.add_argument("--grid", help='e.g. "alpha=0.1,0.01;beta=0.001,0.0001"')
    p.add_argument("--folds", type=int, default=5)
    fmt(p)
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("explain", help="rule readout of a model")
    p.add_argument("--model", required=True)
    p.add_argument("--top", type=int, default=None)
    fmt(p)
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("bench", help="SMaLL against L1/elastic-net baselines over splits")
    data_flags(p)
    solver_flags(p)
    p.add_argument("--grid", help="SMaLL grid (default alpha x beta from the sparse experiments)")
    p.add_argument("--c-grid", default=",".join(str(c) for c in C_GRID))
    p.add_argument("--retrain-budget", type=int, default=None, help="default n/2")
    p.add_argument("--splits", type=int, default=5)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--verbose", action="store_true")
    fmt(p)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))  # exits 2
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
