"""SMaLL against sparse logistic baselines on the bundled breast-cancer data.

Five seeded 80/20 splits; every method's grid is searched by 5-fold CV on
the training part. Prints the comparison table (or TSV rows with --rows).

    python3 scripts/breast_cancer_benchmark.py [--splits 5] [--rows]
"""

import argparse
import dataclasses
import time
from importlib import resources

from small_learner.data import load_csv
from small_learner.harness import (
    C_GRID,
    SMALL_GRID,
    ROW_HEADER,
    BaselineConfig,
    baseline_trainer,
    benchmark,
    format_table,
    small_trainer,
)
from small_learner.solver import SolverConfig


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--splits", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--budget", type=int, default=None, help="baseline retrain budget (default n/2)")
    ap.add_argument("--rows", action="store_true")
    args = ap.parse_args()

    d = load_csv(resources.files("small_learner") / "datasets" / "breast_cancer.csv")
    d = dataclasses.replace(d, id="breast_cancer")
    b = BaselineConfig(retrain_budget=args.budget)
    methods = {
        "SMaLL": (small_trainer(SolverConfig(lam=0.1, k=3, p=2)), SMALL_GRID),
        "L1L": (baseline_trainer(b), {"c": C_GRID}),
        "ENL": (baseline_trainer(dataclasses.replace(b, penalty="elasticnet")), {"c": C_GRID}),
    }
    t0 = time.perf_counter()
    reports = benchmark(d, methods, n_splits=args.splits, seed=args.seed,
                        progress=lambda s, m, a, p: print(f"# split {s} {m}: {a:.3f} {p}", flush=True))
    print(ROW_HEADER + "\n" + "\n".join(r.row() for r in reports) if args.rows else format_table(reports))
    print(f"# {time.perf_counter() - t0:.0f}s")


if __name__ == "__main__":
    main()
