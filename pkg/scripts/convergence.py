"""Duality-gap estimate against iteration count on a small random instance.

Writes TSV rows (mode, iterations, gap, objective) for both gradient modes.

    python3 scripts/convergence.py [--seed 0] > gap.tsv
"""

import argparse

from small_learner.losses import primal_objective
from small_learner.solver import SolverConfig, _finish, estimate_gap, mirror_prox
from small_learner.synthetic import desk_instance


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--iters", default="10,30,100,300,1000,2000,5000")
    args = ap.parse_args()

    d = desk_instance(seed=args.seed)
    print("mode\titerations\tgap\tobjective")
    for mode in ("consistent", "paper"):
        for T in (int(t) for t in args.iters.split(",")):
            cfg = SolverConfig(iters=T, gradient_mode=mode)
            eps, S, prob = mirror_prox(d, cfg)
            _, W = _finish(eps, S, prob, cfg)
            gap = estimate_gap(eps, S, prob)
            print(f"{mode}\t{T}\t{gap:.6g}\t{primal_objective(W, d, prob.assign, cfg.lam):.6g}", flush=True)


if __name__ == "__main__":
    main()
