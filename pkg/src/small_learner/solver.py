"""Mirror-Prox training of SMaLL models.

Each iteration takes a projected gradient half-step from (eps, S), then an
extragradient step from the same point using gradients at the half-step.
The half-step iterates are averaged (weighted by step size), the averaged
mask is rounded to its k largest entries per row, and the prototypes are
recovered in closed form from the averaged duals.

In ``consistent`` mode the steps are taken on m * phi rather than phi.
Scaling the objective does not move its saddle points, and at this scale
the step sizes mean the same thing as in the ``paper`` mode, where the
unscaled gradients already carry it.
"""

from __future__ import annotations

import dataclasses
import logging
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset, Standardizer
from .losses import primal_objective, smoothed_loss_grad, u_conjugate_columns
from .model import TrainedModel
from .projections import project_duals, project_mask
from .saddle import (
    GRADIENT_MODES,
    SaddleProblem,
    aggregate_M,
    grad_duals,
    grad_eps,
    phi_value,
    recover_W,
)

log = logging.getLogger(__name__)

NAN_CHECK_EVERY = 50
FEASIBILITY_TOL = 1e-9


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    lam: float = 0.1
    k: int = 3
    p: int = 2
    alpha: float = 0.01
    beta: float = 0.001
    iters: int = 2000
    tol: float = 1e-10
    seed: int = 0
    gradient_mode: str = "consistent"
    refit: bool = False
    refit_iters: int = 500
    refit_tol: float = 1e-9
    checkpoint_every: int = 0  # 0: final checkpoint only
    trace_gap: bool = False
    restarts: int = 1  # clusterings tried; the lowest final objective wins
    reassign: int = 0  # rounds of moving positives to their best prototype and re-solving

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("lambda must be positive")
        if not (self.alpha > 0 and self.beta > 0):
            raise ValueError("step sizes must be positive")
        if self.iters < 0:
            raise ValueError("iteration count must be non-negative")
        if self.restarts < 1:
            raise ValueError("restarts must be at least 1")
        if self.reassign < 0:
            raise ValueError("reassign must be non-negative")
        if self.k < 1 or self.p < 1:
            raise ValueError("k and p must be at least 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.gradient_mode not in GRADIENT_MODES:
            raise ValueError(f"gradient_mode must be one of {GRADIENT_MODES}")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class Checkpoint:
    iteration: int
    objective: float
    gap: float
    eps_step: float
    dual_step: float


@dataclass
class SolverTrace:
    checkpoints: list[Checkpoint] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    seconds: float = 0.0

    def add(self, cp: Checkpoint):
        if self.checkpoints and cp.iteration <= self.checkpoints[-1].iteration:
            raise ValueError("checkpoint iterations must increase")
        self.checkpoints.append(cp)

    def to_tsv(self) -> str:
        lines = ["iteration\tobjective\tgap\teps_step\tdual_step"]
        for c in self.checkpoints:
            lines.append(f"{c.iteration}\t{c.objective!r}\t{c.gap!r}\t{c.eps_step!r}\t{c.dual_step!r}")
        return "\n".join(lines) + "\n"


def kmeans_assign(X: np.ndarray, p: int, seed, max_iter: int = 50) -> np.ndarray:
    """Lloyd's algorithm from a seeded farthest-point start; returns labels in [0, p)."""
    m = X.shape[0]
    if p == 1:
        return np.zeros(m, dtype=int)
    rng = np.random.default_rng(seed)
    centers = [X[rng.integers(m)]]
    d2 = np.sum((X - centers[0]) ** 2, axis=1)
    for _ in range(1, p):
        centers.append(X[int(np.argmax(d2))])
        d2 = np.minimum(d2, np.sum((X - centers[-1]) ** 2, axis=1))
    C = np.array(centers)
    labels = None
    for _ in range(max_iter):
        dist = ((X[:, None, :] - C[None, :, :]) ** 2).sum(axis=2)
        new = np.argmin(dist, axis=1)
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        for j in range(p):
            members = X[labels == j]
            if len(members):
                C[j] = members.mean(axis=0)
    return labels


def init_state(d: Dataset, cfg: SolverConfig, notes: list | None = None, restart: int = 0,
               assign=None):
    """Initial (eps0, S0, assign).

    Positives are clustered into p groups, each owning one prototype. The
    mask starts uniform at min(1, k/n); positive duals start at -1/2 on
    their own prototype and negative duals at -1/(2p) everywhere.
    Restart r > 0 seeds the clustering with (seed, r). A given ``assign``
    replaces the clustering.
    """
    pos = d.positives
    if pos.size == 0:
        raise ValueError("training data has no positive examples")
    if d.negatives.size == 0:
        raise ValueError("training data has no negative examples")
    p = cfg.p
    if p > pos.size:
        msg = f"p={p} exceeds the {pos.size} positive examples; using p={pos.size}"
        warnings.warn(msg, stacklevel=2)
        if notes is not None:
            notes.append(msg)
        p = pos.size
    if cfg.k > d.n:
        raise ValueError(f"k={cfg.k} exceeds n={d.n}")

    if assign is None:
        assign = np.full(d.m, -1, dtype=int)
        assign[pos] = kmeans_assign(d.features[pos], p, cfg.seed if restart == 0 else [cfg.seed, restart])
    else:
        assign = np.asarray(assign, dtype=int)
        if assign.shape != (d.m,) or np.any((assign >= 0) != (d.labels > 0)) or assign.max() >= p:
            raise ValueError("assignment must give each positive a prototype in [0, p) and negatives -1")

    eps0 = np.full((p, d.n), min(1.0, cfg.k / d.n))
    S0 = np.zeros((p, d.m))
    S0[assign[pos], pos] = -0.5
    S0[:, d.negatives] = -1.0 / (2 * p)
    return eps0, S0, assign


def round_mask(eps_bar, k: int) -> np.ndarray:
    """Set the k largest entries of each row to 1 (earlier column wins ties)."""
    eps_bar = np.asarray(eps_bar, dtype=float)
    out = np.zeros_like(eps_bar)
    kk = min(k, eps_bar.shape[1])
    order = np.argsort(-eps_bar, axis=1, kind="stable")[:, :kk]
    np.put_along_axis(out, order, 1.0, axis=1)
    return out


def minimize_over_mask(C, k: int) -> np.ndarray:
    """argmin of <C, eps> over eps in [0,1]^{p x n} with row sums <= k."""
    C = np.asarray(C, dtype=float)
    out = np.zeros_like(C)
    kk = min(k, C.shape[1])
    order = np.argsort(C, axis=1, kind="stable")[:, :kk]
    picked = np.take_along_axis(C, order, axis=1) < 0
    np.put_along_axis(out, order, picked.astype(float), axis=1)
    return out


def _phi_constant(S, prob: SaddleProblem) -> float:
    total = float(u_conjugate_columns(S).sum())
    return -total / prob.m if prob.gradient_mode == "consistent" else -total


def estimate_gap(eps, S, prob: SaddleProblem, ascent_steps: int = 100) -> float:
    """max_S' phi(eps, S') (approximated by projected ascent from S) minus
    min_eps' phi(eps', S) (exact: phi is linear in eps)."""
    C = grad_eps(eps, S, prob)
    phi_min = float(np.sum(C * minimize_over_mask(C, prob.k))) + _phi_constant(S, prob)

    cur = np.array(S, dtype=float)
    f_cur = phi_value(eps, cur, prob)
    best = f_cur
    step = float(prob.m) if prob.gradient_mode == "consistent" else 1.0
    for _ in range(ascent_steps):
        g = grad_duals(eps, cur, prob)
        for _ in range(60):
            cand = project_duals(cur + step * g, prob.assign)
            f_cand = phi_value(eps, cand, prob)
            d = cand - cur
            if np.isfinite(f_cand) and f_cand >= f_cur + np.sum(g * d) - np.sum(d * d) / (2 * step):
                break
            step *= 0.5
        else:
            break
        if np.all(d == 0):
            break
        cur, f_cur = cand, f_cand
        best = max(best, f_cur)
        step *= 2.0
    return best - phi_min


def refit_support(W0, mask, d: Dataset, assign, lam: float, iters: int = 500, tol: float = 1e-9):
    """Gradient descent on the smoothed objective with W fixed to 0 off ``mask``."""
    mask = np.asarray(mask, dtype=bool)
    W = np.where(mask, np.asarray(W0, dtype=float), 0.0)
    # curvature bound of (1/m) h~ + lam/2 ||W||^2
    L = np.linalg.norm(d.features, 2) ** 2 / d.m + lam
    step = 1.0 / L
    f = primal_objective(W, d, assign, lam)
    for _ in range(iters):
        G = smoothed_loss_grad(W, d, assign) / d.m + lam * W
        W_new = np.where(mask, W - step * G, 0.0)
        f_new = primal_objective(W_new, d, assign, lam)
        W = W_new
        if abs(f - f_new) < tol:
            f = f_new
            break
        f = f_new
    return W


def _check_finite(t, **blocks):
    bad = [name for name, arr in blocks.items() if not np.all(np.isfinite(arr))]
    if bad:
        raise SolverError(f"non-finite values in {', '.join(bad)} at iteration {t}")


def _check_feasible(eps, S, prob: SaddleProblem, tol: float, t):
    if eps.min() < -FEASIBILITY_TOL or eps.max() > 1 + FEASIBILITY_TOL:
        raise SolverError(f"mask left [0, 1] at iteration {t}")
    if eps.sum(axis=1).max() > prob.k + tol + FEASIBILITY_TOL:
        raise SolverError(f"mask row exceeds budget {prob.k} at iteration {t}")
    if S.max() > FEASIBILITY_TOL or S.sum(axis=0).min() < -1 - FEASIBILITY_TOL:
        raise SolverError(f"dual left its feasible set at iteration {t}")
    pos = prob.assign >= 0
    off = np.ones_like(S, dtype=bool)
    off[prob.assign[pos], np.flatnonzero(pos)] = False
    off[:, ~pos] = False
    if np.any(S[off] != 0) or np.any(S[prob.assign[pos], np.flatnonzero(pos)] < -1 - FEASIBILITY_TOL):
        raise SolverError(f"positive-example dual left its feasible set at iteration {t}")


def _finish(eps_bar, S_bar, prob: SaddleProblem, cfg: SolverConfig):
    eps_hat = round_mask(eps_bar, prob.k)
    W = recover_W(eps_hat, S_bar, prob)
    if cfg.refit:
        W = refit_support(W, eps_hat, prob.data, prob.assign, prob.lam, cfg.refit_iters, cfg.refit_tol)
    return eps_hat, W


def mirror_prox(d: Dataset, cfg: SolverConfig, trace: SolverTrace | None = None, restart: int = 0,
                assign=None):
    """Run the iterations and return the step-weighted averages (eps_bar, S_bar)
    together with the SaddleProblem they solve.

    Averages cover iterations 1..T; with T = 0 the single half-step is used.
    """
    notes = trace.warnings if trace is not None else []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        eps, S, assign = init_state(d, cfg, notes, restart, assign)
    for w in notes:
        warnings.warn(w, stacklevel=3)
    prob = SaddleProblem(d, assign, cfg.lam, cfg.k, cfg.gradient_mode)
    scale = float(d.m) if cfg.gradient_mode == "consistent" else 1.0
    alpha, beta, tol, k = cfg.alpha, cfg.beta, cfg.tol, cfg.k

    eps_sum = np.zeros_like(eps)
    S_sum = np.zeros_like(S)
    a_sum = b_sum = 0.0
    eps_bar, S_bar = eps, S
    for t in range(cfg.iters + 1):
        M = aggregate_M(S, d)
        ge = scale * grad_eps(eps, S, prob, M)
        gs = scale * grad_duals(eps, S, prob, M)
        eps_h = project_mask(eps - alpha * ge, k, tol)
        S_h = project_duals(S + beta * gs, assign, tol)

        M_h = aggregate_M(S_h, d)
        ge = scale * grad_eps(eps_h, S_h, prob, M_h)
        gs = scale * grad_duals(eps_h, S_h, prob, M_h)
        eps_new = project_mask(eps - alpha * ge, k, tol)
        S_new = project_duals(S + beta * gs, assign, tol)

        if t >= 1:
            eps_sum += alpha * eps_h
            S_sum += beta * S_h
            a_sum += alpha
            b_sum += beta
            eps_bar, S_bar = eps_sum / a_sum, S_sum / b_sum
        elif cfg.iters == 0:
            eps_bar, S_bar = eps_h, S_h

        if t % NAN_CHECK_EVERY == 0 or t == cfg.iters:
            _check_finite(t, mask=eps_new, duals=S_new)
        if trace is not None and (
            t == cfg.iters or (cfg.checkpoint_every and t > 0 and t % cfg.checkpoint_every == 0)
        ):
            _check_feasible(eps_new, S_new, prob, tol, t)
            _, W_t = _finish(eps_bar, S_bar, prob, dataclasses.replace(cfg, refit=False))
            gap = estimate_gap(eps_bar, S_bar, prob) if cfg.trace_gap else float("nan")
            trace.add(Checkpoint(
                t, primal_objective(W_t, d, assign, cfg.lam), gap,
                float(np.linalg.norm(eps_new - eps)), float(np.linalg.norm(S_new - S)),
            ))
            log.debug("iter %d objective %.6g gap %.3g", t, trace.checkpoints[-1].objective, gap)
        eps, S = eps_new, S_new
    return eps_bar, S_bar, prob


def train(d: Dataset, cfg: SolverConfig, standardizer: Standardizer | None = None):
    """Train a SMaLL model; return (TrainedModel, SolverTrace).

    ``d`` should already be standardized. ``standardizer`` is stored in the
    model so that raw inputs can be scored later (identity if omitted).
    """
    started = time.perf_counter()
    best = None
    for r in range(cfg.restarts):
        assign = None
        for rnd in range(cfg.reassign + 1):
            trace_r = SolverTrace()
            eps_bar, S_bar, prob = mirror_prox(d, cfg, trace_r, r, assign)
            _, W_r = _finish(eps_bar, S_bar, prob, cfg)
            _check_finite(cfg.iters, prototypes=W_r)
            obj = primal_objective(W_r, d, prob.assign, cfg.lam)
            if best is None or obj < best[0]:
                best = (obj, W_r, prob, trace_r, r, rnd)
            # each positive moves to the prototype that scores it highest,
            # which lowers its loss for the current W
            assign = prob.assign.copy()
            pos = d.positives
            assign[pos] = np.argmax(d.features[pos] @ W_r.T, axis=1)
            if np.array_equal(assign, prob.assign):
                break
    _, W, prob, trace, chosen, rounds = best
    trace.seconds = time.perf_counter() - started
    if standardizer is None:
        standardizer = Standardizer.identity(d.n)
    model = TrainedModel(
        W, standardizer, d.feature_names, cfg.k, cfg.lam,
        config=cfg.to_dict(),
        metadata={
            "seed": cfg.seed,
            "iterations": cfg.iters,
            "p_effective": int(W.shape[0]),
            "objective": best[0],
            "restart": chosen,
            "reassign_round": rounds,
            "warnings": list(trace.warnings),
        },
    )
    return model, trace
