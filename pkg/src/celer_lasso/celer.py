"""Working-set outer loop with extrapolated dual points, and the path driver.

Each outer iteration picks the best dual point among the previous one, the
inner solver's extrapolated point and the rescaled residual, ranks features
by ``d_j(theta)`` and solves the Lasso restricted to the ``p_t`` best
features. Features in the current support (or the previous working set
without pruning) are always kept.
"""
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .dataset import LassoProblem
from .extrapolation import select_best_dual
from .objective import DualPoint, dual_value, lambda_max, primal_value, rescale_residual, support
from .screening import gap_safe_radius
from .solvers import GAP_MET, MAX_EPOCHS, SolverConfig, SolverResult, solve_inner

PRUNE = "prune"
DOUBLING = "doubling"
GEOMETRIC = "geometric"
LINEAR = "linear"

STALL_RATIO = 0.9


@dataclass(frozen=True)
class GrowthPolicy:
    kind: str = PRUNE
    gamma: float = 2.0

    def __post_init__(self):
        if self.kind not in (PRUNE, DOUBLING, GEOMETRIC, LINEAR):
            raise ValueError(f"unknown growth policy {self.kind!r}")
        if self.kind == GEOMETRIC and not self.gamma > 1:
            raise ValueError("geometric growth needs gamma > 1")
        if self.kind == LINEAR and not self.gamma >= 1:
            raise ValueError("linear growth needs gamma >= 1")

    @classmethod
    def parse(cls, text):
        """``prune``, ``doubling``, ``geometric:4`` or ``linear:10``."""
        kind, _, arg = text.partition(":")
        if arg:
            return cls(kind, float(arg))
        if kind == LINEAR:
            return cls(kind, 10.0)
        return cls(kind)

    @property
    def uses_support(self):
        """Whether sizes and forced features come from the current support."""
        return self.kind != DOUBLING

    def __str__(self):
        if self.kind in (GEOMETRIC, LINEAR):
            return f"{self.kind}:{self.gamma:g}"
        return self.kind


@dataclass
class CelerConfig:
    eps: float = 1e-6
    p_init: int = 100
    eps_inner_frac: float = 0.3
    max_outer: int = 100
    prune: bool = True
    growth: Optional[GrowthPolicy] = None
    screen_ws: bool = False
    inner: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        if not 0 < self.eps_inner_frac < 1:
            raise ValueError("eps_inner_frac must be in (0, 1)")
        if self.p_init < 1:
            raise ValueError("p_init must be >= 1")
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if self.growth is None:
            self.growth = GrowthPolicy(PRUNE if self.prune else DOUBLING)
        self.prune = self.growth.uses_support


@dataclass
class OuterRecord:
    t: int
    gap: float
    p_t: int
    support_size: int
    inner_epochs: int
    coord_updates_cumulative: int
    n_screened: int
    working_set: Optional[np.ndarray] = field(default=None, repr=False)

    CSV_FIELDS = ("t", "g_t", "p_t", "support_size", "inner_epochs",
                  "coord_updates_cumulative")


@dataclass
class CelerResult(SolverResult):
    outer_trace: list = field(default_factory=list)
    n_stall_rerank: int = 0  # outer iterations ranked by the rescaled residual


def _scores(X, theta, usable):
    corr = theta.xt_theta if theta.xt_theta is not None else X.rmatvec(theta.theta)
    out = np.full(X.shape[1], np.inf)
    out[usable] = (1.0 - np.abs(corr[usable])) / X.col_norms[usable]
    return out


def build_working_set(scores, forced, p_t):
    """Indices of the ``p_t`` smallest scores after forcing ``forced`` to -1.

    Ties go to the smaller index. Returned in ascending order.
    """
    scores = np.array(scores, dtype=np.float64)
    forced = np.asarray(sorted(set(int(j) for j in forced)), dtype=np.int64)
    if p_t < forced.size:
        raise ValueError(f"p_t={p_t} smaller than the {forced.size} forced features")
    p_t = min(int(p_t), scores.size)
    scores[forced] = -1.0
    order = np.argsort(scores, kind="stable")
    return np.sort(order[:p_t])


def next_ws_size(policy, prev_size, support_size, p):
    """Working-set size for the next outer iteration.

    Support-based policies keep ``prev_size`` when the support is empty,
    since shrinking to zero would stall.
    """
    if policy.kind == DOUBLING:
        return min(2 * prev_size, p)
    if support_size == 0:
        return min(prev_size, p)
    if policy.kind == PRUNE:
        return min(2 * support_size, p)
    if policy.kind == GEOMETRIC:
        return min(math.ceil(policy.gamma * support_size), p)
    return min(support_size + int(math.ceil(policy.gamma)), p)


def celer_solve(prob, beta0=None, cfg=None):
    """Working-set Lasso solver certified by the duality gap."""
    cfg = cfg or CelerConfig()
    X, y, lam = prob.X, prob.y, prob.lam
    p = prob.n_features
    beta = np.zeros(p) if beta0 is None else np.array(beta0, dtype=np.float64)
    if beta.shape != (p,):
        raise ValueError("beta0 must have length n_features")

    lmax = lambda_max(X, y)
    if lmax == 0.0:
        theta0 = DualPoint(np.zeros(prob.n_samples), True, np.zeros(p))
    else:
        theta0 = DualPoint(y / lmax, True, X.rmatvec(y) / lmax)
    theta_prev = theta_inner = theta0

    S0 = support(beta)
    p_t = S0.size if S0.size else cfg.p_init
    p_t = max(1, min(p_t, p))
    eps_floor = 0.1 * np.finfo(float).eps * primal_value(prob, beta)
    ws = np.zeros(0, dtype=np.int64)
    screened = np.zeros(p, dtype=bool)
    usable = X.col_sq_norms > 0
    outer = []
    coord_updates = 0
    inner_epochs = 0
    stop_reason = MAX_EPOCHS
    theta, gap = theta0, np.inf
    one_epoch = False
    prev_gap = np.inf
    n_stall_rerank = 0

    for t in range(1, cfg.max_outer + 1):
        r = y - X.matvec(beta)
        theta_res = rescale_residual(prob, r)
        theta = select_best_dual(prob, [theta_prev, theta_inner, theta_res])
        theta_prev = theta
        gap = primal_value(prob, beta, r) - dual_value(prob, theta)
        S = support(beta)
        if gap <= cfg.eps:
            outer.append(OuterRecord(t, gap, ws.size, S.size, 0, coord_updates,
                                     int(screened.sum()), ws))
            stop_reason = GAP_MET
            break

        # A subproblem solved at its warm start followed by a gap that barely
        # moved means theta ranks the same features as last time, and the
        # same set would be rebuilt forever. Rank by the fresh residual then.
        stalled = one_epoch and gap > STALL_RATIO * prev_gap
        prev_gap = gap
        rank = theta_res if stalled else theta
        n_stall_rerank += int(stalled)

        screened |= _scores(X, theta, usable) > gap_safe_radius(prob, gap)
        scores = _scores(X, rank, usable)
        if cfg.screen_ws:
            scores[screened] = np.inf

        if cfg.prune:
            eps_t = max(cfg.eps_inner_frac * gap, eps_floor)
            forced = S
        else:
            eps_t = cfg.eps
            forced = ws
        if t >= 2:
            p_t = next_ws_size(cfg.growth, ws.size, S.size, p)
        p_t = max(p_t, forced.size)
        ws = build_working_set(scores, forced, p_t)

        sub = prob.restrict(ws)
        inner_cfg = replace(cfg.inner, eps=eps_t)
        res = solve_inner(sub, beta[ws], inner_cfg, algorithm="cd")
        coord_updates += res.coord_updates
        inner_epochs += res.epochs
        one_epoch = res.epochs == 1
        beta = np.zeros(p)
        beta[ws] = res.beta

        th = res.theta.theta
        corr_full = X.rmatvec(th)
        scale = max(1.0, float(np.max(np.abs(corr_full), initial=0.0)))
        theta_inner = DualPoint(th / scale, True, corr_full / scale)

        outer.append(OuterRecord(t, gap, ws.size, int((res.beta != 0).sum()),
                                 res.epochs, coord_updates, int(screened.sum()), ws))

    result = CelerResult(
        beta=beta,
        theta=theta,
        gap=gap,
        epochs=inner_epochs,
        coord_updates=coord_updates,
        stop_reason=stop_reason,
        trace=[],
        screened=screened,
        outer_trace=outer,
        n_stall_rerank=n_stall_rerank,
    )
    if stop_reason != GAP_MET:
        # Certify the last inner solution too before giving up.
        r = y - X.matvec(beta)
        theta = select_best_dual(prob, [theta_prev, theta_inner, rescale_residual(prob, r)])
        result.theta = theta
        result.gap = primal_value(prob, beta, r) - dual_value(prob, theta)
        if result.gap <= cfg.eps:
            result.stop_reason = GAP_MET
    return result


# -------------------------------------------------------------------- path


@dataclass
class PathSpec:
    """Explicit decreasing penalties, or a log grid from ``lambda_max``."""

    lambdas: Optional[np.ndarray] = None
    n_points: int = 100
    min_ratio: float = 1e-2

    def grid(self, lmax):
        if self.lambdas is not None:
            lams = np.asarray(self.lambdas, dtype=np.float64)
            if lams.ndim != 1 or lams.size == 0 or np.any(lams <= 0):
                raise ValueError("lambdas must be a nonempty vector of positive values")
            if np.any(np.diff(lams) >= 0):
                raise ValueError("lambdas must be strictly decreasing")
            return lams
        if self.n_points < 1 or not 0 < self.min_ratio <= 1:
            raise ValueError("need n_points >= 1 and min_ratio in (0, 1]")
        if self.n_points == 1:
            return np.array([lmax])
        return np.geomspace(lmax, lmax * self.min_ratio, self.n_points)


@dataclass
class PathResult:
    lambdas: np.ndarray
    results: list
    complete: bool
    failed_at: Optional[int] = None

    def __iter__(self):
        return iter(self.results)

    def __len__(self):
        return len(self.results)

    @property
    def total_coord_updates(self):
        return sum(r.coord_updates for r in self.results)


def lasso_path(X, y, spec, cfg=None, solver="celer", warm_start=True):
    """Solve along a decreasing grid of penalties.

    Each solve starts from the previous solution when ``warm_start`` is set
    (from zero otherwise). A solve that fails to certify stops the path;
    the results so far are returned with ``complete=False``.
    """
    cfg = cfg or CelerConfig()
    lams = spec.grid(lambda_max(X, y))
    beta = np.zeros(X.n_features)
    results = []
    for i, lam in enumerate(lams):
        prob = LassoProblem(X, y, lam)
        start = beta if warm_start else None
        if solver == "celer":
            res = celer_solve(prob, start, cfg)
        elif solver in ("cd", "ista"):
            res = solve_inner(prob, start, replace(cfg.inner, eps=cfg.eps), algorithm=solver)
        else:
            raise ValueError(f"unknown solver {solver!r}")
        results.append(res)
        if not res.converged:
            return PathResult(lams, results, False, i)
        beta = res.beta
    return PathResult(lams, results, True)
