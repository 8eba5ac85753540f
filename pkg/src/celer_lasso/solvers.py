"""Inner Lasso solvers: cyclic coordinate descent and ISTA.

Both solvers build dual points every ``f`` epochs (rescaled residual,
extrapolated residual, and the previous selection), stop on the duality
gap, and can run Gap Safe screening on the fly.
"""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .extrapolation import ResidualHistory, accel_dual_point, select_best_dual
from .objective import DualPoint, dual_value, primal_value, rescale_residual, soft_threshold
from .screening import ScreeningMask, gap_safe_screen

GAP_MET = "gap-met"
MAX_EPOCHS = "max-epochs"


@dataclass
class SolverConfig:
    """Inner solver settings.

    ``stop_on`` picks which gap is compared to ``eps``: the selected one
    (default), or the raw ``"res"`` / ``"accel"`` gaps for experiments that
    need one curve to reach the target. ``monotone=False`` drops the
    previous dual point from the candidate set. ``track_res_screening``
    keeps a shadow mask built from the rescaled residual alone, on the same
    iterates, for comparison.
    """

    eps: float = 1e-6
    max_epochs: int = 100_000
    f: int = 10
    K: int = 5
    use_accel: bool = True
    use_screening: bool = False
    stop_on: str = "selected"
    monotone: bool = True
    track_res_screening: bool = False

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if self.f < 1 or self.K < 1 or self.max_epochs < 1:
            raise ValueError("f, K and max_epochs must be >= 1")
        if self.stop_on not in ("selected", "res", "accel"):
            raise ValueError(f"unknown stop_on {self.stop_on!r}")


@dataclass
class TraceRecord:
    epoch: int
    gap_res: float
    gap_accel: float
    gap_selected: float
    n_screened: int
    n_screened_res: Optional[int] = None
    primal: float = float("nan")

    CSV_FIELDS = ("epoch", "gap_res", "gap_accel", "gap_selected", "n_screened")


@dataclass
class SolverResult:
    beta: np.ndarray
    theta: DualPoint
    gap: float
    epochs: int
    coord_updates: int
    stop_reason: str
    trace: list = field(default_factory=list)
    screened: Optional[np.ndarray] = None
    screened_res: Optional[np.ndarray] = None

    @property
    def converged(self):
        return self.stop_reason == GAP_MET


def cd_epoch(prob, beta, r, active=None):
    """One cyclic CD pass over ``active`` (ascending order), in place.

    ``r`` must equal ``y - X beta`` on entry and is kept in sync. Returns
    the number of coordinate updates performed.
    """
    X = prob.X
    if active is None:
        active = np.arange(prob.n_features)
    active = np.sort(np.asarray(active, dtype=np.int64))
    if active.size and np.any(X.col_sq_norms[active] == 0):
        raise ValueError("zero-norm column in the active set")
    X.cd_epoch(beta, r, prob.lam, active)
    return int(active.size)


def ista_epoch(prob, beta, r, mu, active=None):
    """One proximal gradient step with step ``1/mu``; returns new ``(beta, r)``.

    Coordinates outside ``active`` are held at their current value.
    """
    if not mu > 0:
        raise ValueError("mu must be positive")
    X = prob.X
    step = soft_threshold(beta + X.rmatvec(r) / mu, prob.lam / mu)
    if active is not None:
        new = beta.copy()
        new[active] = step[active]
        step = new
    return step, prob.y - X.matvec(step)


def power_iteration_norm(X, iters=1000, tol=1e-10):
    """Squared spectral norm of ``X``, inflated by 1% for a safe ISTA step."""
    if iters < 1:
        raise ValueError("iters must be >= 1")
    v = np.ones(X.n_features) / np.sqrt(X.n_features)
    est = 0.0
    for _ in range(iters):
        w = X.rmatvec(X.matvec(v))
        new = float(np.linalg.norm(w))
        if new == 0.0:
            return 0.0
        v = w / new
        if abs(new - est) <= tol * new:
            est = new
            break
        est = new
    return 1.01 * est


def solve_inner(prob, beta0=None, cfg=None, algorithm="cd"):
    """Solve the Lasso with cyclic CD or ISTA until the gap reaches ``cfg.eps``.

    Checkpoints fall on epochs 1, 1 + f, 1 + 2f, ... and on the last
    allowed epoch. At each checkpoint the residual is recomputed from
    scratch, recorded into the extrapolation history, and the dual point
    with the best objective among the previous selection, the extrapolated
    point and the rescaled residual is kept.
    """
    cfg = cfg or SolverConfig()
    if algorithm not in ("cd", "ista"):
        raise ValueError(f"unknown algorithm {algorithm!r}")
    X, y, lam = prob.X, prob.y, prob.lam
    p = prob.n_features

    beta = np.zeros(p) if beta0 is None else np.array(beta0, dtype=np.float64)
    if beta.shape != (p,) or not np.all(np.isfinite(beta)):
        raise ValueError("beta0 must be a finite vector of length n_features")
    usable = X.col_sq_norms > 0
    beta[~usable] = 0.0
    r = y - X.matvec(beta)

    mask = ScreeningMask.empty(p)
    mask_res = ScreeningMask.empty(p) if cfg.track_res_screening else None
    active = np.flatnonzero(usable)
    mu = power_iteration_norm(X) if algorithm == "ista" else None
    if algorithm == "ista" and mu == 0.0:
        raise ValueError("design matrix is zero")

    hist = ResidualHistory(prob.n_samples, cfg.K)
    theta_prev = None
    theta = None
    gap = np.inf
    trace = []
    coord_updates = 0
    stop_reason = MAX_EPOCHS
    epoch = 0

    for epoch in range(1, cfg.max_epochs + 1):
        if algorithm == "cd":
            X.cd_epoch(beta, r, lam, active)
        else:
            beta, r = ista_epoch(prob, beta, r, mu, active)
        coord_updates += active.size

        if (epoch - 1) % cfg.f and epoch != cfg.max_epochs:
            continue

        r = y - X.matvec(beta)
        hist.push(r)
        theta_res = rescale_residual(prob, r)
        theta_accel = accel_dual_point(prob, hist) if cfg.use_accel else None
        cands = [theta_prev] if cfg.monotone else []
        cands += [theta_accel, theta_res]
        theta = select_best_dual(prob, cands)
        theta_prev = theta

        P = primal_value(prob, beta, r)
        d_sel = dual_value(prob, theta)
        d_res = dual_value(prob, theta_res)
        d_acc = dual_value(prob, theta_accel) if theta_accel is not None else np.nan
        gap_res = P - d_res

        if mask_res is not None:
            mask_res = gap_safe_screen(prob, beta, theta_res, mask_res, gap=gap_res)
        if cfg.use_screening:
            mask = gap_safe_screen(prob, beta, theta, mask, gap=P - d_sel)
            killed = mask.screened & (beta != 0)
            if killed.any():
                beta[killed] = 0.0
                r = y - X.matvec(beta)
                P = primal_value(prob, beta, r)
                gap_res = P - d_res
            active = np.flatnonzero(usable & ~mask.screened)

        gap = P - d_sel
        trace.append(TraceRecord(
            epoch=epoch,
            gap_res=gap_res,
            gap_accel=P - d_acc,
            gap_selected=gap,
            n_screened=mask.n_screened,
            n_screened_res=None if mask_res is None else mask_res.n_screened,
            primal=P,
        ))
        watched = {"selected": gap, "res": gap_res, "accel": P - d_acc}[cfg.stop_on]
        if watched <= cfg.eps:
            stop_reason = GAP_MET
            break

    return SolverResult(
        beta=beta,
        theta=theta,
        gap=gap,
        epochs=epoch,
        coord_updates=int(coord_updates),
        stop_reason=stop_reason,
        trace=trace,
        screened=mask.screened,
        screened_res=None if mask_res is None else mask_res.screened,
    )


def ista_iterates(prob, n_epochs, beta0=None, mu=None):
    """Plain ISTA iterates ``beta^0, ..., beta^n_epochs`` as rows, plus ``mu``."""
    mu = power_iteration_norm(prob.X) if mu is None else mu
    beta = np.zeros(prob.n_features) if beta0 is None else np.array(beta0, dtype=np.float64)
    r = prob.y - prob.X.matvec(beta)
    out = [beta]
    for _ in range(n_epochs):
        beta, r = ista_epoch(prob, beta, r, mu)
        out.append(beta)
    return np.array(out), mu


def var_check(prob, iterates, mu):
    """Largest deviation of an ISTA window from its affine recursion.

    Once signs are identified, ISTA restricted to the support ``S`` is
    ``beta_S <- A beta_S + b`` with ``A = I - X_S^T X_S / mu`` and
    ``b = X_S^T y / mu - (lam / mu) sign(beta_S)``. Returns the max over the
    window of ``||beta^{t+1}_S - (A beta^t_S + b)||_inf``.
    """
    iterates = np.asarray(iterates, dtype=np.float64)
    if iterates.ndim != 2 or iterates.shape[0] < 2:
        raise ValueError("need at least two iterates")
    signs = np.sign(iterates[0])
    if np.any(np.sign(iterates) != signs):
        raise ValueError("sign pattern changes inside the window")
    S = np.flatnonzero(signs)
    XS = np.column_stack([prob.X.column(j) for j in S]) if S.size else \
        np.zeros((prob.n_samples, 0))
    A = np.eye(S.size) - XS.T @ XS / mu
    b = XS.T @ prob.y / mu - prob.lam / mu * signs[S]
    B = iterates[:, S]
    pred = B[:-1] @ A.T + b
    if S.size == 0:
        return 0.0
    return float(np.max(np.abs(B[1:] - pred)))
