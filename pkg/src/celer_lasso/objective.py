"""Primal and dual Lasso objectives, duality gap and dual point construction.

The primal is ``P(beta) = 0.5 * ||y - X beta||^2 + lam * ||beta||_1`` and the
(rescaled) dual is ``D(theta) = 0.5 * ||y||^2 - 0.5 * lam^2 * ||theta - y/lam||^2``
over the set ``{theta : ||X^T theta||_inf <= 1}``.
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np

# Slack on ||X^T theta||_inf when certifying feasibility.
FEASIBILITY_TOL = 1e-12


@dataclass(frozen=True)
class DualPoint:
    """A dual vector and whether it is certified feasible.

    ``xt_theta`` optionally caches ``X^T theta`` for the full design so that
    screening and working-set scores need not recompute it.
    """

    theta: np.ndarray
    feasible: bool
    xt_theta: Optional[np.ndarray] = None

    @classmethod
    def certify(cls, X, theta):
        """Check ``||X^T theta||_inf <= 1 + FEASIBILITY_TOL`` and wrap."""
        theta = np.asarray(theta, dtype=np.float64)
        corr = X.rmatvec(theta)
        ok = bool(np.max(np.abs(corr), initial=0.0) <= 1.0 + FEASIBILITY_TOL)
        return cls(theta, ok, corr)


def soft_threshold(x, u):
    """``sign(x) * max(0, |x| - u)``, entry-wise on arrays."""
    if u < 0:
        raise ValueError("threshold must be nonnegative")
    return np.sign(x) * np.maximum(np.abs(x) - u, 0.0)


def _check_beta(prob, beta):
    beta = np.asarray(beta, dtype=np.float64)
    if beta.shape != (prob.n_features,):
        raise ValueError(f"beta has shape {beta.shape}, expected ({prob.n_features},)")
    return beta


def _theta_vec(prob, theta):
    vec = theta.theta if isinstance(theta, DualPoint) else np.asarray(theta, dtype=np.float64)
    if vec.shape != (prob.n_samples,):
        raise ValueError(f"theta has shape {vec.shape}, expected ({prob.n_samples},)")
    return vec


def primal_value(prob, beta, residual=None):
    """Lasso primal objective. ``residual`` may pass a known ``y - X beta``."""
    beta = _check_beta(prob, beta)
    if residual is None:
        residual = prob.y - prob.X.matvec(beta)
    return 0.5 * float(residual @ residual) + prob.lam * float(np.abs(beta).sum())


def dual_value(prob, theta):
    """Lasso dual objective; accepts a DualPoint or a raw vector."""
    vec = _theta_vec(prob, theta)
    lam, y = prob.lam, prob.y
    diff = vec - y / lam
    return 0.5 * float(y @ y) - 0.5 * lam ** 2 * float(diff @ diff)


def duality_gap(prob, beta, theta, residual=None):
    """``P(beta) - D(theta)``. Raises if ``theta`` is not certified feasible."""
    if not isinstance(theta, DualPoint) or not theta.feasible:
        raise ValueError("duality gap requires a certified feasible dual point")
    return primal_value(prob, beta, residual) - dual_value(prob, theta)


def lambda_max(X, y):
    """Smallest penalty for which the zero vector solves the Lasso."""
    return float(np.max(np.abs(X.rmatvec(y)), initial=0.0))


def rescale_residual(prob, r):
    """Feasible dual point ``r / max(lam, ||X^T r||_inf)``."""
    r = np.asarray(r, dtype=np.float64)
    if r.shape != (prob.n_samples,):
        raise ValueError(f"residual has shape {r.shape}, expected ({prob.n_samples},)")
    corr = prob.X.rmatvec(r)
    scale = max(prob.lam, float(np.max(np.abs(corr), initial=0.0)))
    return DualPoint(r / scale, True, corr / scale)


def support(beta, tol=0.0):
    """Indices of entries with magnitude above ``tol``."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    return np.flatnonzero(np.abs(np.asarray(beta)) > tol)


def equicorrelation(prob, theta_hat, tol=1e-9):
    """Features with ``|x_j^T theta| >= 1 - tol``.

    The result depends on how accurately ``theta_hat`` approximates the dual
    optimum; ``tol`` should exceed that error.
    """
    corr = theta_hat.xt_theta if isinstance(theta_hat, DualPoint) and \
        theta_hat.xt_theta is not None else prob.X.rmatvec(_theta_vec(prob, theta_hat))
    return np.flatnonzero(np.abs(corr) >= 1.0 - tol)
