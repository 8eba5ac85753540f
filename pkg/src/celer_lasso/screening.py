"""Gap Safe screening.

For a feasible dual point ``theta`` and any ``beta``, feature ``j`` can be
discarded when

    d_j(theta) = (1 - |x_j^T theta|) / ||x_j||  >  sqrt(2 * gap) / lam.
"""
from dataclasses import dataclass

import numpy as np

from .objective import DualPoint, duality_gap

GAP_ROUNDING = 1e-14


@dataclass
class ScreeningMask:
    screened: np.ndarray

    @classmethod
    def empty(cls, n_features):
        return cls(np.zeros(n_features, dtype=bool))

    @property
    def n_screened(self):
        return int(self.screened.sum())


def _xt_theta(prob, theta):
    if not isinstance(theta, DualPoint) or not theta.feasible:
        raise ValueError("screening requires a certified feasible dual point")
    corr = theta.xt_theta
    if corr is None or corr.shape != (prob.n_features,):
        corr = prob.X.rmatvec(theta.theta)
    return corr


def feature_scores(prob, theta, subset=None):
    """``d_j(theta)`` for ``j`` in ``subset`` (all features by default)."""
    corr = _xt_theta(prob, theta)
    norms = prob.X.col_norms
    if subset is not None:
        subset = np.asarray(subset, dtype=np.int64)
        corr, norms = corr[subset], norms[subset]
    if np.any(norms == 0):
        raise ValueError("feature scores undefined for zero-norm columns")
    return (1.0 - np.abs(corr)) / norms


def gap_safe_radius(prob, gap):
    """``sqrt(2 * gap) / lam``, with the gap floored at rounding level.

    Near the optimum the computed gap can round to zero or below while
    support features sit at ``|x_j^T theta| = 1 - 1e-16``; a zero radius
    would then discard them. The floor is relative to ``P(0) = ||y||^2 / 2``.
    """
    floor = GAP_ROUNDING * 0.5 * float(prob.y @ prob.y)
    return np.sqrt(2.0 * (max(gap, 0.0) + floor)) / prob.lam


def gap_safe_screen(prob, beta, theta, mask, gap=None):
    """Return a new mask with every feature passing the Gap Safe test added.

    Already screened features stay screened. Zero-norm columns always pass
    the test (``x_j^T theta = 0``).
    """
    corr = _xt_theta(prob, theta)
    if gap is None:
        gap = duality_gap(prob, beta, theta)
    radius = gap_safe_radius(prob, gap)
    norms = prob.X.col_norms
    out = mask.screened.copy()
    nz = norms > 0
    scores = np.full(prob.n_features, np.inf)
    scores[nz] = (1.0 - np.abs(corr[nz])) / norms[nz]
    out |= scores > radius
    return ScreeningMask(out)
