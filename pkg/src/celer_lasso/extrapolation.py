"""Residual extrapolation for better dual points.

The last ``K + 1`` recorded residuals ``r^{t-K}, ..., r^t`` give ``K``
consecutive differences. Stacking them newest first,

    U = [r^t - r^{t-1}, r^{t-1} - r^{t-2}, ..., r^{t+1-K} - r^{t-K}],

the weights ``c = z / sum(z)`` with ``(U^T U) z = 1`` produce

    r_accel = sum_k c_k r^{t+1-k},

so ``c_1`` weights the newest residual and each weight multiplies the newer
endpoint of its own difference column. This pairing is what makes the
extrapolation exact on noiseless linear recursions.
"""
from collections import deque

import numpy as np
from scipy import linalg

from .objective import dual_value, rescale_residual

EXACT_PASSTHROUGH = "exact-passthrough"
EXTRAPOLATED = "extrapolated"
FALLBACK = "fallback"

# Relative Cholesky pivot below which U^T U is treated as rank deficient.
PIVOT_TOL = 1e-12
# Relative singular value cutoff for the rank-deficient (bordered) solve.
BORDERED_RCOND = 1e-10
SUM_TOL = 1e-10


class ResidualHistory:
    """Ring buffer of the ``K + 1`` most recent residuals, oldest first.

    Residuals are copied on push so later in-place updates by a solver do
    not leak into the history.
    """

    def __init__(self, n_samples, K=5):
        if K < 1:
            raise ValueError("K must be >= 1")
        self.K = K
        self.n_samples = n_samples
        self.buffer = deque(maxlen=K + 1)
        self.count = 0

    def __len__(self):
        return len(self.buffer)

    def push(self, r):
        r = np.array(r, dtype=np.float64)
        if r.shape != (self.n_samples,):
            raise ValueError(f"residual has shape {r.shape}, expected ({self.n_samples},)")
        self.buffer.append(r)
        self.count += 1
        return self

    @property
    def newest(self):
        if not self.buffer:
            raise ValueError("empty residual history")
        return self.buffer[-1]


def push_residual(hist, r):
    return hist.push(r)


class ExtrapolationCoefficients:
    """Weights ``c`` (newest first) and the raw system solution ``z``.

    In the rank-deficient branch ``z`` is not defined by the normal
    equations; it is set equal to ``c``.
    """

    def __init__(self, c, z):
        self.c = c
        self.z = z

    def __repr__(self):
        return f"ExtrapolationCoefficients(c={self.c!r})"


def extrapolation_coefficients(U):
    """Solve for the affine weights; return None when no weights exist.

    Full-rank ``U^T U`` is solved by Cholesky exactly as ``z = G^{-1} 1``.
    When a pivot is tiny relative to ``trace(G) / K`` the difference
    vectors are (numerically) linearly dependent; this is the situation of
    an exactly linear recursion of low order, where any ``c`` with
    ``U c = 0`` and ``sum(c) = 1`` recovers the limit. Those weights are
    found from the bordered system ``[[G, 1], [1^T, 0]]`` by minimum-norm
    least squares. A zero ``U`` or a failed normalization returns None.
    """
    K = U.shape[1]
    G = U.T @ U
    scale = np.trace(G) / K
    if not np.isfinite(scale) or scale <= 0.0:
        return None
    Gs = G / scale
    ones = np.ones(K)
    try:
        L = linalg.cholesky(Gs, lower=True)
        full_rank = np.min(np.diag(L)) ** 2 >= PIVOT_TOL
    except linalg.LinAlgError:
        full_rank = False
    if full_rank:
        z = linalg.cho_solve((L, True), ones)
        s = z.sum()
        if not np.isfinite(s) or s == 0.0:
            return None
        return ExtrapolationCoefficients(z / s, z)

    M = np.zeros((K + 1, K + 1))
    M[:K, :K] = Gs
    M[:K, K] = 1.0
    M[K, :K] = 1.0
    rhs = np.zeros(K + 1)
    rhs[K] = 1.0
    sol = np.linalg.lstsq(M, rhs, rcond=BORDERED_RCOND)[0]
    c = sol[:K]
    if not np.all(np.isfinite(c)) or abs(c.sum() - 1.0) > SUM_TOL:
        return None
    return ExtrapolationCoefficients(c, c.copy())


def extrapolate_residual(hist):
    """Return ``(r_accel, status)`` from the buffered residuals.

    With ``count <= K`` the newest residual is returned unchanged
    (``"exact-passthrough"``). Otherwise the weights are computed from the
    ``K`` differences; if that fails the newest residual is returned with
    status ``"fallback"``.
    """
    if hist.count == 0:
        raise ValueError("empty residual history")
    newest = hist.buffer[-1]
    if hist.count <= hist.K:
        return newest.copy(), EXACT_PASSTHROUGH
    R = np.column_stack(list(hist.buffer)[::-1])  # newest first, K + 1 columns
    U = R[:, :-1] - R[:, 1:]
    coefs = extrapolation_coefficients(U)
    if coefs is None:
        return newest.copy(), FALLBACK
    return R[:, :-1] @ coefs.c, EXTRAPOLATED


def accel_dual_point(prob, hist):
    """Rescale the extrapolated residual into a feasible dual point."""
    r_accel, _ = extrapolate_residual(hist)
    return rescale_residual(prob, r_accel)


def select_best_dual(prob, candidates):
    """Candidate with the largest dual objective; earlier wins ties."""
    best, best_val = None, -np.inf
    for theta in candidates:
        if theta is None:
            continue
        if not theta.feasible:
            raise ValueError("candidate dual point is not certified feasible")
        val = dual_value(prob, theta)
        if best is None or val > best_val:
            best, best_val = theta, val
    if best is None:
        raise ValueError("no candidate dual points")
    return best
