"""Dykstra's alternating projections on the Lasso dual.

The dual optimum is the projection of ``y / lam`` onto the intersection of
the slabs ``C_j = {theta : |x_j^T theta| <= 1}``. Cyclic Dykstra over those
slabs produces, after the change of variables ``r = lam * theta`` and
``q_j = x_j beta_j / lam``, exactly the residuals of cyclic coordinate
descent. This module keeps an independent implementation in the dual
variables so the two can be compared.
"""
from dataclasses import dataclass

import numpy as np

from .extrapolation import ResidualHistory, extrapolate_residual
from .objective import dual_value, rescale_residual, soft_threshold


def slab_project(x, theta):
    """Project ``theta`` onto ``{v : -1 <= x^T v <= 1}``."""
    x = np.asarray(x, dtype=np.float64)
    sq = float(x @ x)
    if sq == 0.0:
        raise ValueError("slab normal must be nonzero")
    return theta - soft_threshold(float(x @ theta) / sq, 1.0 / sq) * x


@dataclass
class SlabSet:
    """Slabs ``|x_j^T theta| <= 1`` (columns of ``columns``) and target ``z``."""

    columns: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        self.columns = np.asarray(self.columns, dtype=np.float64)
        if np.any(np.linalg.norm(self.columns, axis=0) == 0):
            raise ValueError("every slab needs a nonzero normal")

    @classmethod
    def from_problem(cls, prob):
        return cls(prob.X.toarray(), prob.y / prob.lam)

    def __len__(self):
        return self.columns.shape[1]

    def project(self, j, theta):
        return slab_project(self.columns[:, j], theta)


@dataclass
class DykstraState:
    """Current iterate and one correction vector per set."""

    theta: np.ndarray
    corrections: np.ndarray  # shape (n_sets, n)

    @classmethod
    def start(cls, sets):
        z = np.array(sets.z, dtype=np.float64)
        return cls(z, np.zeros((len(sets), z.size)))

    def identity_error(self, z):
        """``||theta + sum_j q_j - z||_inf``; zero in exact arithmetic."""
        return float(np.max(np.abs(self.theta + self.corrections.sum(axis=0) - z)))

    def residual(self, lam):
        return lam * self.theta

    def coefficients(self, sets, lam):
        """Primal coefficients implied by the corrections, ``q_j = x_j beta_j / lam``."""
        X = sets.columns
        return lam * np.einsum("ij,ji->i", self.corrections, X) / (X ** 2).sum(axis=0)


def dykstra_epoch(state, sets, order=None, check=None):
    """One pass of Dykstra's algorithm over ``sets`` in ``order``, in place.

    ``check``, if given, is called after every projection with the state.
    """
    if order is None:
        order = range(len(sets))
    for j in order:
        tilde = state.theta + state.corrections[j]
        state.theta = sets.project(j, tilde)
        state.corrections[j] = tilde - state.theta
        if check is not None:
            check(state)
    return state


def cd_dykstra_equivalence(prob, epochs):
    """Run cyclic Dykstra and cyclic CD side by side from zero.

    Returns ``(max residual deviation, max coefficient deviation)`` over
    all epochs, both in sup norm.
    """
    sets = SlabSet.from_problem(prob)
    state = DykstraState.start(sets)
    beta = np.zeros(prob.n_features)
    r = prob.y.copy()
    active = np.arange(prob.n_features)
    r_dev = b_dev = 0.0
    for _ in range(epochs):
        dykstra_epoch(state, sets)
        prob.X.cd_epoch(beta, r, prob.lam, active)
        r_dev = max(r_dev, float(np.max(np.abs(state.residual(prob.lam) - r))))
        b_dev = max(b_dev, float(np.max(np.abs(state.coefficients(sets, prob.lam) - beta))))
    return r_dev, b_dev


def project_dual_2d(X, z):
    """Exact projection of ``z`` onto ``{theta : ||X^T theta||_inf <= 1}`` for 2x2 ``X``.

    Enumerates the interior, the four slab faces and the four vertices.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.shape != (2, 2):
        raise ValueError("project_dual_2d needs a 2x2 design")

    def feasible(v):
        return np.max(np.abs(X.T @ v)) <= 1 + 1e-12

    cands = [z]
    for j in range(2):
        x = X[:, j]
        for s in (-1.0, 1.0):
            cands.append(z - (x @ z - s) / (x @ x) * x)
    if abs(np.linalg.det(X)) > 1e-14:
        for s1 in (-1.0, 1.0):
            for s2 in (-1.0, 1.0):
                cands.append(np.linalg.solve(X.T, [s1, s2]))
    best = min((c for c in cands if feasible(c)), key=lambda c: np.linalg.norm(c - z))
    return best


def vertex_instance():
    """2x2 instance: unit columns 60 degrees apart, ``y / lam`` beyond the vertex.

    The target sits in the normal cone of the vertex ``x_1^T t = x_2^T t = 1``,
    outside both slabs, so the dual optimum is that vertex.
    """
    from .dataset import DesignMatrix, LassoProblem

    x1 = np.array([1.0, 0.0])
    x2 = np.array([np.cos(np.pi / 3), np.sin(np.pi / 3)])
    X = np.column_stack([x1, x2])
    vertex = np.linalg.solve(X.T, [1.0, 1.0])
    lam = 1.0
    y = lam * (vertex + 0.6 * x1 + 0.4 * x2)
    return LassoProblem(DesignMatrix(X, sparse=False), y, lam)


def dual_trajectory(prob, order="cyclic", epochs=10, K=4, seed=0):
    """Epoch-end Dykstra iterates on a 2x2 problem and their extrapolations.

    Every epoch's residual ``lam * theta`` is pushed into a history of size
    ``K`` (one epoch between records). Suboptimalities are
    ``D(theta_hat) - D(.)`` evaluated at feasible points: the rescaled
    iterate and the rescaled extrapolation.

    Returns a list of dicts with keys ``epoch, theta_1, theta_2,
    theta_accel_1, theta_accel_2, dual_subopt, dual_subopt_accel``.
    """
    if prob.X.shape != (2, 2):
        raise ValueError("dual_trajectory needs a 2x2 problem")
    if order not in ("cyclic", "shuffle"):
        raise ValueError(f"unknown order {order!r}")
    sets = SlabSet.from_problem(prob)
    theta_hat = project_dual_2d(sets.columns, sets.z)
    d_hat = dual_value(prob, theta_hat)
    state = DykstraState.start(sets)
    hist = ResidualHistory(2, K)
    rng = np.random.default_rng(seed)
    rows = []
    for epoch in range(1, epochs + 1):
        perm = np.arange(2) if order == "cyclic" else rng.permutation(2)
        dykstra_epoch(state, sets, perm)
        r = state.residual(prob.lam)
        hist.push(r)
        r_acc, _ = extrapolate_residual(hist)
        th_acc = rescale_residual(prob, r_acc).theta
        rows.append({
            "epoch": epoch,
            "theta_1": state.theta[0],
            "theta_2": state.theta[1],
            "theta_accel_1": th_acc[0],
            "theta_accel_2": th_acc[1],
            "dual_subopt": d_hat - dual_value(prob, rescale_residual(prob, r)),
            "dual_subopt_accel": d_hat - dual_value(prob, th_acc),
        })
    return rows
