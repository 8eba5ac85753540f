"""Reference solvers that share no code with the package.

Everything here works on plain dense numpy arrays.
"""
import numpy as np


def st(x, u):
    return np.sign(x) * np.maximum(np.abs(x) - u, 0.0)


def primal(X, y, lam, beta):
    r = y - X @ beta
    return 0.5 * r @ r + lam * np.abs(beta).sum()


def dual(y, lam, theta):
    return 0.5 * y @ y - 0.5 * lam ** 2 * np.sum((theta - y / lam) ** 2)


def res_dual(X, y, lam, beta):
    r = y - X @ beta
    return r / max(lam, np.max(np.abs(X.T @ r)))


def gap(X, y, lam, beta):
    return primal(X, y, lam, beta) - dual(y, lam, res_dual(X, y, lam, beta))


def orthonormal_solution(X, y, lam):
    """Closed form for ``X^T X = I``."""
    return st(X.T @ y, lam)


def _polish(X, y, lam, beta):
    """Solve the KKT system on the support of ``beta`` with its signs.

    Returns the polished point when it keeps the signs and satisfies the
    optimality conditions, otherwise ``None``.
    """
    S = np.flatnonzero(beta)
    if S.size == 0:
        return None
    s = np.sign(beta[S])
    XS = X[:, S]
    G = XS.T @ XS
    if np.linalg.matrix_rank(G) < S.size:
        return None
    bS = np.linalg.solve(G, XS.T @ y - lam * s)
    if np.any(np.sign(bS) != s):
        return None
    out = np.zeros_like(beta)
    out[S] = bS
    corr = X.T @ (y - X @ out)
    if np.max(np.abs(corr)) > lam * (1 + 1e-10):
        return None
    return out


def fista(X, y, lam, tol=1e-13, max_iter=200_000):
    """Accelerated proximal gradient with function-value restart.

    Every 50 iterations the KKT system is solved exactly on the current
    support; the run stops as soon as that polished point (or the plain
    iterate) has a duality gap below ``tol * max(1, P(0))``. Returns
    ``(beta, gap)``.
    """
    X = np.asarray(X, dtype=np.float64)
    L = np.linalg.norm(X, 2) ** 2
    if L == 0:
        return np.zeros(X.shape[1]), 0.0
    target = tol * max(1.0, 0.5 * y @ y)
    beta = np.zeros(X.shape[1])
    z = beta.copy()
    t = 1.0
    f_old = primal(X, y, lam, beta)
    best, best_gap = beta, gap(X, y, lam, beta)
    for it in range(max_iter):
        new = st(z + X.T @ (y - X @ z) / L, lam / L)
        f_new = primal(X, y, lam, new)
        if f_new > f_old and t > 1.0:
            # restart momentum; the plain step from beta is then taken
            t = 1.0
            z = beta.copy()
            continue
        t_new = 0.5 * (1 + np.sqrt(1 + 4 * t * t))
        z = new + (t - 1) / t_new * (new - beta)
        beta, t, f_old = new, t_new, f_new
        if it % 50:
            continue
        for cand in (beta, _polish(X, y, lam, beta)):
            if cand is None:
                continue
            g = gap(X, y, lam, cand)
            if g < best_gap:
                best, best_gap = cand, g
        if best_gap <= target:
            break
    return best, best_gap


def equicorrelation(X, y, lam, beta, tol=1e-9):
    theta = (y - X @ beta) / lam
    return np.flatnonzero(np.abs(X.T @ theta) >= 1 - tol)


def project_2d(X, z):
    """Projection onto ``{t : |X^T t|_inf <= 1}`` for ``n = 2`` by a dense
    grid search refined with scipy, used to cross-check the exact one."""
    from scipy.optimize import minimize

    cons = [{"type": "ineq", "fun": lambda t, j=j, s=s: 1 - s * (X[:, j] @ t)}
            for j in range(X.shape[1]) for s in (-1, 1)]
    res = minimize(lambda t: 0.5 * np.sum((t - z) ** 2), np.zeros(2),
                   jac=lambda t: t - z, constraints=cons, method="SLSQP",
                   options={"ftol": 1e-15, "maxiter": 500})
    return res.x
