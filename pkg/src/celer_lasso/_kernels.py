"""Compiled column kernels for dense (Fortran-ordered) and CSC storage.

Every reduction is a plain sequential loop so the dense and sparse paths
accumulate in the same order and give bit-identical results.
"""
import numpy as np
from numba import njit


@njit(cache=True)
def soft_threshold(x, u):
    if x > u:
        return x - u
    if x < -u:
        return x + u
    return 0.0


# ---------------------------------------------------------------- dense


@njit(cache=True)
def dense_col_dot(X, j, v):
    acc = 0.0
    for i in range(X.shape[0]):
        acc += X[i, j] * v[i]
    return acc


@njit(cache=True)
def dense_rmatvec(X, v):
    out = np.empty(X.shape[1])
    for j in range(X.shape[1]):
        out[j] = dense_col_dot(X, j, v)
    return out


@njit(cache=True)
def dense_matvec(X, beta):
    out = np.zeros(X.shape[0])
    for j in range(X.shape[1]):
        b = beta[j]
        if b != 0.0:
            for i in range(X.shape[0]):
                out[i] += X[i, j] * b
    return out


@njit(cache=True)
def dense_cd_epoch(X, beta, r, lam, sq_norms, active):
    n = X.shape[0]
    for jj in range(active.shape[0]):
        j = active[jj]
        old = beta[j]
        grad = dense_col_dot(X, j, r)
        new = soft_threshold(old + grad / sq_norms[j], lam / sq_norms[j])
        if new != old:
            delta = old - new
            for i in range(n):
                r[i] += delta * X[i, j]
            beta[j] = new


# ---------------------------------------------------------------- sparse


@njit(cache=True)
def sparse_col_dot(data, indices, indptr, j, v):
    acc = 0.0
    for k in range(indptr[j], indptr[j + 1]):
        acc += data[k] * v[indices[k]]
    return acc


@njit(cache=True)
def sparse_rmatvec(data, indices, indptr, v):
    p = indptr.shape[0] - 1
    out = np.empty(p)
    for j in range(p):
        out[j] = sparse_col_dot(data, indices, indptr, j, v)
    return out


@njit(cache=True)
def sparse_matvec(data, indices, indptr, beta, n):
    out = np.zeros(n)
    for j in range(indptr.shape[0] - 1):
        b = beta[j]
        if b != 0.0:
            for k in range(indptr[j], indptr[j + 1]):
                out[indices[k]] += data[k] * b
    return out


@njit(cache=True)
def sparse_cd_epoch(data, indices, indptr, beta, r, lam, sq_norms, active):
    for jj in range(active.shape[0]):
        j = active[jj]
        old = beta[j]
        grad = sparse_col_dot(data, indices, indptr, j, r)
        new = soft_threshold(old + grad / sq_norms[j], lam / sq_norms[j])
        if new != old:
            delta = old - new
            for k in range(indptr[j], indptr[j + 1]):
                r[indices[k]] += delta * data[k]
            beta[j] = new


@njit(cache=True)
def dense_sq_norms(X):
    out = np.empty(X.shape[1])
    for j in range(X.shape[1]):
        acc = 0.0
        for i in range(X.shape[0]):
            acc += X[i, j] * X[i, j]
        out[j] = acc
    return out


@njit(cache=True)
def sparse_sq_norms(data, indptr):
    p = indptr.shape[0] - 1
    out = np.empty(p)
    for j in range(p):
        acc = 0.0
        for k in range(indptr[j], indptr[j + 1]):
            acc += data[k] * data[k]
        out[j] = acc
    return out
