"""Problem instances: column-oriented design matrices, loaders, preprocessing
and synthetic data.
"""
import csv
import io
import json
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.sparse as sp

from . import _kernels

# Storage is sparse when the fraction of nonzero entries is below this.
SPARSE_DENSITY_THRESHOLD = 0.25


class SvmlightParseError(ValueError):
    """Malformed svmlight/LIBSVM input. ``lineno`` is 1-based."""

    def __init__(self, lineno, msg):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


class DesignMatrix:
    """Immutable feature matrix stored column by column.

    Columns live either in a Fortran-ordered dense array or in CSC arrays
    (row indices strictly increasing within each column). Column norms are
    computed once at construction.

    Parameters
    ----------
    X : array-like or scipy.sparse matrix, shape (n_samples, n_features)
    sparse : bool or None
        Force the storage kind. ``None`` picks sparse storage when the
        density is below 25%.
    """

    def __init__(self, X, sparse=None):
        if sp.issparse(X):
            mat = sp.csc_matrix(X, dtype=np.float64, copy=True)
            mat.sum_duplicates()
            mat.eliminate_zeros()
            mat.sort_indices()
            n, p = mat.shape
            density = mat.nnz / max(n * p, 1)
        else:
            arr = np.asarray(X, dtype=np.float64)
            if arr.ndim != 2:
                raise ValueError("design matrix must be 2-dimensional")
            n, p = arr.shape
            density = np.count_nonzero(arr) / max(n * p, 1)
            mat = arr
        if n < 1 or p < 1:
            raise ValueError(f"design matrix must be non-empty, got shape {(n, p)}")
        if sparse is None:
            sparse = density < SPARSE_DENSITY_THRESHOLD

        self.n_samples = n
        self.n_features = p
        self.is_sparse = bool(sparse)
        if self.is_sparse:
            if not sp.issparse(mat):
                mat = sp.csc_matrix(mat)
                mat.sort_indices()
            self._data = np.ascontiguousarray(mat.data, dtype=np.float64)
            self._indices = np.ascontiguousarray(mat.indices, dtype=np.int64)
            self._indptr = np.ascontiguousarray(mat.indptr, dtype=np.int64)
            if not np.all(np.isfinite(self._data)):
                raise ValueError("design matrix has non-finite entries")
            sq = _kernels.sparse_sq_norms(self._data, self._indptr)
            for a in (self._data, self._indices, self._indptr):
                a.setflags(write=False)
        else:
            if sp.issparse(mat):
                mat = mat.toarray()
            self._dense = np.array(mat, dtype=np.float64, order="F")
            if not np.all(np.isfinite(self._dense)):
                raise ValueError("design matrix has non-finite entries")
            sq = _kernels.dense_sq_norms(self._dense)
            self._dense.setflags(write=False)
        self.col_sq_norms = sq
        self.col_norms = np.sqrt(sq)
        self.col_sq_norms.setflags(write=False)
        self.col_norms.setflags(write=False)

    def __repr__(self):
        kind = "sparse" if self.is_sparse else "dense"
        return f"DesignMatrix({self.n_samples}x{self.n_features}, {kind})"

    @property
    def shape(self):
        return (self.n_samples, self.n_features)

    @property
    def nnz(self):
        if self.is_sparse:
            return int(self._indptr[-1])
        return int(np.count_nonzero(self._dense))

    def column_nnz(self):
        """Number of nonzero entries in each column."""
        if self.is_sparse:
            return np.diff(self._indptr)
        return np.count_nonzero(self._dense, axis=0)

    def column_entries(self, j):
        """Return ``(row_indices, values)`` of the nonzeros of column ``j``."""
        if self.is_sparse:
            sl = slice(self._indptr[j], self._indptr[j + 1])
            return self._indices[sl].copy(), self._data[sl].copy()
        col = self._dense[:, j]
        rows = np.flatnonzero(col)
        return rows, col[rows].copy()

    def column(self, j):
        """Column ``j`` as a dense vector."""
        if self.is_sparse:
            out = np.zeros(self.n_samples)
            rows, vals = self.column_entries(j)
            out[rows] = vals
            return out
        return self._dense[:, j].copy()

    def col_dot(self, j, v):
        v = np.ascontiguousarray(v, dtype=np.float64)
        if self.is_sparse:
            return _kernels.sparse_col_dot(self._data, self._indices, self._indptr, j, v)
        return _kernels.dense_col_dot(self._dense, j, v)

    def rmatvec(self, v):
        """Compute ``X.T @ v``."""
        v = np.ascontiguousarray(v, dtype=np.float64)
        if v.shape != (self.n_samples,):
            raise ValueError(f"expected vector of length {self.n_samples}, got {v.shape}")
        if self.is_sparse:
            return _kernels.sparse_rmatvec(self._data, self._indices, self._indptr, v)
        return _kernels.dense_rmatvec(self._dense, v)

    def matvec(self, beta):
        """Compute ``X @ beta``."""
        beta = np.ascontiguousarray(beta, dtype=np.float64)
        if beta.shape != (self.n_features,):
            raise ValueError(f"expected vector of length {self.n_features}, got {beta.shape}")
        if self.is_sparse:
            return _kernels.sparse_matvec(self._data, self._indices, self._indptr,
                                          beta, self.n_samples)
        return _kernels.dense_matvec(self._dense, beta)

    def cd_epoch(self, beta, r, lam, active):
        """One cyclic coordinate descent pass over ``active``, in place."""
        active = np.ascontiguousarray(active, dtype=np.int64)
        if self.is_sparse:
            _kernels.sparse_cd_epoch(self._data, self._indices, self._indptr,
                                     beta, r, lam, self.col_sq_norms, active)
        else:
            _kernels.dense_cd_epoch(self._dense, beta, r, lam, self.col_sq_norms, active)

    def subset(self, cols):
        """New DesignMatrix restricted to columns ``cols`` (same storage kind)."""
        cols = np.asarray(cols, dtype=np.int64)
        return DesignMatrix(self._native()[:, cols], sparse=self.is_sparse)

    def scale_columns(self, scales):
        """New DesignMatrix with column ``j`` divided by ``scales[j]``."""
        scales = np.asarray(scales, dtype=np.float64)
        if self.is_sparse:
            mat = self.tocsc()
            mat.data = mat.data / np.repeat(scales, np.diff(mat.indptr))
            return DesignMatrix(mat, sparse=True)
        return DesignMatrix(self._dense / scales, sparse=False)

    def toarray(self):
        if self.is_sparse:
            return self._native().toarray()
        return np.array(self._dense)

    def tocsc(self):
        return sp.csc_matrix(self._native())

    def _native(self):
        if self.is_sparse:
            return sp.csc_matrix((self._data, self._indices, self._indptr),
                                 shape=self.shape)
        return self._dense


@dataclass(frozen=True)
class LassoProblem:
    """One Lasso instance: design ``X``, observations ``y``, penalty ``lam``."""

    X: DesignMatrix
    y: np.ndarray
    lam: float

    def __post_init__(self):
        y = np.array(self.y, dtype=np.float64)
        if y.shape != (self.X.n_samples,):
            raise ValueError(f"y has shape {y.shape}, expected ({self.X.n_samples},)")
        if not np.all(np.isfinite(y)):
            raise ValueError("y has non-finite entries")
        if not (self.lam > 0 and np.isfinite(self.lam)):
            raise ValueError(f"lam must be positive and finite, got {self.lam}")
        y.setflags(write=False)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "lam", float(self.lam))

    @property
    def n_samples(self):
        return self.X.n_samples

    @property
    def n_features(self):
        return self.X.n_features

    def restrict(self, cols):
        return LassoProblem(self.X.subset(cols), self.y, self.lam)

    def with_lambda(self, lam):
        return LassoProblem(self.X, self.y, lam)


@dataclass
class PreprocessReport:
    dropped_columns: list
    kept_columns: list
    column_scales: list
    y_center: float = 0.0
    y_scale: float = 1.0
    steps: list = field(default_factory=list)

    def to_json(self):
        return json.dumps(asdict(self))

    @classmethod
    def from_json(cls, text):
        return cls(**json.loads(text))

    def unscale_coef(self, beta, n_features_orig):
        """Map coefficients on preprocessed data back to the raw columns."""
        out = np.zeros(n_features_orig)
        out[self.kept_columns] = self.y_scale * np.asarray(beta) / np.asarray(self.column_scales)
        return out


# --------------------------------------------------------------- svmlight


def parse_svmlight(text):
    """Parse svmlight / LIBSVM text.

    Indices are 1-based on disk and strictly increasing within a line;
    ``#`` starts a comment. Returns ``(X, labels)`` with ``X`` stored as
    sparse columns.
    """
    if isinstance(text, (bytes, bytearray)):
        text = text.decode("utf-8")
    labels, rows, cols, vals = [], [], [], []
    n_features = 0
    for lineno, raw in enumerate(io.StringIO(text), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        try:
            label = float(tokens[0])
        except ValueError:
            raise SvmlightParseError(lineno, f"bad label {tokens[0]!r}") from None
        row = len(labels)
        last = 0
        for tok in tokens[1:]:
            idx_s, sep, val_s = tok.partition(":")
            if not sep:
                raise SvmlightParseError(lineno, f"expected idx:val, got {tok!r}")
            try:
                idx = int(idx_s)
                val = float(val_s)
            except ValueError:
                raise SvmlightParseError(lineno, f"non-numeric token {tok!r}") from None
            if idx < 1:
                raise SvmlightParseError(lineno, f"index {idx} is not 1-based")
            if idx <= last:
                raise SvmlightParseError(lineno, f"non-increasing index {idx} after {last}")
            if not np.isfinite(val):
                raise SvmlightParseError(lineno, f"non-finite value {tok!r}")
            last = idx
            if val != 0.0:
                rows.append(row)
                cols.append(idx - 1)
                vals.append(val)
        n_features = max(n_features, last)
        labels.append(label)
    if not labels:
        raise ValueError("empty svmlight input")
    if n_features == 0:
        raise ValueError("svmlight input has no features")
    mat = sp.csc_matrix((vals, (rows, cols)), shape=(len(labels), n_features))
    return DesignMatrix(mat, sparse=True), np.asarray(labels)


def dump_svmlight(X, labels):
    """Serialize to svmlight text (1-based indices, shortest round-trip floats)."""
    csr = sp.csr_matrix(X.tocsc())
    csr.sort_indices()
    out = []
    for i, lab in enumerate(labels):
        sl = slice(csr.indptr[i], csr.indptr[i + 1])
        feats = " ".join(f"{j + 1}:{v!r}" for j, v in
                         zip(csr.indices[sl].tolist(), csr.data[sl].tolist()))
        out.append(f"{float(lab)!r} {feats}".rstrip())
    return "\n".join(out) + "\n"


def load_svmlight(path, sparse=None):
    """Load an svmlight file; storage kind follows the density rule unless forced."""
    with open(path, "rb") as fh:
        X, labels = parse_svmlight(fh.read())
    if sparse is None:
        sparse = X.nnz / (X.n_samples * X.n_features) < SPARSE_DENSITY_THRESHOLD
    if not sparse:
        X = DesignMatrix(X.tocsc(), sparse=False)
    return X, labels


def load_csv(path):
    """Dense CSV loader; last column is ``y``, a non-numeric first row is a header."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows:
        raise ValueError(f"{path}: empty CSV")
    try:
        [float(v) for v in rows[0]]
    except ValueError:
        rows = rows[1:]
    try:
        arr = np.array([[float(v) for v in r] for r in rows])
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from None
    if arr.ndim != 2 or arr.shape[1] < 2:
        raise ValueError(f"{path}: need at least one feature column and y")
    return DesignMatrix(arr[:, :-1]), arr[:, -1].copy()


# ----------------------------------------------------------- preprocessing


def preprocess(X, y, min_nnz=0, unit_norm_cols=False, center_y=False,
               unit_norm_y=False):
    """Drop sparse columns, then optionally normalize columns and ``y``.

    Columns with fewer than ``min_nnz`` nonzeros are dropped, and all-zero
    columns are dropped regardless. Normalization happens after dropping.

    Returns
    -------
    X_new : DesignMatrix
    y_new : ndarray
    report : PreprocessReport
    """
    if min_nnz < 0:
        raise ValueError("min_nnz must be >= 0")
    y = np.array(y, dtype=np.float64)
    nnz = np.asarray(X.column_nnz())
    keep = (nnz >= min_nnz) & (nnz > 0)
    kept = np.flatnonzero(keep)
    if kept.size == 0:
        raise ValueError("preprocessing dropped every column")
    steps = [f"drop columns with nnz < {max(min_nnz, 1)}"]
    X_new = X.subset(kept) if kept.size < X.n_features else X
    scales = np.ones(kept.size)
    if unit_norm_cols:
        scales = np.array(X_new.col_norms)
        X_new = X_new.scale_columns(scales)
        steps.append("scale columns to unit norm")
    y_center, y_scale = 0.0, 1.0
    if center_y:
        y_center = float(y.mean())
        y = y - y_center
        steps.append("center y")
    if unit_norm_y:
        y_scale = float(np.linalg.norm(y))
        if y_scale == 0.0:
            raise ValueError("y is zero (after centering); cannot scale to unit norm")
        y = y / y_scale
        steps.append("scale y to unit norm")
    report = PreprocessReport(
        dropped_columns=np.flatnonzero(~keep).tolist(),
        kept_columns=kept.tolist(),
        column_scales=scales.tolist(),
        y_center=y_center,
        y_scale=y_scale,
        steps=steps,
    )
    return X_new, y, report


def synthesize(n, p, support_size, snr=3.0, seed=0):
    """Gaussian design with a sparse +-1 ground truth.

    ``y = X @ true_coef + noise`` where the noise is rescaled so that
    ``||X @ true_coef|| / ||noise|| == snr``.

    Returns
    -------
    X : DesignMatrix
    y : ndarray
    true_coef : ndarray
    """
    if n < 1 or p < 1:
        raise ValueError("n and p must be positive")
    if not 0 < support_size <= p:
        raise ValueError(f"support_size must be in (0, {p}], got {support_size}")
    if not snr > 0:
        raise ValueError("snr must be positive")
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, p))
    true_coef = np.zeros(p)
    support = rng.choice(p, size=support_size, replace=False)
    true_coef[support] = rng.choice([-1.0, 1.0], size=support_size)
    signal = X @ true_coef
    noise = rng.standard_normal(n)
    noise *= np.linalg.norm(signal) / (snr * np.linalg.norm(noise))
    return DesignMatrix(X), signal + noise, true_coef
