"""Model problems with known spectra and Matrix Market ingestion."""

import enum
from dataclasses import dataclass

import numpy as np
import scipy.sparse

from .errors import ConfigError, MatrixMarketError
from .oracle import OracleSVD


class Model(enum.IntEnum):
    UNIFORM = 1  # singular values evenly spaced in (0, 2)
    LOG_UNIFORM = 2  # singular values evenly spaced in log10 over [1e-10, 1)


@dataclass(frozen=True)
class ModelSpec:
    which: Model = Model.UNIFORM
    m: int = 1000
    n: int = 200
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "which", Model(self.which))
        if not 0 < self.n <= self.m:
            raise ConfigError(f"model problems need 0 < n <= m, got m={self.m}, n={self.n}")


def model_spectrum(which, n=200):
    """Ascending singular values of a model problem.

    For ``n = 200`` these are ``0.005, 0.015, ..., 1.995`` and
    ``10**-10, 10**-9.95, ..., 10**-0.05``; other ``n`` keep the same range.
    """
    i = np.arange(n)
    if Model(which) is Model.UNIFORM:
        return (2 * i + 1) / n
    return 10.0 ** (-10.0 + (10.0 / n) * i)


def build_model(spec):
    """Return ``(A, truth)`` with ``A = U diag(sigma) V^T`` from seeded Gaussian QR factors."""
    rng = np.random.default_rng([spec.seed, int(spec.which)])
    U, _ = np.linalg.qr(rng.standard_normal((spec.m, spec.n)))
    V, _ = np.linalg.qr(rng.standard_normal((spec.n, spec.n)))
    sigma = model_spectrum(spec.which, spec.n)
    A = (U * sigma) @ V.T
    rev = slice(None, None, -1)
    return A, OracleSVD(U=U[:, rev], sigma=sigma[rev], V=V[:, rev])


_FIELDS = {"real", "integer", "double"}
_SYMMETRIES = {"general", "symmetric", "skew-symmetric"}


def _data_lines(fh, start):
    for lineno, line in enumerate(fh, start=start):
        stripped = line.strip()
        if stripped and not stripped.startswith("%"):
            yield lineno, stripped.split()


def read_matrix_market(path):
    """Read a real Matrix Market file.

    ``array`` files give a dense ndarray, ``coordinate`` files a CSR matrix
    with duplicate entries summed.  ``pattern`` and ``complex`` fields are
    rejected.
    """
    with open(path) as fh:
        header = fh.readline()
        tokens = header.strip().lower().split()
        if len(tokens) != 5 or tokens[0] != "%%matrixmarket" or tokens[1] != "matrix":
            raise MatrixMarketError(f"bad banner {header.strip()!r}", 1)
        fmt, field, symmetry = tokens[2:]
        if field not in _FIELDS:
            raise MatrixMarketError(f"unsupported field {field!r} (only real data is accepted)", 1)
        if fmt not in ("array", "coordinate"):
            raise MatrixMarketError(f"unknown format {fmt!r}", 1)
        if symmetry not in _SYMMETRIES:
            raise MatrixMarketError(f"unsupported symmetry {symmetry!r}", 1)

        lines = _data_lines(fh, start=2)
        try:
            lineno, size = next(lines)
        except StopIteration:
            raise MatrixMarketError("missing size line") from None
        try:
            dims = [int(x) for x in size]
        except ValueError:
            raise MatrixMarketError(f"bad size line {' '.join(size)!r}", lineno) from None
        if fmt == "array":
            return _read_array(lines, lineno, dims, symmetry)
        return _read_coordinate(lines, lineno, dims, symmetry)


def _number(text, lineno):
    try:
        return float(text)
    except ValueError:
        raise MatrixMarketError(f"cannot parse number {text!r}", lineno) from None


def _read_array(lines, lineno, dims, symmetry):
    if len(dims) != 2:
        raise MatrixMarketError("array size line needs 'rows cols'", lineno)
    m, n = dims
    values = []
    for lineno, parts in lines:
        if len(parts) != 1:
            raise MatrixMarketError(f"expected one value, got {len(parts)}", lineno)
        values.append(_number(parts[0], lineno))
    A = np.zeros((m, n))
    if symmetry == "general":
        if len(values) != m * n:
            raise MatrixMarketError(f"expected {m * n} values, found {len(values)}", lineno)
        return np.array(values).reshape((n, m)).T
    # lower triangle stored column by column
    sign = -1.0 if symmetry == "skew-symmetric" else 1.0
    first = 1 if sign < 0 else 0
    pos = [(i, j) for j in range(n) for i in range(j + first, m)]
    if len(values) != len(pos):
        raise MatrixMarketError(f"expected {len(pos)} values, found {len(values)}", lineno)
    for (i, j), v in zip(pos, values):
        A[i, j] = v
        if i != j:
            A[j, i] = sign * v
    return A


def _read_coordinate(lines, lineno, dims, symmetry):
    if len(dims) != 3:
        raise MatrixMarketError("coordinate size line needs 'rows cols entries'", lineno)
    m, n, nnz = dims
    rows, cols, vals = [], [], []
    count = 0
    for lineno, parts in lines:
        count += 1
        if len(parts) != 3:
            raise MatrixMarketError(f"expected 'row col value', got {len(parts)} fields", lineno)
        try:
            i, j = int(parts[0]) - 1, int(parts[1]) - 1
        except ValueError:
            raise MatrixMarketError("bad index", lineno) from None
        if not (0 <= i < m and 0 <= j < n):
            raise MatrixMarketError(f"index ({i + 1}, {j + 1}) out of range", lineno)
        v = _number(parts[2], lineno)
        rows.append(i)
        cols.append(j)
        vals.append(v)
        if symmetry != "general" and i != j:
            rows.append(j)
            cols.append(i)
            vals.append(-v if symmetry == "skew-symmetric" else v)
    if count != nnz:
        raise MatrixMarketError(f"header declares {nnz} entries, found {count}", lineno)
    A = scipy.sparse.coo_matrix((vals, (rows, cols)), shape=(m, n))
    return A.tocsr()  # sums duplicates


def write_matrix_market(path, A):
    """Write ``A`` with 17 significant digits (array for dense, coordinate for sparse)."""
    with open(path, "w") as fh:
        if scipy.sparse.issparse(A):
            A = A.tocoo()
            fh.write("%%MatrixMarket matrix coordinate real general\n")
            fh.write(f"{A.shape[0]} {A.shape[1]} {A.nnz}\n")
            for i, j, v in zip(A.row, A.col, A.data):
                fh.write(f"{i + 1} {j + 1} {v:.17g}\n")
        else:
            A = np.asarray(A, dtype=float)
            fh.write("%%MatrixMarket matrix array real general\n")
            fh.write(f"{A.shape[0]} {A.shape[1]}\n")
            for v in A.T.ravel():
                fh.write(f"{v:.17g}\n")


def normalize_spectrum(A, tol=1e-6, max_iter=20000, seed=0):
    """Scale ``A`` so its largest singular value is about 1.

    Power iteration on ``A^T A`` stops once the eigen-residual falls below
    ``tol`` times the Rayleigh quotient.  Returns ``(A / s, s)``.
    """
    n = A.shape[1]
    x = np.random.default_rng(seed).standard_normal(n)
    x /= np.linalg.norm(x)
    theta = 0.0
    for _ in range(max_iter):
        y = np.asarray(A.T @ (A @ x)).ravel()
        theta = x @ y
        if theta <= 0:
            raise ConfigError("matrix is zero; cannot normalize")
        if np.linalg.norm(y - theta * x) <= tol * theta:
            break
        x = y / np.linalg.norm(y)
    scale = float(np.sqrt(theta))
    return A / scale, scale
