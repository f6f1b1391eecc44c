"""Complex-shifted Gram systems ``(z I - A^T A) X = B``.

The default backend forms ``G = A^T A`` once and LU-factors ``z I - G`` per
shift.  Anything exposing ``factor(z)`` returning an object with ``solve(B)``
can stand in for :class:`DenseGramSolver`.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse

from .errors import ConfigError, SingularShiftError

GRAM_CAP = 20000
PIVOT_TOL = 1e-30


def check_matrix(A):
    """Validate a problem matrix (dense array or scipy sparse) and return it as float."""
    if scipy.sparse.issparse(A):
        A = scipy.sparse.csr_matrix(A, dtype=float)
        data = A.data
    else:
        A = np.asarray(A)
        if np.iscomplexobj(A):
            raise ConfigError("problem matrix must be real")
        A = A.astype(float, copy=False)
        data = A
    if A.ndim != 2 or min(A.shape) == 0:
        raise ConfigError(f"problem matrix must be a non-empty 2-D array, got shape {A.shape}")
    if not np.all(np.isfinite(data)):
        raise ConfigError("problem matrix contains NaN or Inf")
    return A


def orient(A):
    """Return ``(A', transposed)`` with ``A'`` having at least as many rows as columns."""
    A = check_matrix(A)
    if A.shape[0] < A.shape[1]:
        return A.T.tocsr() if scipy.sparse.issparse(A) else A.T, True
    return A, False


def form_gram(A, cap=GRAM_CAP):
    """Symmetrized dense Gram matrix ``A^T A``."""
    n = A.shape[1]
    if n > cap:
        raise MemoryError(f"Gram matrix of order {n} exceeds the configured cap {cap}")
    G = A.T @ A
    if scipy.sparse.issparse(G):
        G = G.toarray()
    G = np.asarray(G, dtype=float)
    return (G + G.T) / 2


@dataclass(frozen=True)
class ShiftedFactorization:
    shift: complex
    lu: np.ndarray
    piv: np.ndarray

    @property
    def n(self):
        return self.lu.shape[0]

    def solve(self, B):
        return solve_block(self, B)


def factor_shift(G, z):
    """LU-factor ``z I - G``; raises :class:`SingularShiftError` on a vanishing pivot."""
    G = np.asarray(G)
    n = G.shape[0]
    K = -G.astype(complex)
    K[np.diag_indices(n)] += z
    lu, piv = scipy.linalg.lu_factor(K, check_finite=False)
    scale = max(np.linalg.norm(G, 1), 1.0)
    if np.min(np.abs(np.diag(lu))) <= PIVOT_TOL * scale:
        raise SingularShiftError(f"shift {z} lies numerically on the spectrum of A^T A")
    return ShiftedFactorization(shift=complex(z), lu=lu, piv=piv)


def solve_block(fact, B):
    """Solve ``(z I - G) X = B`` for a vector or an ``n x L`` block."""
    B = np.asarray(B)
    if B.shape[0] != fact.n:
        raise ConfigError(f"right-hand side has {B.shape[0]} rows, expected {fact.n}")
    return scipy.linalg.lu_solve((fact.lu, fact.piv), B.astype(complex), check_finite=False)


class DenseGramSolver:
    """Dense backend: explicit Gram matrix plus one LU per shift."""

    def __init__(self, A=None, gram=None):
        if gram is None:
            gram = form_gram(A)
        self.gram = gram
        self.n = gram.shape[0]

    def factor(self, z):
        return factor_shift(self.gram, z)
