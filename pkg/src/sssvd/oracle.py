"""Independent ground truth for tests and diagnostics.

:func:`jacobi_svd` is a one-sided (Hestenes) Jacobi SVD written with
elementwise numpy arithmetic only, so it shares no LAPACK QR/SVD kernels with
the solver path.  :func:`error_bound_report` checks the subspace error bound
of the filtered block Krylov space against oracle singular vectors.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse

from .contour import TransformKind
from .errors import ConfigError, ConvergenceError
from .filters import eval_filter

ORACLE_CAP = 2000


@dataclass(frozen=True, eq=False)
class OracleSVD:
    U: np.ndarray
    sigma: np.ndarray  # nonincreasing
    V: np.ndarray


def _round_robin(n):
    """Pairings for ``n - 1`` rounds covering every pair once (``n`` even)."""
    players = list(range(n))
    rounds = []
    for _ in range(n - 1):
        half = n // 2
        p = np.array(players[:half])
        q = np.array(players[half:][::-1])
        rounds.append((np.minimum(p, q), np.maximum(p, q)))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def jacobi_svd(A, tol=1e-14, max_sweeps=60, cap=ORACLE_CAP):
    """Thin SVD ``A = U diag(sigma) V^T`` by one-sided Jacobi rotations.

    Columns of a working copy of ``A`` are rotated pairwise until every pair
    is orthogonal to ``tol`` relative to the product of their norms.

    Raises
    ------
    ConvergenceError
        If ``max_sweeps`` sweeps do not reach ``tol``.
    """
    if scipy.sparse.issparse(A):
        A = A.toarray()
    A = np.asarray(A, dtype=float)
    m, n = A.shape
    if n > cap:
        raise ConfigError(f"oracle SVD limited to n <= {cap}, got n = {n}")
    transposed = m < n
    if transposed:
        A = A.T
        m, n = n, m

    size = n + (n % 2)
    # rows of X are the columns of A, so each pair slice is contiguous
    X = np.zeros((size, m))
    X[:n] = A.T
    V = np.eye(size)
    rounds = _round_robin(size)

    for _ in range(max_sweeps):
        rotated = False
        for p, q in rounds:
            xp, xq = X[p], X[q]
            alpha = np.einsum("ij,ij->i", xp, xp)
            beta = np.einsum("ij,ij->i", xq, xq)
            gamma = np.einsum("ij,ij->i", xp, xq)
            scale = np.sqrt(alpha * beta)
            active = (scale > 0) & (np.abs(gamma) > tol * scale)
            if not np.any(active):
                continue
            rotated = True
            p, q, xp, xq = p[active], q[active], xp[active], xq[active]
            zeta = (beta[active] - alpha[active]) / (2 * gamma[active])
            t = np.sign(zeta) / (np.abs(zeta) + np.sqrt(1 + zeta * zeta))
            t = np.where(zeta == 0, 1.0, t)
            c = (1 / np.sqrt(1 + t * t))[:, None]
            s = c * t[:, None]
            X[p], X[q] = c * xp - s * xq, s * xp + c * xq
            vp, vq = V[p], V[q]
            V[p], V[q] = c * vp - s * vq, s * vp + c * vq
        if not rotated:
            break
    else:
        raise ConvergenceError(f"one-sided Jacobi did not converge in {max_sweeps} sweeps")

    # V accumulated row-wise: row k holds right singular vector k
    X, V = X[:n], V[:n, :n].T
    sigma = np.sqrt(np.einsum("ij,ij->i", X, X))
    order = np.argsort(-sigma, kind="stable")
    sigma, X, V = sigma[order], X[order], V[:, order]
    U = np.zeros((m, n))
    nz = sigma > 0
    U[:, nz] = (X[nz] / sigma[nz, None]).T
    if transposed:
        U, V = V, U
    return OracleSVD(U=U, sigma=sigma, V=V)


@dataclass(frozen=True, eq=False)
class BoundReport:
    """Per-index subspace errors next to their theoretical bounds.

    Arrays are indexed by filter rank (decreasing ``|f|``); ``index`` maps back
    to positions in the oracle's nonincreasing-sigma order.
    """

    index: np.ndarray
    sigma: np.ndarray
    abs_f: np.ndarray
    lhs_v: np.ndarray
    lhs_u: np.ndarray
    ratio: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    sigma_next: float
    conclusive: bool
    approximate: bool = False
    note: str = ""

    @property
    def bound_v(self):
        return self.beta * self.ratio

    @property
    def bound_u(self):
        return self.alpha * self.beta * self.ratio

    def holds(self, rtol=1e-6, atol=1e-12):
        ok_v = self.lhs_v <= self.bound_v * (1 + rtol) + atol
        ok_u = self.lhs_u <= self.bound_u * (1 + rtol) + atol
        return ok_v & ok_u


def _orthonormal(X):
    Q, _ = np.linalg.qr(X)
    return Q


def error_bound_report(A, rule, L, M, ell, oracle, start, right_basis, left_basis=None):
    """Compare actual subspace errors with the filtered-subspace-iteration bound.

    Parameters
    ----------
    A : array
        Problem matrix (``m >= n``).
    rule : ContourRule
        Rule used by the run; fixes the filter ``f``.
    L, M, ell : int
        Block size, moment degree and refinement count of the run.
    oracle : OracleSVD
        Exact (or oracle) factors of ``A``.
    start : (n, L) array
        The start block ``V_in``.
    right_basis, left_basis : arrays
        Orthonormal bases of the computed right and left search spaces.

    Notes
    -----
    ``s_i`` is the element of ``range(K)`` whose projection onto the leading
    ``LM`` singular directions (by ``|f|``) is ``v_i``; it is found by solving
    the square system in oracle coordinates.  For the exp transform the
    Krylov block uses ``log(A^T A)`` and the bound is only approximate.
    """
    sigma = oracle.sigma
    n = sigma.size
    LM = L * M
    if LM >= n:
        raise ConfigError("bound report needs L*M < n")
    absf = np.abs(eval_filter(rule, sigma))
    order = np.argsort(-absf, kind="stable")
    lead, rest = order[:LM], order[LM:]

    approximate = rule.transform.kind is TransformKind.EXP
    with np.errstate(divide="ignore"):
        lam = rule.transform.inverse(sigma**2)
    C = oracle.V.T @ start
    blocks = []
    Ck = C
    for _ in range(M):
        blocks.append(Ck / np.linalg.norm(Ck, axis=0))
        Ck = lam[:, None] * Ck
    K = np.hstack(blocks)  # K in oracle coordinates, columns normalized

    K_lead = K[lead]
    cond = np.linalg.cond(K_lead)
    conclusive = bool(np.isfinite(cond) and cond < 1e13)
    coeff = np.linalg.solve(K_lead, np.eye(LM)) if conclusive else np.linalg.lstsq(K_lead, np.eye(LM), rcond=None)[0]
    W = K[rest] @ coeff  # w_i = (I - P_LM) s_i, one column per leading index
    beta = np.linalg.norm(W, axis=0)

    f_next = absf[order[LM]]
    ratio = (f_next / absf[lead]) ** ell
    alpha = np.max(sigma[rest]) / sigma[lead]

    Vb = _orthonormal(right_basis)
    v = oracle.V[:, lead]
    lhs_v = np.linalg.norm(v - Vb @ (Vb.T @ v), axis=0)
    if left_basis is None:
        left_basis = np.asarray(A @ Vb)
    Ub = _orthonormal(left_basis)
    u = oracle.U[:, lead]
    lhs_u = np.linalg.norm(u - Ub @ (Ub.T @ u), axis=0)

    note = "" if conclusive else f"P_LM K is numerically rank deficient (cond = {cond:.3g})"
    return BoundReport(
        index=lead,
        sigma=sigma[lead],
        abs_f=absf[lead],
        lhs_v=lhs_v,
        lhs_u=lhs_u,
        ratio=ratio,
        alpha=alpha,
        beta=beta,
        sigma_next=float(sigma[order[LM]]),
        conclusive=conclusive,
        approximate=approximate,
        note=note,
    )
