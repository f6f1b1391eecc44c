"""Complex-moment blocks of the filtered Gram resolvent and their low-rank basis."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .contour import half_rule
from .errors import ConfigError, DegenerateSubspaceError
from .shifted_solver import DenseGramSolver


@dataclass(frozen=True)
class SsParams:
    """Algorithm parameters: block size, moment degree, nodes, refinement steps, thresholds."""

    L: int = 20
    M: int = 4
    N: int = 32
    ell: int = 1
    delta: float = 1e-20
    eps: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        for name in ("L", "M", "N", "ell"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value}")
        if self.N % 2 or self.N < 4:
            raise ConfigError(f"N must be an even integer >= 4, got {self.N}")
        if not 0 < self.delta < 1:
            raise ConfigError(f"delta must lie in (0, 1), got {self.delta}")
        if not self.eps > 0:
            raise ConfigError(f"eps must be positive, got {self.eps}")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")

    def check_dimension(self, n):
        if self.L * self.M > n:
            raise ConfigError(f"L*M = {self.L * self.M} exceeds the column dimension n = {n}")


@dataclass(frozen=True, eq=False)
class MomentBlocks:
    """Real moment blocks ``S_0 .. S_M``; the last one only feeds residual estimates."""

    blocks: tuple

    @property
    def M(self):
        return len(self.blocks) - 1

    @property
    def stacked(self):
        return np.hstack(self.blocks[:-1])

    @property
    def stacked_plus(self):
        return np.hstack(self.blocks[1:])


@dataclass(frozen=True, eq=False)
class ReducedBasis:
    U: np.ndarray
    sigma: np.ndarray
    W: np.ndarray

    @property
    def rank(self):
        return self.sigma.size


def random_start(n, L, seed=0):
    """Reproducible ``n x L`` block with i.i.d. uniform(-1, 1) entries."""
    if L > n:
        raise ConfigError(f"block size L = {L} exceeds n = {n}")
    rng = np.random.default_rng(seed)
    return rng.uniform(-1.0, 1.0, size=(n, L))


class QuadraturePass:
    """Resolvent samples at the upper-half nodes of a rule.

    Factorizations are made lazily and kept (``keep_factors``) so that the
    refinement sweeps and the final moment sweep share them.  Per-node work
    fans out over ``threads`` workers; reductions always run in node order.
    """

    def __init__(self, A, rule, solver=None, threads=1, keep_factors=True):
        self.rule = rule
        self.solver = solver if solver is not None else DenseGramSolver(A)
        self.threads = max(1, int(threads))
        self.keep_factors = keep_factors
        self.nodes, self.weights = half_rule(rule)
        self.shifts = rule.transform.forward(self.nodes)
        self._factors = [None] * len(self.nodes)

    def _factor(self, j):
        fact = self._factors[j]
        if fact is None:
            fact = self.solver.factor(self.shifts[j])
            if self.keep_factors:
                self._factors[j] = fact
        return fact

    def _solves(self, S):
        S = np.asarray(S, dtype=float)

        def work(j):
            return self._factor(j).solve(S)

        indices = range(len(self.nodes))
        if self.threads == 1:
            yield from map(work, indices)
        else:
            with ThreadPoolExecutor(self.threads) as pool:
                yield from pool.map(work, indices)

    def apply_filter(self, S):
        """``2 Re sum_j w_j (g(t_j) I - G)^{-1} S`` over the upper half-rule."""
        out = np.zeros(np.shape(S))
        for w, X in zip(self.weights, self._solves(S)):
            out += (w * X).real
        return 2 * out

    def moments(self, S, M):
        """Blocks ``2 Re sum_j w_j t_j^k (g(t_j) I - G)^{-1} S`` for ``k = 0..M``."""
        blocks = [np.zeros(np.shape(S)) for _ in range(M + 1)]
        for w, t, X in zip(self.weights, self.nodes, self._solves(S)):
            coeff = w
            for k in range(M + 1):
                blocks[k] += (coeff * X).real
                coeff = coeff * t
        return MomentBlocks(tuple(2 * B for B in blocks))


def refine_s0(A, rule, S0, solver=None, threads=1):
    """One refinement sweep: apply the quadrature filter to ``S0``."""
    return QuadraturePass(A, rule, solver, threads).apply_filter(S0)


def build_moments(A, rule, S0, M, solver=None, threads=1):
    """Moment blocks ``S_0 .. S_M`` from the start block ``S0``."""
    return QuadraturePass(A, rule, solver, threads).moments(S0, M)


def low_rank(S, delta):
    """Truncated SVD keeping singular values ``>= delta * max``.

    Raises :class:`DegenerateSubspaceError` when ``S`` is identically zero.
    """
    S = np.asarray(S, dtype=float)
    if not np.any(S):
        raise DegenerateSubspaceError("moment matrix is zero; the filter annihilated every direction")
    U, s, Wt = np.linalg.svd(S, full_matrices=False)
    r = max(1, int(np.count_nonzero(s >= delta * s[0])))
    return ReducedBasis(U=U[:, :r], sigma=s[:r], W=Wt[:r].T)
