"""End-to-end driver: contour -> moments -> low-rank basis -> extraction -> post-processing."""

import contextlib
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .contour import DEFAULT_ALPHA, EXP, IDENTITY, TransformKind, build_contour
from .errors import CalibrationError, ConfigError, DegenerateSubspaceError, SsSvdError
from .extract import TripletSet, assemble_triplets, naive_eigen_route, project_qr, svd_small
from .moments import QuadraturePass, SsParams, low_rank, random_start
from .postprocess import (
    ResidualReport,
    SpuriousVerdict,
    detect_spurious,
    estimate_residual_linear,
    estimate_residual_nonlinear,
    exact_residual,
)
from .shifted_solver import DenseGramSolver, orient

MODES = {
    "ss-svd": (IDENTITY, "two-sided"),
    "ss-svd-nt": (EXP, "two-sided"),
    "naive": (IDENTITY, "naive"),
    "naive-nt": (EXP, "naive"),
}
STEP_GROUPS = ("steps_1_2", "step_3", "step_4", "step_5")
ANNIHILATED_GAIN = 1e-12


@dataclass(eq=False)
class SolveResult:
    triplets: object
    verdict: object
    residuals: ResidualReport
    basis: object
    blocks: object
    rule: object
    params: SsParams
    mode: str
    start: np.ndarray
    left_basis: np.ndarray = None
    transposed: bool = False
    filter_gain: float = float("nan")
    timings: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    @property
    def selected(self):
        """Mask of in-interval, non-spurious triplets."""
        return self.triplets.in_interval & ~self.verdict.spurious

    @property
    def count(self):
        return int(np.count_nonzero(self.selected))

    @property
    def rank(self):
        return 0 if self.basis is None else self.basis.rank


class _Timer:
    def __init__(self):
        self.seconds = {key: 0.0 for key in STEP_GROUPS}
        self.seconds["postprocess"] = 0.0

    @contextlib.contextmanager
    def __call__(self, group, label):
        start = time.perf_counter()
        try:
            yield
        except SsSvdError as exc:
            if exc.step is None:
                exc.step = label
            raise
        finally:
            self.seconds[group] += time.perf_counter() - start

    def report(self):
        out = dict(self.seconds)
        out["total"] = sum(out[key] for key in STEP_GROUPS)
        return out


def parse_mode(mode):
    try:
        return MODES[mode]
    except KeyError:
        raise ConfigError(f"unknown mode {mode!r}; choose from {sorted(MODES)}") from None


def solve(
    A,
    interval,
    params=None,
    mode="ss-svd",
    alpha=DEFAULT_ALPHA,
    threads=1,
    solver=None,
    start=None,
    exact_residuals=True,
    basis_hook=None,
):
    """Compute the singular triplets of ``A`` with singular values in ``interval``.

    Parameters
    ----------
    A : ndarray or scipy sparse matrix
        Real ``m x n`` matrix; wide inputs are transposed internally and the
        singular vectors swapped back on output.
    interval : (float, float)
        Target interval ``[a, b]``.
    params : SsParams
        Block size, moment degree, quadrature count, refinement steps and
        thresholds.
    mode : str
        ``ss-svd``, ``ss-svd-nt`` (exp transform), ``naive`` or ``naive-nt``.
    threads : int
        Workers for the per-node shifted solves.
    solver : object, optional
        Shifted-solve backend with a ``factor(z)`` method; defaults to the
        dense Gram backend.
    start : (n, L) array, optional
        Start block; drawn from ``params.seed`` when omitted.
    exact_residuals : bool
        Also compute ``||A^T u - sigma v||`` for every triplet.
    basis_hook : callable, optional
        Test hook applied to ``U_S1`` before the right vectors are assembled.
    """
    params = params or SsParams()
    transform, extraction = parse_mode(mode)
    a, b = map(float, interval)
    A, transposed = orient(A)
    n = A.shape[1]
    params.check_dimension(n)
    rule = build_contour(a, b, params.N, alpha, transform)
    if start is None:
        start = random_start(n, params.L, params.seed)
    timer = _Timer()
    notes = []

    with timer("steps_1_2", "steps 1-2 (quadrature solves)"):
        if solver is None:
            solver = DenseGramSolver(A)
        qp = QuadraturePass(A, rule, solver, threads)
        S0 = start
        for _ in range(params.ell - 1):
            S0 = qp.apply_filter(S0)
        blocks = qp.moments(S0, params.M)
    gain = float(np.linalg.norm(blocks.blocks[0]) / np.linalg.norm(start))
    if gain < ANNIHILATED_GAIN:
        notes.append(
            f"filter gain {gain:.3g}: the start block was annihilated, so the interval "
            "appears to contain no singular values"
        )

    try:
        with timer("step_3", "step 3 (low-rank approximation)"):
            basis = low_rank(blocks.stacked, params.delta)
    except DegenerateSubspaceError as exc:
        notes.append(str(exc))
        return _empty_result(rule, params, mode, start, blocks, transposed, gain, timer, notes, A.shape)

    left_basis = None
    with timer("step_4", "step 4 (QR of A U_S1)"):
        if extraction == "two-sided":
            left_basis, B = project_qr(A, basis)
    assembly_basis = basis if basis_hook is None else replace(basis, U=basis_hook(basis.U))
    with timer("step_5", "step 5 (small SVD and assembly)"):
        if extraction == "two-sided":
            P, phi, Q = svd_small(B)
            triplets = assemble_triplets(left_basis, assembly_basis, P, phi, Q, (a, b))
        else:
            triplets = naive_eigen_route(A, assembly_basis, (a, b), gram=getattr(solver, "gram", None))

    with timer("postprocess", "post-processing"):
        verdict = detect_spurious(triplets, basis.sigma, params.eps)
        exact = exact_residual(A, triplets) if exact_residuals else None
        if rule.transform.kind is TransformKind.IDENTITY:
            residuals = ResidualReport(estimated=estimate_residual_linear(blocks, basis, triplets), exact=exact)
        else:
            try:
                residuals = estimate_residual_nonlinear(blocks, basis, triplets, A, rule.transform, verdict, exact)
            except CalibrationError as exc:
                notes.append(f"residual estimates left uncalibrated: {exc}")
                residuals = ResidualReport(estimated=np.full(triplets.count, np.nan), exact=exact)

    # ascending sigma, ties broken by the residual estimate
    order = np.lexsort((np.nan_to_num(residuals.estimated, nan=np.inf), triplets.sigma))
    triplets = triplets.take(order)
    verdict = replace(verdict, tau=verdict.tau[order], spurious=verdict.spurious[order])
    residuals = _reorder_residuals(residuals, order)
    if transposed:
        triplets = replace(triplets, U=triplets.V, V=triplets.U)

    return SolveResult(
        triplets=triplets,
        verdict=verdict,
        residuals=residuals,
        basis=basis,
        blocks=blocks,
        rule=rule,
        params=params,
        mode=mode,
        start=start,
        left_basis=left_basis,
        transposed=transposed,
        filter_gain=gain,
        timings=timer.report(),
        notes=notes,
    )


def _reorder_residuals(res, order):
    inverse = np.empty_like(order)
    inverse[order] = np.arange(order.size)
    return replace(
        res,
        estimated=res.estimated[order],
        exact=None if res.exact is None else res.exact[order],
        raw=None if res.raw is None else res.raw[order],
        calibration_index=None if res.calibration_index is None else int(inverse[res.calibration_index]),
    )


def _empty_result(rule, params, mode, start, blocks, transposed, gain, timer, notes, shape):
    m, n = shape
    empty = np.zeros(0)
    triplets = TripletSet(
        sigma=empty,
        U=np.zeros((m, 0)),
        V=np.zeros((n, 0)),
        Q=np.zeros((0, 0)),
        in_interval=np.zeros(0, dtype=bool),
        valid=np.zeros(0, dtype=bool),
    )
    if transposed:
        triplets = replace(triplets, U=triplets.V, V=triplets.U)
    verdict = SpuriousVerdict(tau=empty, eps=params.eps, threshold=0.0, spurious=np.zeros(0, dtype=bool))
    return SolveResult(
        triplets=triplets,
        verdict=verdict,
        residuals=ResidualReport(estimated=empty, exact=empty),
        basis=None,
        blocks=blocks,
        rule=rule,
        params=params,
        mode=mode,
        start=start,
        transposed=transposed,
        filter_gain=gain,
        timings=timer.report(),
        notes=notes,
    )


def accuracy(result, truth_sigma, rtol_boundary=1e-9):
    """Compare a run against exact singular values.

    Targets are the exact values strictly inside ``[a, b]``; values within
    ``rtol_boundary`` of an endpoint sit on the contour and are reported as
    boundary cases.  Each target is matched to the nearest non-spurious
    candidate, and each selected triplet to the nearest exact value.
    """
    a, b = result.rule.interval
    truth = np.sort(np.asarray(truth_sigma, dtype=float))
    near_a = np.abs(truth - a) <= rtol_boundary * np.maximum(truth, 1e-300)
    near_b = np.abs(truth - b) <= rtol_boundary * truth
    boundary = truth[near_a | near_b]
    targets = truth[(truth > a) & (truth < b) & ~near_a & ~near_b]

    keep = ~result.verdict.spurious & result.triplets.valid
    found = result.triplets.sigma[keep]
    selected = result.triplets.sigma[result.selected]

    if found.size:
        target_err = np.array([np.min(np.abs(found - t)) / t for t in targets])
    else:
        target_err = np.ones(targets.size)
    if selected.size:
        computed_err = np.array([np.min(np.abs(truth - s) / truth) for s in selected])
    else:
        computed_err = np.zeros(0)
    return {
        "targets": int(targets.size),
        "boundary": boundary.tolist(),
        "target_rel_errors": target_err,
        "computed_rel_errors": computed_err,
        "max_target_error": float(target_err.max()) if target_err.size else 0.0,
        "median_target_error": float(np.median(target_err)) if target_err.size else 0.0,
        "max_computed_error": float(computed_err.max()) if computed_err.size else 0.0,
        "median_computed_error": float(np.median(computed_err)) if computed_err.size else 0.0,
    }
