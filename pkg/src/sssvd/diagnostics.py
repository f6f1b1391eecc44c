"""Invariant checks run against oracle factors: subspace error bound, moment identity, Galerkin identity."""

from dataclasses import dataclass, field, replace

import numpy as np

from .contour import TransformKind
from .moments import SsParams
from .oracle import error_bound_report
from .pipeline import solve
from .shifted_solver import form_gram, orient

MOMENT_TOL = 1e-8
GALERKIN_TOL = 1e-10
LHS_FLOOR = 1e-14


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass(eq=False)
class VerifyReport:
    checks: list = field(default_factory=list)
    bounds: dict = field(default_factory=dict)
    results: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)


def moment_identity_errors(blocks, gram):
    """``||S_k - G^k S_0||_F / ||G^k S_0||_F`` for ``k = 1 .. M-1``."""
    S0 = blocks.blocks[0]
    errors = []
    GkS0 = S0
    for Sk in blocks.blocks[1:-1]:
        GkS0 = gram @ GkS0
        errors.append(np.linalg.norm(Sk - GkS0) / np.linalg.norm(GkS0))
    return np.array(errors)


def galerkin_residuals(A, triplets):
    """``||A v_i - sigma_i u_i||_2`` for every triplet (working orientation)."""
    R = np.asarray(A @ triplets.V) - triplets.U * triplets.sigma
    return np.linalg.norm(R, axis=0)


def _in_interval(report, interval):
    a, b = interval
    return (report.sigma >= a) & (report.sigma <= b)


def oracle_floor(oracle):
    """Accuracy floor of oracle singular vectors, from their loss of orthogonality."""
    V = oracle.V
    return max(LHS_FLOOR, float(np.linalg.norm(V.T @ V - np.eye(V.shape[1]))))


def verify_run(A, interval, oracle, params=None, mode="ss-svd", threads=1, basis_hook=None, lhs_floor=LHS_FLOOR):
    """Run the solver at ``ell`` and ``ell + 1`` and check every invariant.

    ``oracle`` holds exact (or oracle-computed) factors of ``A`` in its
    working orientation (``m >= n``).  Subspace errors below ``lhs_floor``
    count as converged in the monotonicity check; pass
    :func:`oracle_floor` when the factors come from a numerical SVD.
    """
    params = params or SsParams()
    A, _ = orient(A)
    report = VerifyReport()
    norm_A = float(oracle.sigma[0])
    gram = form_gram(A)

    for ell in (params.ell, params.ell + 1):
        p = replace(params, ell=ell)
        hook = basis_hook if ell == params.ell else None
        result = solve(A, interval, p, mode=mode, threads=threads, basis_hook=hook)
        report.results[ell] = result
        if result.basis is None:
            report.checks.append(Check(f"ell={ell}: nonempty subspace", True, "annihilated; nothing to check"))
            continue

        if result.rule.transform.kind is TransformKind.IDENTITY:
            err = moment_identity_errors(result.blocks, gram)
            report.checks.append(
                Check(f"ell={ell}: moment identity", bool(np.all(err <= MOMENT_TOL)), f"max rel error {err.max():.3e}")
            )

        ok = result.triplets.valid
        gal = galerkin_residuals(A, result.triplets.take(np.flatnonzero(ok))) if ok.any() else np.zeros(0)
        worst = float(gal.max()) if gal.size else 0.0
        report.checks.append(
            Check(
                f"ell={ell}: Galerkin identity",
                worst <= GALERKIN_TOL * norm_A,
                f"max ||A v - sigma u|| = {worst:.3e} (limit {GALERKIN_TOL * norm_A:.3e})",
            )
        )

        if params.L * params.M < A.shape[1]:
            bound = error_bound_report(
                A, result.rule, p.L, p.M, ell, oracle, result.start, result.basis.U, result.left_basis
            )
            report.bounds[ell] = bound
            sel = _in_interval(bound, interval)
            if bound.conclusive and not bound.approximate:
                held = bound.holds()[sel]
                report.checks.append(
                    Check(
                        f"ell={ell}: subspace error bound",
                        bool(np.all(held)),
                        f"{int(held.sum())}/{held.size} in-interval indices within the bound",
                    )
                )
            else:
                reason = bound.note or "exp transform: bound is approximate"
                report.checks.append(Check(f"ell={ell}: subspace error bound", True, f"skipped ({reason})"))

    lo, hi = params.ell, params.ell + 1
    if lo in report.bounds and hi in report.bounds:
        b1, b2 = report.bounds[lo], report.bounds[hi]
        sel = _in_interval(b1, interval)
        mono = (b2.lhs_v <= b1.lhs_v) | (b2.lhs_v <= lhs_floor)
        report.checks.append(
            Check(
                f"lhs_v nonincreasing from ell={lo} to ell={hi}",
                bool(np.all(mono[sel])),
                f"{int(mono[sel].sum())}/{int(sel.sum())} indices",
            )
        )
    return report
