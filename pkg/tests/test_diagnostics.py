import numpy as np

from sssvd.diagnostics import galerkin_residuals, moment_identity_errors, oracle_floor, verify_run
from sssvd.moments import MomentBlocks, SsParams
from sssvd.oracle import OracleSVD

from conftest import INTERVAL_1


def test_verify_model1_passes(model1):
    A, truth = model1
    report = verify_run(A, INTERVAL_1, truth, SsParams(), threads=1)
    assert report.passed, [c for c in report.checks if not c.passed]
    names = {c.name for c in report.checks}
    assert "lhs_v nonincreasing from ell=1 to ell=2" in names
    assert set(report.bounds) == {1, 2}


def test_verify_detects_corrupted_basis(model1):
    A, truth = model1
    noise = np.random.default_rng(0)
    report = verify_run(A, INTERVAL_1, truth, SsParams(), basis_hook=lambda U: U + 1e-2 * noise.standard_normal(U.shape))
    failed = [c.name for c in report.checks if not c.passed]
    assert "ell=1: Galerkin identity" in failed


def test_verify_exp_mode_skips_bound(model1):
    A, truth = model1
    report = verify_run(A, INTERVAL_1, truth, SsParams(), mode="ss-svd-nt", threads=1)
    bound_checks = [c for c in report.checks if "bound" in c.name]
    assert bound_checks and all("skipped" in c.detail for c in bound_checks)
    assert report.passed


def test_moment_identity_errors_exact_powers(rng):
    G = np.diag([1.0, 2.0, 3.0])
    S0 = rng.standard_normal((3, 2))
    blocks = MomentBlocks((S0, G @ S0, G @ G @ S0, G @ G @ G @ S0))
    np.testing.assert_allclose(moment_identity_errors(blocks, G), 0.0, atol=1e-16)


def test_galerkin_residuals_and_floor(runs, model1):
    A, truth = model1
    assert galerkin_residuals(A, runs["m1", "ss-svd"].triplets).max() <= 1e-13
    exact = OracleSVD(U=truth.U, sigma=truth.sigma, V=truth.V)
    assert oracle_floor(exact) < 1e-12
