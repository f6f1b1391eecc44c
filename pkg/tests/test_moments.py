import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from sssvd.contour import EXP, build_contour
from sssvd.errors import ConfigError, DegenerateSubspaceError
from sssvd.filters import eval_filter
from sssvd.moments import MomentBlocks, QuadraturePass, SsParams, build_moments, low_rank, random_start, refine_s0
from sssvd.oracle import jacobi_svd
from sssvd.shifted_solver import DenseGramSolver, form_gram


def synthetic(rng, sigma, m=None):
    n = sigma.size
    m = m or n + 10
    U, _ = np.linalg.qr(rng.standard_normal((m, n)))
    V, _ = np.linalg.qr(rng.standard_normal((n, n)))
    return (U * sigma) @ V.T, V


def max_angle(X, Y):
    return np.max(scipy.linalg.subspace_angles(X, Y))


def test_params_validation():
    SsParams().check_dimension(80)
    with pytest.raises(ConfigError):
        SsParams().check_dimension(79)
    for bad in (dict(L=0), dict(N=31), dict(N=2), dict(delta=0.0), dict(delta=1.0), dict(eps=0.0), dict(ell=0)):
        with pytest.raises(ConfigError):
            SsParams(**bad)


def test_random_start_is_reproducible():
    a, b = random_start(200, 20, 7), random_start(200, 20, 7)
    assert np.array_equal(a, b)
    assert np.all(np.abs(a) <= 1)
    assert np.linalg.norm(a - random_start(200, 20, 8)) > 0


def test_random_start_full_rank():
    s = jacobi_svd(random_start(200, 20, 0)).sigma
    assert s[-1] > 0.1


def test_random_start_rejects_wide():
    with pytest.raises(ConfigError):
        random_start(5, 6)


def test_refine_applies_filter_per_mode(rng):
    sigma = np.linspace(0.85, 1.15, 30)
    A, V = synthetic(rng, sigma)
    rule = build_contour(0.8, 1.2)
    S0 = rng.uniform(-1, 1, (30, 5))
    expected = V @ (eval_filter(rule, sigma).real[:, None] * (V.T @ S0))
    out = refine_s0(A, rule, S0)
    assert np.linalg.norm(out - expected) <= 1e-10 * np.linalg.norm(expected)


def test_refine_all_inside_is_near_identity_subspace(rng):
    # a circular contour with interior values well away from it gives f = 1 to roundoff
    sigma = np.sqrt(np.linspace(0.9, 1.2, 30))
    A, _ = synthetic(rng, sigma)
    rule = build_contour(0.8, 1.2, 64, 1.0)
    S0 = rng.uniform(-1, 1, (30, 5))
    S1 = refine_s0(A, rule, S0)
    S2 = refine_s0(A, rule, S1)
    assert max_angle(S1, S2) <= 1e-8
    assert max_angle(S0, S1) <= 1e-8


def test_refine_all_outside_is_annihilated(rng):
    sigma = np.linspace(3.0, 5.0, 30)
    A, _ = synthetic(rng, sigma)
    S0 = rng.uniform(-1, 1, (30, 5))
    out = refine_s0(A, build_contour(0.8, 1.2), S0)
    assert np.linalg.norm(out) / np.linalg.norm(S0) <= 1e-6


def test_refine_preserves_inside_vectors(rng):
    sigma = np.concatenate([np.linspace(0.1, 0.5, 20), np.linspace(0.9, 1.1, 6), np.linspace(1.6, 2.0, 14)])
    A, V = synthetic(rng, sigma)
    inside = V[:, (sigma >= 0.8) & (sigma <= 1.2)]
    out = refine_s0(A, build_contour(0.8, 1.2), inside)
    assert max_angle(out, inside) <= 1e-8


def test_one_factorization_per_half_node(rng):
    A = rng.standard_normal((40, 12))

    class Counting:
        def __init__(self, inner):
            self.inner, self.calls = inner, 0

        def factor(self, z):
            self.calls += 1
            return self.inner.factor(z)

    solver = Counting(DenseGramSolver(A))
    qp = QuadraturePass(A, build_contour(1.0, 3.0, 16), solver)
    S = qp.apply_filter(rng.standard_normal((12, 2)))
    qp.moments(S, 3)
    assert solver.calls == 8


def test_moment_identity_on_model_gram(model1):
    A, _ = model1
    G = form_gram(A)
    S0 = random_start(200, 20, 0)
    blocks = build_moments(A, build_contour(0.8, 1.2), S0, 4)
    assert blocks.M == 4
    GkS0 = blocks.blocks[0]
    for k in range(1, 4):
        GkS0 = G @ GkS0
        assert np.linalg.norm(blocks.blocks[k] - GkS0) / np.linalg.norm(GkS0) <= 1e-8


def test_exp_moments_follow_log_gram(model2):
    A, truth = model2
    lam = np.log(truth.sigma**2)
    S0 = random_start(200, 20, 0)
    blocks = build_moments(A, build_contour(1e-3, 1e-1, transform=EXP), S0, 4)
    V = truth.V
    Ck = V.T @ blocks.blocks[0]
    for k in range(1, 4):
        Ck = lam[:, None] * Ck
        target = V @ Ck
        assert np.linalg.norm(blocks.blocks[k] - target) / np.linalg.norm(target) <= 1e-4


def test_single_moment_stacks():
    b0, b1 = np.ones((5, 2)), 2 * np.ones((5, 2))
    blocks = MomentBlocks((b0, b1))
    assert np.array_equal(blocks.stacked, b0)
    assert np.array_equal(blocks.stacked_plus, b1)


def test_stacked_plus_is_shifted():
    bs = tuple(np.full((3, 2), k, dtype=float) for k in range(5))
    blocks = MomentBlocks(bs)
    assert np.array_equal(blocks.stacked[:, 2:], blocks.stacked_plus[:, :-2])


def test_threaded_moments_are_bit_identical(model1):
    A, _ = model1
    rule = build_contour(0.8, 1.2)
    S0 = random_start(200, 20, 3)
    one = QuadraturePass(A, rule, threads=1).moments(S0, 4)
    four = QuadraturePass(A, rule, threads=4).moments(S0, 4)
    for x, y in zip(one.blocks, four.blocks):
        assert np.array_equal(x, y)


def test_low_rank_orthonormal():
    Q, _ = np.linalg.qr(np.random.default_rng(0).standard_normal((10, 4)))
    basis = low_rank(Q, 1e-12)
    assert basis.rank == 4
    np.testing.assert_allclose(basis.sigma, 1.0, rtol=1e-14)


def test_low_rank_duplicate_column():
    x = np.arange(1.0, 6.0)[:, None]
    assert low_rank(np.hstack([x, x]), 1e-12).rank == 1


def test_low_rank_zero():
    with pytest.raises(DegenerateSubspaceError):
        low_rank(np.zeros((4, 3)), 1e-12)


def test_low_rank_on_model1_keeps_all_targets(model1):
    A, truth = model1
    blocks = build_moments(A, build_contour(0.8, 1.2), random_start(200, 20, 0), 4)
    basis = low_rank(blocks.stacked, 1e-20)
    t = np.count_nonzero((truth.sigma >= 0.8) & (truth.sigma <= 1.2))
    assert t == 40
    assert basis.rank >= t


def test_subspace_property_model1(model1):
    A, truth = model1
    blocks = build_moments(A, build_contour(0.8, 1.2), random_start(200, 20, 0), 4)
    basis = low_rank(blocks.stacked, 1e-20)
    inside = truth.V[:, (truth.sigma >= 0.8) & (truth.sigma <= 1.2)]
    # the in-interval right singular subspace lies inside span(U_S1)
    leftover = inside - basis.U @ (basis.U.T @ inside)
    assert np.linalg.norm(leftover, 2) <= 1e-6


@settings(max_examples=40, deadline=None)
@given(m=st.integers(2, 20), k=st.integers(1, 8), seed=st.integers(0, 2**31), delta=st.floats(1e-14, 0.5))
def test_low_rank_threshold_and_error(m, k, seed, delta):
    S = np.random.default_rng(seed).standard_normal((m, k))
    s = np.linalg.svd(S, compute_uv=False)
    basis = low_rank(S, delta)
    r = basis.rank
    assert r >= 1
    assert np.all(basis.sigma >= delta * basis.sigma[0])
    assert r == np.count_nonzero(s >= delta * s[0])
    approx = basis.U * basis.sigma @ basis.W.T
    tail = s[r] if r < s.size else 0.0
    assert np.linalg.norm(S - approx, 2) <= tail + 1e-12 * s[0]
