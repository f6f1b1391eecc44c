import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sssvd.contour import EXP, IDENTITY, build_contour
from sssvd.errors import ConfigError, NumericalError
from sssvd.filters import convergence_ratio, eval_filter, eval_filter_half, filter_profile
from sssvd.moments import QuadraturePass
from sssvd.problems import Model, model_spectrum

# 40-digit references for [1e-3, 1e-1], N = 32, alpha = 0.1 at sigma = 1e-5
IDENTITY_AT_1E5 = 0.48263810147985456456
CENTER_GAIN = 0.92247223488942861474


def test_center_gain_of_flat_ellipse():
    rule = build_contour(0.8, 1.2, 32, 0.1)
    f = eval_filter(rule, np.sqrt(rule.center))
    assert abs(f.imag) <= 1e-14
    assert f.real == pytest.approx(CENTER_GAIN, rel=1e-13)


def test_center_gain_of_circle_is_one():
    rule = build_contour(0.8, 1.2, 32, 1.0)
    assert abs(eval_filter(rule, np.sqrt(rule.center))) == pytest.approx(1.0, abs=1e-6)


def test_center_gain_with_dense_rule_is_one():
    rule = build_contour(0.8, 1.2, 10**6, 0.1)
    assert abs(eval_filter(rule, np.sqrt(rule.center))) == pytest.approx(1.0, abs=1e-6)


def test_decay_far_outside():
    rule = build_contour(0.8, 1.2, 32, 0.1)
    assert abs(eval_filter(rule, 12.0)) <= 1e-4


def test_identity_filter_near_half_below_interval():
    f = abs(eval_filter(build_contour(1e-3, 1e-1, 32, 0.1, IDENTITY), 1e-5))
    assert f == pytest.approx(IDENTITY_AT_1E5, rel=1e-12)
    assert 0.4 <= f <= 0.6


def test_exp_filter_suppresses_below_interval():
    assert abs(eval_filter(build_contour(1e-3, 1e-1, 32, 0.1, EXP), 1e-5)) <= 1e-4


def test_profiles_on_wide_interval_share_shape():
    ident = filter_profile(build_contour(0.8, 1.2), 0.5, 2.0, 301)
    exp = filter_profile(build_contour(0.8, 1.2, transform=EXP), 0.5, 2.0, 301)
    inside = (ident.grid >= 0.8) & (ident.grid <= 1.2)
    for prof in (ident, exp):
        assert np.all(prof.values[inside] >= 0.49)
        assert np.all(prof.values[ident.grid >= 1.5] <= 1e-6)
    # same plateau level away from the endpoints and the same crossing at a and b
    core = (ident.grid >= 0.9) & (ident.grid <= 1.1)
    assert np.max(np.abs(ident.values[core] - exp.values[core])) <= 0.1
    np.testing.assert_allclose(np.abs(eval_filter(ident.rule, [0.8, 1.2])),
                               np.abs(eval_filter(exp.rule, [0.8, 1.2])), rtol=1e-10)


def test_log_profile_contrast_below_interval():
    ident = filter_profile(build_contour(1e-3, 1e-1), 1e-6, 1.0, 121, log_spacing=True)
    exp = filter_profile(build_contour(1e-3, 1e-1, transform=EXP), 1e-6, 1.0, 121, log_spacing=True)
    below = ident.grid < 5e-4
    assert np.all(np.abs(ident.values[below] - 0.5) <= 0.1)
    assert np.all(exp.values[below] <= 1e-4)
    # exp filter rises towards a and falls again past b
    rising = (exp.grid > 1e-4) & (exp.grid <= 1e-3)
    assert np.all(np.diff(exp.values[rising]) >= 0)
    assert np.all(exp.values[exp.grid > 0.5] <= 1e-3)


def test_single_point_profile():
    rule = build_contour(0.8, 1.2)
    prof = filter_profile(rule, 0.9, 0.9, 1)
    assert prof.grid.tolist() == [0.9]
    assert prof.values[0] == abs(eval_filter(rule, 0.9))


@pytest.mark.parametrize("args", [(0.5, 2.0, 0), (0.0, 1.0, 10), (2.0, 1.0, 10)])
def test_profile_errors(args):
    with pytest.raises(ConfigError):
        filter_profile(build_contour(0.8, 1.2), *args)


def test_profile_csv(tmp_path):
    rule = build_contour(0.8, 1.2)
    prof = filter_profile(rule, 0.5, 2.0, 5)
    path = tmp_path / "f.csv"
    prof.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# transform=")
    assert "sigma,abs_f" in lines
    body = np.loadtxt(path, delimiter=",", comments="#", skiprows=lines.index("sigma,abs_f") + 1)
    np.testing.assert_array_equal(body[:, 0], prof.grid)
    np.testing.assert_array_equal(body[:, 1], prof.values)


def test_convergence_ratio():
    rule = build_contour(0.8, 1.2)
    r1 = convergence_ratio(rule, np.sqrt(rule.center), 3.0, 1)
    assert r1 <= 1e-4
    r2 = convergence_ratio(rule, 1.0, 0.75, 2)
    assert r2 == pytest.approx(convergence_ratio(rule, 1.0, 0.75, 1) ** 2, rel=1e-14)


def test_convergence_ratio_guard():
    with pytest.raises(NumericalError):
        convergence_ratio(build_contour(0.8, 1.2), 1e20, 1.0)


def test_model2_ratio_contrast():
    sigma = model_spectrum(Model.LOG_UNIFORM)
    inside = (sigma >= 1e-3) & (sigma <= 1e-1)
    worst = {}
    for tr in (IDENTITY, EXP):
        rule = build_contour(1e-3, 1e-1, transform=tr)
        absf = np.abs(eval_filter(rule, sigma))
        ref = sigma[np.argsort(-absf, kind="stable")[80]]
        worst[tr.kind] = max(convergence_ratio(rule, s, ref) for s in sigma[inside])
    assert worst[IDENTITY.kind] > 0.5
    assert worst[EXP.kind] < 1e-3


def test_rank_one_gain_matches_filter(rng):
    u = rng.standard_normal(30)
    v = rng.standard_normal(12)
    u, v = u / np.linalg.norm(u), v / np.linalg.norm(v)
    rule = build_contour(0.5, 1.5)
    for s in (0.3, 0.7, 1.0, 1.4, 2.0):
        A = s * np.outer(u, v)
        S = rng.uniform(-1, 1, (12, 3))
        out = QuadraturePass(A, rule).apply_filter(S)
        np.testing.assert_allclose(v @ out, eval_filter(rule, s).real * (v @ S), rtol=1e-10, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(
    a=st.floats(1e-4, 2.0),
    width=st.floats(1e-2, 3.0),
    half=st.integers(2, 32),
    alpha=st.floats(0.02, 1.0),
    exp=st.booleans(),
    sigma=st.lists(st.floats(0.0, 10.0), min_size=1, max_size=8),
)
def test_filter_real_and_half_consistent(a, width, half, alpha, exp, sigma):
    rule = build_contour(a, a + width, 2 * half, alpha, EXP if exp else IDENTITY)
    f = eval_filter(rule, sigma)
    scale = np.sum(np.abs(rule.weights) / np.abs(rule.shifts[None, :] - np.square(sigma)[:, None]), axis=1)
    assert np.all(np.abs(f.imag) <= 1e-13 * np.maximum(np.abs(f), scale))
    np.testing.assert_allclose(eval_filter_half(rule, sigma), f.real, rtol=0, atol=1e-14 * scale.max())


@settings(max_examples=30, deadline=None)
@given(lo=st.floats(1e-3, 1.0), span=st.floats(1.01, 100.0), points=st.integers(2, 200), log=st.booleans())
def test_profile_grid_increasing_and_nonnegative(lo, span, points, log):
    prof = filter_profile(build_contour(0.5, 1.0), lo, lo * span, points, log)
    assert np.all(np.diff(prof.grid) > 0)
    assert np.all(prof.values >= 0)
