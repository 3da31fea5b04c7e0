import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import eval_gegenbauer

from yamabe_clusters import correction as C
from yamabe_clusters.bubbles import kernel_field, sample_points
from yamabe_clusters.core import PreconditionError, SecondFundamentalForm, off_diagonal_form, params_from_D
from yamabe_clusters.fields import Polynomial


def _random_trace_free(m, rng):
    a = rng.normal(size=(m, m))
    a = a + a.T
    return a - np.trace(a) / m * np.eye(m)


@pytest.mark.parametrize("n", [4, 5, 6, 7])
def test_L_polynomial_identities(n):
    p = params_from_D(n, 1.7)
    x = sample_points(n, 100, 0)
    x1x2 = Polynomial.monomial(n, 0, 1)
    xn = Polynomial.monomial(n, n - 1)
    scale = 1 + np.max(np.abs(x1x2(x) * xn(x)))
    assert np.max(np.abs(C.L_operator(x1x2, p, x) - 2 * n * x1x2(x))) / scale <= 1e-13
    lhs = C.L_operator(x1x2 * xn, p, x)
    assert np.max(np.abs(lhs - 4 * n * x1x2(x) * xn(x) - 2 * n * p.D * x1x2(x))) / scale <= 1e-13
    q = x1x2 * (xn + Polynomial.constant(n, -p.D)) * (1 / (4 * n))
    assert np.max(np.abs(C.L_operator(q, p, x) - x1x2(x) * xn(x))) / scale <= 1e-13


@settings(max_examples=25, deadline=None)
@given(n=st.integers(5, 8), D=st.floats(1.05, 6), seed=st.integers(0, 10_000))
def test_wp_solves_its_equation_for_any_trace_free_form(n, D, seed):
    rng = np.random.default_rng(seed)
    h = SecondFundamentalForm(_random_trace_free(n - 1, rng))
    p = params_from_D(n, D)
    res, mag = C.wp_residual(p, h, sample_points(n, 40, seed % 97))
    assert np.max(np.abs(res) / mag) <= 1e-8


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 1000), s=st.floats(-3, 3))
def test_wp_linear_in_h(seed, s):
    rng = np.random.default_rng(seed)
    p = params_from_D(6, 1.5)
    a = SecondFundamentalForm(_random_trace_free(5, rng))
    b = SecondFundamentalForm(_random_trace_free(5, rng))
    ab = SecondFundamentalForm(a.h + s * b.h)
    x = sample_points(6, 20, 0)
    lhs = C.wp_value(p, ab, x)
    rhs = C.wp_value(p, a, x) + s * C.wp_value(p, b, x)
    assert np.allclose(lhs, rhs, rtol=1e-10, atol=1e-12)


@pytest.mark.parametrize("n", [5, 6, 7])
def test_decay_slopes(n):
    s0, s1 = C.decay_slopes(params_from_D(n, 2.0), off_diagonal_form(n - 1))
    assert abs(s0 - (3 - n)) <= 0.02 * (n - 3)
    assert abs(s1 - (2 - n)) <= 0.02 * (n - 2)


@pytest.mark.parametrize("n", [5, 6])
def test_orthogonality_to_kernel(n):
    p = params_from_D(n, 2.0)
    for i in range(1, n + 1):
        assert abs(C.orthogonality_check(p, off_diagonal_form(n - 1), i)) <= 1e-8


def test_half_space_integral_matches_moment():
    from yamabe_clusters.quadrature import half_space_moment

    p = params_from_D(5, 1.5)
    one = Polynomial.constant(5, 1.0)
    assert C.half_space_integral(p, one, 5.0) == pytest.approx(half_space_moment(p, 0, 5.0), rel=1e-9)


def test_wp_needs_n_at_least_5():
    with pytest.raises(PreconditionError):
        C.wp_field(params_from_D(4, 2.0), off_diagonal_form(3))


def test_n4_profiles_and_zp():
    p = params_from_D(4, 2.0)
    r = np.array([1.001, 1.5, 2.0, 5.0, 20.0, 300.0])
    e0, e1 = C.profile_ode_residuals(p, r)
    assert np.max(np.abs(e0)) <= 1e-10
    assert np.max(np.abs(e1)) <= 1e-10
    res, mag = C.zp_residual(p, sample_points(4, 200, 0))
    assert np.max(np.abs(res) / mag) <= 1e-8
    with pytest.raises(PreconditionError):
        C.profile_ode_residuals(p, np.array([0.5]))


@pytest.mark.parametrize("seed", [0, 1])
def test_leading_n4_profile_remainder_bounded(seed):
    p = params_from_D(4, 1.6)
    h = SecondFundamentalForm(_random_trace_free(3, np.random.default_rng(seed)))
    direction = np.array([0.5, 0.3, -0.4, 0.7])
    direction /= np.linalg.norm(direction)
    ray = np.outer(np.geomspace(1.0, 1e3, 40), direction)
    rem = np.abs(C.wbar0_remainder(p, h, ray))
    assert np.all(np.isfinite(rem))
    # bounded: the tail does not grow relative to the bulk of the ray
    assert rem[-10:].max() <= 10 * rem[:10].max() + 1e-12


@pytest.fixture(scope="module")
def small_psi():
    return C.psi_mode_solve(params_from_D(5, 2.0), modes=200, shooting_modes=10)


def test_psi_solvable_above_resonance(small_psi):
    assert small_psi.solvability_margin > 0
    assert np.all(np.isfinite(small_psi.amplitudes))


def test_psi_shooting_and_hypergeometric_ratios_join(small_psi):
    from yamabe_clusters.spectral import robin_ratio_hypergeometric

    _, T = small_psi.geometry
    mus = small_psi.robin_ratios
    assert mus[9] == pytest.approx(robin_ratio_hypergeometric(5, 11, T), rel=1e-8)
    assert np.all(np.diff(mus) > 0)


def test_psi_datum_coefficients_match_projection_quadrature(small_psi):
    from scipy.integrate import quad
    from scipy.special import gamma

    p = small_psi.params
    lam = small_psi.lam
    n = p.n
    for k in range(6):
        num = quad(lambda s: eval_gegenbauer(k, lam, s) * (1 - s * s) ** (lam - 0.5) / (1 - s) ** 2,
                   -1, 1, epsabs=0, epsrel=1e-12, limit=200)[0]
        norm = math.pi * 2 ** (1 - 2 * lam) * gamma(k + 2 * lam) / (math.factorial(k) * (k + lam) * gamma(lam) ** 2)
        expected = 2.0 ** (-n / 2) * (p.D ** 2 - 1) * num / norm
        assert small_psi.datum_coefficients[k] == pytest.approx(expected, rel=1e-9)


def test_psi_datum_series_converges_toward_datum():
    p = params_from_D(5, 2.0)
    errors = []
    for modes in (100, 400):
        psi = C.psi_mode_solve(p, modes=modes, shooting_modes=1)
        series = sum(ck * eval_gegenbauer(k, psi.lam, 0.5) for k, ck in enumerate(psi.datum_coefficients))
        errors.append(abs(series - 2.0 ** -2.5 * 3 / 0.25))
    # the datum is only borderline square-integrable at the pole, so convergence is slow but monotone
    assert errors[1] < 0.6 * errors[0]


def test_psi_boundary_pairing_converges(small_psi):
    t_small, _ = small_psi.truncated(100).boundary_pairing()
    t_full, err = small_psi.boundary_pairing()
    assert abs(t_small - t_full) <= 1e-3 * abs(t_full)
    assert err <= 1e-3 * abs(t_full)


def test_psi_rejects_n4():
    with pytest.raises(PreconditionError):
        C.psi_mode_solve(params_from_D(4, 2.0))


def test_f_n_positive_and_parts(psi_case_n5):
    fc = psi_case_n5.constants
    assert fc.f_n > 0
    assert fc.f_n == pytest.approx(psi_case_n5.params.c_n * (fc.interior_part + fc.boundary_part + fc.psi_part))
    assert fc.psi_error <= 1e-5 * fc.f_n


def test_displayed_gamma_coefficients_are_half_of_derived(psi_case_n5):
    p = psi_case_n5.params
    fc = psi_case_n5.constants
    di, db = C.f_n_displayed_coefficients(p)
    assert di == pytest.approx(fc.interior_part / 2, rel=1e-10)
    assert db == pytest.approx(fc.boundary_part / 2, rel=1e-10)


def test_kernel_field_index_validation():
    with pytest.raises(PreconditionError):
        kernel_field(params_from_D(5, 2.0), 6)
    assert math.isfinite(C.beta(params_from_D(5, 2.0)))


def test_psi_interior_equation_by_finite_differences(small_psi):
    from yamabe_clusters.core import denom

    p = small_psi.params
    h = 1e-3
    f = lambda y: small_psi.value(y[None, :])[0]
    for x in (np.array([0.3, 0.4, -0.2, 0.1, 0.5]), np.array([1.0, 0.7, 0.3, -0.4, 1.2])):
        lap = sum((f(x + h * e) - 2 * f(x) + f(x - h * e)) / h ** 2 for e in np.eye(5))
        pot = 35 / denom(p, x[None, :])[0] ** 2 * f(x)
        assert abs(pot - lap) <= 1e-4 * (abs(lap) + abs(pot))


@pytest.mark.parametrize("xt", [[0.5, 0.4, 0.1, -0.2], [1.0, -0.8, 0.3, 0.2]])
def test_psi_robin_boundary_condition(psi_case_n5, xt):
    """-d_n psi - (nD/lam) psi = x1 x2 lam^{-n/2} on x_n = 0, lam = |x~|^2 + D^2 - 1.

    The normal derivative of the mode series converges slowly and oscillates
    in the mode count, so the last two checkpoints are averaged.
    """
    psi = psi_case_n5.psi
    n, D = 5, psi_case_n5.params.D
    xt = np.array(xt)
    lam = xt @ xt + D * D - 1
    h = 0.02
    pts = np.array([np.r_[xt, k * h] for k in range(5)])
    ratios = []
    for v in psi.partial_values(pts, [1200, 1600]):
        dn = (-25 * v[0] + 48 * v[1] - 36 * v[2] + 16 * v[3] - 3 * v[4]) / (12 * h)
        ratios.append((-dn - n * D / lam * v[0]) / (xt[0] * xt[1] * lam ** (-n / 2)))
    assert np.mean(ratios) == pytest.approx(1.0, abs=0.03)


def test_psi_odd_in_first_tangential_coordinate(small_psi):
    x = sample_points(5, 20, 5)
    flipped = x.copy()
    flipped[:, 0] *= -1
    assert np.allclose(small_psi.value(flipped), -small_psi.value(x), rtol=1e-12, atol=1e-15)


def test_f_n_scaling_with_curvature(psi_case_n5):
    from yamabe_clusters.core import make_params

    base = psi_case_n5.params
    lam = 2.0
    scaled = make_params(5, base.K * lam ** 2, base.H * lam)
    fc = C.f_constants(scaled, psi=psi_case_n5.psi)
    assert fc.f_n == pytest.approx(psi_case_n5.constants.f_n * abs(lam ** 2) ** (-(5 - 2) / 2), rel=1e-10)


@pytest.mark.parametrize("n", [5, 6, 7])
@pytest.mark.parametrize("D", [1.5, 2.0])
def test_f_n_nonnegative(n, D):
    p = params_from_D(n, D)
    fc = C.f_constants(p, psi=C.psi_mode_solve(p, modes=400, shooting_modes=8))
    assert fc.f_n >= -1e-10
