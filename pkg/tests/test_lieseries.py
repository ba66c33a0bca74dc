"""Lie engine: derivative, truncated exponentials, normal forms, budgets."""

import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from darblat.lieseries import (
    GAMMA_STAR,
    ExtendedField,
    FieldOrderError,
    default_domain,
    error_budget,
    exp_trunc,
    gauge_charge_poly,
    hamiltonian_poly,
    lie_derivative,
    moser_field_majorant,
    p_majorant,
    per_site_formula,
    poisson_bracket,
    transform_H,
    transform_P,
    z0_poly,
    z1_poly,
)
from darblat.polyring import Poly, radial_expand


def xy(D, n=1, j=0):
    return Poly.var(f"x{j}", n, D), Poly.var(f"y{j}", n, D)


# ---------------------------------------------------------------------------
# the Lie derivative
# ---------------------------------------------------------------------------

def test_lie_of_constant_vanishes():
    field = ExtendedField.moser(2)
    assert lie_derivative(Poly.constant(9, 1, 4), field) == Poly.zero(1, 4)


def test_lie_of_time_is_one():
    field = ExtendedField.moser(2)
    t = Poly.var("t", 1, 4)
    assert lie_derivative(t, field) == Poly.one(1, 4)


def test_lie_of_half_norm():
    x, y = xy(4)
    f = (x * x + y * y) * F(1, 2)
    out = lie_derivative(f, ExtendedField.moser(1, L=1))
    nu = Poly.param("nu", 1, 4)
    a = x * x + y * y
    assert out == nu * a * a * F(-1, 4)


def test_insufficient_field_order_names_requirement():
    x, _ = xy(8)
    field = ExtendedField.moser(1)   # uncapped but only expanded to s^1
    with pytest.raises(FieldOrderError, match="order 3"):
        lie_derivative(x, field)
    # with the field cap, the short expansion is the exact field
    lie_derivative(x, ExtendedField.moser(1, L=1))


def test_field_invariants():
    from darblat.polyring import RadialSeries

    with pytest.raises(ValueError):
        ExtendedField(RadialSeries([F(1), F(1)], 1))   # chi(t,0) != 0
    assert ExtendedField.moser(3, L=3).cap_degree == 7
    with pytest.raises(ValueError):
        ExtendedField(radial_expand("chi", 3), cap_degree=4)  # even cap
    with pytest.raises(FieldOrderError):
        ExtendedField(radial_expand("chi", 2), cap_degree=9)  # cap beyond series


@settings(max_examples=150, deadline=None)
@given(st.fractions(min_value=-4, max_value=4, max_denominator=8),
       st.fractions(min_value=-4, max_value=4, max_denominator=8),
       st.integers(0, 2), st.integers(0, 2), st.integers(0, 1), st.integers(0, 1))
def test_lie_linearity(a, b, px, py, pt1, pt2):
    D = 6
    x, y = xy(D)
    t = Poly.var("t", 1, D)
    f = x ** px * y ** py * t ** pt1
    g = y ** px * x ** py * t ** pt2
    field = ExtendedField.moser(3)
    lhs = lie_derivative(f * a + g * b, field)
    rhs = lie_derivative(f, field) * a + lie_derivative(g, field) * b
    assert lhs == rhs


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2), st.integers(0, 2), st.integers(0, 1), st.integers(0, 1))
def test_lie_leibniz(px, py, qx, qt):
    # degrees chosen so that no product term exceeds the cap: exact identity
    D = 10
    x, y = xy(D)
    t = Poly.var("t", 1, D)
    f = x ** px * y ** py
    g = x ** qx * t ** qt + y
    field = ExtendedField.moser(3, L=3)
    lhs = lie_derivative(f * g, field)
    rhs = f * lie_derivative(g, field) + lie_derivative(f, field) * g
    assert lhs == rhs


# ---------------------------------------------------------------------------
# truncated exponentials
# ---------------------------------------------------------------------------

def test_exp_trunc_k0_is_identity():
    x, y = xy(5)
    f = x * y + x
    assert exp_trunc(f, ExtendedField.moser(2), 0, -1, tau=1) == f


def test_exp_trunc_validations():
    x, _ = xy(4)
    field = ExtendedField.moser(2)
    with pytest.raises(ValueError):
        exp_trunc(x, field, -1, 1)
    with pytest.raises(ValueError):
        exp_trunc(x, field, 1, 2)


def test_forward_flow_cubic_part():
    # degree-3 part of the forward coordinate flow: -(nu/4)|z|^2 z
    D = 5
    x, y = xy(D)
    field = ExtendedField.moser(2)
    fx = exp_trunc(x, field, 2, +1, tau=0)
    fy = exp_trunc(y, field, 2, +1, tau=0)
    nu = Poly.param("nu", 1, D)
    a = x * x + y * y
    assert fx.phase_part(3) == nu * a * x * F(-1, 4)
    assert fy.phase_part(3) == nu * a * y * F(-1, 4)


@pytest.mark.parametrize("m", [1, 2, 3])
@pytest.mark.parametrize("K", [1, 2, 3])
def test_near_inversion(m, K):
    # composing the truncated forward and inverse series is the identity
    # up to terms at least two phase degrees above the test function
    D = 2 * m + 6
    x, y = xy(D)
    f = ((x * x + y * y) * F(1, 2)) ** m
    field = ExtendedField.moser((D - 2) // 2)
    fwd = exp_trunc(f, field, K, +1, tau=None)
    both = exp_trunc(fwd, field, K, -1, tau=None)
    resid = both - f
    if resid.terms:
        assert resid.min_phase_degree >= 2 * m + 2


# ---------------------------------------------------------------------------
# transporting the Gauge charge (transform_P)
# ---------------------------------------------------------------------------

def test_transform_p_k0():
    r = transform_P(0)
    assert r.min_s_degree == 2 and r.min_phase_degree == 4
    assert r.leading_fraction() == F(1, 4)   # residual s^2/(4 nu)


def test_transform_p_k1_series():
    r = transform_P(1)
    assert r.min_s_degree == 3
    assert r.leading_fraction() == F(1, 4)   # residual s^3/(4 nu)
    assert r.series_times_nu.coeff_fraction(4) == F(-5, 12)


@pytest.mark.parametrize("K", range(0, 7))
def test_transform_p_degree_law(K):
    assert transform_P(K).min_phase_degree == 2 * K + 4


@pytest.mark.parametrize("K,L,want", [(1, 4, 6), (3, 4, 10), (4, 4, 12),
                                      (5, 4, 12), (6, 4, 12), (6, 6, 16)])
def test_transform_p_capped_degree_law(K, L, want):
    assert transform_P(K, L=L).min_phase_degree == want


def test_transform_p_cap_l2_superconvergence():
    # the capped estimate only bounds the degree from below (here 8); at
    # L=2, K=6 the s^4 coefficient cancels at tau=1 and the residual starts
    # one order higher (frozen from an independent symbolic expansion)
    r = transform_P(6, L=2)
    assert r.min_phase_degree == 10
    assert r.leading_fraction() == F(-1, 360)
    assert r.series_times_nu.coeff_fraction(6) == F(-1, 1080)


def test_transform_p_order_contract():
    with pytest.raises(ValueError):
        transform_P(3, S=5)
    with pytest.raises(ValueError):
        transform_P(1, L=0)


def test_transform_p_residual_eval_matches_series():
    r = transform_P(1)
    nu = 0.5
    s_vals = [0.01, 0.003]
    direct = sum(r.series_times_nu.eval(s) for s in s_vals) / nu
    assert r.residual_value(s_vals, nu) == pytest.approx(direct, rel=1e-14)


# ---------------------------------------------------------------------------
# normal forms (transform_H)
# ---------------------------------------------------------------------------

def test_z0_reproduction():
    assert transform_H("salerno", 0, None, 4, 3) == z0_poly(3, 4)


def test_z0_reproduction_al():
    out = transform_H("al", 0, None, 4, 3)
    want = Poly(3, 4, {i: c for i, c in z0_poly(3, 4).terms.items()
                       if i.params[1] == 0})  # gamma = 0 member
    assert out == want


def test_z1_reproduction():
    assert transform_H("salerno", 1, 1, 6, 3) == z1_poly(3, 6)


def test_z1_per_site_coefficients():
    out = transform_H("salerno", 1, 1, 6, 3)
    x, y = xy(6, n=3, j=0)
    xn, yn = xy(6, n=3, j=1)
    gamma = Poly.param("gamma", 3, 6)
    eps = Poly.param("eps", 3, 6)
    nu = Poly.param("nu", 3, 6)
    a = x * x + y * y
    pick = out.phase_part(6)
    # quintic self term: gamma*nu/24 A^3 (site 0 monomial x0^6)
    mono_x6 = (gamma * nu * a * a * a * F(1, 24)).phase_part(6)
    for idx, c in mono_x6.terms.items():
        assert pick.coeff(idx) == c
    # quintic coupling: eps*nu/4 A ((x+ + x-)x + ...) contains x0^3 x1 with eps*nu/4
    probe = (eps * nu * a * (xn * x + yn * y) * F(1, 4)).phase_part(4)
    deg4 = out.phase_part(4)
    for idx, c in probe.terms.items():
        assert deg4.coeff(idx) == c


def test_quintic_assembly():
    # H0's own degree-6 Taylor piece (-gamma nu/12 A^3) plus the correction
    # from -L_{V3} H0,4 (+gamma nu/8 A^3) must sum to +gamma nu/24 A^3
    N, D = 3, 6
    H = hamiltonian_poly("salerno", N, D)
    h06 = Poly(N, D, {i: c for i, c in H.phase_part(6).terms.items()
                      if i.params[2] == 0})  # eps-free degree-6 part
    field = ExtendedField.moser(1, L=1)
    h04 = Poly(N, D, {i: c for i, c in H.phase_part(4).terms.items()
                      if i.params[2] == 0})
    corr = -lie_derivative(h04, field)
    gamma = Poly.param("gamma", N, D)
    nu = Poly.param("nu", N, D)
    want_h06 = Poly.zero(N, D)
    want_corr = Poly.zero(N, D)
    want_sum = Poly.zero(N, D)
    for j in range(N):
        x, y = xy(D, n=N, j=j)
        a3 = (x * x + y * y) ** 3
        want_h06 = want_h06 + gamma * nu * a3 * F(-1, 12)
        want_corr = want_corr + gamma * nu * a3 * F(1, 8)
        want_sum = want_sum + gamma * nu * a3 * F(1, 24)
    assert h06 == want_h06
    assert corr == want_corr
    assert h06 + corr == want_sum


def _transported_closed_form(N, D):
    """H composed with the inverse map, expanded directly from closed forms.

    Per site the onsite part collapses to gamma/(4 nu^2) * (e^s - 1 - s) and
    the coupling picks up the factor sigma(s_j) sigma(s_{j+1}); no Lie-series
    machinery is involved, only series substitution.
    """
    import math

    gamma = Poly.param("gamma", N, D)
    eps = Poly.param("eps", N, D)
    nu = Poly.param("nu", N, D)
    sig = [radial_expand("sigma", D // 2).to_site_poly(j, N, D) for j in range(N)]
    H = Poly.zero(N, D)
    for j in range(N):
        x, y = xy(D, n=N, j=j)
        xn, yn = xy(D, n=N, j=(j + 1) % N)
        a = x * x + y * y
        am = a
        for m in range(2, D // 2 + 1):
            am = am * a
            H = H + gamma * nu ** (m - 2) * am * F(1, 4 * math.factorial(m))
        H = H + eps * sig[j] * sig[(j + 1) % N] * (xn * x + yn * y)
    return H


@pytest.mark.parametrize("K", [3, 4])
def test_transform_matches_closed_form_change_of_variables(K):
    # end-to-end: the K-truncated inverse Lie transport must agree with the
    # closed-form substitution q = x sigma(s) through every degree-8 term
    assert transform_H("salerno", K, None, 8, 3) == _transported_closed_form(3, 8)


def test_transform_truncation_tail_degree():
    # one order lower, the mismatch starts exactly at degree 2K+4
    diff = transform_H("salerno", 2, None, 8, 3) - _transported_closed_form(3, 8)
    assert diff.min_phase_degree == 8


def test_transform_h_validations():
    with pytest.raises(ValueError):
        transform_H("salerno", 1, 1, 6, 2)
    with pytest.raises(ValueError):
        transform_H("dnls", 1, 1, 6, 3)


@pytest.mark.parametrize("K,L,D", [(0, None, 4), (1, 1, 6)])
def test_normal_form_gauge_invariance(K, L, D):
    nf = transform_H("salerno", K, L, D, 3)
    br = poisson_bracket(nf, gauge_charge_poly(3, D))
    assert not br.terms


def test_per_site_formula_z0():
    s = per_site_formula(z0_poly(3, 4), 3)
    assert "eps*x(j)*x(j+1)" in s
    assert "(1/8)*gamma*x(j)^4" in s


def test_per_site_requires_translation_invariance():
    x, _ = xy(4, n=3, j=0)
    with pytest.raises(ValueError):
        per_site_formula(x * x, 3)


# ---------------------------------------------------------------------------
# error budget
# ---------------------------------------------------------------------------

def test_gamma_star_value():
    assert GAMMA_STAR == pytest.approx(math.e / (1 + math.e ** 2), rel=1e-15)
    assert GAMMA_STAR == pytest.approx(0.3240, abs=5e-5)


def test_budget_field_free():
    b = error_budget(f_majorant=2.0, X_majorant=0.0, rho=0.1, delta=4.0, T=4.0,
                     d1=0.5, d2=0.5, K=3)
    assert b.gamma == pytest.approx(1.0 / (0.5 * 4.0))
    assert b.trunc_bound == pytest.approx((math.e * b.gamma) ** 4 * 2.0)
    assert b.gamma3 is None and b.field_bound is None


def test_budget_flags_and_field_bound():
    delta = default_domain(0.5, 0.1)
    b = error_budget(f_majorant=p_majorant(0.1, 0.5),
                     X_majorant=moser_field_majorant(0.1, 0.5),
                     rho=0.1, delta=delta, T=delta, d1=0.25, d2=0.25, K=2,
                     Y_majorant=1e-5)
    assert b.gamma_below_star and not b.convergence_warning
    assert b.gamma3 == pytest.approx(1e-5 / (0.25 * 0.1))
    assert b.field_bound == pytest.approx(b.gamma3 * b.f_majorant)
    bad = error_budget(1.0, 10.0, 0.1, delta, delta, 0.25, 0.25, 1)
    assert bad.convergence_warning and not bad.gamma_below_star


def test_budget_gamma_decreases_on_rho_grid():
    vals = []
    for rho in (0.2, 0.1, 0.05):
        delta = default_domain(0.5, rho)
        b = error_budget(p_majorant(rho, 0.5), moser_field_majorant(rho, 0.5),
                         rho, delta, delta, 0.25, 0.25, 1)
        vals.append(b.gamma)
    assert vals[0] > vals[1] > vals[2]
    # and the scaling is the predicted nu*rho^2/d one, within a small factor
    assert vals[0] / vals[1] == pytest.approx(4.0, rel=0.2)


def test_budget_validation():
    with pytest.raises(ValueError):
        error_budget(1.0, 1.0, -0.1, 1.0, 1.0, 0.5, 0.5, 1)
    with pytest.raises(ValueError):
        error_budget(1.0, 1.0, 0.1, 1.0, 1.0, 1.5, 0.5, 1)
    with pytest.raises(ValueError):
        moser_field_majorant(2.0, 1.0)


@pytest.mark.parametrize("K", [1, 3])
@pytest.mark.parametrize("rho", [0.2, 0.05])
def test_bound_validity_over_ball(K, rho):
    # measured sup of the transport residual over 100 points in B_rho stays
    # under the truncation bound
    nu, n = 0.5, 4
    result = transform_P(K)
    rng = np.random.default_rng(77)
    worst = 0.0
    for _ in range(100):
        u = rng.standard_normal(2 * n)
        u *= rho * rng.uniform() ** (1 / (2 * n)) / np.linalg.norm(u)
        s_vals = nu * (u[:n] ** 2 + u[n:] ** 2)
        worst = max(worst, abs(result.residual_value(s_vals, nu)))
    delta = default_domain(nu, rho)
    b = error_budget(p_majorant(rho, nu, n_sites=n),
                     moser_field_majorant(rho, nu),
                     rho, delta, delta, 0.25, 0.25, K)
    assert worst <= b.trunc_bound


def test_majorants_dominate_samples():
    # the closed-form majorants must dominate |P| and |V| at real points
    nu, rho = 0.5, 0.2
    pm = p_majorant(rho, nu)
    fm = moser_field_majorant(rho, nu)
    rng = np.random.default_rng(2)
    for _ in range(200):
        z = rng.uniform(-rho / np.sqrt(2), rho / np.sqrt(2), size=2)
        s = nu * (z[0] ** 2 + z[1] ** 2)
        assert np.log1p(s) / (2 * nu) <= pm
        for t in np.linspace(0.0, 1.0, 5):
            chi = (1 + s) / (2 * (1 + t * s)) * (np.log1p(s) / s - 1.0) if s else 0.0
            v = abs(chi) * math.hypot(z[0], z[1])
            assert v <= fm
