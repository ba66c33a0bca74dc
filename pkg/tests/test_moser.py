"""Moser scheme: potential, field, Darboux maps, pullback, flow, radial ODE."""

import math
from fractions import Fraction as F

import numpy as np
import pytest

from darblat import moser
from darblat.lattice import LatticeState, conserved_p, ModelParams
from darblat.polyring import Poly, radial_expand


def single(x, y, nu=None, bc="periodic"):
    return LatticeState(np.array([x]), np.array([y]), bc)


# ---------------------------------------------------------------------------
# vector potential and field
# ---------------------------------------------------------------------------

def test_vector_potential_series():
    a = moser.build_vector_potential(2)
    assert a.coeff_fraction(0) == 0
    assert a.coeff_fraction(1) == F(-1, 4)
    assert a.coeff_fraction(2) == F(1, 6)


@pytest.mark.parametrize("order", [1, 2, 3, 4])
def test_vector_potential_curl_identity(order):
    assert not moser.vector_potential_curl_residual(order).terms


def test_moser_field_series():
    field = moser.build_moser_field(2)
    assert field.chi.coeff(0) == Poly.zero(0, 0)
    assert field.chi.coeff(1) == Poly.constant(F(-1, 4), 0, 0)
    t = Poly.var("t", 0, 0)
    assert field.chi.coeff(2) == t * F(1, 4) - Poly.constant(F(1, 12), 0, 0)


def test_moser_field_invariants_enforced():
    from darblat.polyring import RadialSeries

    with pytest.raises(ValueError):
        moser.MoserField(RadialSeries([F(1), F(-1, 4)], 1))   # chi(t,0) != 0
    with pytest.raises(ValueError):
        moser.MoserField(RadialSeries([F(0), F(1, 2)], 1))    # wrong cubic part


def test_chi_closed_form_matches_series():
    # the series branch and the closed form must agree through the cutoff
    chi8 = radial_expand("chi", 8)
    for t in (0.0, 0.37, 1.0):
        for s in (5e-5, 2e-4, 1e-3, 1e-2):
            series = chi8.eval(s, t=t)
            closed = float(moser.chi_value(t, np.array([s]))[0])
            assert closed == pytest.approx(series, rel=1e-12, abs=1e-20)


def test_gauge_equivariance_symbolic():
    # the field chi(s)(x, y) commutes with the rotation generator (y, -x)
    S = 4
    D = 2 * S + 2
    chi_site = radial_expand("chi", S).to_site_poly(0, 1, D)
    x = Poly.var("x0", 1, D)
    y = Poly.var("y0", 1, D)
    V = (chi_site * x, chi_site * y)
    W = (y, -x)

    def bracket(A, B, i):
        out = Poly.zero(1, D)
        for k, vk in enumerate(("x0", "y0")):
            out = out + A[k] * B[i].diff(vk) - B[k] * A[i].diff(vk)
        return out

    assert not bracket(V, W, 0).terms
    assert not bracket(V, W, 1).terms


# ---------------------------------------------------------------------------
# Darboux maps
# ---------------------------------------------------------------------------

def test_inverse_fixes_origin():
    out = moser.darboux_apply(moser.DarbouxMap("inverse", 0.7), single(0.0, 0.0))
    assert out.x[0] == 0.0 and out.y[0] == 0.0


def test_inverse_single_site_value():
    out = moser.darboux_apply(moser.DarbouxMap("inverse", 1.0), single(1.0, 0.0))
    assert out.x[0] == pytest.approx(math.sqrt(math.e - 1.0), abs=1e-12)
    assert out.x[0] == pytest.approx(1.31083, abs=1e-5)


def test_forward_inverse_composition():
    fwd = moser.DarbouxMap("forward", 0.5)
    inv = moser.DarbouxMap("inverse", 0.5)
    st = single(0.3, -0.2)
    rt = moser.darboux_apply(fwd, moser.darboux_apply(inv, st))
    assert rt.x[0] == pytest.approx(0.3, rel=1e-12)
    assert rt.y[0] == pytest.approx(-0.2, rel=1e-12)


def test_s_transport_law():
    # along the inverse map: s_q = e^{s_x} - 1, hence P(inverse(z)) = |z|^2/2
    rng = np.random.default_rng(11)
    inv = moser.DarbouxMap("inverse", 0.5)
    for _ in range(20):
        z = rng.uniform(-0.4, 0.4, size=4)
        st = LatticeState(z[:2], z[2:])
        old = moser.darboux_apply(inv, st)
        s_new = 0.5 * st.amplitudes
        s_old = 0.5 * old.amplitudes
        assert np.allclose(s_old, np.expm1(s_new), rtol=1e-13, atol=1e-16)
        p = conserved_p(ModelParams("al", nu=0.5, eps=0.1), old)
        assert p == pytest.approx(0.5 * float(np.sum(st.amplitudes)), abs=1e-12)


def test_apply_rejects_bad_states():
    inv = moser.DarbouxMap("inverse", 1.0)
    with pytest.raises(ValueError):
        LatticeState(np.array([np.nan]), np.array([0.0]))
    with pytest.raises(moser.DomainError):
        moser.darboux_apply(inv, single(4.0, 0.0))  # s = 16 >= 10


def test_map_validation():
    with pytest.raises(ValueError):
        moser.DarbouxMap("sideways", 0.5)
    with pytest.raises(ValueError):
        moser.DarbouxMap("forward", -1.0)


# ---------------------------------------------------------------------------
# pullback residual
# ---------------------------------------------------------------------------

def test_pullback_zero_at_origin():
    assert moser.verify_pullback(moser.DarbouxMap("inverse", 0.5), single(0.0, 0.0)) == 0.0


def test_pullback_pointwise():
    res = moser.verify_pullback(moser.DarbouxMap("inverse", 0.5), single(0.1, 0.2))
    assert res < 1e-12


@pytest.mark.parametrize("nu", [0.25, 0.5, 1.0])
@pytest.mark.parametrize("direction", ["inverse", "forward"])
def test_pullback_sweep(nu, direction):
    rep = moser.pullback_residual_sweep(nu, 0.3, 100, seed=7, direction=direction)
    assert rep["pass"] and rep["max_residual"] < 1e-10


# ---------------------------------------------------------------------------
# the flow of V_t
# ---------------------------------------------------------------------------

def test_flow_fixes_origin():
    out = moser.flow_V_numeric(single(0.0, 0.0), nu=0.5, t_end=3.0)
    assert out.norm() == 0.0


def test_flow_matches_forward_map():
    st = single(0.2, 0.1)
    flowed = moser.flow_V_numeric(st, nu=0.5, t_end=1.0, tol=1e-10)
    mapped = moser.darboux_apply(moser.DarbouxMap("forward", 0.5), st)
    assert np.max(np.abs(flowed.vector() - mapped.vector())) < 1e-8


def test_flow_contracts():
    rng = np.random.default_rng(5)
    for nu in (0.25, 1.0):
        z = rng.uniform(-0.2, 0.2, size=4)
        st = LatticeState(z[:2], z[2:])
        norms = [st.norm()]
        for t_end in np.linspace(0.1, 1.0, 10):
            norms.append(moser.flow_V_numeric(st, nu=nu, t_end=float(t_end)).norm())
        diffs = np.diff(norms)
        assert np.all(diffs <= 1e-12)


def test_flow_singularity_backward():
    # backward in time 1 + t*s crosses zero once s > 1
    with pytest.raises(moser.FlowSingularityError):
        moser.flow_V_numeric(single(1.8, 0.0), nu=1.0, t_end=-1.0)


# ---------------------------------------------------------------------------
# radial ODE for sigma^2
# ---------------------------------------------------------------------------

def test_h_ode_residual():
    assert moser.check_h_ode() < 1e-11


def test_h_limits():
    # sigma(0) = 1 and the numeric residual at a single point is tiny
    assert float(moser.sigma_value(np.array([0.0]))[0]) == 1.0
    res = moser.check_h_ode(grid=np.array([0.3]))
    assert res < 1e-12
