"""Extended-phase-space Lie derivatives, truncated exponentials, error budgets.

The time-dependent radial field ``V_t = chi(t, s_j) (x_j, y_j)`` becomes the
autonomous field ``(1, V_t)`` on the extended space, with Lie derivative

    L f = d_t f + sum_j chi(t, s_j) (x_j d_{x_j} f + y_j d_{y_j} f).

Iterates ``L^k f`` are accumulated as exact polynomials in t; the time slot
is substituted (``t -> tau``) only after the truncated exponential
``sum_k sign^k / k! L^k f`` has been summed.  ``sign=-1, tau=1`` transports a
function to the standardized coordinates, ``sign=+1, tau=0`` is the forward
coordinate flow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from darblat.polyring import Poly, RadialSeries, radial_expand

GAMMA_STAR = math.e / (1.0 + math.e ** 2)


class FieldOrderError(ValueError):
    """The field's s-expansion is too short to populate the requested degree."""


@dataclass(frozen=True)
class ExtendedField:
    """(1, V_t) with V_t acting site-wise as chi(t, s_j)*(x_j, y_j).

    ``cap_degree`` (odd, >= 3) truncates the field itself to its Taylor
    polynomial of that phase degree, i.e. keeps chi through s^L with
    cap_degree = 2L+1.
    """

    chi: RadialSeries
    cap_degree: int | None = None

    def __post_init__(self):
        if self.chi.coeff(0):
            raise ValueError("the field must vanish at the origin (chi(t,0)=0)")
        if self.cap_degree is not None:
            if self.cap_degree < 3 or self.cap_degree % 2 == 0:
                raise ValueError("cap_degree must be an odd integer >= 3")
            if self.s_cap > self.chi.order:
                raise FieldOrderError(
                    f"cap at s^{self.s_cap} exceeds available series order {self.chi.order}")

    @property
    def s_cap(self) -> int | None:
        return None if self.cap_degree is None else (self.cap_degree - 1) // 2

    def chi_effective(self) -> RadialSeries:
        """chi with the cap applied; the series order itself is kept."""
        if self.cap_degree is None:
            return self.chi
        L = self.s_cap
        return RadialSeries(
            [self.chi.coeff(k) if k <= L else Poly.zero(0, 0)
             for k in range(self.chi.order + 1)],
            self.chi.order)

    @classmethod
    def moser(cls, order: int, L: int | None = None) -> "ExtendedField":
        """The standardizing field's chi expanded to the given s-order."""
        order = max(order, L or 0)
        return cls(radial_expand("chi", order), None if L is None else 2 * L + 1)


class _LieOperator:
    """One field bound to a lattice ring; precomputes the per-site multipliers."""

    def __init__(self, field: ExtendedField, n_sites: int, trunc_degree: int):
        self.n_sites = n_sites
        self.trunc_degree = trunc_degree
        chi = field.chi_effective()
        self.exact = field.cap_degree is not None
        # s-order needed so that products chi_k * (degree-d term) fill degree D
        self.available = chi.order if not self.exact else None
        self.site_polys = [chi.to_site_poly(j, n_sites, trunc_degree)
                           for j in range(n_sites)]

    def _check_order(self, f: Poly) -> None:
        if self.exact:
            return
        dmin = min((i.phase_degree for i in f.terms if i.phase_degree >= 1),
                   default=None)
        if dmin is None:
            return
        needed = (self.trunc_degree - dmin) // 2
        if self.available < needed:
            raise FieldOrderError(
                f"field series order {self.available} cannot populate phase degree "
                f"{self.trunc_degree}; need order {needed}")

    def __call__(self, f: Poly) -> Poly:
        self._check_order(f)
        out = f.diff("t")
        for j in range(self.n_sites):
            euler = (Poly.var(f"x{j}", self.n_sites, self.trunc_degree) * f.diff(f"x{j}")
                     + Poly.var(f"y{j}", self.n_sites, self.trunc_degree) * f.diff(f"y{j}"))
            if euler:
                out = out + self.site_polys[j] * euler
        return out


def lie_derivative(f: Poly, field: ExtendedField) -> Poly:
    """d_t f + sum_j chi(t, s_j) * (x_j d_x + y_j d_y) f, truncated at f's degree."""
    return _LieOperator(field, f.n_sites, f.trunc_degree)(f)


def exp_trunc(f: Poly, field: ExtendedField, K: int, sign: int,
              tau=None) -> Poly:
    """sum_{k=0..K} sign^k/k! L^k f, with t -> tau substituted after the sum.

    ``tau=None`` keeps t formal (needed to compose truncated flows as
    operators); otherwise tau must be exact (int or Fraction).
    """
    if K < 0:
        raise ValueError("K must be >= 0")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    op = _LieOperator(field, f.n_sites, f.trunc_degree)
    acc = f
    term = f
    fact = 1
    for k in range(1, K + 1):
        term = op(term)
        fact *= k
        acc = acc + term * Fraction(sign ** k, fact)
    if tau is not None:
        acc = acc.subs_t(tau)
    return acc


# ---------------------------------------------------------------------------
# radial fast path: everything is a function of (t, s) on a single site
# ---------------------------------------------------------------------------

def _radial_lie(f: RadialSeries, chi: RadialSeries) -> RadialSeries:
    # L f = d_t f + 2 s chi d_s f; the Euler operator is s^k -> 2k s^k
    return (f.diff_t() + (chi * f.diff_s()).shift(1) * 2).truncate(f.order)


def exp_trunc_radial(f: RadialSeries, chi: RadialSeries, K: int, sign: int,
                     tau=None) -> RadialSeries:
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    acc = f
    term = f
    fact = 1
    for k in range(1, K + 1):
        term = _radial_lie(term, chi)
        fact *= k
        acc = acc + term * Fraction(sign ** k, fact)
    if tau is not None:
        acc = acc.subs_t(tau)
    return acc


@dataclass(frozen=True)
class PTransformResult:
    """Residual of transporting the Gauge charge, as an s-series.

    The conserved quantity per site is ``P = ln(1+s)/(2 nu)``; its coefficients
    carry 1/nu, which the series type cannot hold, so the stored series is
    ``nu * (s/(2 nu) - exp_K(...P))`` -- exact, nu-free.  ``residual_value``
    folds the 1/nu back in.
    """

    series_times_nu: RadialSeries
    K: int
    L: int | None
    s_order: int

    @property
    def min_s_degree(self) -> int | None:
        return self.series_times_nu.min_degree()

    @property
    def min_phase_degree(self) -> int | None:
        d = self.min_s_degree
        return None if d is None else 2 * d

    def leading_fraction(self) -> Fraction:
        """Coefficient (times nu) of the lowest surviving power of s."""
        d = self.min_s_degree
        if d is None:
            return Fraction(0)
        return self.series_times_nu.coeff_fraction(d)

    def residual_value(self, s_values, nu: float) -> float:
        """sum_j residual(s_j) for per-site radial values s_j = nu*A_j."""
        total = 0.0
        for s in s_values:
            total += self.series_times_nu.eval(float(s))
        return total / nu


def transform_P(K: int, L: int | None = None, S: int | None = None) -> PTransformResult:
    """Residual (1/2)s/nu - exp_K(L_{-V} P)|_{tau=1} as an exact s-series.

    The lowest surviving s-power is K+2 uncapped and min(L,K)+2 with the
    field capped at phase degree 2L+1; phase degree is twice the s-degree.
    """
    if S is None:
        S = K + 3
    if S < K + 3:
        raise ValueError(f"s-order {S} too small; need at least K+3 = {K + 3}")
    chi = radial_expand("chi", S)
    if L is not None:
        if L < 1:
            raise ValueError("field cap L must be >= 1")
        chi = RadialSeries([chi.coeff(k) if k <= L else Poly.zero(0, 0)
                            for k in range(S + 1)], S)
    # work with nu*P = ln(1+s)/2: coefficients are plain rationals
    p_nu = RadialSeries(
        [Fraction(0)] + [Fraction((-1) ** (k - 1), 2 * k) for k in range(1, S + 1)], S)
    transported = exp_trunc_radial(p_nu, chi, K, -1, tau=1)
    target = RadialSeries([Fraction(0), Fraction(1, 2)], S)
    return PTransformResult(target - transported, K, L, S)


# ---------------------------------------------------------------------------
# lattice Hamiltonians as exact polynomials, and their normal forms
# ---------------------------------------------------------------------------

def _site_vars(j: int, n: int, D: int):
    return Poly.var(f"x{j}", n, D), Poly.var(f"y{j}", n, D)


def hamiltonian_poly(model: str, N: int, D: int) -> Poly:
    """Taylor expansion (through phase degree D) of the AL/Salerno Hamiltonian.

    Onsite: gamma * sum_{m>=2} (-1)^m nu^(m-2) A_j^m / (4m);  coupling:
    eps * sum_j (x_{j+1} x_j + y_{j+1} y_j), periodic.  AL is the gamma = 0
    member, so its onsite part is absent.
    """
    if model not in ("salerno", "al"):
        raise ValueError("model must be 'salerno' or 'al'")
    if N < 3:
        raise ValueError("need N >= 3 periodic sites to distinguish j-1, j, j+1")
    eps = Poly.param("eps", N, D)
    gamma = Poly.param("gamma", N, D)
    nu = Poly.param("nu", N, D)
    H = Poly.zero(N, D)
    for j in range(N):
        x, y = _site_vars(j, N, D)
        xn, yn = _site_vars((j + 1) % N, N, D)
        H = H + eps * (xn * x + yn * y)
        if model == "salerno":
            A = x * x + y * y
            Am = A  # A^m, built incrementally
            for m in range(2, D // 2 + 1):
                Am = Am * A
                H = H + gamma * nu ** (m - 2) * Am * Fraction((-1) ** m, 4 * m)
    return H


def z0_poly(N: int, D: int = 4) -> Poly:
    """dNLS Hamiltonian: gamma/8 A_j^2 + eps (x_{j+1}x_j + y_{j+1}y_j)."""
    eps = Poly.param("eps", N, D)
    gamma = Poly.param("gamma", N, D)
    H = Poly.zero(N, D)
    for j in range(N):
        x, y = _site_vars(j, N, D)
        xn, yn = _site_vars((j + 1) % N, N, D)
        A = x * x + y * y
        H = H + gamma * A * A * Fraction(1, 8) + eps * (xn * x + yn * y)
    return H


def z1_poly(N: int, D: int = 6) -> Poly:
    """Cubic-quintic normal form: z0 plus
    gamma*nu/24 A_j^3 + eps*nu/4 A_j ((x_{j+1}+x_{j-1})x_j + (y_{j+1}+y_{j-1})y_j).
    """
    eps = Poly.param("eps", N, D)
    gamma = Poly.param("gamma", N, D)
    nu = Poly.param("nu", N, D)
    H = z0_poly(N, D)
    for j in range(N):
        x, y = _site_vars(j, N, D)
        xp, yp = _site_vars((j + 1) % N, N, D)
        xm, ym = _site_vars((j - 1) % N, N, D)
        A = x * x + y * y
        H = H + gamma * nu * A * A * A * Fraction(1, 24)
        H = H + eps * nu * A * ((xp + xm) * x + (yp + ym) * y) * Fraction(1, 4)
    return H


def transform_H(model: str, K: int, L: int | None, D: int, N: int) -> Poly:
    """Inverse Lie-series transport of the lattice Hamiltonian, truncated at D.

    With K=1, L=1, D=6 the degree-<=6 part is exactly the cubic-quintic
    normal form of ``z1_poly``; with K=0, D=4 it is ``z0_poly``.
    """
    H = hamiltonian_poly(model, N, D)
    order = max(1, (D - 2) // 2)
    field = ExtendedField.moser(order, L)
    return exp_trunc(H, field, K, -1, tau=1).truncate(D)


def poisson_bracket(f: Poly, g: Poly) -> Poly:
    """Standard bracket sum_j (f_x g_y - f_y g_x)."""
    if f.n_sites != g.n_sites:
        raise ValueError("operands live on different lattices")
    out = Poly.zero(f.n_sites, f.trunc_degree)
    for j in range(f.n_sites):
        xj, yj = f"x{j}", f"y{j}"
        out = out + f.diff(xj) * g.diff(yj) - f.diff(yj) * g.diff(xj)
    return out


def gauge_charge_poly(N: int, D: int) -> Poly:
    """(1/2) sum_j (x_j^2 + y_j^2): generator of the common phase rotation."""
    H = Poly.zero(N, D)
    for j in range(N):
        x, y = _site_vars(j, N, D)
        H = H + (x * x + y * y) * Fraction(1, 2)
    return H


# ---------------------------------------------------------------------------
# per-site rendering of translation-invariant lattice polynomials
# ---------------------------------------------------------------------------

def _shift_phase(phase, n: int, by: int):
    xs, ys = phase[:n], phase[n:]
    return tuple(xs[(j - by) % n] for j in range(n)) + \
        tuple(ys[(j - by) % n] for j in range(n))


def _support_span(phase, n: int):
    occupied = sorted({j % n for j, e in enumerate(phase) if e})
    if not occupied:
        return 0, 0
    # smallest window covering the occupied sites
    return occupied[-1] - occupied[0], occupied[0]


def per_site_terms(poly: Poly, n_sites: int):
    """Collapse a periodic translation-invariant polynomial to one site.

    Each monomial orbit under the cyclic shift is represented once, anchored
    at its lowest occupied site; the listed coefficient is the per-site one.
    Raises if the coefficients are not constant along an orbit.
    """
    n = n_sites
    seen: dict = {}
    for idx, coeff in poly.terms.items():
        orbit = {}
        for by in range(n):
            shifted = (_shift_phase(idx.phase, n, by), idx.t, idx.params)
            orbit[shifted] = orbit.get(shifted, 0) + 1
        # pick the contiguous-most, then graded-lex smallest representative
        rep = min(orbit, key=lambda m: (_support_span(m[0], n)[0], m[0], m[1], m[2]))
        if rep in seen:
            continue
        orbit_size = len(orbit)
        for member in orbit:
            member_idx = type(idx)(member[0], member[1], member[2])
            if poly.terms.get(member_idx) != coeff:
                raise ValueError("polynomial is not translation invariant")
        seen[rep] = coeff * Fraction(orbit_size, n)
    out = []
    for (phase, t, params), coeff in sorted(
            seen.items(), key=lambda kv: (sum(kv[0][0]), kv[0][0], kv[0][1], kv[0][2])):
        out.append(((phase, t, params), coeff))
    return out


def per_site_formula(poly: Poly, n_sites: int) -> str:
    """Human-readable per-site form: 'sum_j [term + term + ...]'."""
    from darblat.polyring import PARAM_NAMES

    n = n_sites
    bits = []
    for (phase, t, params), coeff in per_site_terms(poly, n_sites):
        _, anchor = _support_span(phase, n)
        factors = []
        for nm, e in zip(PARAM_NAMES, params):
            if e:
                factors.append(nm if e == 1 else f"{nm}^{e}")
        if t:
            factors.append("t" if t == 1 else f"t^{t}")
        for slot, e in enumerate(phase):
            if not e:
                continue
            kind = "x" if slot < n else "y"
            off = (slot % n) - anchor
            label = "j" if off == 0 else f"j+{off}"
            nm = f"{kind}({label})"
            factors.append(nm if e == 1 else f"{nm}^{e}")
        mono = "*".join(factors) if factors else "1"
        if coeff == 1:
            bits.append(mono)
        elif coeff == -1:
            bits.append(f"-{mono}")
        else:
            bits.append(f"({coeff})*{mono}")
    body = " + ".join(bits).replace("+ -", "- ") if bits else "0"
    return f"sum_j [ {body} ]"


# ---------------------------------------------------------------------------
# error budget (analytic Lie-series estimates, instantiated with majorants)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ErrorBudget:
    """Aggregates controlling the Lie series on a complex t-strip of width
    delta times the phase polydisk of radius rho.

    gamma = 1/(d1*delta) + |X|/(d2*rho) controls one Lie derivative;
    gamma < gamma* = e/(1+e^2) admits the series at t = +-1; the truncated
    series at order K is off by O((e*gamma)^(K+1) |f|), and truncating the
    field costs O(gamma3 |f|) with gamma3 = |Y|/(d2*rho) for the field
    remainder Y.
    """

    rho: float
    delta: float
    T: float
    d1: float
    d2: float
    K: int
    f_majorant: float
    X_majorant: float
    Y_majorant: float | None
    gamma: float
    gamma3: float | None
    trunc_bound: float
    field_bound: float | None
    gamma_below_star: bool
    convergence_warning: bool
    gamma_star: float = GAMMA_STAR


def error_budget(f_majorant: float, X_majorant: float, rho: float, delta: float,
                 T: float, d1: float, d2: float, K: int,
                 Y_majorant: float | None = None) -> ErrorBudget:
    for name, v in (("rho", rho), ("delta", delta), ("T", T),
                    ("f_majorant", f_majorant)):
        if v < 0 or (name != "f_majorant" and v == 0):
            raise ValueError(f"{name} must be positive")
    if not (0 < d1 < 1 and 0 < d2 < 1):
        raise ValueError("d1, d2 must lie in (0, 1)")
    if X_majorant < 0 or (Y_majorant is not None and Y_majorant < 0):
        raise ValueError("majorants must be nonnegative")
    gamma = 1.0 / (d1 * delta) + X_majorant / (d2 * rho)
    gamma3 = None if Y_majorant is None else Y_majorant / (d2 * rho)
    trunc = (math.e * gamma) ** (K + 1) * f_majorant
    field = None if gamma3 is None else gamma3 * f_majorant
    return ErrorBudget(
        rho=rho, delta=delta, T=T, d1=d1, d2=d2, K=K,
        f_majorant=f_majorant, X_majorant=X_majorant, Y_majorant=Y_majorant,
        gamma=gamma, gamma3=gamma3, trunc_bound=trunc, field_bound=field,
        gamma_below_star=gamma < GAMMA_STAR,
        convergence_warning=gamma >= 1.0 / math.e,
    )


def default_domain(nu: float, rho: float) -> float:
    """The standard working-domain choice delta = T = 1/(2 nu rho^2)."""
    return 1.0 / (2.0 * nu * rho * rho)


def moser_field_majorant(rho: float, nu: float, t_radius: float = 2.0,
                         n_sites: int = 1) -> float:
    """Conservative sup bound for |V_t| on {|t| <= t_radius} x D_rho.

    On the polydisk each |s_j| <= 2 nu rho^2 =: sig, so
    |chi| <= (1+sig)/(2(1-t_radius*sig)) * (-ln(1-sig)/sig - 1) and
    |V| <= sqrt(2 n) rho |chi|.  The t-disk of radius 2 comfortably covers
    the tau in [0, 1] evaluation segment of the Lie series.
    """
    sig = 2.0 * nu * rho * rho
    if t_radius * sig >= 1.0:
        raise ValueError("t_radius * (2 nu rho^2) must stay below 1")
    if sig >= 1.0:
        raise ValueError("2 nu rho^2 must stay below 1")
    m_g = (1.0 + sig) / (2.0 * (1.0 - t_radius * sig))
    m_log = -math.log1p(-sig) / sig - 1.0
    return math.sqrt(2.0 * n_sites) * rho * m_g * m_log


def p_majorant(rho: float, nu: float, n_sites: int = 1) -> float:
    """Coefficient majorant of P on D_rho: n * (-ln(1 - 2 nu rho^2))/(2 nu)."""
    sig = 2.0 * nu * rho * rho
    if sig >= 1.0:
        raise ValueError("2 nu rho^2 must stay below 1")
    return -n_sites * math.log1p(-sig) / (2.0 * nu)
