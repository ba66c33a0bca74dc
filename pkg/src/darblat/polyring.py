"""Exact sparse polynomial and radial-series algebra.

Everything downstream (Moser field construction, Lie series, normal forms)
is built on two value types:

* :class:`Poly` -- a sparse polynomial over the lattice phase variables
  ``x_0..x_{N-1}, y_0..y_{N-1}``, the time variable ``t`` and the formal
  parameters ``(nu, gamma, eps)``, with exact rational coefficients and a
  hard truncation by total *phase* degree.  Degrees in ``t`` and in the
  parameters are unbounded.
* :class:`RadialSeries` -- a power series in the per-site radial variable
  ``s = nu*(x^2+y^2)`` whose coefficients are :class:`Poly` objects in
  ``t`` and the parameters only.

Coefficients are :class:`fractions.Fraction`; floats enter only through
:meth:`Poly.eval_point` / :meth:`RadialSeries.eval`.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Mapping, NamedTuple, Sequence

PARAM_NAMES = ("nu", "gamma", "eps")


class RingMismatchError(ValueError):
    """Operands disagree on variable set or truncation degree."""


class UnknownVariableError(ValueError):
    """A variable id does not belong to the polynomial's variable set."""


class UnevaluatedParameterError(ValueError):
    """Operation requires numeric coefficients but formal t/parameters remain."""


class MissingAssignmentError(ValueError):
    """Point evaluation is missing a value for a variable that occurs."""


def _as_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    raise TypeError(f"exact coefficient expected (int or Fraction), got {type(c).__name__}")


class MIndex(NamedTuple):
    """Monomial exponent record: phase exponents, t exponent, parameter exponents."""

    phase: tuple[int, ...]
    t: int
    params: tuple[int, int, int]

    @property
    def phase_degree(self) -> int:
        return sum(self.phase)

    def grlex_key(self):
        # graded (by phase degree) lexicographic key; ties broken on t, params
        return (self.phase_degree, self.phase, self.t, self.params)


class Poly:
    """Sparse truncated polynomial with exact rational coefficients.

    Value-semantic and immutable after construction: all operations return
    new instances.  Stored terms never have zero coefficient nor phase
    degree above ``trunc_degree``.
    """

    __slots__ = ("n_sites", "trunc_degree", "terms")

    def __init__(self, n_sites: int, trunc_degree: int,
                 terms: Mapping[MIndex, Fraction] | None = None):
        if n_sites < 0:
            raise ValueError("n_sites must be >= 0")
        if trunc_degree < 0:
            raise ValueError("trunc_degree must be >= 0")
        self.n_sites = n_sites
        self.trunc_degree = trunc_degree
        clean: dict[MIndex, Fraction] = {}
        if terms:
            nphase = 2 * n_sites
            for idx, coeff in terms.items():
                if not isinstance(idx, MIndex):
                    idx = MIndex(tuple(idx[0]), idx[1], tuple(idx[2]))
                if len(idx.phase) != nphase:
                    raise RingMismatchError(
                        f"monomial has {len(idx.phase)} phase exponents, expected {nphase}")
                c = _as_fraction(coeff)
                if c == 0 or idx.phase_degree > trunc_degree:
                    continue
                clean[idx] = c
        self.terms = clean

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, n_sites: int, trunc_degree: int) -> "Poly":
        return cls(n_sites, trunc_degree)

    @classmethod
    def constant(cls, c, n_sites: int, trunc_degree: int) -> "Poly":
        idx = MIndex((0,) * (2 * n_sites), 0, (0, 0, 0))
        return cls(n_sites, trunc_degree, {idx: _as_fraction(c)})

    @classmethod
    def one(cls, n_sites: int, trunc_degree: int) -> "Poly":
        return cls.constant(1, n_sites, trunc_degree)

    @classmethod
    def var(cls, name: str, n_sites: int, trunc_degree: int) -> "Poly":
        """Phase variable ('x3', 'y0'; bare 'x'/'y' allowed when n_sites == 1) or 't'."""
        if name == "t":
            idx = MIndex((0,) * (2 * n_sites), 1, (0, 0, 0))
            return cls(n_sites, trunc_degree, {idx: Fraction(1)})
        slot = _phase_slot(name, n_sites)
        phase = [0] * (2 * n_sites)
        phase[slot] = 1
        idx = MIndex(tuple(phase), 0, (0, 0, 0))
        return cls(n_sites, trunc_degree, {idx: Fraction(1)})

    @classmethod
    def param(cls, name: str, n_sites: int, trunc_degree: int) -> "Poly":
        k = PARAM_NAMES.index(name)
        params = [0, 0, 0]
        params[k] = 1
        idx = MIndex((0,) * (2 * n_sites), 0, tuple(params))
        return cls(n_sites, trunc_degree, {idx: Fraction(1)})

    # -- ring structure ----------------------------------------------------

    def _check_compatible(self, other: "Poly") -> None:
        if self.n_sites != other.n_sites:
            raise RingMismatchError(
                f"variable sets differ: {self.n_sites} vs {other.n_sites} sites")
        # phase-free polynomials have no truncatable content, any cap matches
        if self.n_sites and self.trunc_degree != other.trunc_degree:
            raise RingMismatchError(
                f"truncation degrees differ: {self.trunc_degree} vs {other.trunc_degree}")

    def _lift(self, other) -> "Poly":
        if isinstance(other, Poly):
            self._check_compatible(other)
            return other
        return Poly.constant(other, self.n_sites, self.trunc_degree)

    def __add__(self, other) -> "Poly":
        other = self._lift(other)
        out = dict(self.terms)
        for idx, c in other.terms.items():
            acc = out.get(idx, Fraction(0)) + c
            if acc == 0:
                out.pop(idx, None)
            else:
                out[idx] = acc
        res = Poly.__new__(Poly)
        res.n_sites, res.trunc_degree, res.terms = self.n_sites, self.trunc_degree, out
        return res

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        res = Poly.__new__(Poly)
        res.n_sites, res.trunc_degree = self.n_sites, self.trunc_degree
        res.terms = {idx: -c for idx, c in self.terms.items()}
        return res

    def __sub__(self, other) -> "Poly":
        return self + (-self._lift(other))

    def __rsub__(self, other) -> "Poly":
        return (-self) + self._lift(other)

    def __mul__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            c = _as_fraction(other)
            if c == 0:
                return Poly.zero(self.n_sites, self.trunc_degree)
            res = Poly.__new__(Poly)
            res.n_sites, res.trunc_degree = self.n_sites, self.trunc_degree
            res.terms = {idx: v * c for idx, v in self.terms.items()}
            return res
        self._check_compatible(other)
        D = self.trunc_degree
        out: dict[MIndex, Fraction] = {}
        for ia, ca in self.terms.items():
            da = ia.phase_degree
            for ib, cb in other.terms.items():
                if da + ib.phase_degree > D:
                    continue
                idx = MIndex(
                    tuple(a + b for a, b in zip(ia.phase, ib.phase)),
                    ia.t + ib.t,
                    (ia.params[0] + ib.params[0],
                     ia.params[1] + ib.params[1],
                     ia.params[2] + ib.params[2]),
                )
                acc = out.get(idx, Fraction(0)) + ca * cb
                if acc == 0:
                    out.pop(idx, None)
                else:
                    out[idx] = acc
        res = Poly.__new__(Poly)
        res.n_sites, res.trunc_degree, res.terms = self.n_sites, self.trunc_degree, out
        return res

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Poly":
        if not isinstance(k, int) or k < 0:
            raise ValueError("exponent must be a nonnegative integer")
        acc = Poly.one(self.n_sites, self.trunc_degree)
        base = self
        while k:
            if k & 1:
                acc = acc * base
            k >>= 1
            if k:
                base = base * base
        return acc

    def __eq__(self, other) -> bool:
        # equal term maps over the same variable set compare equal
        # regardless of the truncation degrees they were built with
        if not isinstance(other, Poly):
            return NotImplemented
        return self.n_sites == other.n_sites and self.terms == other.terms

    def __hash__(self):
        return hash((self.n_sites, frozenset(self.terms.items())))

    def __bool__(self) -> bool:
        return bool(self.terms)

    # -- calculus and structure --------------------------------------------

    def diff(self, var: str) -> "Poly":
        """Exact partial derivative with respect to a phase variable or 't'."""
        out: dict[MIndex, Fraction] = {}
        if var == "t":
            for idx, c in self.terms.items():
                if idx.t == 0:
                    continue
                out[MIndex(idx.phase, idx.t - 1, idx.params)] = c * idx.t
        else:
            slot = _phase_slot(var, self.n_sites)
            for idx, c in self.terms.items():
                e = idx.phase[slot]
                if e == 0:
                    continue
                phase = list(idx.phase)
                phase[slot] = e - 1
                out[MIndex(tuple(phase), idx.t, idx.params)] = c * e
        res = Poly.__new__(Poly)
        res.n_sites, res.trunc_degree, res.terms = self.n_sites, self.trunc_degree, out
        return res

    def truncate(self, degree: int) -> "Poly":
        """Drop phase degrees above ``degree``; the result carries that cap."""
        keep = {idx: c for idx, c in self.terms.items() if idx.phase_degree <= degree}
        res = Poly.__new__(Poly)
        res.n_sites, res.trunc_degree, res.terms = self.n_sites, degree, keep
        return res

    def with_trunc_degree(self, degree: int) -> "Poly":
        """Re-tag the truncation cap (raising it is always lossless)."""
        return self.truncate(degree)

    @property
    def phase_degree(self) -> int:
        """Max total phase degree of stored terms (0 for the zero polynomial)."""
        return max((i.phase_degree for i in self.terms), default=0)

    @property
    def min_phase_degree(self) -> int | None:
        return min((i.phase_degree for i in self.terms), default=None)

    def phase_part(self, degree: int) -> "Poly":
        keep = {i: c for i, c in self.terms.items() if i.phase_degree == degree}
        res = Poly.__new__(Poly)
        res.n_sites, res.trunc_degree, res.terms = self.n_sites, self.trunc_degree, keep
        return res

    def has_t(self) -> bool:
        return any(i.t for i in self.terms)

    def has_params(self) -> bool:
        return any(any(i.params) for i in self.terms)

    def coeff(self, idx: MIndex) -> Fraction:
        return self.terms.get(idx, Fraction(0))

    def constant_term(self) -> Fraction:
        """Coefficient of the fully trivial monomial (errors if t/params remain)."""
        for idx, c in self.terms.items():
            if idx.phase_degree or idx.t or any(idx.params):
                raise UnevaluatedParameterError("polynomial is not a bare constant")
        return self.terms.get(MIndex((0,) * (2 * self.n_sites), 0, (0, 0, 0)), Fraction(0))

    # -- substitution and evaluation ----------------------------------------

    def subs_t(self, tau) -> "Poly":
        """Substitute t -> tau exactly (tau an int or Fraction)."""
        tau = _as_fraction(tau)
        out: dict[MIndex, Fraction] = {}
        for idx, c in self.terms.items():
            new = MIndex(idx.phase, 0, idx.params)
            acc = out.get(new, Fraction(0)) + c * tau ** idx.t
            if acc == 0:
                out.pop(new, None)
            else:
                out[new] = acc
        res = Poly.__new__(Poly)
        res.n_sites, res.trunc_degree, res.terms = self.n_sites, self.trunc_degree, out
        return res

    def subs_params(self, nu, gamma, eps) -> "Poly":
        """Fold exact parameter values into the coefficients."""
        vals = (_as_fraction(nu), _as_fraction(gamma), _as_fraction(eps))
        out: dict[MIndex, Fraction] = {}
        for idx, c in self.terms.items():
            for v, e in zip(vals, idx.params):
                if e:
                    c = c * v ** e
            new = MIndex(idx.phase, idx.t, (0, 0, 0))
            acc = out.get(new, Fraction(0)) + c
            if acc == 0:
                out.pop(new, None)
            else:
                out[new] = acc
        res = Poly.__new__(Poly)
        res.n_sites, res.trunc_degree, res.terms = self.n_sites, self.trunc_degree, out
        return res

    def eval_point(self, assignment: Mapping[str, float],
                   params: Sequence[float] | Mapping[str, float] = (0.0, 0.0, 0.0),
                   t: float | None = None) -> float:
        """Evaluate at a numeric point; every occurring variable must be covered."""
        if isinstance(params, Mapping):
            pvals = tuple(float(params.get(k, 0.0)) for k in PARAM_NAMES)
        else:
            pvals = tuple(float(v) for v in params)
            if len(pvals) != 3:
                raise ValueError("params must provide (nu, gamma, eps)")
        nphase = 2 * self.n_sites
        xvals = [None] * nphase
        for name, v in assignment.items():
            xvals[_phase_slot(name, self.n_sites)] = float(v)
        total = 0.0
        for idx, c in self.terms.items():
            m = float(c)
            for slot, e in enumerate(idx.phase):
                if e:
                    if xvals[slot] is None:
                        raise MissingAssignmentError(
                            f"no value for {_slot_name(slot, self.n_sites)}")
                    m *= xvals[slot] ** e
            if idx.t:
                if t is None:
                    raise MissingAssignmentError("no value for t")
                m *= float(t) ** idx.t
            for v, e in zip(pvals, idx.params):
                if e:
                    m *= v ** e
            total += m
        return total

    def majorant_norm(self, rho) -> Fraction | float:
        """sum |coeff| * rho**phase_degree; dominates sup over the polydisk D_rho.

        Requires numeric coefficients: no t dependence, parameters already
        substituted.  Exact when ``rho`` is an int or Fraction.
        """
        if self.has_t() or self.has_params():
            raise UnevaluatedParameterError(
                "majorant norm needs t-free terms with parameters evaluated")
        if isinstance(rho, (int, Fraction)):
            rho = Fraction(rho)
            if rho <= 0:
                raise ValueError("rho must be positive")
            return sum((abs(c) * rho ** i.phase_degree for i, c in self.terms.items()),
                       Fraction(0))
        rho = float(rho)
        if rho <= 0:
            raise ValueError("rho must be positive")
        return float(sum(abs(float(c)) * rho ** i.phase_degree
                         for i, c in self.terms.items()))

    # -- serialization -------------------------------------------------------

    def sorted_terms(self) -> list[tuple[MIndex, Fraction]]:
        return sorted(self.terms.items(), key=lambda kv: kv[0].grlex_key())

    def to_json_terms(self) -> list[dict]:
        """Wire format: graded-lex sorted array of exact terms."""
        return [
            {
                "exps": list(idx.phase),
                "t": idx.t,
                "params": list(idx.params),
                "num": str(c.numerator),
                "den": str(c.denominator),
            }
            for idx, c in self.sorted_terms()
        ]

    @classmethod
    def from_json_terms(cls, items: Iterable[Mapping], n_sites: int | None = None,
                        trunc_degree: int | None = None) -> "Poly":
        items = list(items)
        if n_sites is None:
            if not items:
                raise ValueError("cannot infer n_sites from an empty dump")
            n_sites = len(items[0]["exps"]) // 2
        terms = {}
        for it in items:
            idx = MIndex(tuple(int(e) for e in it["exps"]), int(it["t"]),
                         tuple(int(p) for p in it["params"]))
            terms[idx] = Fraction(int(it["num"]), int(it["den"]))
        if trunc_degree is None:
            trunc_degree = max((i.phase_degree for i in terms), default=0)
        return cls(n_sites, trunc_degree, terms)

    # -- display -------------------------------------------------------------

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        bits = []
        for idx, c in self.sorted_terms():
            factors = []
            for slot, e in enumerate(idx.phase):
                if e:
                    nm = _slot_name(slot, self.n_sites)
                    factors.append(nm if e == 1 else f"{nm}^{e}")
            if idx.t:
                factors.append("t" if idx.t == 1 else f"t^{idx.t}")
            for nm, e in zip(PARAM_NAMES, idx.params):
                if e:
                    factors.append(nm if e == 1 else f"{nm}^{e}")
            mono = "*".join(factors)
            if not mono:
                bits.append(str(c))
            elif c == 1:
                bits.append(mono)
            elif c == -1:
                bits.append(f"-{mono}")
            else:
                bits.append(f"{c}*{mono}")
        out = " + ".join(bits)
        return out.replace("+ -", "- ")

    def __repr__(self) -> str:
        return f"Poly({self})"


def _phase_slot(name: str, n_sites: int) -> int:
    if n_sites == 1 and name in ("x", "y"):
        name = name + "0"
    kind = name[:1]
    if kind not in ("x", "y") or not name[1:].isdigit():
        raise UnknownVariableError(f"unknown variable {name!r}")
    j = int(name[1:])
    if not 0 <= j < n_sites:
        raise UnknownVariableError(f"site index out of range in {name!r}")
    return j if kind == "x" else n_sites + j

def _slot_name(slot: int, n_sites: int) -> str:
    if slot < n_sites:
        return f"x{slot}"
    return f"y{slot - n_sites}"


# ---------------------------------------------------------------------------
# radial series
# ---------------------------------------------------------------------------

def _scalar_poly(c) -> Poly:
    return Poly.constant(c, 0, 0)


class RadialSeries:
    """Truncated power series sum_k c_k(t; params) * s^k, s = nu*(x^2+y^2) per site.

    Coefficients are phase-free :class:`Poly` objects (n_sites == 0), so they
    may carry t and formal parameters but no phase variables.
    """

    __slots__ = ("coeffs", "order")

    def __init__(self, coeffs: Sequence, order: int | None = None):
        lifted = []
        for c in coeffs:
            if isinstance(c, Poly):
                if c.n_sites != 0:
                    raise RingMismatchError("radial coefficients must be phase-free")
                lifted.append(c)
            else:
                lifted.append(_scalar_poly(c))
        if order is None:
            order = len(lifted) - 1
        if order < 0:
            raise ValueError("order must be >= 0")
        lifted = lifted[: order + 1]
        while len(lifted) < order + 1:
            lifted.append(Poly.zero(0, 0))
        self.coeffs = lifted
        self.order = order

    @classmethod
    def zero(cls, order: int) -> "RadialSeries":
        return cls([], order)

    def coeff(self, k: int) -> Poly:
        return self.coeffs[k] if k <= self.order else Poly.zero(0, 0)

    def coeff_fraction(self, k: int) -> Fraction:
        """Coefficient of s^k as an exact number (errors if t/params remain)."""
        return self.coeff(k).constant_term()

    def __eq__(self, other) -> bool:
        if not isinstance(other, RadialSeries):
            return NotImplemented
        n = max(self.order, other.order)
        return all(self.coeff(k) == other.coeff(k) for k in range(n + 1))

    def __add__(self, other) -> "RadialSeries":
        if not isinstance(other, RadialSeries):
            other = RadialSeries([other], self.order)
        order = min(self.order, other.order)
        return RadialSeries(
            [self.coeff(k) + other.coeff(k) for k in range(order + 1)], order)

    def __sub__(self, other: "RadialSeries") -> "RadialSeries":
        return self + (other * -1)

    def __mul__(self, other) -> "RadialSeries":
        if isinstance(other, RadialSeries):
            order = min(self.order, other.order)
            out = [Poly.zero(0, 0) for _ in range(order + 1)]
            for i in range(min(self.order, order) + 1):
                ci = self.coeffs[i]
                if not ci:
                    continue
                for j in range(min(other.order, order - i) + 1):
                    cj = other.coeffs[j]
                    if cj:
                        out[i + j] = out[i + j] + ci * cj
            return RadialSeries(out, order)
        if isinstance(other, Poly):
            return RadialSeries([c * other for c in self.coeffs], self.order)
        c = _as_fraction(other)
        return RadialSeries([ck * c for ck in self.coeffs], self.order)

    __rmul__ = __mul__

    def shift(self, k: int) -> "RadialSeries":
        """Multiply by s^k, raising the order cap accordingly."""
        return RadialSeries([Poly.zero(0, 0)] * k + self.coeffs, self.order + k)

    def diff_s(self) -> "RadialSeries":
        out = [self.coeff(k + 1) * (k + 1) for k in range(self.order)]
        return RadialSeries(out, self.order - 1 if self.order else 0)

    def diff_t(self) -> "RadialSeries":
        return RadialSeries([c.diff("t") for c in self.coeffs], self.order)

    def subs_t(self, tau) -> "RadialSeries":
        return RadialSeries([c.subs_t(tau) for c in self.coeffs], self.order)

    def truncate(self, order: int) -> "RadialSeries":
        return RadialSeries(self.coeffs[: order + 1], min(self.order, order))

    def min_degree(self) -> int | None:
        for k, c in enumerate(self.coeffs):
            if c:
                return k
        return None

    def eval(self, s: float, t: float = 0.0,
             params: Sequence[float] = (0.0, 0.0, 0.0)) -> float:
        """Horner evaluation at numeric s (coefficients evaluated at t, params)."""
        acc = 0.0
        for c in reversed(self.coeffs):
            acc = acc * s + c.eval_point({}, params, t)
        return acc

    def to_site_poly(self, site: int, n_sites: int, trunc_degree: int) -> Poly:
        """Substitute s -> nu*(x_site^2 + y_site^2) and return a lattice Poly."""
        x = Poly.var(f"x{site}", n_sites, trunc_degree)
        y = Poly.var(f"y{site}", n_sites, trunc_degree)
        a = x * x + y * y
        nu = Poly.param("nu", n_sites, trunc_degree)
        out = Poly.zero(n_sites, trunc_degree)
        s_pow = Poly.one(n_sites, trunc_degree)
        for k, c in enumerate(self.coeffs):
            if k:
                s_pow = s_pow * a * nu
                if not s_pow:
                    break
            if c:
                out = out + s_pow * _lift_coeff(c, n_sites, trunc_degree)
        return out

    def __str__(self) -> str:
        bits = []
        for k, c in enumerate(self.coeffs):
            if not c:
                continue
            cs = str(c)
            if "+" in cs or "-" in cs[1:]:
                cs = f"({cs})"
            bits.append(cs if k == 0 else (f"{cs}*s" if k == 1 else f"{cs}*s^{k}"))
        return " + ".join(bits) if bits else "0"

    def __repr__(self) -> str:
        return f"RadialSeries({self}, order={self.order})"


def _lift_coeff(c: Poly, n_sites: int, trunc_degree: int) -> Poly:
    terms = {MIndex((0,) * (2 * n_sites), i.t, i.params): v for i, v in c.terms.items()}
    return Poly(n_sites, trunc_degree, terms)


def sqrt_series(u: RadialSeries) -> RadialSeries:
    """Exact square root of a series with constant term 1."""
    if u.coeff_fraction(0) != 1:
        raise ValueError("sqrt_series needs constant term 1")
    S = u.order
    out = [Fraction(1)] + [Fraction(0)] * S
    for n in range(1, S + 1):
        acc = u.coeff_fraction(n)
        for i in range(1, n):
            acc -= out[i] * out[n - i]
        out[n] = acc / 2
    return RadialSeries(out, S)


_RADIAL_FUNCTIONS = ("log_factor", "g_factor", "chi", "sigma", "xi", "p_radial", "h")


def radial_expand(fn: str, order: int) -> RadialSeries:
    """Taylor expansion at s = 0 of one of the named radial profiles.

    log_factor  ln(1+s)/s - 1                     (vector-potential profile, doubled)
    g_factor    (1+s)/(1+t*s)                     (interpolated-structure inverse factor)
    chi         g_factor * log_factor / 2         (Moser field radial multiplier)
    sigma       sqrt((e^s-1)/s)                   (inverse Darboux radial factor)
    xi          sqrt(ln(1+s)/s)                   (forward Darboux radial factor)
    p_radial    ln(1+s)/(2s)                      (conserved-quantity profile:
                                                   P = (x^2+y^2) * p_radial(s))
    h           (e^r - 1)/r with r = s            (sigma^2, solution of the radial ODE)

    All are analytic at s = 0; coefficients are exact rationals, polynomial in
    t only for g_factor and chi.
    """
    if fn not in _RADIAL_FUNCTIONS:
        raise ValueError(f"unknown radial function {fn!r}; expected one of {_RADIAL_FUNCTIONS}")
    S = order
    if fn == "log_factor":
        return RadialSeries([Fraction(0)] + [Fraction((-1) ** k, k + 1) for k in range(1, S + 1)], S)
    if fn == "g_factor":
        t = Poly.var("t", 0, 0)
        one = Poly.one(0, 0)
        coeffs: list[Poly] = [one]
        for k in range(1, S + 1):
            # (1+s)/(1+t s) = 1 + sum_k (-1)^(k-1) (t^(k-1) - t^k) s^k
            sign = 1 if (k - 1) % 2 == 0 else -1
            coeffs.append((t ** (k - 1) - t ** k) * sign)
        return RadialSeries(coeffs, S)
    if fn == "chi":
        g = radial_expand("g_factor", S)
        lf = radial_expand("log_factor", S)
        return (g * lf) * Fraction(1, 2)
    if fn == "sigma":
        return sqrt_series(radial_expand("h", S))
    if fn == "xi":
        base = RadialSeries([Fraction((-1) ** k, k + 1) for k in range(S + 1)], S)
        return sqrt_series(base)
    if fn == "p_radial":
        return RadialSeries([Fraction((-1) ** k, 2 * (k + 1)) for k in range(S + 1)], S)
    # h: (e^r - 1)/r
    return RadialSeries([Fraction(1, math.factorial(k + 1)) for k in range(S + 1)], S)
