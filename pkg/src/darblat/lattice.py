"""Lattice models (dNLS, AL, Salerno, normal forms) and their numerical flows.

Conventions: per-site amplitude ``A_j = x_j^2 + y_j^2``, radial variable
``s_j = nu*A_j``.  The AL/Salerno models carry the weighted bracket
``{f,g} = sum_j (1+nu*A_j)(f_x g_y - f_y g_x)``; dNLS and the normal forms
Z0/Z1 carry the standard one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

MODELS = ("dnls", "al", "salerno", "z0", "z1")
NONSTANDARD = ("al", "salerno")

# below this value of nu*A the Salerno log terms switch to their Taylor
# branch; the direct formulas lose ~half the mantissa to cancellation there
_SERIES_CUTOFF = 1e-4


class BlowupError(RuntimeError):
    """Adaptive integration underflowed its step size (trajectory blow-up)."""

    def __init__(self, message: str, last_valid_time: float):
        super().__init__(message)
        self.last_valid_time = last_valid_time


@dataclass(frozen=True)
class ModelParams:
    """Model tag plus the (nu, gamma, eps) parameter triple; nu = mu/2."""

    model: str
    nu: float = 0.0
    gamma: float = 0.0
    eps: float = 0.0

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}; expected one of {MODELS}")
        if self.nu < 0:
            raise ValueError("nu must be nonnegative")
        if self.eps < 0:
            raise ValueError("eps must be nonnegative")
        if self.model == "al" and self.gamma != 0.0:
            raise ValueError("the AL model has gamma = 0")

    @property
    def nonstandard_bracket(self) -> bool:
        return self.model in NONSTANDARD


@dataclass(frozen=True, eq=False)
class LatticeState:
    """Real phase-space point (x_j, y_j) for N sites; value-semantic."""

    x: np.ndarray
    y: np.ndarray
    bc: str = "periodic"

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float).copy()
        y = np.asarray(self.y, dtype=float).copy()
        if x.ndim != 1 or x.shape != y.shape or x.size < 1:
            raise ValueError("x and y must be 1d arrays of equal positive length")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValueError("state entries must be finite")
        if self.bc not in ("periodic", "fixed"):
            raise ValueError("bc must be 'periodic' or 'fixed'")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.x.size

    @property
    def amplitudes(self) -> np.ndarray:
        return self.x ** 2 + self.y ** 2

    def vector(self) -> np.ndarray:
        return np.concatenate([self.x, self.y])

    @classmethod
    def from_vector(cls, u: np.ndarray, bc: str = "periodic") -> "LatticeState":
        u = np.asarray(u, dtype=float)
        n = u.size // 2
        return cls(u[:n], u[n:], bc)

    def norm(self) -> float:
        return float(np.sqrt(np.sum(self.x ** 2 + self.y ** 2)))


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Sampled flow with per-sample conserved quantities.

    ``P_values`` is populated for the nonstandard-bracket models, and
    ``norm_values`` (0.5*sum A_j) for the standard-bracket ones.
    """

    params: ModelParams
    times: np.ndarray
    states: tuple
    H_values: np.ndarray
    P_values: np.ndarray | None
    norm_values: np.ndarray | None

    def __post_init__(self):
        n = self.times.size
        for arr in (self.H_values, self.P_values, self.norm_values):
            if arr is not None and arr.size != n:
                raise ValueError("trajectory arrays must have congruent lengths")
        if len(self.states) != n:
            raise ValueError("trajectory arrays must have congruent lengths")
        if n > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("sample times must be strictly increasing")


# ---------------------------------------------------------------------------
# neighbor stencils
# ---------------------------------------------------------------------------

def _shift_plus(a: np.ndarray, bc: str) -> np.ndarray:
    """a_{j+1}; wraps for periodic bc, pads with 0 for fixed."""
    if bc == "periodic":
        return np.roll(a, -1)
    out = np.zeros_like(a)
    out[:-1] = a[1:]
    return out


def _shift_minus(a: np.ndarray, bc: str) -> np.ndarray:
    if bc == "periodic":
        return np.roll(a, 1)
    out = np.zeros_like(a)
    out[1:] = a[:-1]
    return out


def _neighbor_sum(a: np.ndarray, bc: str) -> np.ndarray:
    return _shift_plus(a, bc) + _shift_minus(a, bc)


# ---------------------------------------------------------------------------
# Hamiltonians and conserved quantities
# ---------------------------------------------------------------------------

def _salerno_onsite_sum(nu: float, A: np.ndarray) -> np.ndarray:
    """Per-site -ln(1+nu*A)/(4 nu^2) + A/(4 nu), series branch near zero."""
    u = nu * A
    out = np.empty_like(A)
    big = u >= _SERIES_CUTOFF
    if np.any(big):
        out[big] = -np.log1p(u[big]) / (4.0 * nu * nu) + A[big] / (4.0 * nu)
    small = ~big
    if np.any(small):
        a = A[small]
        acc = np.zeros_like(a)
        # sum_{m>=2} (-1)^m nu^(m-2) A^m / (4m)
        for m in range(7, 1, -1):
            acc = acc * (nu * a) + ((-1.0) ** m) / (4.0 * m)
        out[small] = acc * a * a
    return out


def _p_site_values(nu: float, A: np.ndarray) -> np.ndarray:
    """Per-site ln(1+nu*A)/(2 nu) with its small-argument series branch."""
    u = nu * A
    out = np.empty_like(A)
    big = u >= _SERIES_CUTOFF
    if np.any(big):
        out[big] = np.log1p(u[big]) / (2.0 * nu)
    small = ~big
    if np.any(small):
        a = A[small]
        acc = np.zeros_like(a)
        # sum_{m>=1} (-1)^(m-1) nu^(m-1) A^m / (2m)
        for m in range(6, 0, -1):
            acc = acc * (nu * a) + ((-1.0) ** (m - 1)) / (2.0 * m)
        out[small] = acc * a
    return out


def _coupling_corr(x, y, A, bc):
    """Per-site A_j * ((x_{j+1}+x_{j-1}) x_j + (y_{j+1}+y_{j-1}) y_j)."""
    return A * (_neighbor_sum(x, bc) * x + _neighbor_sum(y, bc) * y)


def hamiltonian(params: ModelParams, state: LatticeState) -> float:
    x, y, bc = state.x, state.y, state.bc
    A = state.amplitudes
    u = params.nu * A
    if np.any(1.0 + u <= 0.0):
        raise ValueError("1 + nu*A_j must stay positive")
    if params.model in NONSTANDARD:
        onsite = params.gamma * np.sum(_salerno_onsite_sum(params.nu, A))
    else:
        onsite = params.gamma / 8.0 * np.sum(A ** 2)
        if params.model == "z1":
            onsite += params.gamma * params.nu / 24.0 * np.sum(A ** 3)
    coupling = params.eps * np.sum(x * _shift_plus(x, bc) + y * _shift_plus(y, bc))
    if params.model == "z1":
        coupling += params.eps * params.nu / 4.0 * np.sum(_coupling_corr(x, y, A, bc))
    return float(onsite + coupling)


def conserved_p(params: ModelParams, state: LatticeState) -> float:
    """sum_j ln(1+nu*A_j)/(2 nu): the Gauge charge of the AL/Salerno bracket."""
    return float(np.sum(_p_site_values(params.nu, state.amplitudes)))


def norm_value(state: LatticeState) -> float:
    return 0.5 * float(np.sum(state.amplitudes))


# ---------------------------------------------------------------------------
# vector fields
# ---------------------------------------------------------------------------

def _field_arrays(params: ModelParams, x, y, bc):
    A = x ** 2 + y ** 2
    xs = _neighbor_sum(x, bc)
    ys = _neighbor_sum(y, bc)
    g, e, nu = params.gamma, params.eps, params.nu
    if params.model in NONSTANDARD:
        face = 1.0 + nu * A
        dx = e * ys * face + 0.5 * g * y * A
        dy = -e * xs * face - 0.5 * g * x * A
        return dx, dy
    dx = e * ys + 0.5 * g * y * A
    dy = -e * xs - 0.5 * g * x * A
    if params.model == "z1":
        C = _neighbor_sum(x, bc) * x + _neighbor_sum(y, bc) * y
        ax, ay = A * x, A * y
        hx = 0.25 * e * nu * (2.0 * x * C + A * xs
                              + _shift_minus(ax, bc) + _shift_plus(ax, bc))
        hy = 0.25 * e * nu * (2.0 * y * C + A * ys
                              + _shift_minus(ay, bc) + _shift_plus(ay, bc))
        hx += 0.25 * g * nu * A ** 2 * x
        hy += 0.25 * g * nu * A ** 2 * y
        dx += hy
        dy -= hx
    return dx, dy


def vector_field(params: ModelParams, state: LatticeState):
    """Velocities (dx/dt, dy/dt) under the model's own Poisson structure."""
    return _field_arrays(params, state.x, state.y, state.bc)


# ---------------------------------------------------------------------------
# trajectory integration
# ---------------------------------------------------------------------------

def _rhs(params: ModelParams, bc: str):
    def fn(t, u):
        n = u.size // 2
        with np.errstate(over="ignore", invalid="ignore"):
            dx, dy = _field_arrays(params, u[:n], u[n:], bc)
            out = np.concatenate([dx, dy])
        if not np.all(np.isfinite(out)):
            # fail fast instead of letting the integrator grind its step
            # size down through a sea of NaNs
            raise BlowupError(f"vector field overflowed at t={t}", float(t))
        return out

    return fn


def integrate(params: ModelParams, state0: LatticeState, t_end: float,
              tol: float = 1e-10, n_samples: int = 257) -> Trajectory:
    """Adaptive Dormand-Prince (DOP853) integration with dense sampling.

    Conservation is monitored, not enforced: H plus P (AL/Salerno) or the
    squared-norm charge (dNLS/Z0/Z1) are recorded at each sample time.
    """
    if t_end <= 0:
        raise ValueError("t_end must be positive")
    if not 1e-13 <= tol <= 1e-6:
        raise ValueError("tol must lie in [1e-13, 1e-6]")
    t_eval = np.linspace(0.0, t_end, n_samples)
    sol = solve_ivp(_rhs(params, state0.bc), (0.0, t_end), state0.vector(),
                    method="DOP853", rtol=tol, atol=tol, t_eval=t_eval)
    if not sol.success:
        last = float(sol.t[-1]) if sol.t.size else 0.0
        raise BlowupError(f"integration stopped near t={last}: {sol.message}", last)
    states = tuple(LatticeState.from_vector(sol.y[:, k], state0.bc)
                   for k in range(sol.t.size))
    H = np.array([hamiltonian(params, s) for s in states])
    if params.nonstandard_bracket:
        P = np.array([conserved_p(params, s) for s in states])
        return Trajectory(params, sol.t, states, H, P, None)
    norms = np.array([norm_value(s) for s in states])
    return Trajectory(params, sol.t, states, H, None, norms)


# ---------------------------------------------------------------------------
# flow comparison
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DeviationCurve:
    times: np.ndarray
    distances: np.ndarray

    @property
    def max(self) -> float:
        return float(np.max(self.distances))


def compare_flows(model_a: ModelParams, model_b: ModelParams,
                  state0: LatticeState, horizon: float,
                  transport: str = "none", tol: float = 1e-10,
                  n_samples: int = 201) -> DeviationCurve:
    """Euclidean distance between the two flows from identical initial data.

    With ``transport='darboux'`` the first model is integrated in its
    original coordinates (started from the inverse-mapped initial state) and
    every sample is mapped forward before the comparison, so both flows are
    compared in the standardized coordinates.
    """
    if transport not in ("none", "darboux"):
        raise ValueError("transport must be 'none' or 'darboux'")
    if transport == "none":
        if model_a.nonstandard_bracket != model_b.nonstandard_bracket:
            raise ValueError(
                "flows under different brackets require transport='darboux'")
        traj_a = integrate(model_a, state0, horizon, tol, n_samples)
        vecs_a = [s.vector() for s in traj_a.states]
    else:
        if not model_a.nonstandard_bracket or model_b.nonstandard_bracket:
            raise ValueError("darboux transport expects model_a with the "
                             "nonstandard bracket and model_b with the standard one")
        from darblat import moser

        inv = moser.DarbouxMap("inverse", model_a.nu)
        fwd = moser.DarbouxMap("forward", model_a.nu)
        start = moser.darboux_apply(inv, state0)
        traj_a = integrate(model_a, start, horizon, tol, n_samples)
        vecs_a = [moser.darboux_apply(fwd, s).vector() for s in traj_a.states]
    traj_b = integrate(model_b, state0, horizon, tol, n_samples)
    dist = np.array([np.linalg.norm(va - sb.vector())
                     for va, sb in zip(vecs_a, traj_b.states)])
    return DeviationCurve(traj_b.times, dist)


def random_direction(n_sites: int, seed: int) -> np.ndarray:
    """Deterministic unit vector in R^(2N) for scaling studies."""
    rng = np.random.default_rng(seed)
    u = rng.standard_normal(2 * n_sites)
    return u / np.linalg.norm(u)


def state_on_sphere(rho: float, direction: np.ndarray,
                    bc: str = "periodic") -> LatticeState:
    return LatticeState.from_vector(rho * direction, bc)
