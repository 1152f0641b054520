"""Interface evolution: right-hand sides, vortex-sheet splitting, time stepping.

With surface tension the interface moves by

    f_t = b_mu B(f)[(1 + a_mu A(f))^{-1} (sigma kappa(f) - Theta f)'],

and without it by f_t = Phi(f) = -c_Theta B(f)[(1 + a_mu A(f))^{-1} f'].
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from . import spectral as sp
from .errors import MuskatError
from .physics import DerivedConstants, PhysicalParams, derive_constants
from .singular_ops import Interface

RT_MARGIN = 1e-6


def curvature(f, dealias: bool = False) -> np.ndarray:
    """kappa = f''/(1+f'^2)^{3/2}, computed as (f'/sqrt(1+f'^2))' so its mean is zero."""
    fp = sp.derivative(f, 1)
    kappa = sp.derivative(fp / np.sqrt(1 + fp ** 2), 1)
    return sp.dealias(kappa) if dealias else kappa


def vortex_sheet_strength(f, c: DerivedConstants) -> np.ndarray:
    """Physical sheet strength 2 b_mu (1 + a_mu A)^{-1}[(sigma kappa - Theta f)']."""
    geo = Interface(f)
    forcing = sp.derivative(c.sigma * curvature(geo.f) - c.theta * geo.f, 1)
    return 2.0 * c.b_mu * geo.solve_omega(c.a_mu, forcing)


def rhs_sigma(f, c: DerivedConstants) -> np.ndarray:
    if not c.sigma > 0:
        raise ValueError("rhs_sigma needs sigma > 0")
    geo = Interface(f)
    forcing = sp.derivative(c.sigma * curvature(geo.f) - c.theta * geo.f, 1)
    return c.b_mu * geo.apply_B(geo.solve_omega(c.a_mu, forcing))


def rhs_zero_st(f, c: DerivedConstants) -> np.ndarray:
    geo = Interface(f)
    if c.theta == 0:
        return np.zeros(geo.n)
    return -c.c_theta * geo.apply_B(geo.solve_omega(c.a_mu, geo.fp))


def rhs(f, c: DerivedConstants) -> np.ndarray:
    return rhs_sigma(f, c) if c.sigma > 0 else rhs_zero_st(f, c)


def omega_bar(f, h, theta: float, a_mu: float) -> np.ndarray:
    """omega(f)[h] with b_mu = sigma = 1: the solution of
    (1 + a_mu A)w = h'''/(1+f'^2)^{3/2} - 3 f' f'' h''/(1+f'^2)^{5/2} - Theta h'."""
    geo = Interface(f)
    fp, fpp = geo.fp, sp.derivative(geo.f, 2)
    q = 1 + fp ** 2
    forcing = (sp.derivative(h, 3) / q ** 1.5 - 3 * fp * fpp * sp.derivative(h, 2) / q ** 2.5
               - theta * sp.derivative(h, 1))
    return geo.solve_omega(a_mu, forcing)


def decompose_omega(f, h, theta: float, a_mu: float) -> tuple[np.ndarray, np.ndarray]:
    """Split omega(f)[h] = omega1' + omega2 with omega1 carrying the top order."""
    geo = Interface(f)
    g = sp.derivative(h, 2) / (1 + geo.fp ** 2) ** 1.5
    omega1 = geo.solve_omega(a_mu, g - g.mean())
    forcing = -theta * sp.derivative(h, 1) + a_mu * geo.lot_A(omega1)
    omega2 = geo.solve_omega(a_mu, forcing)
    return omega1, omega2


# time integration ---------------------------------------------------------

class Status(enum.Enum):
    COMPLETED = "completed"
    TERMINATED_BLOWUP = "terminated_blowup"
    TERMINATED_RT = "terminated_rt"


class StepSizeUnderflow(MuskatError, RuntimeError):
    pass


@dataclass(frozen=True)
class StepControl:
    dt_init: float = 1e-3
    dt_min: float = 1e-12
    dt_max: float = 1.0
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    max_H2_norm: float = 1e3
    scheme: str | None = None  # "ERK", "IMEX" or None for the regime default

    def __post_init__(self):
        if not (0 < self.dt_min <= self.dt_init <= self.dt_max):
            raise ValueError("need 0 < dt_min <= dt_init <= dt_max")
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.scheme not in (None, "ERK", "IMEX"):
            raise ValueError(f"unknown scheme {self.scheme!r}")

    def scheme_for(self, c: DerivedConstants) -> str:
        if self.scheme is not None:
            return self.scheme
        return "IMEX" if c.sigma > 0 else "ERK"


@dataclass(frozen=True)
class SimulationState:
    t: float
    f: np.ndarray
    params: PhysicalParams
    constants: DerivedConstants
    dt: float = 1e-3
    err_prev: float = 1.0
    mean0: float = field(default=float("nan"))

    @classmethod
    def initial(cls, f0, params: PhysicalParams, dt: float = 1e-3) -> "SimulationState":
        f0 = np.array(f0, dtype=float)
        return cls(0.0, f0, params, derive_constants(params), dt, 1.0, float(f0.mean()))


@dataclass(frozen=True)
class DiagnosticRecord:
    t: float
    dt: float
    mean: float
    l2: float
    h2: float
    min_a_rt: float
    tail_max: float

    FIELDS = ("t", "dt", "mean", "l2", "h2", "min_a_rt", "tail_max")

    def as_tuple(self):
        return tuple(getattr(self, k) for k in self.FIELDS)


@dataclass
class SimSeries:
    records: list
    status: Status
    final: SimulationState
    message: str = ""

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])


# Dormand-Prince 5(4)
_DP_C = np.array([0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1, 1])
_DP_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_DP_B = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
_DP_E = _DP_B - np.array([5179 / 57600, 0, 7571 / 16695, 393 / 640,
                          -92097 / 339200, 187 / 2100, 1 / 40])


def _erk_attempt(f, dt, c):
    ks = []
    for i in range(7):
        y = f + dt * sum(a * k for a, k in zip(_DP_A[i], ks)) if i else f
        ks.append(rhs(y, c))
    f_new = f + dt * sum(b * k for b, k in zip(_DP_B, ks))
    err = dt * sum(e * k for e, k in zip(_DP_E, ks))
    return f_new, err, ks[-1]


def _imex_symbol(n, c):
    k = sp.wavenumbers(n)
    symbol = -c.sigma * c.b_mu * k ** 3
    symbol[-1] = 0.0
    return symbol


def _cn_heun(f, dt, c):
    """Crank-Nicolson on -sigma b_mu Lambda^3 with Heun on the remainder."""
    n = f.size
    z = dt * _imex_symbol(n, c)
    plus, minus = 1 + z / 2, 1 - z / 2

    def remainder(u):
        return rhs(u, c) - np.fft.irfft(np.fft.rfft(u) * z / dt, n=n)

    fh = np.fft.rfft(f)
    n0 = remainder(f)
    pred = np.fft.irfft((plus * fh + dt * np.fft.rfft(n0)) / minus, n=n)
    n1 = remainder(pred)
    return np.fft.irfft((plus * fh + dt / 2 * np.fft.rfft(n0 + n1)) / minus, n=n)


def _imex_attempt(f, dt, c):
    """Two half steps of the IMEX scheme, checked against one full step.

    The step-doubling difference estimates the error of the explicit part;
    the exact gap between the Crank-Nicolson factor and the true exponential
    of the linear part is added mode by mode, so stiff modes with visible
    amplitude are never left to the -1 limit of the Crank-Nicolson factor.
    """
    n = f.size
    full = _cn_heun(f, dt, c)
    f_new = _cn_heun(_cn_heun(f, dt / 2, c), dt / 2, c)
    z = dt * _imex_symbol(n, c)
    factor = ((1 + z / 4) / (1 - z / 4)) ** 2
    lin_gap = np.fft.irfft((factor - np.exp(z)) * np.fft.rfft(f), n=n)
    err = np.abs(f_new - full) / 3.0 + np.abs(lin_gap)
    return f_new, err, None


def _error_norm(err, f, f_new, ctrl):
    scale = ctrl.abs_tol + ctrl.rel_tol * np.maximum(np.abs(f), np.abs(f_new))
    return float(np.sqrt(np.mean((err / scale) ** 2)))


def step(state: SimulationState, ctrl: StepControl, dt_cap: float = np.inf):
    """One accepted adaptive step.  Returns (new_state, rhs_at_new_or_None)."""
    c = state.constants
    scheme = ctrl.scheme_for(c)
    order = 5 if scheme == "ERK" else 3
    alpha, beta = 0.7 / order, 0.4 / order
    dt = min(state.dt, ctrl.dt_max, dt_cap)
    while True:
        if dt < ctrl.dt_min:
            raise StepSizeUnderflow(f"step size {dt:.3g} below dt_min at t={state.t:.6g}")
        attempt = _erk_attempt if scheme == "ERK" else _imex_attempt
        f_new, err, k_last = attempt(state.f, dt, c)
        e = _error_norm(err, state.f, f_new, ctrl) if np.all(np.isfinite(f_new)) else np.inf
        if e <= 1.0:
            e = max(e, 1e-10)
            factor = min(5.0, max(0.2, 0.9 * e ** -alpha * state.err_prev ** beta))
            dt_next = min(dt * factor, ctrl.dt_max)
            return replace(state, t=state.t + dt, f=f_new, dt=dt_next, err_prev=e), k_last, dt
        factor = 0.2 if not np.isfinite(e) else max(0.2, 0.9 * e ** -alpha)
        dt *= factor


def _record(state: SimulationState, dt: float, phi=None) -> DiagnosticRecord:
    c = state.constants
    if c.sigma > 0:
        min_rt = float("nan")
    else:
        phi = rhs_zero_st(state.f, c) if phi is None else phi
        min_rt = float(np.min(c.c_theta + c.a_mu * phi))
    return DiagnosticRecord(state.t, dt, float(state.f.mean()), sp.l2_norm(state.f),
                            sp.sobolev_norm(state.f, 2), min_rt, sp.tail_max(state.f))


def simulate(state: SimulationState, ctrl: StepControl, t_end: float,
             sink: Callable[[DiagnosticRecord], None] | None = None) -> SimSeries:
    """Integrate to t_end, recording diagnostics at t=0 and every accepted step."""
    c = state.constants
    state = replace(state, dt=ctrl.dt_init)
    rt_floor = RT_MARGIN * c.c_theta
    records = []

    def emit(rec):
        records.append(rec)
        if sink is not None:
            sink(rec)

    rec = _record(state, 0.0)
    emit(rec)
    if c.sigma == 0 and rec.min_a_rt <= rt_floor:
        return SimSeries(records, Status.TERMINATED_RT, state,
                         "initial data violates the Rayleigh-Taylor condition")
    while state.t < t_end * (1 - 1e-14):
        try:
            state, k_last, dt = step(state, ctrl, t_end - state.t)
        except StepSizeUnderflow as exc:
            return SimSeries(records, Status.TERMINATED_BLOWUP, state, str(exc))
        rec = _record(state, dt, k_last)
        emit(rec)
        if not np.isfinite(rec.h2) or rec.h2 > ctrl.max_H2_norm:
            return SimSeries(records, Status.TERMINATED_BLOWUP, state,
                             f"H2 norm {rec.h2:.3g} exceeds {ctrl.max_H2_norm:.3g}")
        if c.sigma == 0 and rec.min_a_rt <= rt_floor:
            return SimSeries(records, Status.TERMINATED_RT, state,
                             f"min a_RT = {rec.min_a_rt:.3g} at t = {state.t:.6g}")
    return SimSeries(records, Status.COMPLETED, state)


def shift_equivariance_check(f0, a: float, c_shift: float, t_end: float,
                             params: PhysicalParams, ctrl: StepControl | None = None) -> float:
    """L2 defect between evolving a shifted/lifted f0 and shifting/lifting the evolved f0."""
    f0 = np.asarray(f0, dtype=float)
    n = f0.size
    h = 2 * np.pi / n
    m = int(round(a / h))
    if abs(m * h - a) > 1e-12 * max(1.0, abs(a)):
        raise ValueError("shift must be a multiple of the grid spacing")
    ctrl = ctrl or StepControl()

    def run(g):
        return simulate(SimulationState.initial(g, params), ctrl, t_end).final.f

    ref = np.roll(run(f0), m) + c_shift
    moved = run(np.roll(f0, m) + c_shift)
    return sp.l2_norm(moved - ref)
