"""Physical parameters, derived constants and the flow off the interface.

The lower fluid occupies y < f(x) and carries the subscript "-", the upper
fluid y > f(x) carries "+".  omega is the vortex-sheet strength, i.e. the jump
of the tangential velocity (lower minus upper) along (1, f').
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import spectral as sp
from .singular_ops import Interface

ON_INTERFACE_TOL = 1e-8


@dataclass(frozen=True)
class PhysicalParams:
    mu_minus: float = 1.0
    mu_plus: float = 1.0
    rho_minus: float = 1.0
    rho_plus: float = 0.0
    k: float = 1.0
    sigma: float = 0.0
    g: float = 1.0
    V: float = 0.0

    def __post_init__(self):
        if not (self.mu_minus > 0 and self.mu_plus > 0):
            raise ValueError("viscosities must be positive")
        if not self.k > 0:
            raise ValueError("permeability must be positive")
        if not self.sigma >= 0:
            raise ValueError("surface tension must be non-negative")

    @classmethod
    def from_constants(cls, theta: float, a_mu: float = 0.0, b_mu: float = 1.0,
                       sigma: float = 0.0) -> "PhysicalParams":
        """Parameters realizing given Theta, a_mu, b_mu (with V = 0, g = 1, rho_+ = 0)."""
        if not abs(a_mu) < 1:
            raise ValueError("|a_mu| must be < 1")
        return cls(mu_minus=1.0 + a_mu, mu_plus=1.0 - a_mu, rho_minus=theta,
                   rho_plus=0.0, k=2.0 * b_mu, sigma=sigma, g=1.0, V=0.0)

    @classmethod
    def for_lambda(cls, lam: float, sigma: float = 1.0, a_mu: float = 0.0,
                   b_mu: float = 1.0) -> "PhysicalParams":
        """Surface-tension parameters with -Theta/sigma = lam."""
        return cls.from_constants(-sigma * lam, a_mu, b_mu, sigma)


@dataclass(frozen=True)
class DerivedConstants:
    theta: float
    a_mu: float
    b_mu: float
    c_theta: float
    sigma: float
    lam: float | None

    def as_dict(self) -> dict:
        return {"theta": self.theta, "a_mu": self.a_mu, "b_mu": self.b_mu,
                "c_theta": self.c_theta, "sigma": self.sigma, "lambda": self.lam}


def derive_constants(p: PhysicalParams) -> DerivedConstants:
    mu = p.mu_minus + p.mu_plus
    theta = p.g * (p.rho_minus - p.rho_plus) + (p.mu_minus - p.mu_plus) * p.V / p.k
    lam = -theta / p.sigma if p.sigma > 0 else None
    return DerivedConstants(theta=theta, a_mu=(p.mu_minus - p.mu_plus) / mu,
                            b_mu=p.k / mu, c_theta=p.k * theta / mu,
                            sigma=p.sigma, lam=lam)


def rayleigh_taylor_field(f, c: DerivedConstants) -> np.ndarray:
    """a_RT = c_Theta + a_mu Phi(f), Phi the zero-surface-tension velocity."""
    from .evolution import rhs_zero_st
    return c.c_theta + c.a_mu * rhs_zero_st(f, c)


def _points(points) -> tuple[np.ndarray, np.ndarray]:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    return pts[:, 0], pts[:, 1]


def _check_off_interface(f, x, y):
    gap = np.abs(y - sp.evaluate(f, x))
    if np.any(gap < ON_INTERFACE_TOL):
        raise ValueError("point lies on the interface")
    return np.sign(y - sp.evaluate(f, x))


def velocity_field(f, omega, points) -> np.ndarray:
    """Velocity at points (x, y) off the interface, shape (P, 2)."""
    f = np.asarray(f, dtype=float)
    omega = np.asarray(omega, dtype=float)
    x, y = _points(points)
    _check_off_interface(f, x, y)
    n = f.size
    s = sp.grid(n)
    a = (x[:, None] - s[None, :]) / 2.0
    tb = np.tanh((y[:, None] - f[None, :]) / 2.0)
    sa, ca = np.sin(a), np.cos(a)
    den = sa ** 2 + (tb * ca) ** 2
    w = (2.0 * np.pi / n) / (4.0 * np.pi) * omega[None, :]
    v1 = -np.sum(w * tb / den, axis=1)
    v2 = np.sum(w * sa * ca * (1 - tb ** 2) / den, axis=1)
    return np.column_stack([v1, v2])


def velocity_trace(f, omega, side: str) -> tuple[np.ndarray, np.ndarray]:
    """Limits of the velocity on the interface from above ('+') or below ('-')."""
    if side not in ("+", "-"):
        raise ValueError("side must be '+' or '-'")
    geo = f if isinstance(f, Interface) else Interface(f)
    omega = np.asarray(omega, dtype=float)
    wh = sp.half_shift(omega)[geo.idx]
    t_big = geo.T
    w = geo.h / (4.0 * np.pi)
    v1 = -w * np.sum(wh * t_big / geo.den, axis=1)
    v2 = w * np.sum(wh * geo.sn * geo.cs * (1 - t_big ** 2) / geo.den, axis=1)
    e = 1.0 if side == "+" else -1.0
    jump = 0.5 * omega / (1 + geo.fp ** 2)
    return v1 - e * jump, v2 - e * jump * geo.fp


def _vertical_integral(f, omega, x, y0, y1, on_sheet=False):
    """int_{y0}^{y1} V2(x, y) dy for vectors x, y0, y1.

    Uses V2 = (1/2pi) d/dy int omega(s) arctan(tanh((y - f(s))/2) / tan((x - s)/2)) ds.
    The s-integrand jumps by pi sign(y - f(x)) at s = x; that jump is removed
    with a sawtooth whose convolution with omega is pi times its antiderivative.
    With on_sheet=True, y1 = f(x) is taken on the interface, where the
    integrand is smooth in s with value arctan(f'(x)) at s = x.
    """
    f = np.asarray(f, dtype=float)
    omega = np.asarray(omega, dtype=float)
    n = f.size
    s = sp.grid(n)
    h = 2.0 * np.pi / n
    r = np.mod(x[:, None] - s[None, :] + np.pi, 2.0 * np.pi) - np.pi
    at_node = np.abs(r) < 1e-14
    r_safe = np.where(at_node, 1.0, r)
    cot = np.cos(r_safe / 2) / np.sin(r_safe / 2)
    saw = (np.pi * np.sign(r) - r) / 2.0
    anti = sp.evaluate(sp.antiderivative(omega), x)
    fx = sp.evaluate(f, x)
    fpx = sp.evaluate(sp.derivative(f), x)

    def primitive(y, sheet):
        psi = np.arctan(np.tanh((y[:, None] - f[None, :]) / 2.0) * cot)
        if sheet:
            psi = np.where(at_node, np.arctan(fpx)[:, None], psi)
            return h * psi @ omega
        sgn = np.sign(y - fx)
        rem = np.where(at_node, 0.0, psi - sgn[:, None] * saw)
        return h * rem @ omega + sgn * np.pi * anti

    return (primitive(y1, on_sheet) - primitive(y0, False)) / (2.0 * np.pi)


def _horizontal_integral(f, omega, x, y_line):
    """int_0^x V1(s, y_line) ds, spectrally from nodal values on the line."""
    n = np.asarray(f).size
    xs = sp.grid(n)
    v1 = velocity_field(f, omega, np.column_stack([xs, np.full(n, y_line)]))[:, 0]
    prim = sp.antiderivative(v1)
    return sp.evaluate(prim, x) - sp.evaluate(prim, np.zeros(1))[0]


def _hydro(p: PhysicalParams, side: str):
    if side == "+":
        return p.mu_plus, p.rho_plus
    return p.mu_minus, p.rho_minus


def _pressure(f, omega, p, side, x, y, c_side, on_sheet=False):
    mu, rho = _hydro(p, side)
    d = float(np.max(np.abs(f))) + 1.0
    y_line = d if side == "+" else -d
    horiz = _horizontal_integral(f, omega, x, y_line)
    vert = _vertical_integral(f, omega, x, np.full(x.size, y_line), y, on_sheet)
    return c_side - mu / p.k * horiz - mu / p.k * vert - (rho * p.g + mu * p.V / p.k) * y


def pressure_constants(f, omega, p: PhysicalParams) -> tuple[float, float]:
    """(c_-, c_+) with c_- = 0 and the Laplace-Young jump exact at x = 0."""
    from .evolution import curvature
    x0 = np.zeros(1)
    y0 = sp.evaluate(f, x0)
    up = _pressure(f, omega, p, "+", x0, y0, 0.0, on_sheet=True)[0]
    low = _pressure(f, omega, p, "-", x0, y0, 0.0, on_sheet=True)[0]
    kappa0 = sp.evaluate(curvature(f), x0)[0]
    return 0.0, p.sigma * kappa0 - up + low


def pressure_field(f, omega, p: PhysicalParams, side: str, points) -> np.ndarray:
    """Pressure of the fluid on the given side at off-interface points."""
    if side not in ("+", "-"):
        raise ValueError("side must be '+' or '-'")
    f = np.asarray(f, dtype=float)
    x, y = _points(points)
    sgn = _check_off_interface(f, x, y)
    if np.any(sgn != (1.0 if side == "+" else -1.0)):
        raise ValueError("point is not inside the requested fluid")
    c_minus, c_plus = pressure_constants(f, omega, p)
    return _pressure(f, omega, p, side, x, y, c_plus if side == "+" else c_minus)


def pressure_trace(f, omega, p: PhysicalParams, side: str) -> np.ndarray:
    """Pressure of one fluid on the interface at the grid nodes."""
    f = np.asarray(f, dtype=float)
    x = sp.grid(f.size)
    c_minus, c_plus = pressure_constants(f, omega, p)
    return _pressure(f, omega, p, side, x, f.copy(), c_plus if side == "+" else c_minus,
                     on_sheet=True)
