"""Finger-shaped equilibria and their linear stability.

Equilibria with surface tension solve f''/(1+f'^2)^{3/2} + lam f = 0 with
lam = -Theta/sigma.  Even, mean-zero solutions are represented by their
cosine coefficients a_1..a_M (M = N/2 - 1); continuation runs in (a, lam).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize, special

from . import spectral as sp
from .errors import NoConvergence, NoGraph, SingularJacobian
from .evolution import rhs
from .physics import DerivedConstants, PhysicalParams, derive_constants

SLOPE_CAP = 25.0


def capillarity_residual(lam: float, f) -> np.ndarray:
    fp = sp.derivative(f, 1)
    return sp.derivative(f, 2) / (1 + fp ** 2) ** 1.5 + lam * np.asarray(f, dtype=float)


def lambda_star() -> float:
    """Infimum of lam over finger equilibria: B(3/4, 1/2)^2 / (2 pi^2)."""
    beta = np.exp(special.gammaln(0.75) + special.gammaln(0.5) - special.gammaln(1.25))
    return float(beta ** 2 / (2 * np.pi ** 2))


def amplitude_limit() -> float:
    """Limit of max|f| along the 2 pi-periodic branch as lam decreases to lambda_star."""
    return float(np.sqrt(2.0 / lambda_star()))


# pendulum construction -----------------------------------------------------

def _quarter_length(m: float) -> float:
    return 2 * special.ellipe(m) - special.ellipk(m)


def pendulum_parameter(lam: float) -> float:
    """Parameter m = sin^2(theta_max/2) of the finger with inclination angle theta,
    where theta solves the pendulum equation in arclength.  A quarter period in x
    has length (2E(m) - K(m))/sqrt(lam), which must equal pi/2."""
    if not lam < 1:
        raise ValueError("finger equilibria of period 2 pi need lam < 1")
    target = np.pi * np.sqrt(lam) / 2
    if target <= _quarter_length(0.5):
        raise NoGraph(f"lam = {lam} is at or below lambda_star; the finger is not a graph")
    return optimize.brentq(lambda m: _quarter_length(m) - target, 0.0, 0.5, xtol=1e-16,
                           rtol=8.9e-16)


def pendulum_oracle(lam: float, n: int) -> np.ndarray:
    """Even finger with f(0) = max f, built from the pendulum solution.

    Integrates f' = tan(theta), theta' = -lam f / cos(theta) from the crest.
    """
    m = pendulum_parameter(lam)
    amp = 2.0 * np.sqrt(m / lam)

    def ode(x, y):
        return [np.tan(y[1]), -lam * y[0] / np.cos(y[1])]

    sol = integrate.solve_ivp(ode, (0.0, np.pi), [amp, 0.0], method="DOP853",
                              rtol=1e-13, atol=1e-14, dense_output=True, max_step=0.05)
    x = np.abs(sp.grid(n))
    return sol.sol(x)[0]


def finger_at_slope(slope: float) -> tuple[float, float]:
    """Exact (lam, max f) of the 2 pi-periodic finger whose steepest slope is `slope`."""
    m = np.sin(np.arctan(slope) / 2) ** 2
    lam = (2 * _quarter_length(m) / np.pi) ** 2
    return float(lam), float(2 * np.sqrt(m / lam))


# Newton and continuation ---------------------------------------------------

class _CosineSystem:
    """Residual and Jacobian of the capillarity equation in cosine coordinates."""

    def __init__(self, n: int):
        self.n = sp.check_size(n)
        self.m = n // 2 - 1
        x = sp.grid(n)
        k = np.arange(1, self.m + 1)
        self.k = k
        self.C = np.cos(np.outer(x, k))
        self.D1 = -np.sin(np.outer(x, k)) * k
        self.D2 = -self.C * k ** 2
        self.P = 2.0 / n * self.C.T

    def field(self, a):
        return self.C @ a

    def residual(self, u):
        a, lam = u[:-1], u[-1]
        fp, fpp = self.D1 @ a, self.D2 @ a
        return self.P @ (fpp / (1 + fp ** 2) ** 1.5 + lam * (self.C @ a))

    def jacobian(self, u):
        a, lam = u[:-1], u[-1]
        fp, fpp = self.D1 @ a, self.D2 @ a
        q = 1 + fp ** 2
        ja = self.P @ (self.D2 / q[:, None] ** 1.5
                       - (3 * fp * fpp / q ** 2.5)[:, None] * self.D1 + lam * self.C)
        return np.column_stack([ja, self.P @ (self.C @ a)])


def _tolerance(system, u):
    return 1e-12 * (1.0 + sp.sobolev_norm(system.field(u[:-1]), 3))


def _newton(system, u, row, value, max_iter=50):
    """Newton on [R(u); row . u - value] = 0.  Returns (u, iterations)."""
    u = np.array(u, dtype=float)
    for it in range(1, max_iter + 1):
        r = system.residual(u)
        g = np.append(r, row @ u - value)
        jac = np.vstack([system.jacobian(u), row])
        if np.linalg.cond(jac) > 1e14:
            raise SingularJacobian("Newton matrix is numerically singular")
        du = np.linalg.solve(jac, -g)
        u = u + du
        if np.max(np.abs(du)) <= 1e-13 * (1 + np.max(np.abs(u))):
            if np.max(np.abs(system.residual(u))) <= _tolerance(system, u):
                return u, it
    raise NoConvergence(f"Newton failed after {max_iter} iterations")


def newton_solve(lam: float, f_guess) -> np.ndarray:
    """Even, mean-zero solution of the capillarity equation at fixed lam."""
    f_guess = np.asarray(f_guess, dtype=float)
    system = _CosineSystem(f_guess.size)
    u0 = np.append(sp.cos_coefficients(f_guess, system.m), lam)
    row = np.zeros(system.m + 1)
    row[-1] = 1.0
    u, _ = _newton(system, u0, row, lam)
    return system.field(u[:-1])


@dataclass(frozen=True)
class BranchPoint:
    lam: float
    f: np.ndarray = field(repr=False)
    s: float
    arclen: float
    lead_eig: float = float("nan")
    tag: str = ""

    @property
    def max_f(self) -> float:
        return float(np.max(np.abs(self.f)))

    @property
    def max_fprime(self) -> float:
        return float(np.max(np.abs(sp.derivative(self.f, 1))))


@dataclass
class Branch:
    ell: int
    points: list
    status: str = "completed"

    def arrays(self):
        s = np.array([p.s for p in self.points])
        lam = np.array([p.lam for p in self.points])
        return s, lam

    def curvature_fit(self, max_s: float = 0.05) -> np.ndarray:
        """Coefficients (c0, c1, c2) of lam = c0 + c1 s + c2 s^2 over |s| <= max_s."""
        s, lam = self.arrays()
        keep = np.abs(s) <= max_s
        if keep.sum() < 3:
            raise ValueError("not enough branch points near the bifurcation point")
        return np.polyfit(s[keep], lam[keep], 2)[::-1]


def _point(system, u, ell, arclen):
    f = system.field(u[:-1])
    return BranchPoint(lam=float(u[-1]), f=f, s=float(u[ell - 1]), arclen=float(arclen))


def continue_branch(ell: int, ds: float = 0.01, n_steps: int = 200, n: int = 64,
                    direction: int = 1, slope_cap: float = SLOPE_CAP,
                    ds_max: float | None = None, stop_lambda: float | None = None) -> Branch:
    """Pseudo-arclength continuation from (ell^2, 0) along +/- cos(ell x)."""
    if ell < 1 or ell >= n // 2 - 1:
        raise ValueError("mode number out of range for the grid")
    if ds <= 0:
        raise ValueError("ds must be positive")
    system = _CosineSystem(n)
    ds_max = 20 * ds if ds_max is None else ds_max
    u = np.zeros(system.m + 1)
    u[-1] = float(ell ** 2)
    tangent = np.zeros_like(u)
    tangent[ell - 1] = float(np.sign(direction) or 1)
    points = [_point(system, u, ell, 0.0)]
    arclen, h = 0.0, ds
    status = "completed"
    for _ in range(n_steps):
        while True:
            guess = u + h * tangent
            try:
                u_new, iters = _newton(system, guess, tangent, tangent @ u + h, max_iter=12)
                break
            except (NoConvergence, SingularJacobian, np.linalg.LinAlgError):
                h /= 2
                if h < 1e-8:
                    return Branch(ell, points, "stalled")
        jac = np.vstack([system.jacobian(u_new), tangent])
        new_tangent = np.linalg.solve(jac, np.append(np.zeros(system.m), 1.0))
        tangent = new_tangent / np.linalg.norm(new_tangent)
        arclen += h
        u = u_new
        point = _point(system, u, ell, arclen)
        points.append(point)
        if point.max_fprime > slope_cap:
            status = "fold_reached"
            break
        if stop_lambda is not None and point.lam <= stop_lambda:
            break
        if iters <= 3:
            h = min(1.5 * h, ds_max)
        elif iters > 6:
            h /= 2
    return Branch(ell, points, status)


def solve_constrained(f_guess, lam_guess: float, kind: str, value: float,
                      ell: int = 1) -> BranchPoint:
    """Equilibrium with a linear side condition.

    kind = "amplitude": cos(ell x) coefficient equals value;
    kind = "slope": f'(pi/(2 ell)) equals -value (steepest point of a finger);
    kind = "lambda": lam equals value.
    """
    f_guess = np.asarray(f_guess, dtype=float)
    system = _CosineSystem(f_guess.size)
    u0 = np.append(sp.cos_coefficients(f_guess, system.m), lam_guess)
    row = np.zeros(system.m + 1)
    if kind == "amplitude":
        row[ell - 1] = 1.0
    elif kind == "slope":
        k = system.k
        row[:-1] = -k * np.sin(k * np.pi / (2 * ell))
        value = -value
    elif kind == "lambda":
        row[-1] = 1.0
    else:
        raise ValueError(f"unknown constraint {kind!r}")
    u, _ = _newton(system, u0, row, value)
    return _point(system, u, ell, float("nan"))


def point_at(branch: Branch, kind: str, value: float) -> BranchPoint:
    """Branch point where the amplitude, slope or lambda takes the given value,
    seeded from the nearest computed point."""
    if kind == "amplitude":
        key = [p.s for p in branch.points]
    elif kind == "slope":
        key = [p.max_fprime for p in branch.points]
    else:
        key = [p.lam for p in branch.points]
    seed = branch.points[int(np.argmin(np.abs(np.array(key) - value)))]
    return solve_constrained(seed.f, seed.lam, kind, value, branch.ell)


# linear stability ----------------------------------------------------------

def _constants(params) -> DerivedConstants:
    return params if isinstance(params, DerivedConstants) else derive_constants(params)


def _basis(n: int, subspace: str) -> np.ndarray:
    x = sp.grid(n)
    k = np.arange(1, n // 2)
    cos = np.cos(np.outer(x, k))
    if subspace == "even":
        return cos
    if subspace == "mean_zero":
        return np.hstack([cos, np.sin(np.outer(x, k))])
    raise ValueError(f"unknown subspace {subspace!r}")


def _coordinates(v: np.ndarray, subspace: str) -> np.ndarray:
    a = sp.cos_coefficients(v)
    return a if subspace == "even" else np.concatenate([a, sp.sin_coefficients(v)])


def linearization_matrix(f, params, subspace: str = "mean_zero") -> np.ndarray:
    """Central-difference Jacobian of the evolution right-hand side in the
    real Fourier basis (cos kx, sin kx, 1 <= k < N/2)."""
    f = np.asarray(f, dtype=float)
    c = _constants(params)
    h = 1e-6 * (1 + sp.sobolev_norm(f, 2))
    basis = _basis(f.size, subspace)
    cols = []
    for phi in basis.T:
        d = (rhs(f + h * phi, c) - rhs(f - h * phi, c)) / (2 * h)
        cols.append(_coordinates(d, subspace))
    return np.array(cols).T


def jacobian_spectrum(f, params, subspace: str = "mean_zero") -> np.ndarray:
    """Eigenvalues of the linearization, sorted by decreasing real part."""
    ev = np.linalg.eigvals(linearization_matrix(f, params, subspace))
    return ev[np.lexsort((-ev.imag, -ev.real))]


def expected_symbols(n: int, params) -> np.ndarray:
    """Analytic eigenvalues at f = 0 for k = 1..N/2-1."""
    c = _constants(params)
    k = np.arange(1, n // 2, dtype=float)
    if c.sigma > 0:
        return -c.sigma * c.b_mu * (k ** 3 - c.lam * k)
    return -c.c_theta * k


def leading_eigenvalue(f, params, subspace: str = "even") -> float:
    return float(np.max(jacobian_spectrum(f, params, subspace).real))


def with_stability(branch: Branch, sigma: float = 1.0, a_mu: float = 0.0,
                   b_mu: float = 1.0) -> Branch:
    """Copy of the branch with lead_eig and stability tags filled in."""
    points = []
    for i, p in enumerate(branch.points):
        params = PhysicalParams.for_lambda(p.lam, sigma, a_mu, b_mu)
        lead = leading_eigenvalue(p.f, params)
        last = i == len(branch.points) - 1
        tag = "fold" if last and branch.status == "fold_reached" else (
            "stable" if lead < 0 else "unstable")
        points.append(BranchPoint(p.lam, p.f, p.s, p.arclen, lead, tag))
    return Branch(branch.ell, points, branch.status)


def exchange_of_stability(branch: Branch, s_values=(0.0, 0.01, 0.02, 0.05, 0.1),
                          sigma: float = 1.0, a_mu: float = 0.0, b_mu: float = 1.0,
                          fit_window: float = 0.1):
    """Track the eigenvalue z(s) that leaves 0 at the bifurcation point.

    Returns rows (s, lam, z, ratio) with ratio = z / (-sigma b_mu s lam'(s)),
    lam'(s) taken from an even quartic fit of the branch over |s| <= fit_window.
    The tracked eigenvector is the one with maximal overlap with its
    predecessor, starting from cos(ell x) at s = 0.
    """
    s_pts, lam_pts = branch.arrays()
    keep = np.abs(s_pts) <= fit_window
    vander = np.column_stack([np.ones(keep.sum()), s_pts[keep] ** 2, s_pts[keep] ** 4])
    c0, c2, c4 = np.linalg.lstsq(vander, lam_pts[keep], rcond=None)[0]
    n = branch.points[0].f.size
    previous = np.zeros(n // 2 - 1)
    previous[branch.ell - 1] = 1.0
    rows = []
    for s in sorted(s_values, key=abs):
        if s == 0:
            f, lam = np.zeros(n), float(branch.ell ** 2)
        else:
            p = point_at(branch, "amplitude", s)
            f, lam = p.f, p.lam
        params = PhysicalParams.for_lambda(lam, sigma, a_mu, b_mu)
        vals, vecs = np.linalg.eig(linearization_matrix(f, params, "even"))
        overlap = np.abs(previous @ vecs) / np.linalg.norm(vecs, axis=0)
        j = int(np.argmax(overlap))
        previous = np.real(vecs[:, j])
        previous /= np.linalg.norm(previous)
        z = float(vals[j].real)
        slope = 2 * c2 * s + 4 * c4 * s ** 3
        ratio = z / (-sigma * b_mu * s * slope) if s != 0 else float("nan")
        rows.append((float(s), lam, z, ratio))
    return rows
