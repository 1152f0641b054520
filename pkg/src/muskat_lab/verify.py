"""Seeded property suites behind the `verify` command.

Each suite returns a measured residual and the tolerance it must meet.
Suites are run in a fixed order so a given seed yields an identical table.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath
import numpy as np

from . import equilibria as eq
from . import evolution as ev
from . import physics as ph
from . import singular_ops as so
from . import spectral as sp


@dataclass(frozen=True)
class SuiteResult:
    name: str
    measured: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.measured) and self.measured <= self.tolerance)


def random_field(rng, n: int, kmax: int = 6, scale: float = 1.0, decay: float = 2.0,
                 max_slope: float | None = None) -> np.ndarray:
    """Band-limited mean-zero field with modes 1..kmax and amplitudes ~ k^-decay."""
    x = sp.grid(n)
    k = np.arange(1, kmax + 1)
    a = rng.standard_normal(kmax) * k ** -decay
    b = rng.standard_normal(kmax) * k ** -decay
    f = scale * (np.cos(np.outer(x, k)) @ a + np.sin(np.outer(x, k)) @ b)
    if max_slope is not None:
        slope = np.max(np.abs(sp.derivative(f)))
        if slope > max_slope:
            f *= max_slope / slope
    return f


def _hilbert_oracle(rng, n=128):
    x = sp.grid(n)
    b0 = so.assemble(np.zeros(n), "B").entries
    err = 0.0
    for k in range(1, n // 4 + 1):
        err = max(err, np.max(np.abs(b0 @ np.cos(k * x) - np.sin(k * x))),
                  np.max(np.abs(b0 @ np.sin(k * x) + np.cos(k * x))))
    return err


def _adjoint(rng, n=64):
    f = random_field(rng, n, max_slope=1.5)
    w, xi = random_field(rng, n), random_field(rng, n)
    geo = so.Interface(f)
    return abs(sp.inner(geo.apply_B(w), xi) - sp.inner(w, geo.apply_B_adjoint(xi)))


def _energy(rng, n=128):
    worst = 0.0
    for _ in range(3):
        f = random_field(rng, n, max_slope=2.0)
        w = random_field(rng, n)
        scale = sp.l2_norm(w) ** 2
        for sign in "+-":
            worst = max(worst, abs(so.energy_identity_residual(f, w, sign)) / scale)
    return worst


def _derivative_identities(rng, n=128):
    f = random_field(rng, n, max_slope=0.8)
    w = random_field(rng, n)
    scale = sp.sobolev_norm(w, 1)
    return max(so.derivative_identity_residual_B3(f, w),
               so.derivative_identity_residual_A3(f, w)) / scale


def _omega_split(rng, n=256):
    f = random_field(rng, n, max_slope=1.0)
    h = random_field(rng, n)
    theta, a_mu = rng.uniform(-1, 1), rng.uniform(-0.8, 0.8)
    w1, w2 = ev.decompose_omega(f, h, theta, a_mu)
    full = ev.omega_bar(f, h, theta, a_mu)
    return sp.l2_norm(full - sp.derivative(w1) - w2) / sp.sobolev_norm(h, 3)


def _spectrum(params, n=64):
    vals = np.sort(eq.jacobian_spectrum(np.zeros(n), params).real)[::-1]
    expected = np.sort(np.repeat(eq.expected_symbols(n, params), 2))[::-1]
    k = np.repeat(np.arange(1, n // 2), 2)
    keep = k <= n // 4
    return float(np.max(np.abs(vals[keep] - expected[keep]) / np.abs(expected[keep])))


def _lambda_star(rng):
    mp = mpmath.beta(mpmath.mpf(3) / 4, mpmath.mpf(1) / 2) ** 2 / (2 * mpmath.pi ** 2)
    return abs(eq.lambda_star() - float(mp))


def _bifurcation(rng, n=64):
    up = eq.continue_branch(1, ds=0.005, n_steps=30, n=n)
    down = eq.continue_branch(1, ds=0.005, n_steps=30, n=n, direction=-1)
    both = eq.Branch(1, down.points[::-1] + up.points[1:])
    return abs(both.curvature_fit(0.05)[2] / -0.375 - 1)


def _cross_solver(rng, n=128):
    branch = eq.continue_branch(1, ds=0.02, n_steps=200, n=n, stop_lambda=0.55)
    point = eq.point_at(branch, "lambda", 0.6)
    return sp.l2_norm(point.f - eq.pendulum_oracle(0.6, n))


def _velocity_trace(rng, n=64, fine=8192):
    f = random_field(rng, n, kmax=3, scale=0.3)
    w = random_field(rng, n, kmax=4)
    c = np.fft.rfft(np.vstack([f, w]), axis=1)
    big = np.zeros((2, fine // 2 + 1), dtype=complex)
    big[:, : n // 2] = c[:, : n // 2]
    f_fine, w_fine = np.fft.irfft(big * fine / n, n=fine, axis=1)
    x = sp.grid(n)
    eps = 0.006 * np.arange(1, 7)
    worst = 0.0
    for side, sgn in (("+", 1.0), ("-", -1.0)):
        v1, v2 = ph.velocity_trace(f, w, side)
        for i in (5, n // 2 + 3):
            pts = np.column_stack([np.full(eps.size, x[i]), f[i] + sgn * eps])
            vals = ph.velocity_field(f_fine, w_fine, pts)
            lim = [np.polyval(np.polyfit(eps, vals[:, j], 5), 0.0) for j in range(2)]
            worst = max(worst, abs(lim[0] - v1[i]), abs(lim[1] - v2[i]))
    return worst


def _laplace_young(rng, n=128):
    f = random_field(rng, n, kmax=3, scale=0.3)
    p = ph.PhysicalParams(mu_minus=2.0, mu_plus=1.0, rho_minus=1.5, rho_plus=0.5,
                          k=1.0, sigma=0.8, g=1.0, V=0.2)
    w = ev.vortex_sheet_strength(f, ph.derive_constants(p))
    jump = ph.pressure_trace(f, w, p, "+") - ph.pressure_trace(f, w, p, "-")
    return float(np.max(np.abs(jump - p.sigma * ev.curvature(f))))


def _mean_conservation(rng, n=64):
    f0 = 0.3 + random_field(rng, n, kmax=4, scale=0.02)
    p = ph.PhysicalParams.from_constants(1.0, 0.3, 1.0)
    series = ev.simulate(ev.SimulationState.initial(f0, p), ev.StepControl(), 0.5)
    return float(np.max(np.abs(series.column("mean") - f0.mean())))


def run_suites(seed: int = 0) -> list[SuiteResult]:
    rng = np.random.default_rng(seed)
    sigma_params = ph.PhysicalParams.for_lambda(0.5)
    zero_params = ph.PhysicalParams.from_constants(1.0, 0.4, 1.0)
    suites = [
        ("hilbert_oracle", lambda: _hilbert_oracle(rng), 1e-10),
        ("adjoint_B", lambda: _adjoint(rng), 1e-11),
        ("energy_identity", lambda: _energy(rng), 1e-9),
        ("derivative_identities", lambda: _derivative_identities(rng), 1e-8),
        ("omega_split", lambda: _omega_split(rng), 1e-8),
        ("spectrum_sigma", lambda: _spectrum(sigma_params), 1e-6),
        ("spectrum_zero_tension", lambda: _spectrum(zero_params), 1e-6),
        ("lambda_star", lambda: _lambda_star(rng), 1e-14),
        ("bifurcation_coefficient", lambda: _bifurcation(rng), 0.02),
        ("pendulum_vs_continuation", lambda: _cross_solver(rng), 1e-6),
        ("velocity_trace", lambda: _velocity_trace(rng), 1e-9),
        ("laplace_young", lambda: _laplace_young(rng), 1e-5),
        ("mean_conservation", lambda: _mean_conservation(rng), 1e-9),
    ]
    return [SuiteResult(name, float(fn()), tol) for name, fn, tol in suites]
