import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from muskat_lab import equilibria as eq
from muskat_lab import evolution as ev
from muskat_lab import physics as ph
from muskat_lab import spectral as sp
from muskat_lab.verify import random_field

SIGMA = ph.PhysicalParams.for_lambda(0.5, sigma=1.0, a_mu=0.3, b_mu=1.0)
ZERO = ph.PhysicalParams.from_constants(1.0, 0.4, 1.0)


def test_curvature_basics():
    x = sp.grid(64)
    assert np.all(ev.curvature(np.zeros(64)) == 0)
    eps = 1e-3
    defect = np.max(np.abs(ev.curvature(eps * np.cos(x)) + eps * np.cos(x)))
    assert defect <= 2 * eps ** 3
    rng = np.random.default_rng(0)
    for _ in range(5):
        assert abs(ev.curvature(random_field(rng, 64, max_slope=2.0)).mean()) <= 1e-10


@pytest.mark.parametrize("k", [1, 2, 5])
def test_rhs_sigma_linear_symbol(k):
    n, eps = 64, 1e-5
    x = sp.grid(n)
    c = ph.derive_constants(SIGMA)
    got = ev.rhs_sigma(eps * np.cos(k * x), c)
    expected = -c.sigma * c.b_mu * (k ** 3 - c.lam * k) * eps * np.cos(k * x)
    assert sp.l2_norm(got - expected) <= 1e-3 * sp.l2_norm(expected)


@pytest.mark.parametrize("k", [1, 3, 6])
def test_rhs_zero_tension_linear_symbol(k):
    n, eps = 64, 1e-5
    x = sp.grid(n)
    c = ph.derive_constants(ZERO)
    got = ev.rhs_zero_st(eps * np.cos(k * x), c)
    expected = -c.c_theta * k * eps * np.cos(k * x)
    assert sp.l2_norm(got - expected) <= 1e-3 * sp.l2_norm(expected)


def test_rhs_zero_and_means():
    rng = np.random.default_rng(1)
    f = random_field(rng, 64, max_slope=1.0)
    for params in (SIGMA, ZERO):
        c = ph.derive_constants(params)
        assert np.all(np.abs(ev.rhs(np.zeros(64), c)) <= 1e-14)
        assert abs(ev.rhs(f, c).mean()) <= 1e-9
    c0 = ph.derive_constants(ph.PhysicalParams.from_constants(0.0, 0.4, 1.0))
    assert np.all(ev.rhs_zero_st(f, c0) == 0)
    with pytest.raises(ValueError):
        ev.rhs_sigma(f, ph.derive_constants(ZERO))


def test_rhs_vanishes_on_equilibrium():
    lam = 0.8
    f = eq.pendulum_oracle(lam, 128)
    c = ph.derive_constants(ph.PhysicalParams.for_lambda(lam))
    assert sp.l2_norm(ev.rhs_sigma(f, c)) <= 1e-8 * sp.sobolev_norm(f, 3)


def test_decomposition_at_flat_interface():
    x = sp.grid(64)
    h = np.cos(2 * x) + 0.3 * np.sin(3 * x)
    theta = 0.7
    w1, w2 = ev.decompose_omega(np.zeros(64), h, theta, 0.5)
    assert np.allclose(w1, sp.derivative(h, 2), atol=1e-11)
    assert np.allclose(w2, -theta * sp.derivative(h, 1), atol=1e-11)
    assert np.allclose(ev.omega_bar(np.zeros(64), h, theta, 0.5),
                       sp.derivative(h, 3) - theta * sp.derivative(h, 1), atol=1e-10)


def test_decomposition_recombines_with_mean_zero_parts():
    rng = np.random.default_rng(2)
    f = random_field(rng, 256, max_slope=1.0)
    h = random_field(rng, 256)
    w1, w2 = ev.decompose_omega(f, h, 0.4, -0.3)
    full = ev.omega_bar(f, h, 0.4, -0.3)
    assert sp.l2_norm(full - sp.derivative(w1) - w2) <= 1e-8 * sp.sobolev_norm(h, 3)
    assert abs(w1.mean()) <= 1e-12 and abs(w2.mean()) <= 1e-12


def test_step_control_validation():
    with pytest.raises(ValueError):
        ev.StepControl(dt_init=1.0, dt_max=0.1)
    with pytest.raises(ValueError):
        ev.StepControl(rel_tol=0.0)
    with pytest.raises(ValueError):
        ev.StepControl(scheme="RK4")
    assert ev.StepControl().scheme_for(ph.derive_constants(SIGMA)) == "IMEX"
    assert ev.StepControl().scheme_for(ph.derive_constants(ZERO)) == "ERK"


def test_zero_initial_data_stays_zero():
    for params in (SIGMA, ZERO):
        series = ev.simulate(ev.SimulationState.initial(np.zeros(32), params),
                             ev.StepControl(), 0.2)
        assert series.status is ev.Status.COMPLETED
        assert np.all(series.final.f == 0)


def test_sink_receives_every_record():
    seen = []
    f0 = 0.01 * np.cos(sp.grid(32))
    series = ev.simulate(ev.SimulationState.initial(f0, ZERO), ev.StepControl(), 0.3,
                         sink=seen.append)
    assert seen == series.records
    assert series.records[0].t == 0 and series.final.t == pytest.approx(0.3)
    assert set(ev.DiagnosticRecord.FIELDS) == {"t", "dt", "mean", "l2", "h2", "min_a_rt",
                                                "tail_max"}


def test_rayleigh_taylor_termination():
    params = ph.PhysicalParams.from_constants(-1.0, 0.3, 1.0)
    f0 = 0.01 * np.cos(sp.grid(32))
    series = ev.simulate(ev.SimulationState.initial(f0, params), ev.StepControl(), 1.0)
    assert series.status is ev.Status.TERMINATED_RT


def test_blowup_termination_on_norm_cap():
    params = ph.PhysicalParams.for_lambda(3.0)
    f0 = 0.05 * np.cos(sp.grid(32))
    ctrl = ev.StepControl(max_H2_norm=0.5)
    series = ev.simulate(ev.SimulationState.initial(f0, params), ctrl, 10.0)
    assert series.status is ev.Status.TERMINATED_BLOWUP
    assert series.records[-1].h2 > 0.5


def test_imex_and_erk_agree():
    x = sp.grid(32)
    f0 = 0.05 * np.cos(x) + 0.02 * np.sin(2 * x)
    out = {}
    for scheme in ("IMEX", "ERK"):
        ctrl = ev.StepControl(scheme=scheme, rel_tol=1e-10, abs_tol=1e-12)
        out[scheme] = ev.simulate(ev.SimulationState.initial(f0, SIGMA), ctrl, 0.2).final.f
    assert sp.l2_norm(out["IMEX"] - out["ERK"]) <= 1e-6


def test_mean_is_conserved():
    rng = np.random.default_rng(3)
    f0 = 0.4 + random_field(rng, 64, kmax=4, scale=0.02)
    for params in (SIGMA, ZERO):
        series = ev.simulate(ev.SimulationState.initial(f0, params), ev.StepControl(), 0.3)
        assert np.max(np.abs(series.column("mean") - f0.mean())) <= 1e-9


def test_shift_equivariance_trivial_and_grid_check():
    f0 = 0.01 * np.cos(sp.grid(32))
    assert ev.shift_equivariance_check(f0, 0.0, 0.0, 0.1, ZERO) == 0.0
    with pytest.raises(ValueError):
        ev.shift_equivariance_check(f0, 0.1, 0.0, 0.1, ZERO)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-2.0, 2.0))
def test_property_rhs_equivariance(seed, lift):
    r = np.random.default_rng(seed)
    f = random_field(r, 32, max_slope=1.0)
    for params in (SIGMA, ZERO):
        c = ph.derive_constants(params)
        base = ev.rhs(f, c)
        assert np.allclose(ev.rhs(np.roll(f, 5) + lift, c), np.roll(base, 5), atol=1e-9)
