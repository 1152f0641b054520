"""Command-line entry point: muskat-lab <command> [options] [key=value ...]."""

from __future__ import annotations

import argparse
import datetime
import sys
from pathlib import Path

import numpy as np

from . import artifacts as art
from . import equilibria as eq
from . import evolution as ev
from . import physics as ph
from . import spectral as sp
from .config import COMMANDS, RunConfig, initial_field, parse_config
from .errors import ConfigError, MuskatError
from .verify import run_suites

EXIT_OK, EXIT_FAILURE, EXIT_CONFIG, EXIT_BLOWUP, EXIT_RT, EXIT_VERIFY = 0, 1, 2, 3, 4, 5


def _header(cfg: RunConfig, **extra) -> dict:
    head = {"command": cfg.command, "config": cfg.as_dict(),
            "derived_constants": cfg.constants.as_dict(), "seed": cfg.seed,
            "versions": art.versions(),
            "created": datetime.datetime.now(datetime.timezone.utc).isoformat()}
    head.update(extra)
    return head


def run_simulate(cfg: RunConfig, out: Path) -> int:
    f0 = initial_field(cfg)
    state = ev.SimulationState.initial(f0, cfg.params)
    series = ev.simulate(state, cfg.step_control, cfg.t_end)
    art.write_series(out / "series.csv", series)
    art.write_final_state(out / "final_state.csv", series.final.f)
    art.write_spectrum(out / "spectrum.csv", series.final.f)
    c = cfg.constants
    t, l2 = series.column("t"), series.column("l2")
    rate = art.fit_decay_rate(t, l2, 0.1 * t[-1], t[-1]) if t.size > 1 else float("nan")
    if c.sigma > 0:
        expected = c.sigma * c.b_mu * (1 - c.lam)
    else:
        expected = c.c_theta
    art.write_header(out / "run_header.json", _header(
        cfg, status=series.status.value, message=series.message, steps=len(series.records) - 1,
        t_final=series.final.t, fitted_decay_rate=rate, linear_decay_rate_mode1=expected,
        scheme=cfg.step_control.scheme_for(c)))
    if cfg.plot_data:
        art.emit_plot_data(series, out / "plot")
    print(f"simulate: {series.status.value} at t = {series.final.t:.6g} "
          f"after {len(series.records) - 1} steps; fitted decay rate {rate:.6g}")
    if series.status is ev.Status.COMPLETED or cfg.expect_termination:
        return EXIT_OK
    return EXIT_BLOWUP if series.status is ev.Status.TERMINATED_BLOWUP else EXIT_RT


def run_equilibria(cfg: RunConfig, out: Path) -> int:
    branches, fits = [], {}
    c = cfg.constants
    a_mu, b_mu = c.a_mu, c.b_mu
    sigma = cfg.sigma if cfg.sigma > 0 else 1.0
    for ell in cfg.ells:
        up = eq.continue_branch(ell, cfg.ds, cfg.n_steps, cfg.N, slope_cap=cfg.slope_cap)
        down = eq.continue_branch(ell, cfg.ds, cfg.n_steps, cfg.N, direction=-1,
                                  slope_cap=cfg.slope_cap)
        fit = eq.Branch(ell, down.points[::-1] + up.points[1:]).curvature_fit(0.05)
        fits[str(ell)] = {"lambda_curvature": fit[2], "expected": -3 * ell ** 4 / 8,
                          "status": up.status}
        if cfg.stability:
            up = eq.with_stability(up, sigma, a_mu, b_mu)
        branches.append(up)
    art.write_branches(out / "branch.csv", branches)
    art.write_header(out / "run_header.json", _header(
        cfg, fits=fits, lambda_star=eq.lambda_star(), amplitude_limit=eq.amplitude_limit()))
    if cfg.plot_data:
        art.emit_plot_data(branches, out / "plot")
        if 1 in cfg.ells:
            b1 = branches[cfg.ells.index(1)]
            lams = [lam for lam in (0.9, 0.6, 0.4) if lam >= min(p.lam for p in b1.points)]
            profiles = [(lam, eq.point_at(b1, "lambda", lam).f) for lam in lams]
            art.emit_plot_data(profiles, out / "plot", "profiles")
    for ell, fit in fits.items():
        print(f"equilibria: ell = {ell}: lambda curvature {fit['lambda_curvature']:.6g} "
              f"(expected {fit['expected']:.6g}), {fit['status']}")
    return EXIT_OK


def run_spectrum(cfg: RunConfig, out: Path) -> int:
    f0 = initial_field(cfg)
    vals = eq.jacobian_spectrum(f0, cfg.params)
    art.write_csv(out / "spectrum_eigs.csv", ("index", "re", "im"),
                  ((i, v.real, v.imag) for i, v in enumerate(vals)))
    k = np.arange(1, cfg.N // 2)
    art.write_csv(out / "symbols.csv", ("k", "expected_at_zero"),
                  zip(k, eq.expected_symbols(cfg.N, cfg.params)))
    art.write_header(out / "run_header.json", _header(cfg, leading_eigenvalue=vals[0].real))
    print(f"spectrum: leading eigenvalue {vals[0].real:.6g}")
    return EXIT_OK


def run_verify(cfg: RunConfig, out: Path) -> int:
    results = run_suites(cfg.seed)
    art.write_csv(out / "verify.csv", ("suite", "measured", "tolerance", "status"),
                  ((r.name, r.measured, r.tolerance, "pass" if r.passed else "FAIL")
                   for r in results))
    art.write_header(out / "run_header.json", _header(
        cfg, passed=all(r.passed for r in results)))
    for r in results:
        print(f"{'pass' if r.passed else 'FAIL'}  {r.name:28s} {r.measured:.3e} <= {r.tolerance:.1e}")
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


def _points(text: str | None) -> np.ndarray:
    if text is None:
        ys = np.linspace(3.0, 10.0, 15)
        return np.column_stack([np.zeros_like(ys), ys])
    try:
        pts = [[float(v) for v in item.split(",")] for item in text.split(";") if item.strip()]
        arr = np.array(pts, dtype=float)
    except ValueError:
        raise ConfigError(f"points: cannot parse {text!r}; expected 'x,y; x,y'") from None
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ConfigError("points: expected pairs 'x,y' separated by ';'")
    return arr


def run_velocity(cfg: RunConfig, out: Path) -> int:
    f0 = initial_field(cfg)
    c = cfg.constants
    omega = ev.vortex_sheet_strength(f0, c)
    pts = _points(cfg.points)
    try:
        vel = ph.velocity_field(f0, omega, pts)
    except ValueError as exc:
        raise ConfigError(f"points: {exc}") from None
    art.write_csv(out / "velocity.csv", ("x", "y", "V1", "V2"),
                  (tuple(p) + tuple(v) for p, v in zip(pts, vel)))
    up, low = ph.velocity_trace(f0, omega, "+"), ph.velocity_trace(f0, omega, "-")
    art.write_csv(out / "trace.csv", ("x", "f", "omega", "V1_plus", "V2_plus", "V1_minus",
                                      "V2_minus"),
                  zip(sp.grid(cfg.N), f0, omega, up[0], up[1], low[0], low[1]))
    art.write_header(out / "run_header.json", _header(cfg))
    print(f"velocity: {len(pts)} points written")
    return EXIT_OK


RUNNERS = {"simulate": run_simulate, "equilibria": run_equilibria, "spectrum": run_spectrum,
           "verify": run_verify, "velocity": run_velocity}


def run(cfg: RunConfig) -> int:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return RUNNERS[cfg.command](cfg, out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="muskat-lab", description=__doc__)
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("overrides", nargs="*", metavar="key=value",
                        help="configuration overrides")
    parser.add_argument("-c", "--config", help="key = value configuration file")
    parser.add_argument("-o", "--out", help="output directory")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--ell", help="comma-separated mode numbers for equilibria")
    parser.add_argument("-N", type=int, dest="n", help="grid size")
    parser.add_argument("--plot-data", action="store_true", help="also write plot files")
    parser.add_argument("--expect-termination", action="store_true",
                        help="exit 0 on blow-up or Rayleigh-Taylor termination")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = list(args.overrides)
    for key, value in (("output_dir", args.out), ("seed", args.seed), ("ell", args.ell),
                       ("N", args.n)):
        if value is not None:
            overrides.append(f"{key}={value}")
    if args.plot_data:
        overrides.append("plot_data=true")
    if args.expect_termination:
        overrides.append("expect_termination=true")
    try:
        cfg = parse_config(args.config, overrides, command=args.command)
        return run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MuskatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
