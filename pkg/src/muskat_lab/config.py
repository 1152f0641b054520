"""Run configuration: flat key = value files plus command-line overrides."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import spectral as sp
from .errors import ConfigError
from .evolution import StepControl
from .physics import PhysicalParams, derive_constants

COMMANDS = ("simulate", "equilibria", "spectrum", "verify", "velocity")


@dataclass(frozen=True)
class RunConfig:
    command: str = "simulate"
    mu_minus: float = 1.0
    mu_plus: float = 1.0
    rho_minus: float = 1.0
    rho_plus: float = 0.0
    k: float = 1.0
    sigma: float = 0.0
    g: float = 1.0
    V: float = 0.0
    N: int = 64
    init_modes: str = "cos1:0.01"
    init_tail_exponent: float | None = None
    init_tail_amplitude: float = 0.01
    init_file: str | None = None
    t_end: float = 1.0
    dt_init: float = 1e-3
    dt_min: float = 1e-12
    dt_max: float = 1.0
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    max_H2_norm: float = 1e3
    scheme: str | None = None
    output_dir: str = "muskat_out"
    seed: int = 0
    ell: str = "1"
    ds: float = 0.01
    n_steps: int = 200
    slope_cap: float = 25.0
    stability: bool = True
    points: str | None = None
    plot_data: bool = False
    expect_termination: bool = False
    extra: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def params(self) -> PhysicalParams:
        return PhysicalParams(self.mu_minus, self.mu_plus, self.rho_minus, self.rho_plus,
                              self.k, self.sigma, self.g, self.V)

    @property
    def constants(self):
        return derive_constants(self.params)

    @property
    def step_control(self) -> StepControl:
        return StepControl(self.dt_init, self.dt_min, self.dt_max, self.rel_tol,
                           self.abs_tol, self.max_H2_norm, self.scheme)

    @property
    def ells(self) -> list[int]:
        return [int(v) for v in self.ell.split(",") if v.strip()]

    def as_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d.pop("extra")
        return d


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig) if f.name != "extra"}
_OPTIONAL = {"init_tail_exponent", "init_file", "scheme", "points"}


def _convert(key: str, raw: str):
    default = _FIELDS[key].default
    raw = raw.strip()
    if key in _OPTIONAL and raw.lower() in ("", "none", "auto"):
        return None
    if isinstance(default, bool):
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"expected a boolean, got {raw!r}")
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float) or key == "init_tail_exponent":
        return float(raw)
    return raw


def _parse_pairs(pairs):
    """pairs: iterable of (where, text) with text 'key = value'."""
    values = {}
    for where, text in pairs:
        line = text.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{where}: expected key = value, got {text.strip()!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in _FIELDS:
            raise ConfigError(f"{where}: unknown key {key!r}")
        try:
            values[key] = _convert(key, raw)
        except ValueError as exc:
            raise ConfigError(f"{where}: bad value for {key}: {exc}") from None
    return values


def validate(cfg: RunConfig) -> RunConfig:
    if cfg.command not in COMMANDS:
        raise ConfigError(f"command: unknown command {cfg.command!r}")
    n = cfg.N
    if n < 32 or n > 1024 or n & (n - 1):
        raise ConfigError("N: must be a power of two between 32 and 1024")
    try:
        c = derive_constants(cfg.params)
        cfg.step_control
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if not abs(c.a_mu) < 1:
        raise ConfigError("mu_minus, mu_plus: Atwood number must satisfy |a_mu| < 1")
    if not cfg.t_end > 0:
        raise ConfigError("t_end: must be positive")
    if cfg.command == "equilibria":
        try:
            ells = cfg.ells
        except ValueError:
            raise ConfigError(f"ell: expected comma-separated integers, got {cfg.ell!r}") from None
        if not ells or min(ells) < 1 or max(ells) >= n // 2 - 1:
            raise ConfigError("ell: mode numbers must lie in [1, N/2 - 2]")
        if not cfg.ds > 0 or cfg.n_steps < 1:
            raise ConfigError("ds, n_steps: must be positive")
    if cfg.init_tail_exponent is not None and cfg.init_tail_exponent <= 0.5:
        raise ConfigError("init_tail_exponent: must exceed 1/2 for a square-summable tail")
    if cfg.init_file is None and cfg.init_tail_exponent is None:
        try:
            parse_modes(cfg.init_modes)
        except ValueError as exc:
            raise ConfigError(f"init_modes: {exc}") from None
    return cfg


def parse_config(path=None, overrides=(), command: str | None = None) -> RunConfig:
    """Read a key = value file (optional), apply 'key=value' overrides, validate."""
    values = {}
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file {path} not found")
        lines = p.read_text().splitlines()
        values.update(_parse_pairs((f"{p.name}:{i}", t) for i, t in enumerate(lines, 1)))
    values.update(_parse_pairs((f"override {t!r}", t) for t in overrides))
    if command is not None:
        values["command"] = command
    return validate(RunConfig(**values))


def parse_modes(text: str) -> list[tuple[str, int, float]]:
    """'cos1:0.01, sin3:-0.002' -> [('cos', 1, 0.01), ('sin', 3, -0.002)]."""
    modes = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        name, _, amp = item.partition(":")
        kind = name[:3]
        if kind not in ("cos", "sin") or not name[3:].isdigit() or not amp:
            raise ValueError(f"bad mode {item!r}; expected cosK:amp or sinK:amp")
        modes.append((kind, int(name[3:]), float(amp)))
    return modes


def initial_field(cfg: RunConfig) -> np.ndarray:
    n = cfg.N
    x = sp.grid(n)
    if cfg.init_file is not None:
        data = np.loadtxt(cfg.init_file, delimiter=",", ndmin=2, comments="#")
        values = data[:, -1]
        if values.size != n:
            raise ConfigError(f"init_file: expected {n} values, got {values.size}")
        return values
    if cfg.init_tail_exponent is not None:
        rng = np.random.default_rng(cfg.seed)
        k = np.arange(1, n // 2)
        amp = cfg.init_tail_amplitude * (1.0 + k ** 2) ** (-cfg.init_tail_exponent)
        phase = rng.uniform(0, 2 * np.pi, k.size)
        return np.sum(amp[:, None] * np.cos(np.outer(k, x) + phase[:, None]), axis=0)
    f = np.zeros(n)
    for kind, k, amp in parse_modes(cfg.init_modes):
        f += amp * (np.cos(k * x) if kind == "cos" else np.sin(k * x))
    return f
