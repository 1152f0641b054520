"""On-disk outputs: CSV tables, run headers and plot-ready data files."""

from __future__ import annotations

import csv
import json
import platform
from pathlib import Path

import numpy as np
import scipy

from . import spectral as sp

BRANCH_COLUMNS = ("ell", "s", "lambda", "arclen", "max_f", "max_fprime", "lead_eig", "tag")
SERIES_COLUMNS = ("t", "dt", "mean", "l2", "h2", "min_a_rt", "tail_max", "decay_rate")


def fmt(v) -> str:
    if isinstance(v, (str, np.str_)):
        return str(v)
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return "%.17g" % float(v)


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return (rows[0], rows[1:]) if rows else ([], [])


def versions() -> dict:
    from . import __version__
    return {"muskat_lab": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version()}


def write_header(path, payload: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=_json_default) + "\n")
    return path


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def local_decay_rates(t, l2) -> np.ndarray:
    """-d log||f||/dt between consecutive records (first entry NaN)."""
    t, l2 = np.asarray(t), np.asarray(l2)
    rates = np.full(t.size, np.nan)
    if t.size > 1:
        with np.errstate(divide="ignore", invalid="ignore"):
            rates[1:] = -np.diff(np.log(l2)) / np.diff(t)
    return rates


def fit_decay_rate(t, l2, t_min: float, t_max: float) -> float:
    t, l2 = np.asarray(t), np.asarray(l2)
    keep = (t >= t_min) & (t <= t_max) & (l2 > 0)
    if keep.sum() < 2:
        return float("nan")
    return float(-np.polyfit(t[keep], np.log(l2[keep]), 1)[0])


def write_series(path, series) -> Path:
    t = series.column("t")
    rates = local_decay_rates(t, series.column("l2"))
    rows = [r.as_tuple() + (rate,) for r, rate in zip(series.records, rates)]
    return write_csv(path, SERIES_COLUMNS, rows)


def write_final_state(path, f) -> Path:
    x = sp.grid(len(f))
    return write_csv(path, ("x", "f"), zip(x, np.asarray(f)))


def write_spectrum(path, f) -> Path:
    s = sp.spectrum(f)
    return write_csv(path, ("k", "abs_fhat"), zip(s.k.astype(int), s.amplitude))


def branch_rows(branch):
    for p in branch.points:
        yield (branch.ell, p.s, p.lam, p.arclen, p.max_f, p.max_fprime, p.lead_eig, p.tag)


def write_branches(path, branches) -> Path:
    rows = [row for b in branches for row in branch_rows(b)]
    return write_csv(path, BRANCH_COLUMNS, rows)


# plot data -----------------------------------------------------------------

PLOT_README = """Plot data written by muskat-lab.  Every file is plain text with
whitespace-separated columns and a single '#' comment line naming them.

series_<name>.dat     t  value           diagnostic of a time series
branch_ell<L>.dat     lambda  max_f      bifurcation curve of mode L
profile_lam<V>.dat    x  f               equilibrium profile at lambda = V
"""


def _write_dat(path, header, columns) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    cols = [np.asarray(c, dtype=float) for c in columns]
    with open(path, "w") as fh:
        if cols and cols[0].size:
            fh.write("# " + " ".join(header) + "\n")
            for row in zip(*cols):
                fh.write(" ".join("%.17g" % v for v in row) + "\n")
    return path


def emit_plot_data(obj, outdir, style: str = "auto") -> list[Path]:
    """Write plot-ready files for obj.  The style selects the layout listed in
    PLOT_README; "auto" infers it from the type of obj."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    if style == "auto":
        if hasattr(obj, "records"):
            style = "series"
        elif obj and hasattr(obj[0], "points"):
            style = "branch"
        else:
            style = "profiles" if obj else "series"
    written = []
    if style == "series":
        records = getattr(obj, "records", None) or []
        t = [r.t for r in records]
        for name in ("l2", "h2", "min_a_rt", "tail_max"):
            written.append(_write_dat(outdir / f"series_{name}.dat", ("t", name),
                                      [t, [getattr(r, name) for r in records]] if records else []))
    elif style == "branch":
        for b in obj:
            lam = [p.lam for p in b.points]
            amp = [p.max_f for p in b.points]
            written.append(_write_dat(outdir / f"branch_ell{b.ell}.dat", ("lambda", "max_f"),
                                      [lam, amp]))
    elif style == "profiles":
        for lam, f in obj:
            written.append(_write_dat(outdir / f"profile_lam{lam:.4g}.dat", ("x", "f"),
                                      [sp.grid(len(f)), f]))
    else:
        raise ValueError(f"unknown plot style {style!r}")
    (outdir / "README.txt").write_text(PLOT_README)
    return written
