"""Nystrom discretization of the singular integral operators A(f), B(f).

Principal values are taken with the offset trapezoidal rule: the integration
variable runs over s_m = (m + 1/2) h, h = 2 pi / N, so s = 0 is never hit.
Values at x_i - s_m are half-grid points, obtained from one spectral
half-shift per field: x_i - s_m = x_{i-m} - h/2.

Kernels use the variables delta = f(x) - f(x - s), T = tanh(delta/2) and
t = tan(s/2).  Numerators and denominators are multiplied by cos^2(s/2) so
that nothing blows up as s approaches pi.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import linalg

from . import spectral as sp
from .errors import SingularOperatorError

KIND_CODES = {"A": 0, "B": 1, "A_adjoint": 2, "B_adjoint": 3, "Cnm": 4}
MAGIC = b"MUSKOP01"


@dataclass(frozen=True)
class QuadratureRule:
    n: int

    @property
    def weight(self) -> float:
        return 2.0 * np.pi / self.n

    @property
    def offsets(self) -> np.ndarray:
        return (np.arange(self.n) + 0.5) * self.weight

    @property
    def symmetric_offsets(self) -> np.ndarray:
        """The same nodes mapped into (-pi, pi), for kernels that are not periodic in s."""
        s = self.offsets
        return np.where(s > np.pi, s - 2.0 * np.pi, s)


def fingerprint(f) -> str:
    return hashlib.sha1(np.ascontiguousarray(f, dtype=float).tobytes()).hexdigest()


@dataclass(frozen=True)
class OperatorMatrix:
    entries: np.ndarray
    kind: str
    frozen_f_hash: str

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def apply(self, omega) -> np.ndarray:
        return self.entries @ np.asarray(omega, dtype=float)

    def dump(self, path) -> None:
        """Binary dump: magic, u32 N, u32 kind code, then row-major float64 entries."""
        with open(path, "wb") as fh:
            fh.write(MAGIC + struct.pack("<II", self.n, KIND_CODES[self.kind]))
            fh.write(np.ascontiguousarray(self.entries, dtype="<f8").tobytes())

    @classmethod
    def load(cls, path) -> "OperatorMatrix":
        with open(path, "rb") as fh:
            head = fh.read(16)
            if head[:8] != MAGIC:
                raise ValueError("not an operator dump")
            n, code = struct.unpack("<II", head[8:])
            data = np.frombuffer(fh.read(), dtype="<f8")
        if data.size != n * n:
            raise ValueError("truncated operator dump")
        kind = {v: k for k, v in KIND_CODES.items()}[code]
        return cls(data.reshape(n, n).astype(float), kind, "")


class Interface:
    """Kernel data for a frozen interface f, shared by all operators on it."""

    def __init__(self, f):
        fv = np.array(f, dtype=float)
        self.f = fv
        self.n = n = sp.check_size(fv.size)
        self.rule = QuadratureRule(n)
        self.h = self.rule.weight
        self.fp = sp.derivative(fv, 1)
        self.idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
        self.s = self.rule.symmetric_offsets[None, :]
        half = self.rule.offsets / 2.0
        self.sn = np.sin(half)[None, :]
        self.cs = np.cos(half)[None, :]
        self.delta = fv[:, None] - sp.half_shift(fv)[self.idx]
        self.T = np.tanh(self.delta / 2.0)
        self.den = self.sn ** 2 + (self.T * self.cs) ** 2
        self.r2 = self.s ** 2 + self.delta ** 2

    # kernels, already scaled by the quadrature weight and normalization
    @cached_property
    def kernel_A(self):
        fp = self.fp[:, None]
        k = (fp * self.sn * self.cs * (1 - self.T ** 2) - self.T) / self.den
        return k * self.h / (2 * np.pi)

    @cached_property
    def kernel_B(self):
        fp = self.fp[:, None]
        k = (fp * self.T + self.sn * self.cs * (1 - self.T ** 2)) / self.den
        return k * self.h / (2 * np.pi)

    @cached_property
    def kernel_double_layer(self):
        fps = sp.half_shift(self.fp)[self.idx]
        k = (self.T - fps * self.sn * self.cs * (1 - self.T ** 2)) / self.den
        return k * self.h / (2 * np.pi)

    @cached_property
    def kernel_B_adjoint(self):
        fps = sp.half_shift(self.fp)[self.idx]
        k = -(fps * self.T + self.sn * self.cs * (1 - self.T ** 2)) / self.den
        return k * self.h / (2 * np.pi)

    def kernel_part(self, part: str) -> np.ndarray:
        w = self.h / (2 * np.pi)
        if part == "B1":
            k = self.T / self.den - 2 * self.delta / self.r2
        elif part == "B2":
            k = -self.sn * self.cs * (1 - self.T ** 2) / self.den + 2 * self.s / self.r2
        elif part == "B3":
            k = 2 * (self.s + self.fp[:, None] * self.delta) / self.r2
        elif part == "A3":
            k = 2 * (self.fp[:, None] * self.s - self.delta) / self.r2
        else:
            raise ValueError(f"unknown operator part {part!r}")
        return k * w

    # application and assembly
    def _apply(self, kernel: np.ndarray, omega) -> np.ndarray:
        wh = sp.half_shift(omega)
        return np.sum(kernel * wh[self.idx], axis=1)

    def _assemble(self, kernel: np.ndarray) -> np.ndarray:
        g = np.zeros((self.n, self.n))
        rows = np.repeat(np.arange(self.n), self.n)
        np.add.at(g, (rows, self.idx.ravel()), kernel.ravel())
        return g @ sp.shift_matrix(self.n)

    def apply_A(self, omega):
        return self._apply(self.kernel_A, omega)

    def apply_B(self, omega):
        return self._apply(self.kernel_B, omega)

    def apply_B_adjoint(self, xi):
        return self._apply(self.kernel_B_adjoint, xi)

    def apply_double_layer(self, xi):
        return self._apply(self.kernel_double_layer, xi)

    def apply_part(self, part: str, omega):
        return self._apply(self.kernel_part(part), omega)

    @cached_property
    def A_matrix(self) -> np.ndarray:
        return self._assemble(self.kernel_A)

    @cached_property
    def B_matrix(self) -> np.ndarray:
        return self._assemble(self.kernel_B)

    @cached_property
    def B_adjoint_matrix(self) -> np.ndarray:
        return self._assemble(self.kernel_B_adjoint)

    def cnm(self, a_list, b_list, omega) -> np.ndarray:
        """C_{n,m}(a)[b, omega] = PV int_{-pi}^{pi} omega(x-s)/s prod(db/s) / prod(1 + (da/s)^2) ds."""
        s = self.s
        integrand = sp.half_shift(omega)[self.idx] / s
        for b in b_list:
            b = np.asarray(b, dtype=float)
            integrand = integrand * (b[:, None] - sp.half_shift(b)[self.idx]) / s
        for a in a_list:
            a = np.asarray(a, dtype=float)
            da = (a[:, None] - sp.half_shift(a)[self.idx]) / s
            integrand = integrand / (1.0 + da ** 2)
        return self.h * np.sum(integrand, axis=1)

    def operator_A_matrix(self, a_mu: float) -> np.ndarray:
        return np.eye(self.n) + a_mu * self.A_matrix

    def solve_omega(self, a_mu: float, rhs) -> np.ndarray:
        if not abs(a_mu) < 1:
            raise ValueError("the Atwood number must satisfy |a_mu| < 1")
        rhs = np.asarray(rhs, dtype=float)
        if a_mu == 0:
            return rhs.copy()
        m = self.operator_A_matrix(a_mu)
        lu, piv = linalg.lu_factor(m, check_finite=True)
        d = np.abs(np.diag(lu))
        if d.min() <= 1e-13 * d.max():
            raise SingularOperatorError("LU pivot collapsed; refine the grid")
        omega = linalg.lu_solve((lu, piv), rhs)
        omega += linalg.lu_solve((lu, piv), rhs - m @ omega)
        return omega

    def lot_A(self, omega) -> np.ndarray:
        """Lower-order commutator T(f)[omega] = (A omega)' - A[omega'], built from C_{n,m} terms."""
        f, fp = self.f, self.fp
        fpp = sp.derivative(f, 2)
        c_terms = (fpp * self.cnm([f], [], omega)
                   - 2 * fp * self.cnm([f, f], [fp, f], omega)
                   - self.cnm([f], [fp], omega)
                   + 2 * self.cnm([f, f], [fp, f, f], omega)) / np.pi
        dw = sp.derivative(omega, 1)
        b2 = self.kernel_part("B2")
        b1 = self.kernel_part("B1")
        comm2 = sp.derivative(fp * self._apply(b2, omega), 1) - fp * self._apply(b2, dw)
        comm1 = sp.derivative(self._apply(b1, omega), 1) - self._apply(b1, dw)
        return c_terms - comm2 - comm1


def _interface(f) -> Interface:
    return f if isinstance(f, Interface) else Interface(f)


def kernel_A(f, x, s):
    """Kernel of A(f) at (x, s) from the trigonometric interpolant of f (tan form)."""
    t, fp, big_t = _kernel_vars(f, x, s)
    return (fp * t * (1 - big_t ** 2) - (1 + t ** 2) * big_t) / (t ** 2 + big_t ** 2)


def kernel_B(f, x, s):
    t, fp, big_t = _kernel_vars(f, x, s)
    return (fp * (1 + t ** 2) * big_t + t * (1 - big_t ** 2)) / (t ** 2 + big_t ** 2)


def _kernel_vars(f, x, s):
    x, s = np.broadcast_arrays(np.asarray(x, float), np.asarray(s, float))
    d = sp.evaluate(f, x) - sp.evaluate(f, x - s)
    return np.tan(s / 2), sp.evaluate(sp.derivative(f), x), np.tanh(d / 2)


def kernel_A_diagonal(f) -> np.ndarray:
    """Removable-singularity limit s -> 0 of kernel_A: f''/(1 + f'^2)."""
    fp = sp.derivative(f, 1)
    return sp.derivative(f, 2) / (1 + fp ** 2)


def assemble(f, kind: str) -> OperatorMatrix:
    geo = _interface(f)
    if kind == "A":
        m = geo.A_matrix
    elif kind == "B":
        m = geo.B_matrix
    elif kind == "A_adjoint":
        m = geo.A_matrix.T.copy()
    elif kind == "B_adjoint":
        m = geo.B_adjoint_matrix
    else:
        raise ValueError(f"cannot assemble operator kind {kind!r}")
    return OperatorMatrix(m, kind, fingerprint(geo.f))


def assemble_cnm(a_list, b_list, n: int) -> OperatorMatrix:
    """Matrix of omega -> C_{n,m}(a)[b, omega] for fixed a, b."""
    geo = Interface(np.zeros(n))
    cols = [geo.cnm(a_list, b_list, e) for e in np.eye(n)]
    return OperatorMatrix(np.array(cols).T, "Cnm", fingerprint(np.concatenate(
        [np.ravel(a_list), np.ravel(b_list)]) if (a_list or b_list) else np.zeros(0)))


def apply_A(f, omega):
    return _interface(f).apply_A(omega)


def apply_B(f, omega):
    return _interface(f).apply_B(omega)


def apply_A_adjoint(f, xi):
    return _interface(f).A_matrix.T @ np.asarray(xi, dtype=float)


def apply_B_adjoint(f, xi):
    return _interface(f).apply_B_adjoint(xi)


def double_layer(f, xi):
    """The double layer potential evaluated from its own kernel."""
    return _interface(f).apply_double_layer(xi)


def solve_omega(f, a_mu: float, rhs):
    return _interface(f).solve_omega(a_mu, rhs)


def apply_Cnm(a_list, b_list, omega):
    return Interface(np.zeros(len(omega))).cnm(a_list, b_list, omega)


def apply_B_parts(f, omega, part: str):
    return _interface(f).apply_part(part, omega)


def lot_A(f, omega):
    return _interface(f).lot_A(omega)


def energy_identity_residual(f, omega, sign: str) -> float:
    """Value of int [|B w|^2 -+ 2 f' (B w)(1 -+ A)w - |(1 -+ A)w|^2] / (1 + f'^2) dx.

    The operators act on the N-point grid; the nonlinear integrand is then
    integrated on a 4N-point grid after spectral interpolation, so that
    aliasing of the products does not pollute the residual.
    """
    if sign not in ("+", "-"):
        raise ValueError("sign must be '+' or '-'")
    geo = _interface(f)
    e = 1.0 if sign == "+" else -1.0
    m = 4 * geo.n
    bw = sp.resample(geo.apply_B(omega), m)
    aw = sp.resample(np.asarray(omega, float) - e * geo.apply_A(omega), m)
    fp = sp.resample(geo.fp, m)
    integrand = (bw ** 2 - e * 2 * fp * bw * aw - aw ** 2) / (1 + fp ** 2)
    return float(2.0 * np.pi / m * np.sum(integrand))


def derivative_identity_residual_B3(f, omega) -> float:
    """L2 norm of (B3 w)' minus its expansion in C_{n,m} terms."""
    geo = _interface(f)
    f, fp = geo.f, geo.fp
    fpp = sp.derivative(f, 2)
    dw = sp.derivative(omega, 1)
    lhs = np.pi * sp.derivative(geo.apply_part("B3", omega), 1)
    rhs = (np.pi * geo.apply_part("B3", dw)
           - 2 * geo.cnm([f, f], [fp, f], omega)
           + fpp * geo.cnm([f], [f], omega)
           + fp * geo.cnm([f], [fp], omega)
           - 2 * fp * geo.cnm([f, f], [fp, f, f], omega))
    return sp.l2_norm(lhs - rhs) / np.pi


def derivative_identity_residual_A3(f, omega) -> float:
    """L2 norm of (A3 w)' minus its expansion in C_{n,m} terms."""
    geo = _interface(f)
    f, fp = geo.f, geo.fp
    fpp = sp.derivative(f, 2)
    dw = sp.derivative(omega, 1)
    lhs = np.pi * sp.derivative(geo.apply_part("A3", omega), 1)
    rhs = (np.pi * geo.apply_part("A3", dw)
           + fpp * geo.cnm([f], [], omega)
           - 2 * fp * geo.cnm([f, f], [fp, f], omega)
           - geo.cnm([f], [fp], omega)
           + 2 * geo.cnm([f, f], [fp, f, f], omega))
    return sp.l2_norm(lhs - rhs) / np.pi


def _mean_zero_basis(n: int) -> np.ndarray:
    """Orthonormal (Euclidean) basis of mean-zero fields without a Nyquist mode.

    The Nyquist mode is excluded because B(0) = H annihilates it on the grid.
    """
    x = sp.grid(n)
    k = np.arange(1, n // 2)
    cols = np.hstack([np.cos(np.outer(x, k)), np.sin(np.outer(x, k))])
    return cols / np.sqrt(n / 2.0)


def resolvent_norm(f, lam: complex) -> float:
    """Spectral norm of (lam - A)^{-1} restricted to mean-zero fields."""
    geo = _interface(f)
    q = _mean_zero_basis(geo.n)
    m = q.T @ (lam * np.eye(geo.n) - geo.A_matrix) @ q
    return float(1.0 / np.linalg.svd(m, compute_uv=False)[-1])


def b_lower_bound_constant(f) -> float:
    """Smallest C with ||w|| <= C ||B(f) w|| over mean-zero w."""
    geo = _interface(f)
    q = _mean_zero_basis(geo.n)
    return float(1.0 / np.linalg.svd(geo.B_matrix @ q, compute_uv=False)[-1])
