"""Uniform periodic grid on [-pi, pi) and Fourier-multiplier operations.

All operations take nodal values (a 1-D array or a PeriodicField) and return
plain ndarrays of nodal values.  Coefficients follow the real-FFT layout,
k = 0..N/2, with the Nyquist mode carried as a real cosine.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np


def check_size(n: int) -> int:
    n = int(n)
    if n < 8 or n % 2:
        raise ValueError(f"grid size must be even and >= 8, got {n}")
    return n


def grid(n: int) -> np.ndarray:
    """Nodes x_j = -pi + 2 pi j / n."""
    n = check_size(n)
    return -np.pi + 2.0 * np.pi * np.arange(n) / n


def wavenumbers(n: int) -> np.ndarray:
    return np.arange(n // 2 + 1, dtype=float)


def _values(f) -> np.ndarray:
    v = np.asarray(f, dtype=float)
    if v.ndim != 1:
        raise ValueError("expected a one-dimensional array of nodal values")
    check_size(v.size)
    return v


def _apply_multiplier(f, symbol: np.ndarray) -> np.ndarray:
    v = _values(f)
    return np.fft.irfft(np.fft.rfft(v) * symbol, n=v.size)


@dataclass(frozen=True)
class Spectrum:
    """Fourier coefficients f_hat(k) = (1/N) sum_j f_j exp(-i k x_j), k = 0..N/2."""

    coeffs: np.ndarray

    @property
    def n(self) -> int:
        return 2 * (self.coeffs.size - 1)

    @property
    def k(self) -> np.ndarray:
        return wavenumbers(self.n)

    @property
    def amplitude(self) -> np.ndarray:
        return np.abs(self.coeffs)

    def to_values(self) -> np.ndarray:
        n = self.n
        phase = np.exp(-1j * self.k * np.pi)
        return np.fft.irfft(self.coeffs * n / phase, n=n)


def spectrum(f) -> Spectrum:
    v = _values(f)
    n = v.size
    # the rfft is relative to x_0 = -pi; rotate to true coefficients on [-pi, pi)
    c = np.fft.rfft(v) / n * np.exp(-1j * wavenumbers(n) * np.pi)
    c[-1] = c[-1].real
    return Spectrum(c)


@dataclass(frozen=True)
class PeriodicField:
    """Nodal values of a real 2 pi-periodic function.

    The values are stored read-only, so the cached spectrum never goes stale.
    Passing a PeriodicField to numpy or to any function in this package
    uses its nodal values.
    """

    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(_values(self.values), dtype=float)
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def __len__(self):
        return self.values.size

    @classmethod
    def from_function(cls, func, n: int) -> "PeriodicField":
        return cls(func(grid(n)))

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def x(self) -> np.ndarray:
        return grid(self.n)

    @cached_property
    def spectrum(self) -> Spectrum:
        return spectrum(self.values)

    def mean(self) -> float:
        return float(np.mean(self.values))

    def derivative(self, order: int = 1) -> "PeriodicField":
        return PeriodicField(derivative(self.values, order))

    def hilbert(self) -> "PeriodicField":
        return PeriodicField(hilbert(self.values))

    def norm(self, r: float = 0.0) -> float:
        return sobolev_norm(self.values, r)

    def __call__(self, x) -> np.ndarray:
        return evaluate(self.values, x)


def derivative(f, order: int = 1) -> np.ndarray:
    """Spectral derivative; odd orders drop the Nyquist mode."""
    if int(order) != order or order < 1:
        raise ValueError("derivative order must be a positive integer")
    n = _values(f).size
    symbol = (1j * wavenumbers(n)) ** order
    if order % 2:
        symbol[-1] = 0.0
    return _apply_multiplier(f, symbol)


def hilbert(f) -> np.ndarray:
    """Periodic Hilbert transform, symbol -i sign(k): cos(kx) -> sin(kx)."""
    n = _values(f).size
    symbol = -1j * np.ones(n // 2 + 1)
    symbol[0] = 0.0
    symbol[-1] = 0.0
    return _apply_multiplier(f, symbol)


def fractional_multiplier(f, s: float) -> np.ndarray:
    """Apply |k|^(2s).  For s > 0 the mean and the Nyquist mode are removed,
    which keeps Lambda = |k| equal to hilbert(derivative(f)) on every field."""
    n = _values(f).size
    if s == 0:
        return _values(f).copy()
    k = wavenumbers(n)
    with np.errstate(divide="ignore"):
        symbol = np.where(k > 0, k ** (2.0 * s), 0.0)
    symbol[-1] = 0.0
    return _apply_multiplier(f, symbol)


def project_zero_mean(f) -> np.ndarray:
    v = _values(f)
    return v - v.mean()


def sobolev_norm(f, r: float = 0.0) -> float:
    """||f||_{H^r}^2 = 2 pi sum_k (1 + k^2)^r |f_hat(k)|^2 over all k in (-N/2, N/2]."""
    if r < 0 or r > 4:
        raise ValueError("Sobolev index must lie in [0, 4]")
    v = _values(f)
    n = v.size
    c = np.abs(np.fft.rfft(v) / n) ** 2
    mult = np.full(n // 2 + 1, 2.0)
    mult[0] = 1.0
    mult[-1] = 1.0
    w = (1.0 + wavenumbers(n) ** 2) ** r
    return float(np.sqrt(2.0 * np.pi * np.sum(mult * w * c)))


def half_shift(f) -> np.ndarray:
    """Values of the trigonometric interpolant at x_j - pi/N."""
    n = _values(f).size
    return _apply_multiplier(f, np.exp(-1j * wavenumbers(n) * np.pi / n))


def shift_matrix(n: int) -> np.ndarray:
    """Matrix S with S @ v == half_shift(v)."""
    return half_shift_columns(np.eye(check_size(n)))


def half_shift_columns(m: np.ndarray) -> np.ndarray:
    n = m.shape[0]
    phase = np.exp(-1j * wavenumbers(n) * np.pi / n)
    return np.fft.irfft(np.fft.rfft(m, axis=0) * phase[:, None], n=n, axis=0)


def evaluate(f, x) -> np.ndarray:
    """Evaluate the trigonometric interpolant of the nodal values at points x."""
    v = _values(f)
    n = v.size
    c = np.fft.rfft(v) / n
    xi = np.asarray(x, dtype=float) + np.pi
    k = wavenumbers(n)
    w = np.full(k.size, 2.0)
    w[0] = 1.0
    out = np.real(np.exp(1j * np.multiply.outer(xi, k[:-1])) @ (w[:-1] * c[:-1]))
    return out + c[-1].real * np.cos(n // 2 * xi)


def resample(f, m: int) -> np.ndarray:
    """Values of the trigonometric interpolant on the m-point grid (m >= N).

    The Nyquist coefficient is split evenly between +N/2 and -N/2.
    """
    v = _values(f)
    n = v.size
    m = check_size(m)
    if m < n:
        raise ValueError("resample only refines the grid")
    c = np.fft.rfft(v)
    c[-1] *= 0.5 if m > n else 1.0
    padded = np.zeros(m // 2 + 1, dtype=complex)
    padded[: c.size] = c
    return np.fft.irfft(padded * (m / n), n=m)


def dealias(f) -> np.ndarray:
    """Two-thirds rule: zero every mode with |k| > N/3."""
    n = _values(f).size
    return _apply_multiplier(f, (wavenumbers(n) <= n / 3.0).astype(float))


def cos_basis(n: int, m: int | None = None) -> np.ndarray:
    """Nodal matrix with columns cos(k x), k = 1..m (default N/2 - 1)."""
    m = n // 2 - 1 if m is None else m
    return np.cos(np.outer(grid(n), np.arange(1, m + 1)))


def cos_coefficients(f, m: int | None = None) -> np.ndarray:
    """Coefficients a_k of cos(kx), k = 1..m, of the nodal field."""
    v = _values(f)
    n = v.size
    m = n // 2 - 1 if m is None else m
    return 2.0 * spectrum(v).coeffs[1:m + 1].real


def sin_coefficients(f, m: int | None = None) -> np.ndarray:
    v = _values(f)
    n = v.size
    m = n // 2 - 1 if m is None else m
    return -2.0 * spectrum(v).coeffs[1:m + 1].imag


def from_cos_coefficients(a: np.ndarray, n: int) -> np.ndarray:
    return cos_basis(n, len(a)) @ np.asarray(a, dtype=float)


def antiderivative(f) -> np.ndarray:
    """Mean-zero periodic antiderivative of the mean-zero part of f."""
    n = _values(f).size
    k = wavenumbers(n)
    symbol = np.zeros(k.size, dtype=complex)
    symbol[1:-1] = 1.0 / (1j * k[1:-1])
    return _apply_multiplier(f, symbol)


def l2_norm(f) -> float:
    """Trapezoid L2 norm on the period."""
    v = _values(f)
    return float(np.sqrt(2.0 * np.pi / v.size * np.sum(v * v)))


def inner(f, g) -> float:
    v, w = _values(f), _values(g)
    return float(2.0 * np.pi / v.size * np.dot(v, w))


def tail_max(f) -> float:
    """Largest |f_hat(k)| with k >= N/4."""
    s = spectrum(f)
    return float(np.max(s.amplitude[s.k >= s.n / 4]))
