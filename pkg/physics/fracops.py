# physics/fracops.py
"""Discrete fractional operators on a periodic 1D grid.

Spectral Riesz Laplacian (-Delta)^{alpha/2} with its finite-difference oracles, Caputo L1
derivative, Riemann-Liouville integral, and the harmonic-extension (Poisson kernel)
route to the same operator.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Literal

import numpy as np
from scipy import fft as sfft
from scipy.integrate import IntegrationWarning, quad
from scipy.linalg import circulant
from scipy.special import gamma as sp_gamma
from scipy.special import rgamma, zeta

from physics.errors import DomainError, ExtrapolationError, KernelConvergenceError, NonFiniteError

__all__ = [
    "Grid1D",
    "WaveField",
    "FracParams",
    "riesz_multiplier",
    "apply_riesz",
    "gl_riesz_oracle",
    "hilbert_riesz_oracle",
    "caputo_l1_weights",
    "caputo_l1_derivative",
    "frac_integral",
    "poisson_kernel",
    "extension_symbol",
    "extension_solve",
    "extension_constant",
    "neumann_limit",
]

log = logging.getLogger(f"fracwave.{__name__}")

NEUMANN_MAX_Y = 1e-2
EXTRAPOLATION_SPREAD = 0.25


# ---------------- Domain types ----------------
@dataclass(frozen=True)
class Grid1D:
    x_min: float
    x_max: float
    n: int

    def __post_init__(self) -> None:
        if self.n < 8 or self.n & (self.n - 1):
            raise DomainError(f"grid size n={self.n} must be a power of two >= 8")
        if not self.x_max > self.x_min:
            raise DomainError("x_max must exceed x_min")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n

    @property
    def half_width(self) -> float:
        return 0.5 * (self.x_max - self.x_min)

    L = half_width

    @cached_property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n)

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        return 2.0 * np.pi * sfft.fftfreq(self.n, d=self.dx)


@dataclass
class WaveField:
    grid: Grid1D
    values: np.ndarray

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (self.grid.n,):
            raise DomainError(f"field has shape {self.values.shape}, grid expects ({self.grid.n},)")

    def norm2(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2) * self.grid.dx)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.values)))

    def copy(self) -> "WaveField":
        return WaveField(self.grid, self.values.copy())

    def with_values(self, values: np.ndarray) -> "WaveField":
        return WaveField(self.grid, values)


@dataclass(frozen=True)
class FracParams:
    alpha: float = 2.0
    beta: float = 1.0
    nu: float = 0.5
    hbar_ef: float = 1.0
    mass: float = 1.0
    B: float = 0.0
    G: float = 0.0

    def __post_init__(self) -> None:
        problems = []
        if not (0 < self.alpha <= 2):
            problems.append(f"alpha={self.alpha} outside (0,2]")
        if not (0 < self.beta <= 1):
            problems.append(f"beta={self.beta} outside (0,1]")
        if not (0 < self.nu < 1):
            problems.append(f"nu={self.nu} outside (0,1)")
        if not self.hbar_ef > 0:
            problems.append("hbar_ef must be > 0")
        if not self.mass > 0:
            problems.append("mass must be > 0")
        if not self.G >= 0:
            problems.append("G must be >= 0")
        if problems:
            raise DomainError("; ".join(problems))


def _check_alpha(alpha: float) -> None:
    if not (0 < alpha <= 2):
        raise DomainError(f"alpha={alpha} outside (0,2]")


def _require_finite(field_: WaveField, what: str = "field") -> None:
    if not field_.is_finite():
        raise NonFiniteError(what)


# ---------------- Spectral Riesz ----------------
def riesz_multiplier(grid: Grid1D, alpha: float) -> np.ndarray:
    _check_alpha(alpha)
    mult = np.abs(grid.wavenumbers) ** alpha
    mult[0] = 0.0
    return mult


def apply_riesz(field_: WaveField, alpha: float) -> WaveField:
    """(-Delta)^{alpha/2} via FFT; periodic."""
    _require_finite(field_)
    mult = riesz_multiplier(field_.grid, alpha)
    return field_.with_values(sfft.ifft(mult * sfft.fft(field_.values)))


# ---------------- Finite-difference oracles ----------------
def _gl_weights(alpha: float, count: int) -> np.ndarray:
    g = np.empty(count)
    g[0] = 1.0
    for k in range(1, count):
        g[k] = g[k - 1] * (1.0 - (alpha + 1.0) / k)
    return g


def _aliased_gl_weights(alpha: float, n: int, periods: int = 16) -> np.ndarray:
    """G_m = sum_r g_{m + r n}: explicit up to `periods` wraps, Hurwitz-zeta tail beyond."""
    g = _gl_weights(alpha, periods * n)
    aliased = g.reshape(periods, n).sum(axis=0)
    inv_gamma = rgamma(-alpha)
    if inv_gamma != 0.0:
        shift = periods + np.arange(n) / n
        # g_k ~ k^{-alpha-1} (1 + alpha(alpha+1)/(2k)) / Gamma(-alpha)
        tail = n ** (-alpha - 1.0) * zeta(alpha + 1.0, shift)
        tail += 0.5 * alpha * (alpha + 1.0) * n ** (-alpha - 2.0) * zeta(alpha + 2.0, shift)
        aliased += inv_gamma * tail
    return aliased


def gl_riesz_oracle(field_: WaveField, alpha: float,
                    boundary: Literal["periodic", "truncate"] = "periodic") -> WaveField:
    """Left+right Grunwald-Letnikov realization of the Riesz derivative.

    Weighted-shifted weights with shifts 1 and 0, second order in dx. "periodic" sums the
    full series around the ring, "truncate" stops at the domain edge.
    """
    if not (0 < alpha <= 2):
        raise DomainError(f"alpha={alpha} outside (0,2]")
    if alpha == 1:
        raise DomainError("the GL Riesz prefactor has a pole at alpha=1; use hilbert_riesz_oracle")
    _require_finite(field_)
    n, h = field_.grid.n, field_.grid.dx
    shifts = ((1, 0.5 * alpha), (0, 1.0 - 0.5 * alpha))
    scale = h ** (-alpha) / (2.0 * math.cos(0.5 * alpha * math.pi))

    if boundary == "periodic":
        G = _aliased_gl_weights(alpha, n)
        kappa = np.arange(n)
        w = np.zeros(n)
        for p, lam in shifts:
            np.add.at(w, (p - kappa) % n, lam * G)   # left derivative
            np.add.at(w, (kappa - p) % n, lam * G)   # right derivative
        # out_j = sum_m w_m f_{j+m}
        col = np.concatenate(([w[0]], w[:0:-1]))
        out = scale * (circulant(col) @ field_.values)
        return field_.with_values(out)

    if boundary != "truncate":
        raise DomainError(f"unknown boundary mode {boundary!r}")
    g = _gl_weights(alpha, n + 2)
    f = field_.values
    out = np.zeros(n, dtype=complex)
    for j in range(n):
        acc = 0j
        for p, lam in shifts:
            # left: f(x_j - (k - p) h), right: f(x_j + (k - p) h)
            k_left = np.arange(max(0, j + p - (n - 1)), j + p + 1)
            acc += lam * np.dot(g[k_left], f[j - k_left + p])
            k_right = np.arange(max(0, p - j), n - j + p)
            acc += lam * np.dot(g[k_right], f[j + k_right - p])
        out[j] = acc
    return field_.with_values(scale * out)


def hilbert_riesz_oracle(field_: WaveField) -> WaveField:
    """alpha=1 oracle: centered first difference, then discrete Hilbert transform."""
    _require_finite(field_)
    h = field_.grid.dx
    f = field_.values
    deriv = (np.roll(f, -1) - np.roll(f, 1)) / (2.0 * h)
    k = field_.grid.wavenumbers
    out = sfft.ifft(-1j * np.sign(k) * sfft.fft(deriv))
    return field_.with_values(out)


# ---------------- Time-fractional calculus ----------------
def caputo_l1_weights(beta: float, n_steps: int, dt: float) -> np.ndarray:
    """L1 weights b_j, j = 0..n_steps-1."""
    if not (0 < beta <= 1):
        raise DomainError(f"beta={beta} outside (0,1]")
    if n_steps < 1 or not dt > 0:
        raise DomainError("n_steps >= 1 and dt > 0 required")
    j = np.arange(n_steps, dtype=float)
    b = (j + 1.0) ** (1.0 - beta) - j ** (1.0 - beta)
    b[0] = 1.0
    return b * dt ** (-beta) / sp_gamma(2.0 - beta)


def caputo_l1_derivative(samples, beta: float, dt: float) -> np.ndarray:
    f = np.asarray(samples)
    n_total = f.shape[0]
    out = np.zeros_like(f, dtype=np.result_type(f, float))
    if n_total < 2:
        return out
    b = caputo_l1_weights(beta, n_total - 1, dt)
    diffs = np.diff(f, axis=0)
    # D[n] = sum_{j<n} b_j (f_{n-j} - f_{n-j-1})
    for n in range(1, n_total):
        out[n] = np.tensordot(b[:n], diffs[n - 1::-1], axes=(0, 0))
    return out


def frac_integral(samples, beta: float, dt: float) -> np.ndarray:
    """Riemann-Liouville integral of order beta, product-trapezoid weights."""
    if not beta > 0:
        raise DomainError("beta must be > 0")
    f = np.asarray(samples)
    n_total = f.shape[0]
    out = np.zeros_like(f, dtype=np.result_type(f, float))
    pref = dt ** beta / sp_gamma(beta + 2.0)
    b1 = beta + 1.0
    for n in range(1, n_total):
        m = n - np.arange(n + 1, dtype=float)
        a = (m + 1.0) ** b1 - 2.0 * m ** b1 + np.abs(m - 1.0) ** b1
        a[0] = (n - 1.0) ** b1 - (n - 1.0 - beta) * n ** beta
        a[n] = 1.0
        out[n] = pref * np.tensordot(a, f[: n + 1], axes=(0, 0))
    return out


# ---------------- Harmonic extension ----------------
@lru_cache(maxsize=64)
def _poisson_mass(alpha: float) -> float:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        half, _ = quad(lambda s: (1.0 + s * s) ** (-0.5 * (1.0 + alpha)), 0.0, np.inf,
                       epsabs=1e-14, epsrel=1e-13, limit=400)
    return 2.0 * half


def poisson_kernel(x, y: float, alpha: float):
    """Unit-mass kernel y^alpha (x^2 + y^2)^{-(1+alpha)/2} / N_alpha."""
    if not (0 < alpha < 2):
        raise DomainError(f"alpha={alpha} outside (0,2)")
    x = np.asarray(x, dtype=float)
    return y ** alpha * (x * x + y * y) ** (-0.5 * (1.0 + alpha)) / _poisson_mass(alpha)


@lru_cache(maxsize=1 << 16)
def _symbol(t: float, alpha: float) -> float:
    if t == 0.0:
        return 1.0
    mass = _poisson_mass(alpha)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        val, err = quad(lambda s: (1.0 + s * s) ** (-0.5 * (1.0 + alpha)), 0.0, np.inf,
                        weight="cos", wvar=t, epsabs=1e-14, epsrel=1e-13, limlst=200)
    if not math.isfinite(val) or err > 1e-9:
        raise KernelConvergenceError(1e-9, err, f"extension symbol t={t}, alpha={alpha}")
    return 2.0 * val / mass


def extension_symbol(t, alpha: float):
    """Fourier transform of the unit-mass Poisson kernel at y=1, evaluated at |t|."""
    if not (0 < alpha < 2):
        raise DomainError(f"alpha={alpha} outside (0,2)")
    arr = np.abs(np.asarray(t, dtype=float))
    out = np.fromiter((_symbol(float(v), float(alpha)) for v in arr.ravel()), dtype=float, count=arr.size)
    return out.reshape(arr.shape) if arr.shape else float(out[0])


def _check_y_grid(y_grid) -> np.ndarray:
    y = np.asarray(y_grid, dtype=float)
    if y.ndim != 1 or y.size == 0 or np.any(y <= 0) or np.any(np.diff(y) <= 0):
        raise DomainError("y_grid must be strictly positive and ascending")
    return y


def extension_solve(f: WaveField, alpha: float, y_grid) -> np.ndarray:
    """u(x, y) for every y in y_grid, shape (len(y_grid), n)."""
    if not (0 < alpha < 2):
        raise DomainError(f"alpha={alpha} outside (0,2)")
    _require_finite(f)
    y = _check_y_grid(y_grid)
    kabs, inverse = np.unique(np.abs(f.grid.wavenumbers), return_inverse=True)
    f_hat = sfft.fft(f.values)
    u = np.empty((y.size, f.grid.n), dtype=complex)
    for row, yv in enumerate(y):
        theta = extension_symbol(kabs * yv, alpha)
        u[row] = sfft.ifft(f_hat * theta[inverse])
    log.debug("extension_solve alpha=%s over %d heights, %d distinct |k|", alpha, y.size, kabs.size)
    return u


def _richardson(samples: np.ndarray, y: np.ndarray, alpha: float) -> tuple[np.ndarray, np.ndarray]:
    """Limit y->0 of samples(y) = E + a y^{2-alpha} + b y^2; returns (three-point, two-point)."""
    exponents = (0.0, 2.0 - alpha, 2.0)
    vander = np.array([[yv ** e for e in exponents] for yv in y])
    three = np.linalg.solve(vander, samples)[0]
    two = np.linalg.solve(vander[:2, :2], samples[:2])[0]
    return three, two


def extension_constant(alpha: float, y_grid, k_ref: float) -> float:
    """Constant c with (u - f)/y^alpha -> -c (-Delta)^{alpha/2} f, calibrated on e^{i k_ref x}."""
    if not k_ref > 0:
        raise DomainError("calibration wavenumber must be > 0")
    y = np.sort(_check_y_grid(y_grid))[:3]
    if y.size < 3:
        raise DomainError("at least three heights are needed for extrapolation")
    samples = np.array([(extension_symbol(k_ref * yv, alpha) - 1.0) / yv ** alpha for yv in y])
    three, _ = _richardson(samples, y, alpha)
    return float(-three / k_ref ** alpha)


def neumann_limit(u: np.ndarray, f: WaveField, alpha: float, y_grid) -> WaveField:
    """Fractional Laplacian of f from the extension u, up to the calibrated constant."""
    y = _check_y_grid(y_grid)
    u = np.asarray(u)
    if u.shape != (y.size, f.grid.n):
        raise DomainError(f"u has shape {u.shape}, expected {(y.size, f.grid.n)}")
    if y[0] > NEUMANN_MAX_Y:
        raise DomainError(f"smallest height {y[0]} exceeds {NEUMANN_MAX_Y}")
    if y.size < 3:
        raise DomainError("at least three heights are needed for extrapolation")
    ys = y[:3]
    quotients = (u[:3] - f.values[None, :]) / (ys[:, None] ** alpha)
    three, two = _richardson(quotients, ys, alpha)
    size = np.linalg.norm(three)
    if size > 1e-12 * max(np.linalg.norm(f.values), 1e-300):
        spread = np.linalg.norm(three - two) / size
        if spread > EXTRAPOLATION_SPREAD:
            raise ExtrapolationError(f"Richardson estimates differ by {spread:.3f} (relative)")
    k_ref = float(f.grid.wavenumbers[1])
    c = extension_constant(alpha, ys, k_ref)
    return f.with_values(-three / c)
