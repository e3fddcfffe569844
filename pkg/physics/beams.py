# physics/beams.py
"""Beam propagation.

Split-step fractional NLSE in a time-dependent metric, Airy/Gaussian initial data, the
free Green's function (continuum and periodic lattice), and the Caputo-in-z slab solver
on the sine basis.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Literal, Optional, Sequence

import numpy as np
from scipy import fft as sfft
from scipy.integrate import IntegrationWarning, quad
from scipy.linalg import circulant
from scipy.stats import linregress

from physics import specfun
from physics.errors import DomainError, NonFiniteError
from physics.fracops import FracParams, Grid1D, WaveField, riesz_multiplier

__all__ = [
    "MetricProfile",
    "SlabConfig",
    "EvolutionReport",
    "PeakFit",
    "FieldRecorder",
    "metric_g1",
    "linear_step",
    "kerr_step",
    "propagate_nlse",
    "airy_initial",
    "gaussian_initial",
    "fox_beam_green",
    "lattice_green",
    "green_convolve",
    "fit_peak_trajectory",
    "slab_grid",
    "slab_evolve",
    "paraxial_residual",
]

log = logging.getLogger(f"fracwave.{__name__}")

TAPER_FRACTION = 0.15
PARAXIAL_FLOOR = 1e-12


# ---------------- Metric ----------------
@dataclass(frozen=True)
class MetricProfile:
    """g(t) and g1(t) = (1/hbar) int_0^t dt'/g(t')."""

    kind: Literal["constant", "power", "tabulated"] = "constant"
    value: float = 1.0
    hbar_ef: float = 1.0
    table_t: Optional[tuple] = None
    table_g: Optional[tuple] = None

    def __post_init__(self) -> None:
        if not self.hbar_ef > 0:
            raise DomainError("hbar_ef must be > 0")
        if self.kind == "constant":
            if not self.value > 0:
                raise DomainError(f"non-positive metric g={self.value}")
        elif self.kind == "power":
            if self.value >= 1:
                raise DomainError(
                    f"g(t)=t^{self.value} makes int_0^t dt'/g(t') divergent at t=0"
                )
        elif self.kind == "tabulated":
            if self.table_t is None or self.table_g is None or len(self.table_t) != len(self.table_g):
                raise DomainError("tabulated metric needs equal-length t and g samples")
            t = np.asarray(self.table_t, dtype=float)
            g = np.asarray(self.table_g, dtype=float)
            if t.size < 2 or t[0] != 0.0 or np.any(np.diff(t) <= 0):
                raise DomainError("tabulated metric times must start at 0 and increase")
            if np.any(g <= 0):
                raise DomainError("non-positive g encountered in tabulated metric")
        else:
            raise DomainError(f"unknown metric kind {self.kind!r}")

    @classmethod
    def from_table(cls, t, g, hbar_ef: float = 1.0) -> "MetricProfile":
        return cls("tabulated", 0.0, hbar_ef, tuple(map(float, t)), tuple(map(float, g)))

    def _check_t(self, t: float) -> None:
        if t < 0:
            raise DomainError(f"t={t} must be >= 0")
        if self.kind == "tabulated" and t > self.table_t[-1]:
            raise DomainError(f"t={t} beyond the tabulated metric (t_max={self.table_t[-1]})")

    def g(self, t: float) -> float:
        self._check_t(t)
        if self.kind == "constant":
            return self.value
        if self.kind == "power":
            if t == 0 and self.value > 0:
                raise DomainError("g(0)=0 for a positive power metric")
            if t == 0 and self.value < 0:
                return math.inf
            return t ** self.value
        return float(np.interp(t, self.table_t, self.table_g))

    def g1(self, t: float) -> float:
        self._check_t(t)
        if self.kind == "constant":
            return t / (self.value * self.hbar_ef)
        if self.kind == "power":
            p = self.value
            return t ** (1.0 - p) / ((1.0 - p) * self.hbar_ef)
        return self._tabulated_integral(0.0, t) / self.hbar_ef

    def _tabulated_integral(self, a: float, b: float) -> float:
        if b <= a:
            return 0.0
        nodes = [v for v in self.table_t if a < v < b]
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", IntegrationWarning)
            val, _ = quad(lambda s: 1.0 / np.interp(s, self.table_t, self.table_g), a, b,
                          points=nodes or None, limit=max(50, 2 * len(nodes) + 10),
                          epsabs=1e-13, epsrel=1e-12)
        return val

    def g1_series(self, times) -> np.ndarray:
        """g1 at ascending times; tabulated metrics integrate piecewise between samples."""
        times = np.asarray(times, dtype=float)
        if self.kind != "tabulated":
            return np.array([self.g1(t) for t in times])
        out = np.empty_like(times)
        acc, prev = 0.0, 0.0
        for i, t in enumerate(times):
            self._check_t(t)
            acc += self._tabulated_integral(prev, t)
            out[i], prev = acc / self.hbar_ef, t
        return out


def metric_g1(profile: MetricProfile, t: float) -> float:
    return profile.g1(t)


# ---------------- Reports ----------------
@dataclass
class EvolutionReport:
    times: np.ndarray
    norms: np.ndarray
    centroids: np.ndarray
    msd: np.ndarray
    peak_positions: np.ndarray
    snapshots: list = field(default_factory=list)
    extras: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.times = np.asarray(self.times, dtype=float)
        for name in ("norms", "centroids", "msd", "peak_positions"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != self.times.shape:
                raise DomainError(f"{name} has {arr.shape}, times has {self.times.shape}")
            setattr(self, name, arr)

    @property
    def final(self) -> Optional[WaveField]:
        if "final" in self.extras:
            return self.extras["final"]
        return self.snapshots[-1][1] if self.snapshots else None


class FieldRecorder:
    """Accumulates norm, centroid, MSD and refined peak per recorded slice."""

    def __init__(self, grid: Grid1D, psi0: WaveField, keep_snapshots: bool) -> None:
        self.x = grid.x
        self.dx = grid.dx
        self.keep = keep_snapshots
        dens = np.abs(psi0.values) ** 2
        total = np.sum(dens)
        self.x_ref = float(np.sum(self.x * dens) / total) if total > 0 else 0.0
        self.rows: list[tuple] = []
        self.snapshots: list = []

    def _peak(self, dens: np.ndarray) -> float:
        i = int(np.argmax(dens))
        left, mid, right = dens[i - 1], dens[i], dens[(i + 1) % dens.size]
        curv = left - 2.0 * mid + right
        shift = 0.5 * (left - right) / curv if curv < 0 else 0.0
        return float(self.x[i] + shift * self.dx)

    def record(self, t: float, psi: WaveField) -> None:
        dens = np.abs(psi.values) ** 2
        mass = float(np.sum(dens) * self.dx)
        centroid = float(np.sum(self.x * dens) * self.dx / mass) if mass > 0 else 0.0
        msd = float(np.sum((self.x - self.x_ref) ** 2 * dens) * self.dx / mass) if mass > 0 else 0.0
        self.rows.append((t, math.sqrt(mass), centroid, msd, self._peak(dens)))
        if self.keep:
            self.snapshots.append((t, psi.copy()))

    def report(self, **extras) -> EvolutionReport:
        cols = np.array(self.rows, dtype=float).reshape(-1, 5).T
        return EvolutionReport(cols[0], cols[1], cols[2], cols[3], cols[4], self.snapshots, dict(extras))


# ---------------- Split-step ----------------
def _linear_multiplier(grid: Grid1D, params: FracParams, dg1: float) -> np.ndarray:
    phase = 0.5 * params.hbar_ef ** (params.alpha - 1.0) * dg1
    return np.exp(-1j * phase * riesz_multiplier(grid, params.alpha))


def linear_step(field_: WaveField, params: FracParams, dg1: float) -> WaveField:
    """Exact Fourier-multiplier solution over a g1 increment."""
    if dg1 < 0:
        raise DomainError("dg1 must be >= 0")
    if dg1 == 0:
        return field_.copy()
    mult = _linear_multiplier(field_.grid, params, dg1)
    return field_.with_values(sfft.ifft(mult * sfft.fft(field_.values)))


def kerr_step(field_: WaveField, params: FracParams, g_t: float, dt: float) -> WaveField:
    if dt < 0 or not g_t > 0:
        raise DomainError("kerr_step needs dt >= 0 and g_t > 0")
    if params.B == 0 or dt == 0:
        return field_.copy()
    rate = params.B / (params.hbar_ef * g_t)
    psi = field_.values
    return field_.with_values(psi * np.exp(1j * rate * np.abs(psi) ** 2 * dt))


def _step_count(t_final: float, dt: float) -> int:
    if not dt > 0 or t_final < dt:
        raise DomainError("propagation needs dt > 0 and t_final >= dt")
    steps = int(round(t_final / dt))
    if abs(steps * dt - t_final) > 1e-9 * t_final:
        raise DomainError(f"t_final={t_final} is not an integral number of steps dt={dt}")
    return steps


def propagate_nlse(field_: WaveField, params: FracParams, profile: MetricProfile,
                   t_final: float, dt: float, record_every: int = 1, *,
                   keep_snapshots: bool = False) -> EvolutionReport:
    """Strang splitting: half linear (g1 increment), full Kerr at the midpoint metric, half linear."""
    if record_every < 1:
        raise DomainError("record_every must be >= 1")
    if not field_.is_finite():
        raise NonFiniteError("initial field", 0)
    steps = _step_count(t_final, dt)
    grid = field_.grid
    half_times = dt * np.arange(2 * steps + 1) / 2.0
    g1 = profile.g1_series(half_times)
    kerr_on = params.B != 0
    const_metric = profile.kind == "constant"
    mult_cache: dict[float, np.ndarray] = {}

    def multiplier(dg1: float) -> np.ndarray:
        key = round(dg1, 15)
        if key not in mult_cache:
            if len(mult_cache) > 8 and not const_metric:
                mult_cache.clear()
            mult_cache[key] = _linear_multiplier(grid, params, dg1)
        return mult_cache[key]

    rec = FieldRecorder(grid, field_, keep_snapshots)
    rec.record(0.0, field_)
    g1_recorded = [g1[0]]
    psi_hat = sfft.fft(field_.values)
    log.info("propagate_nlse: %d steps dt=%g alpha=%g B=%g metric=%s", steps, dt,
             params.alpha, params.B, profile.kind)

    for step in range(1, steps + 1):
        i0 = 2 * (step - 1)
        psi_hat *= multiplier(g1[i0 + 1] - g1[i0])
        if kerr_on:
            psi = sfft.ifft(psi_hat)
            rate = params.B / (params.hbar_ef * profile.g(half_times[i0 + 1]))
            psi *= np.exp(1j * rate * np.abs(psi) ** 2 * dt)
            psi_hat = sfft.fft(psi)
        psi_hat *= multiplier(g1[i0 + 2] - g1[i0 + 1])
        if not np.all(np.isfinite(psi_hat)):
            log.error("propagate_nlse: non-finite field at step %d", step)
            raise NonFiniteError("field", step)
        if step % record_every == 0 or step == steps:
            rec.record(step * dt, field_.with_values(sfft.ifft(psi_hat)))
            g1_recorded.append(g1[2 * step])
        if step % 1000 == 0:
            log.debug("propagate_nlse: step %d/%d", step, steps)

    final = field_.with_values(sfft.ifft(psi_hat))
    return rec.report(g1=np.asarray(g1_recorded), final=final)


# ---------------- Initial data ----------------
def _left_taper(grid: Grid1D, fraction: float) -> np.ndarray:
    if not (0 <= fraction < 1):
        raise DomainError("taper fraction must lie in [0, 1)")
    width = fraction * (grid.x_max - grid.x_min)
    if width == 0:
        return np.ones(grid.n)
    s = (grid.x - grid.x_min) / width
    return np.where(s < 1.0, 0.5 * (1.0 - np.cos(np.pi * np.clip(s, 0.0, 1.0))), 1.0)


def airy_initial(grid: Grid1D, a: float, hbar_ef: float, *,
                 taper_fraction: float = TAPER_FRACTION) -> WaveField:
    """Ai(a x / hbar^{2/3}) with a half-cosine aperture over the leftmost part of the grid."""
    if not a > 0:
        raise DomainError("a must be > 0")
    arg = a * grid.x / hbar_ef ** (2.0 / 3.0)
    if arg.min() < specfun.AIRY_MIN:
        raise DomainError(f"grid reaches Ai argument {arg.min():.3g} < {specfun.AIRY_MIN}")
    # Ai < 1.1e-10 past the right edge of its table
    inside = arg <= specfun.AIRY_MAX
    values = np.zeros(grid.n)
    values[inside] = specfun.airy_ai_array(arg[inside])
    return WaveField(grid, values * _left_taper(grid, taper_fraction))


def gaussian_initial(grid: Grid1D, width: float, center: float = 0.0, carrier: float = 0.0) -> WaveField:
    if not width > 0:
        raise DomainError("width must be > 0")
    x = grid.x
    return WaveField(grid, np.exp(-0.5 * ((x - center) / width) ** 2 + 1j * carrier * x))


# ---------------- Green's functions ----------------
def fox_beam_green(x: float, t: float, params: FracParams, profile: MetricProfile, *,
                   regulator: float = specfun.DEFAULT_REGULATOR, tol: float = specfun.KERNEL_TOL) -> complex:
    if not t > 0:
        raise DomainError("t must be > 0")
    coeff = 0.5j * params.hbar_ef ** (params.alpha - 1.0)
    return specfun.frac_free_kernel(x, profile.g1(t), params.alpha, coeff, regulator=regulator, tol=tol)


def lattice_green(grid: Grid1D, params: FracParams, g1: float) -> np.ndarray:
    """G(d_j) = (1/period) sum_k M_k cos(k d_j) at offsets d_j = j dx."""
    k = grid.wavenumbers
    mult = _linear_multiplier(grid, params, g1)
    offsets = grid.dx * np.arange(grid.n)
    period = grid.n * grid.dx
    return np.cos(np.outer(offsets, k)) @ mult / period


def green_convolve(field_: WaveField, params: FracParams, g1: float) -> WaveField:
    """psi(x_i) = sum_j G(x_i - x_j) psi(x_j) dx as a dense circulant product."""
    kernel = lattice_green(field_.grid, params, g1)
    return field_.with_values(circulant(kernel) @ field_.values * field_.grid.dx)


@dataclass(frozen=True)
class PeakFit:
    x0: float
    c: float
    r2: float


def fit_peak_trajectory(report: EvolutionReport, g1_values=None) -> PeakFit:
    """Least squares x_peak = x0 + c g1^2."""
    g1 = np.asarray(report.extras.get("g1") if g1_values is None else g1_values, dtype=float)
    if g1.shape != report.peak_positions.shape or g1.size < 3:
        raise DomainError("trajectory fit needs at least three recorded samples")
    fit = linregress(g1 ** 2, report.peak_positions)
    return PeakFit(x0=float(fit.intercept), c=float(fit.slope), r2=float(fit.rvalue ** 2))


# ---------------- Slab ----------------
@dataclass(frozen=True)
class SlabConfig:
    L: float
    k_carrier: float
    omega: float
    alpha: float
    beta: float
    n_modes: int

    def __post_init__(self) -> None:
        problems = []
        if not self.L > 0:
            problems.append("L must be > 0")
        if not self.k_carrier > 0:
            problems.append("k_carrier must be > 0")
        if not (0 < self.alpha <= 2):
            problems.append(f"alpha={self.alpha} outside (0,2]")
        if not (0 < self.beta <= 1):
            problems.append(f"beta={self.beta} outside (0,1]")
        if self.n_modes < 4:
            problems.append("n_modes must be >= 4")
        if problems:
            raise DomainError("; ".join(problems))

    @property
    def paraxial_regime(self) -> bool:
        return self.k_carrier < 1.0

    def eigenvalues(self) -> np.ndarray:
        m = np.arange(1, self.n_modes + 1)
        return (m * np.pi / (2.0 * self.L)) ** self.alpha


def slab_grid(L: float, n: int) -> Grid1D:
    """x_j = -L + j h, h = 2L/n; x_0 is the left wall, the right wall is x_n."""
    return Grid1D(-L, L, n)


def slab_evolve(psi0: WaveField, cfg: SlabConfig, z_values) -> EvolutionReport:
    """Sine-mode expansion with c_m(z) = c_m(0) E_beta(i (lambda_m - omega) z^beta / (2k))."""
    z = np.asarray(z_values, dtype=float)
    if z.ndim != 1 or z.size == 0 or z[0] != 0.0 or np.any(np.diff(z) <= 0):
        raise DomainError("z_values must ascend from 0")
    grid = psi0.grid
    if not math.isclose(grid.half_width, cfg.L, rel_tol=1e-12):
        raise DomainError(f"grid half-width {grid.half_width} does not match L={cfg.L}")
    if cfg.n_modes > grid.n - 1:
        raise DomainError(f"n_modes={cfg.n_modes} exceeds the {grid.n - 1} interior points")
    scale = max(np.max(np.abs(psi0.values)), 1e-300)
    if abs(psi0.values[0]) > 1e-8 * scale:
        raise DomainError("psi0 must vanish at the slab walls")
    if not cfg.paraxial_regime:
        log.warning("slab: k_carrier=%g is outside the k << 1 regime", cfg.k_carrier)

    coeffs = sfft.dst(psi0.values[1:], type=1)
    amps0 = coeffs[: cfg.n_modes]
    lam = cfg.eigenvalues()
    rate = 1j * (lam - cfg.omega) / (2.0 * cfg.k_carrier)
    args = rate[None, :] * (z[:, None] ** cfg.beta)
    if cfg.beta == 1.0:
        factors = np.exp(args)
    else:
        factors = specfun.mittag_leffler_array(cfg.beta, 1.0, args)
    amplitudes = factors * amps0[None, :]

    proj = np.zeros(grid.n - 1, dtype=complex)
    proj[: cfg.n_modes] = amps0
    start = WaveField(grid, np.concatenate(([0.0], sfft.idst(proj, type=1))))
    rec = FieldRecorder(grid, start, keep_snapshots=True)
    for zi, amps in zip(z, amplitudes):
        proj[: cfg.n_modes] = amps
        rec.record(float(zi), WaveField(grid, np.concatenate(([0.0], sfft.idst(proj, type=1)))))
    log.info("slab_evolve: %d modes, %d z-slices, beta=%g", cfg.n_modes, z.size, cfg.beta)
    return rec.report(amplitudes=amplitudes, eigenvalues=lam)


def paraxial_residual(psi: Sequence[WaveField] | np.ndarray, k_carrier: float, dz: float, *,
                      floor: float = PARAXIAL_FLOOR) -> float:
    """max |psi_zz| / (|2k psi_z| + floor) over interior slices, central differences."""
    if isinstance(psi, np.ndarray):
        stack = np.asarray(psi, dtype=complex)
    else:
        stack = np.array([f.values for f in psi])
    if stack.ndim == 1:
        stack = stack[:, None]
    if stack.shape[0] < 3:
        raise DomainError("paraxial_residual needs at least three z-slices")
    d1 = (stack[2:] - stack[:-2]) / (2.0 * dz)
    d2 = (stack[2:] - 2.0 * stack[1:-1] + stack[:-2]) / (dz * dz)
    return float(np.max(np.abs(d2) / (np.abs(2.0 * k_carrier * d1) + floor)))
