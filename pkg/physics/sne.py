# physics/sne.py
"""1D fractional Schrodinger-Newton equation.

Self-gravity -G m^2 |k|^nu acting on the density (or, as a variant, on the cubic mode term),
the single-mode solution and the four-wave decay of a pump into q +/- p sidebands.
"""
from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass, field
from typing import Literal, Optional, Sequence

import numpy as np
from scipy import fft as sfft
from scipy.stats import linregress

from physics import specfun
from physics.beams import EvolutionReport, FieldRecorder
from physics.errors import DomainError, NoGrowthWindow, NonFiniteError
from physics.fracops import FracParams, Grid1D, WaveField, apply_riesz

__all__ = [
    "DecaySetup",
    "StabilityMatrix",
    "DecayResult",
    "sne_rhs",
    "sne_evolve",
    "single_mode_solution",
    "pump_phase_rate",
    "stability_matrix",
    "growth_increment",
    "decay_experiment",
    "commensurate_grid",
    "thermal_field",
]

log = logging.getLogger(f"fracwave.{__name__}")

GravityForm = Literal["mode", "density"]
Convention = Literal["bare", "linearized", "density"]

GROWTH_STOP = 0.01      # sideband / pump ratio that ends the linear window
MIN_WINDOW_SAMPLES = 10


# ---------------- Types ----------------
@dataclass(frozen=True)
class DecaySetup:
    q: float
    p: float
    a_q: complex
    epsilon_seed: float

    def __post_init__(self) -> None:
        problems = []
        if self.q == 0:
            problems.append("pump wavenumber q must be non-zero")
        if not (0 < self.p < abs(self.q)):
            problems.append("sideband offset needs 0 < p < |q|")
        if not self.epsilon_seed > 0:
            problems.append("epsilon_seed must be > 0")
        if problems:
            raise DomainError("; ".join(problems))

    @property
    def intensity(self) -> float:
        return abs(self.a_q) ** 2


@dataclass(frozen=True)
class StabilityMatrix:
    F: float
    F_plus: float
    F_minus: float
    calF: float
    Omega_plus: float
    Omega_minus: float
    I: float
    convention: str = "bare"

    def as_array(self) -> np.ndarray:
        return np.array([[1j * self.calF, 1j * self.Omega_plus * self.I],
                         [-1j * self.Omega_minus * self.I, -1j * self.calF]])


@dataclass
class DecayResult:
    measured_rate: float
    predicted_rate: float
    predicted_rate_bare: float
    window: tuple[float, float]
    times: np.ndarray = field(repr=False)
    amplitudes: np.ndarray = field(repr=False)
    report: Optional[EvolutionReport] = field(default=None, repr=False)
    convention: str = "density"

    @property
    def ratio(self) -> float:
        return self.measured_rate / self.predicted_rate if self.predicted_rate else math.nan


# ---------------- Dispersion ----------------
def _omega(k, params: FracParams):
    return params.hbar_ef ** (params.alpha - 1.0) / (2.0 * params.mass) * np.abs(k) ** params.alpha


def _Omega(k, params: FracParams):
    return params.G * params.mass ** 2 / params.hbar_ef * np.abs(k) ** params.nu


# ---------------- Right-hand side ----------------
def _gravity(psi: np.ndarray, kmult: np.ndarray, gravity_form: GravityForm) -> np.ndarray:
    if gravity_form == "mode":
        return sfft.ifft(kmult * sfft.fft(np.abs(psi) ** 2 * psi))
    if gravity_form == "density":
        return sfft.ifft(kmult * sfft.fft(np.abs(psi) ** 2)).real * psi
    raise DomainError(f"unknown gravity form {gravity_form!r}")


def sne_rhs(field_: WaveField, params: FracParams, gravity_form: GravityForm = "density") -> WaveField:
    """d psi/dt = (1/(i hbar)) [(hbar^alpha/2m)(-Delta)^{alpha/2} psi - G m^2 N(psi)]."""
    if not field_.is_finite():
        raise NonFiniteError("field")
    kinetic = params.hbar_ef ** params.alpha / (2.0 * params.mass) * apply_riesz(field_, params.alpha).values
    rhs = kinetic
    if params.G != 0:
        kmult = np.abs(field_.grid.wavenumbers) ** params.nu
        rhs = rhs - params.G * params.mass ** 2 * _gravity(field_.values, kmult, gravity_form)
    return field_.with_values(rhs / (1j * params.hbar_ef))


# ---------------- Evolution ----------------
def sne_evolve(field_: WaveField, params: FracParams, t_final: float, dt: float,
               record_every: int = 1, *, gravity_form: GravityForm = "density",
               track: Sequence[float] = (), keep_snapshots: bool = False) -> EvolutionReport:
    """Strang splitting around the self-gravity sub-step.

    "density": the potential is real, so the sub-step is an exact phase and the norm is
    conserved to roundoff. "mode": the sub-step is integrated with one RK4 stage per dt.
    `track` lists wavenumbers whose Fourier amplitudes go into extras["amplitudes"].
    """
    if not dt > 0 or t_final < dt:
        raise DomainError("sne_evolve needs dt > 0 and t_final >= dt")
    if record_every < 1:
        raise DomainError("record_every must be >= 1")
    if gravity_form not in ("mode", "density"):
        raise DomainError(f"unknown gravity form {gravity_form!r}")
    if not field_.is_finite():
        raise NonFiniteError("initial field", 0)
    steps = int(round(t_final / dt))
    grid = field_.grid
    k = grid.wavenumbers
    track_idx = [_mode_index(grid, kk) for kk in track]

    half = np.exp(-0.5j * dt * _omega(k, params))
    kmult = np.abs(k) ** params.nu
    coupling = params.G * params.mass ** 2 / params.hbar_ef

    def nonlinear(psi: np.ndarray) -> np.ndarray:
        if coupling == 0:
            return psi
        if gravity_form == "density":
            potential = sfft.ifft(kmult * sfft.fft(np.abs(psi) ** 2)).real
            return psi * np.exp(1j * coupling * potential * dt)

        def f(u):
            return 1j * coupling * _gravity(u, kmult, "mode")

        k1 = f(psi)
        k2 = f(psi + 0.5 * dt * k1)
        k3 = f(psi + 0.5 * dt * k2)
        k4 = f(psi + dt * k3)
        return psi + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    rec = FieldRecorder(grid, field_, keep_snapshots)
    amplitudes = []

    def record(t: float, psi_hat: np.ndarray) -> None:
        rec.record(t, field_.with_values(sfft.ifft(psi_hat)))
        amplitudes.append([psi_hat[i] / grid.n for i in track_idx])

    psi_hat = sfft.fft(field_.values)
    record(0.0, psi_hat)
    log.info("sne_evolve: %d steps dt=%g alpha=%g nu=%g G=%g form=%s", steps, dt,
             params.alpha, params.nu, params.G, gravity_form)
    for step in range(1, steps + 1):
        psi_hat = half * psi_hat
        psi_hat = sfft.fft(nonlinear(sfft.ifft(psi_hat)))
        psi_hat = half * psi_hat
        if not np.all(np.isfinite(psi_hat)):
            log.error("sne_evolve: non-finite field at step %d", step)
            raise NonFiniteError("field", step)
        if step % record_every == 0 or step == steps:
            record(step * dt, psi_hat)
    return rec.report(amplitudes=np.asarray(amplitudes, dtype=complex).reshape(len(rec.rows), len(track_idx)),
                      tracked=tuple(track), final=field_.with_values(sfft.ifft(psi_hat)))


def _mode_index(grid: Grid1D, k: float) -> int:
    idx = int(np.argmin(np.abs(grid.wavenumbers - k)))
    if abs(grid.wavenumbers[idx] - k) > 1e-9 * max(1.0, abs(k)):
        raise DomainError(f"wavenumber {k} is not on the grid")
    return idx


def pump_phase_rate(q: float, a_q: complex, params: FracParams, gravity_form: GravityForm = "density") -> float:
    """omega(q) - Omega(q) |a_q|^2 for the mode form; omega(q) for the density form.

    A single plane wave has a uniform density, which the |k|^nu multiplier removes.
    """
    if gravity_form == "density":
        return float(_omega(q, params))
    if gravity_form != "mode":
        raise DomainError(f"unknown gravity form {gravity_form!r}")
    return float(_omega(q, params) - _Omega(q, params) * abs(a_q) ** 2)


def single_mode_solution(q: float, a_q: complex, params: FracParams, t,
                         gravity_form: GravityForm = "density") -> np.ndarray:
    """A_q(t) = a_q exp(-i pump_phase_rate t); modulus is constant."""
    rate = pump_phase_rate(q, a_q, params, gravity_form)
    return a_q * np.exp(-1j * rate * np.asarray(t, dtype=float))


# ---------------- Stability ----------------
def stability_matrix(setup: DecaySetup, params: FracParams, convention: Convention = "bare") -> StabilityMatrix:
    """F(+/-) = omega(+/-) - 2 Omega(+/-) I; calF = F - [F(+) + F(-)]/2.

    "bare" takes F = omega + Omega I. "linearized" takes the pump phase rate
    omega - Omega I of the single-mode solution in its place. Both describe the mode form.
    "density" is the sideband system of the density form: the potential of the
    pump-sideband beat sits at wavenumber p, so F = omega, F(+/-) = omega(+/-) - Omega(p) I
    and Omega(+/-) = Omega(p).
    """
    q, p, I = setup.q, setup.p, setup.intensity
    w, W = float(_omega(q, params)), float(_Omega(q, params))
    wp, wm = float(_omega(q + p, params)), float(_omega(q - p, params))
    if convention == "density":
        Wd = float(_Omega(p, params))
        Fp, Fm = wp - Wd * I, wm - Wd * I
        return StabilityMatrix(w, Fp, Fm, w - 0.5 * (Fp + Fm), Wd, Wd, I, convention)
    Wp, Wm = float(_Omega(q + p, params)), float(_Omega(q - p, params))
    if convention == "bare":
        F = w + W * I
    elif convention == "linearized":
        F = w - W * I
    else:
        raise DomainError(f"unknown convention {convention!r}")
    Fp, Fm = wp - 2.0 * Wp * I, wm - 2.0 * Wm * I
    return StabilityMatrix(F, Fp, Fm, F - 0.5 * (Fp + Fm), Wp, Wm, I, convention)


def growth_increment(M: StabilityMatrix) -> tuple[complex, complex]:
    lam = cmath.sqrt(M.Omega_plus * M.Omega_minus * M.I ** 2 - M.calF ** 2)
    return lam, -lam


def commensurate_grid(q: float, p: float, *, max_ratio: int = 64) -> Grid1D:
    """Periodic grid on which q and q +/- p are exact FFT wavenumbers."""
    for j in range(1, max_ratio + 1):
        dk = p / j
        ratio = q / dk
        if abs(ratio - round(ratio)) < 1e-9 * max(1.0, abs(ratio)):
            break
    else:
        raise DomainError(f"no commensurate grid for q={q}, p={p}")
    need = max(64, 8.0 * (abs(q) + p) / dk)
    n = 1 << int(math.ceil(math.log2(need)))
    return Grid1D(0.0, 2.0 * math.pi / dk, n)


def _linearized_matrix(setup: DecaySetup, params: FracParams, convention: Convention) -> np.ndarray:
    """Sideband system for (C+, C-*) in the frame of the pump, pump amplitude real."""
    M = stability_matrix(setup, params, convention)
    phi = M.F
    return np.array([[-1j * (M.F_plus - phi), 1j * M.Omega_plus * M.I],
                     [-1j * M.Omega_minus * M.I, 1j * (M.F_minus - phi)]])


def decay_experiment(setup: DecaySetup, params: FracParams, t_final: float, dt: float, *,
                     require_growth: bool = True, record_every: int = 1,
                     gravity_form: GravityForm = "density", seed_phase: float = 0.0) -> DecayResult:
    """Pump + sidebands seeded along the growing eigenvector; fitted vs predicted rate.

    `seed_phase` rotates the (C+, C-*) seed as a whole, which keeps it an eigenvector.
    """
    a = abs(setup.a_q)
    if setup.epsilon_seed > 1e-4 * a:
        raise DomainError("epsilon_seed must be <= 1e-4 |a_q|")
    if gravity_form not in ("mode", "density"):
        raise DomainError(f"unknown gravity form {gravity_form!r}")
    convention = "density" if gravity_form == "density" else "linearized"
    predicted = growth_increment(stability_matrix(setup, params, convention))[0].real
    predicted_bare = growth_increment(stability_matrix(setup, params, "bare"))[0].real
    if require_growth and predicted <= 0:
        raise NoGrowthWindow(f"predicted growth rate {predicted:.3e} is not positive")

    grid = commensurate_grid(setup.q, setup.p)
    vals, vecs = np.linalg.eig(_linearized_matrix(setup, params, convention))
    vec = vecs[:, int(np.argmax(vals.real))]
    vec = setup.epsilon_seed * cmath.exp(1j * seed_phase) * vec / np.max(np.abs(vec))
    x = grid.x
    psi0 = (a * np.exp(1j * setup.q * x)
            + vec[0] * np.exp(1j * (setup.q + setup.p) * x)
            + np.conj(vec[1]) * np.exp(1j * (setup.q - setup.p) * x))
    phase = cmath.exp(1j * cmath.phase(setup.a_q)) if setup.a_q != 0 else 1.0
    field0 = WaveField(grid, phase * psi0)

    report = sne_evolve(field0, params, t_final, dt, record_every, gravity_form=gravity_form,
                        track=(setup.q, setup.q + setup.p, setup.q - setup.p))
    t = report.times
    amps = report.extras["amplitudes"]
    side = np.sqrt(np.abs(amps[:, 1]) ** 2 + np.abs(amps[:, 2]) ** 2)

    if predicted > 0:
        stop = np.flatnonzero(side >= GROWTH_STOP * a)
        end = int(stop[0]) if stop.size else t.size
    elif require_growth:
        raise NoGrowthWindow("no growing sidebands")
    else:
        end = t.size
    if end < MIN_WINDOW_SAMPLES:
        raise NoGrowthWindow(f"growth window holds {end} samples, need {MIN_WINDOW_SAMPLES}")
    fit = linregress(t[:end], np.log(side[:end]))
    window = (float(t[0]), float(t[end - 1]))
    log.info("decay_experiment: measured %.5g predicted %.5g (bare convention %.5g) window %s",
             fit.slope, predicted, predicted_bare, window)
    return DecayResult(float(fit.slope), float(predicted), float(predicted_bare), window, t, amps, report,
                       convention)


def thermal_field(x: float, t: float, params: FracParams, *,
                  regulator: float = specfun.DEFAULT_REGULATOR) -> complex:
    """Free fractional propagator with coefficient (i/2m) hbar^{alpha-1}."""
    if not t > 0:
        raise DomainError("t must be > 0")
    coeff = 0.5j * params.hbar_ef ** (params.alpha - 1.0) / params.mass
    return specfun.frac_free_kernel(x, t, params.alpha, coeff, regulator=regulator)
