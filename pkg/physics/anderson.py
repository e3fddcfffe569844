# physics/anderson.py
"""Fractional Anderson model: disorder, eigenmodes, four-mode overlaps, oscillator dynamics."""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence, Union

import numpy as np
import scipy.linalg
from scipy import fft as sfft
from scipy.stats import linregress

from physics.beams import EvolutionReport
from physics.errors import DomainError, EigensolverError, NonFiniteError, TensorBudgetError
from physics.fracops import FracParams, Grid1D, riesz_multiplier

__all__ = [
    "RandomPotential",
    "AndersonModes",
    "OscillatorState",
    "OverlapTensor",
    "MSDFit",
    "random_potential",
    "build_hamiltonian",
    "compute_modes",
    "participation_ratios",
    "overlap_tensor",
    "oscillator_hamiltonian",
    "evolve_oscillators",
    "fit_msd_exponent",
]

log = logging.getLogger(f"fracwave.{__name__}")

DEFAULT_CUTOFF = 1e-8
DEFAULT_BUDGET = 2 ** 24
HERMITIAN_TOL = 1e-12

Seed = Union[int, np.random.SeedSequence]


# ---------------- Types ----------------
@dataclass(frozen=True)
class RandomPotential:
    seed: int
    W: float
    samples: np.ndarray = field(repr=False)


@dataclass
class AndersonModes:
    """Columns of `modes` are orthonormal in the discrete sense (sum |v|^2 = 1)."""

    energies: np.ndarray
    modes: np.ndarray
    dx: float
    x: Optional[np.ndarray] = None

    @property
    def n_modes(self) -> int:
        return self.modes.shape[1]

    @cached_property
    def centers(self) -> np.ndarray:
        x = self.x if self.x is not None else self.dx * np.arange(self.modes.shape[0])
        return (np.abs(self.modes) ** 2).T @ x


@dataclass
class OscillatorState:
    coefficients: np.ndarray
    time: float = 0.0

    def __post_init__(self) -> None:
        self.coefficients = np.asarray(self.coefficients, dtype=complex)

    def norm2(self) -> float:
        return float(np.sum(np.abs(self.coefficients) ** 2))


# ---------------- Disorder + modes ----------------
def random_potential(grid: Grid1D, W: float, seed: Seed) -> RandomPotential:
    if W < 0:
        raise DomainError("disorder strength W must be >= 0")
    rng = np.random.default_rng(seed)
    samples = rng.uniform(-0.5 * W, 0.5 * W, size=grid.n)
    seed_id = int(seed) if isinstance(seed, (int, np.integer)) else int(seed.entropy)
    return RandomPotential(seed=seed_id, W=W, samples=samples)


def build_hamiltonian(grid: Grid1D, pot: RandomPotential, alpha: float,
                      params: Optional[FracParams] = None) -> np.ndarray:
    """(hbar^alpha / 2)(-Delta)^{alpha/2} in the position basis plus diag(V)."""
    if pot.samples.shape != (grid.n,):
        raise DomainError("potential length does not match grid")
    hbar = params.hbar_ef if params is not None else 1.0
    mult = 0.5 * hbar ** alpha * riesz_multiplier(grid, alpha)
    kinetic = sfft.ifft(mult[:, None] * sfft.fft(np.eye(grid.n), axis=0), axis=0).real
    H = 0.5 * (kinetic + kinetic.T)
    H[np.diag_indices(grid.n)] += pot.samples
    return H


def compute_modes(H: np.ndarray, grid: Optional[Grid1D] = None, *, dx: Optional[float] = None) -> AndersonModes:
    """Dense eigendecomposition, ascending, largest component of each mode real positive."""
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise DomainError("Hamiltonian must be square")
    if np.max(np.abs(H - H.conj().T)) > HERMITIAN_TOL * max(1.0, np.max(np.abs(H))):
        raise DomainError("Hamiltonian is not Hermitian")
    try:
        energies, vecs = scipy.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(f"dense eigensolve failed: {exc}") from exc
    vecs = vecs.astype(complex)
    lead = vecs[np.argmax(np.abs(vecs), axis=0), np.arange(vecs.shape[1])]
    vecs *= np.conj(lead) / np.abs(lead)
    spacing = grid.dx if grid is not None else (dx if dx is not None else 1.0)
    return AndersonModes(energies, vecs, spacing, grid.x if grid is not None else None)


def participation_ratios(modes: AndersonModes) -> np.ndarray:
    """1 / sum |v|^4 per mode: 1 for a site-localized mode, ~n for an extended one."""
    return 1.0 / np.sum(np.abs(modes.modes) ** 4, axis=0)


# ---------------- Overlap tensor ----------------
@dataclass
class OverlapTensor:
    """Four-mode overlaps over a window of modes.

    cutoff == 0 keeps only the mode vectors and evaluates every entry on demand;
    cutoff > 0 stores the entries with |A| >= cutoff in coordinate form.
    """

    window: np.ndarray
    cutoff: float
    dx: float
    vectors: np.ndarray = field(repr=False)
    indices: np.ndarray = field(default_factory=lambda: np.empty((0, 4), dtype=int), repr=False)
    values: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=complex), repr=False)

    @property
    def n_window(self) -> int:
        return self.window.size

    @property
    def dense(self) -> bool:
        return self.cutoff == 0

    @property
    def nnz(self) -> int:
        return self.n_window ** 4 if self.dense else self.values.size

    def entry(self, k: int, k1: int, k2: int, k3: int) -> complex:
        """Entry by window-local indices; omitted entries read as 0."""
        if self.dense:
            V = self.vectors
            return complex(np.sum(V[:, k].conj() * V[:, k1] * V[:, k2].conj() * V[:, k3]) / self.dx)
        hit = np.flatnonzero(np.all(self.indices == (k, k1, k2, k3), axis=1))
        return complex(self.values[hit[0]]) if hit.size else 0j

    def contract(self, C: np.ndarray) -> np.ndarray:
        """rhs_k = sum A_{k,k1,k2,k3} C_k1 C*_k2 C_k3."""
        if self.dense:
            phi = self.vectors @ C
            return self.vectors.conj().T @ (np.abs(phi) ** 2 * phi) / self.dx
        k, k1, k2, k3 = self.indices.T
        out = np.zeros(self.n_window, dtype=complex)
        np.add.at(out, k, self.values * C[k1] * np.conj(C[k2]) * C[k3])
        return out

    def quartic(self, C: np.ndarray) -> float:
        """sum A C*_k C_k1 C*_k2 C_k3 (real for stored symmetric sets)."""
        if self.dense:
            phi = self.vectors @ C
            return float(np.sum(np.abs(phi) ** 4) / self.dx)
        return float(np.real(np.vdot(C, self.contract(C))))


def overlap_tensor(modes: AndersonModes, cutoff: float = DEFAULT_CUTOFF, *,
                   window: Optional[Sequence[int]] = None,
                   budget: int = DEFAULT_BUDGET,
                   workers: int = 1) -> OverlapTensor:
    """A_{k,k1,k2,k3} = int Psi_k* Psi_k1 Psi_k2* Psi_k3 dx by grid quadrature."""
    if cutoff < 0:
        raise DomainError("cutoff must be >= 0")
    idx = np.arange(modes.n_modes) if window is None else np.asarray(window, dtype=int)
    if idx.size == 0 or idx.min() < 0 or idx.max() >= modes.n_modes:
        raise DomainError("mode window out of range")
    requested = idx.size ** 4
    if requested > budget:
        raise TensorBudgetError(requested, budget)
    V = modes.modes[:, idx]
    Vc = V.conj()
    dx = modes.dx
    if cutoff == 0:
        log.debug("overlap_tensor: window=%d dense, %d entries on demand", idx.size, requested)
        return OverlapTensor(idx, 0.0, dx, V)

    def slab(k: int) -> tuple[np.ndarray, np.ndarray]:
        block = np.einsum("j,ja,jb,jc->abc", Vc[:, k], V, Vc, V, optimize=True) / dx
        keep = np.argwhere(np.abs(block) >= cutoff)
        vals = block[tuple(keep.T)]
        return np.column_stack([np.full(len(keep), k), keep]), vals

    ks = range(idx.size)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(slab, ks))
    else:
        parts = [slab(k) for k in ks]
    indices = np.concatenate([p[0] for p in parts]).astype(int).reshape(-1, 4)
    values = np.concatenate([p[1] for p in parts])
    log.debug("overlap_tensor: window=%d kept %d/%d entries (cutoff=%g)",
              idx.size, values.size, requested, cutoff)
    return OverlapTensor(idx, float(cutoff), dx, V, indices, values)


def oscillator_hamiltonian(state: OscillatorState, modes: AndersonModes, A: OverlapTensor, B: float) -> float:
    C = state.coefficients
    omega = modes.energies[A.window]
    return float(np.sum(omega * np.abs(C) ** 2) + 0.5 * B * A.quartic(C))


# ---------------- Dynamics ----------------
def _packet_observables(C: np.ndarray, centers: np.ndarray, ref: float) -> tuple[float, float, float, float]:
    weight = np.abs(C) ** 2
    total = float(np.sum(weight))
    centroid = float(weight @ centers / total) if total > 0 else 0.0
    msd = float(weight @ (centers - ref) ** 2 / total) if total > 0 else 0.0
    peak = float(centers[int(np.argmax(weight))])
    return np.sqrt(total), centroid, msd, peak


def evolve_oscillators(state: OscillatorState, modes: AndersonModes, A: OverlapTensor, B: float,
                       t_final: float, dt: float, record_every: int = 1) -> tuple[OscillatorState, EvolutionReport]:
    """i dC_k/dt = omega_k C_k + B sum A C C* C.

    Integrating-factor RK4: the linear rotation is applied exactly, RK4 handles the
    nonlinear coupling in the rotating frame.
    """
    if not dt > 0 or t_final < dt:
        raise DomainError("evolve_oscillators needs dt > 0 and t_final >= dt")
    if record_every < 1:
        raise DomainError("record_every must be >= 1")
    C = np.asarray(state.coefficients, dtype=complex).copy()
    if C.shape != (A.n_window,):
        raise DomainError(f"state has {C.size} coefficients, tensor window has {A.n_window}")
    steps = int(round(t_final / dt))
    omega = modes.energies[A.window]
    centers = modes.centers[A.window]
    rot_half = np.exp(-0.5j * omega * dt)
    rot_full = rot_half * rot_half

    def coupling(u: np.ndarray) -> np.ndarray:
        return -1j * B * A.contract(u)

    weight0 = np.abs(C) ** 2
    ref = float(weight0 @ centers / weight0.sum()) if weight0.sum() > 0 else 0.0
    rows, h_osc = [], []
    t0 = state.time

    def record(t: float, u: np.ndarray) -> None:
        rows.append((t, *_packet_observables(u, centers, ref)))
        h_osc.append(oscillator_hamiltonian(OscillatorState(u, t), modes, A, B))

    record(t0, C)
    for step in range(1, steps + 1):
        if B == 0:
            C = rot_full * C
        else:
            k1 = coupling(C)
            k2 = coupling(rot_half * (C + 0.5 * dt * k1))
            k3 = coupling(rot_half * C + 0.5 * dt * k2)
            k4 = coupling(rot_full * C + dt * rot_half * k3)
            C = rot_full * C + dt / 6.0 * (rot_full * k1 + 2.0 * rot_half * (k2 + k3) + k4)
        if not np.all(np.isfinite(C)):
            raise NonFiniteError("oscillator coefficients", step)
        if step % record_every == 0 or step == steps:
            record(t0 + step * dt, C)
        if step % 10000 == 0:
            log.debug("evolve_oscillators: step %d/%d", step, steps)

    cols = np.array(rows, dtype=float).T
    report = EvolutionReport(cols[0], cols[1], cols[2], cols[3], cols[4],
                             extras={"h_osc": np.asarray(h_osc)})
    return OscillatorState(C, t0 + steps * dt), report


@dataclass(frozen=True)
class MSDFit:
    exponent: float
    stderr: float
    n: int


def fit_msd_exponent(report: EvolutionReport, t_window: tuple[float, float]) -> MSDFit:
    """log-log least squares slope of the MSD over t_window."""
    lo, hi = t_window
    t = report.times
    if not (lo < hi) or lo < t.min() or hi > t.max():
        raise DomainError(f"window {t_window} not inside recorded times [{t.min()}, {t.max()}]")
    mask = (t >= lo) & (t <= hi) & (t > 0)
    if mask.sum() < 3:
        raise DomainError("MSD fit needs at least three samples in the window")
    msd = report.msd[mask]
    if np.any(msd <= 0):
        raise DomainError("non-positive MSD inside the fit window")
    fit = linregress(np.log(t[mask]), np.log(msd))
    return MSDFit(exponent=float(fit.slope), stderr=float(fit.stderr), n=int(mask.sum()))
