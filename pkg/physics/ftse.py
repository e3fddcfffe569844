# physics/ftse.py
"""Fractional-time Schrodinger evolution.

Mittag-Leffler evolution of finite Hermitian systems, the implicit Caputo L1 stepper,
the fractional free Green's function and its normalization, backward momentum
evolution, the oscillator Koopman operator on normal-ordered polynomials, and the
classical trajectory of the fractional action.
"""
from __future__ import annotations

import cmath
import logging
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Union

import numpy as np
import scipy.linalg
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve
from scipy.special import gamma as sp_gamma

from physics import specfun
from physics.errors import DomainError, EigensolverError, NumericalError, PolynomialBudgetError, SingularSystemError
from physics.fracops import Grid1D, caputo_l1_weights

__all__ = [
    "HamiltonianMatrix",
    "FracGreenQuery",
    "FTSETrajectory",
    "ActionTrajectory",
    "KoopmanOscillator",
    "effective_mass",
    "ml_evolution",
    "caputo_l1_evolution",
    "frac_green",
    "green_normalization",
    "momentum_backward_evolution",
    "koopman_oscillator_eigen",
    "fractional_action_trajectory",
    "discretized_hamiltonian",
]

log = logging.getLogger(f"fracwave.{__name__}")

HERMITIAN_TOL = 1e-12


def _check_beta(beta: float) -> None:
    if not (0 < beta <= 1):
        raise DomainError(f"beta={beta} outside (0,1]")


def effective_mass(beta: float) -> float:
    """m_beta = Gamma(beta + 1)^2."""
    _check_beta(beta)
    return float(sp_gamma(beta + 1.0) ** 2)


# ---------------- Matrices ----------------
@dataclass
class HamiltonianMatrix:
    entries: np.ndarray

    def __post_init__(self) -> None:
        H = np.asarray(self.entries, dtype=complex)
        if H.ndim != 2 or H.shape[0] != H.shape[1]:
            raise DomainError("Hamiltonian must be a square matrix")
        if np.max(np.abs(H - H.conj().T), initial=0.0) > HERMITIAN_TOL:
            raise DomainError("Hamiltonian is not Hermitian to 1e-12")
        self.entries = H

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @cached_property
    def spectrum(self) -> tuple[np.ndarray, np.ndarray]:
        try:
            return scipy.linalg.eigh(self.entries)
        except np.linalg.LinAlgError as exc:
            raise EigensolverError(f"eigendecomposition failed: {exc}") from exc


def discretized_hamiltonian(grid: Grid1D, beta: float, potential: Union[Callable, np.ndarray, None] = None,
                            hbar_ef: float = 1.0) -> HamiltonianMatrix:
    """-(hbar^2 / 2 m_beta) d^2/dx^2 + V on the grid, zero Dirichlet values beyond both ends."""
    m_beta = effective_mass(beta)
    x = grid.x
    if potential is None:
        V = np.zeros(grid.n)
    elif callable(potential):
        V = np.asarray(potential(x), dtype=float)
    else:
        V = np.asarray(potential, dtype=float)
    if V.shape != (grid.n,):
        raise DomainError("potential does not match the grid")
    t = hbar_ef ** 2 / (2.0 * m_beta * grid.dx ** 2)
    H = np.diag(2.0 * t + V) - t * (np.eye(grid.n, k=1) + np.eye(grid.n, k=-1))
    return HamiltonianMatrix(H)


# ---------------- Evolution ----------------
@dataclass
class FTSETrajectory:
    times: np.ndarray
    states: np.ndarray

    @property
    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.states, axis=1)

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


def ml_evolution(H: HamiltonianMatrix, psi0, t: float, beta: float, hbar_ef: float = 1.0) -> np.ndarray:
    """E_beta(-i H t^beta / hbar) psi0 as one application from the origin."""
    _check_beta(beta)
    if t < 0:
        raise DomainError("t must be >= 0")
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (H.dim,):
        raise DomainError(f"state has shape {psi0.shape}, Hamiltonian is {H.dim}x{H.dim}")
    if t == 0:
        return psi0.copy()
    lam, U = H.spectrum
    factors = specfun.mittag_leffler_array(beta, 1.0, -1j * lam * t ** beta / hbar_ef)
    return U @ (factors * (U.conj().T @ psi0))


def caputo_l1_evolution(H: HamiltonianMatrix, psi0, t_final: float, dt: float, beta: float,
                        hbar_ef: float = 1.0) -> FTSETrajectory:
    """Implicit L1 scheme for i hbar D_t^beta psi = H psi.

    (i hbar b0 - H) psi_n = i hbar [b0 psi_{n-1} - sum_{j>=1} b_j (psi_{n-j} - psi_{n-j-1})]
    """
    _check_beta(beta)
    if not dt > 0 or t_final < dt:
        raise DomainError("caputo_l1_evolution needs dt > 0 and t_final >= dt")
    steps = int(round(t_final / dt))
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (H.dim,):
        raise DomainError(f"state has shape {psi0.shape}, Hamiltonian is {H.dim}x{H.dim}")
    b = caputo_l1_weights(beta, steps, dt)
    system = 1j * hbar_ef * b[0] * np.eye(H.dim) - H.entries
    with warnings.catch_warnings():
        warnings.simplefilter("error", LinAlgWarning)
        try:
            lu = lu_factor(system)
        except (LinAlgWarning, np.linalg.LinAlgError) as exc:
            raise SingularSystemError(f"L1 system matrix is singular: {exc}") from exc
    if np.min(np.abs(np.diag(lu[0]))) == 0.0:
        raise SingularSystemError("L1 system matrix has a zero pivot")

    states = np.empty((steps + 1, H.dim), dtype=complex)
    states[0] = psi0
    diffs = np.empty((steps, H.dim), dtype=complex)
    for n in range(1, steps + 1):
        history = states[n - 1] * b[0]
        if n > 1:
            # diffs[m] = psi_{m+1} - psi_m; pairs b_j with psi_{n-j} - psi_{n-j-1}
            history = history - b[1:n] @ diffs[n - 2::-1]
        states[n] = lu_solve(lu, 1j * hbar_ef * history)
        diffs[n - 1] = states[n] - states[n - 1]
        if not np.all(np.isfinite(states[n])):
            raise NumericalError(f"non-finite L1 state at step {n}")
    log.debug("caputo_l1_evolution: %d steps dim=%d beta=%g", steps, H.dim, beta)
    return FTSETrajectory(dt * np.arange(steps + 1), states)


# ---------------- Green's function ----------------
@dataclass(frozen=True)
class FracGreenQuery:
    x_T: float
    x_0: float
    T: float
    beta: float = 1.0
    hbar_ef: float = 1.0

    def __post_init__(self) -> None:
        if not self.T > 0:
            raise DomainError("T must be > 0")
        _check_beta(self.beta)
        if not self.hbar_ef > 0:
            raise DomainError("hbar_ef must be > 0")

    @property
    def phase_coefficient(self) -> float:
        """a in G = F exp(i a (x_T - x_0)^2)."""
        return effective_mass(self.beta) / (2.0 * self.hbar_ef * math.gamma(self.beta + 1.0) * self.T ** self.beta)

    @property
    def prefactor(self) -> complex:
        denom = 2j * self.hbar_ef * math.gamma(self.beta + 1.0) * math.pi * self.T ** self.beta / effective_mass(self.beta)
        return 1.0 / cmath.sqrt(denom)


def frac_green(q: FracGreenQuery) -> complex:
    dx = q.x_T - q.x_0
    return q.prefactor * cmath.exp(1j * q.phase_coefficient * dx * dx)


def green_normalization(q: FracGreenQuery, fractions: tuple = (1.0, 0.5, 0.25, 0.125)) -> complex:
    """int G dx_T with a Gaussian regulator exp(-eps dx^2), extrapolated to eps=0."""
    a = q.phase_coefficient
    eps_values = 0.02 * a * np.asarray(fractions, dtype=float)
    estimates = []
    for eps in eps_values:
        R = math.sqrt(40.0 / eps)
        h = 0.25 * math.pi / (2.0 * a * R)
        count = 2 * int(math.ceil(R / h)) + 1
        s = np.linspace(-R, R, count)
        weights = np.exp((1j * a - eps) * s * s)
        integral = np.trapezoid(weights, s)
        estimates.append(q.prefactor * integral)
    vander = np.vander(eps_values, len(eps_values), increasing=True)
    return complex(np.linalg.solve(vander, np.asarray(estimates))[0])


def momentum_backward_evolution(X0: complex, lam: float, T: float, t: float, beta: float,
                                hbar_ef: float = 1.0) -> complex:
    """E_beta(i lam (T - t)^beta) X0 for a Koopman eigen-amplitude with K X = hbar lam X."""
    _check_beta(beta)
    if not hbar_ef > 0:
        raise DomainError("hbar_ef must be > 0")
    if t > T:
        raise DomainError(f"t={t} beyond the final time T={T}")
    if t < 0:
        raise DomainError("t must be >= 0")
    if t == T:
        return complex(X0)
    return specfun.mittag_leffler(beta, 1.0, 1j * lam * (T - t) ** beta) * X0


# ---------------- Koopman operator ----------------
Poly = dict  # {(m, n): Fraction} for a*^m a^n


def _poly_mul(p: Poly, q: Poly, max_degree: int) -> Poly:
    out: Poly = {}
    for (m1, n1), c1 in p.items():
        for (m2, n2), c2 in q.items():
            key = (m1 + m2, n1 + n2)
            if key[0] + key[1] > max_degree:
                continue
            out[key] = out.get(key, Fraction(0)) + c1 * c2
    return {k: v for k, v in out.items() if v != 0}


def _exp_abs2(sign: int, order: int) -> Poly:
    """exp(sign |a|^2) truncated after |a|^{2 order}."""
    return {(j, j): Fraction(sign ** j, math.factorial(j)) for j in range(order + 1)}


def _euler(p: Poly, conj: bool) -> Poly:
    """a* d/da* (conj) or a d/da applied to a polynomial."""
    out = {}
    for (m, n), c in p.items():
        deg = m if conj else n
        if deg:
            out[(m, n)] = out.get((m, n), Fraction(0)) + c * deg
    return out


@dataclass
class KoopmanOscillator:
    """exp(-|a|^2) [H(a*, d/da*) - H(d/da, a)] exp(|a|^2) for H = hbar omega a^dagger a.

    Derivatives act on exp(|a|^2) f with the multiplier on the left of each term.
    The exponentials are series truncated at `order`; the product is kept only up to the
    degree where the truncated series still multiply out exactly.
    """

    omega: float
    hbar_ef: float = 1.0
    order: int = 8
    max_degree: int = 64

    def apply(self, f: Poly) -> Poly:
        degree = max((m + n for m, n in f), default=0)
        limit = degree + 2 * self.order
        if limit > self.max_degree:
            raise PolynomialBudgetError(f"degree {limit} exceeds the polynomial budget {self.max_degree}")
        grown = _poly_mul(_exp_abs2(+1, self.order), f, limit)
        diff = _euler(grown, conj=True)
        for key, val in _euler(grown, conj=False).items():
            diff[key] = diff.get(key, Fraction(0)) - val
        # products are exact up to |a|^{2 order} beyond deg f, which is where _poly_mul stops
        return _poly_mul(_exp_abs2(-1, self.order), diff, limit)

    def eigenvalue(self, m: int, n: int) -> float:
        if m < 0 or n < 0:
            raise DomainError("monomial powers must be >= 0")
        image = self.apply({(m, n): Fraction(1)})
        extra = set(image) - {(m, n)}
        if extra:
            raise NumericalError(f"a*^{m} a^{n} is not an eigenfunction: image has {sorted(extra)}")
        return float(image.get((m, n), Fraction(0))) * self.hbar_ef * self.omega


def koopman_oscillator_eigen(m: int, n: int, omega: float, hbar_ef: float = 1.0, *,
                             max_degree: int = 64) -> float:
    return KoopmanOscillator(omega, hbar_ef, max_degree=max_degree).eigenvalue(m, n)


# ---------------- Fractional action ----------------
_POTENTIALS: dict[str, Callable[[float], float]] = {
    "free": lambda q: 0.0,
    "harmonic": lambda q: q,
    "quartic": lambda q: q ** 3,
}


@dataclass
class ActionTrajectory:
    times: np.ndarray
    q: np.ndarray
    v: np.ndarray
    potential: str = field(default="callable")


def fractional_action_trajectory(q0: float, v0: float, potential: Union[str, Callable[[float], float]],
                                 nu: float, t_span: tuple[float, float], dt: float) -> ActionTrajectory:
    """RK4 for q'' = -V'(q) + ((1 - nu)/t) q'; `potential` names V or gives V' directly."""
    t0, t1 = t_span
    if t0 <= 0:
        raise DomainError("t_span must start at t > 0")
    if not dt > 0 or t1 <= t0:
        raise DomainError("need dt > 0 and t_span[1] > t_span[0]")
    if not (0 < nu <= 1):
        raise DomainError(f"nu={nu} outside (0,1]")
    if isinstance(potential, str):
        if potential not in _POTENTIALS:
            raise DomainError(f"unknown potential {potential!r}; choose from {sorted(_POTENTIALS)}")
        grad, name = _POTENTIALS[potential], potential
    else:
        grad, name = potential, "callable"
    steps = int(round((t1 - t0) / dt))
    if abs(steps * dt - (t1 - t0)) > 1e-9 * (t1 - t0):
        raise DomainError("t_span length is not an integral number of steps")
    damping = 1.0 - nu

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        return np.array([y[1], -grad(y[0]) + damping / t * y[1]])

    y = np.array([q0, v0], dtype=float)
    out = np.empty((steps + 1, 2))
    out[0] = y
    t = t0
    for i in range(1, steps + 1):
        k1 = rhs(t, y)
        k2 = rhs(t + 0.5 * dt, y + 0.5 * dt * k1)
        k3 = rhs(t + 0.5 * dt, y + 0.5 * dt * k2)
        k4 = rhs(t + dt, y + dt * k3)
        y = y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t = t0 + i * dt
        out[i] = y
    return ActionTrajectory(t0 + dt * np.arange(steps + 1), out[:, 0], out[:, 1], name)
