# physics/specfun.py
"""Special functions used across the simulators.

Gamma (Lanczos), Mittag-Leffler (extended-precision series + exponential/algebraic
asymptotics), Airy Ai (Maclaurin series + asymptotic forms) and the fractional free
kernel (1/pi) * int_0^inf cos(kx) exp(-c tau k^alpha) dk evaluated by contour-rotated
oscillatory quadrature.

Everything here is a pure function of its inputs.
"""
from __future__ import annotations

import cmath
import logging
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import mpmath
import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.optimize import brentq

from physics.errors import DomainError, GammaPoleError, KernelConvergenceError, MLDomainError

__all__ = [
    "MLArgs",
    "KernelQuery",
    "gamma_fn",
    "mittag_leffler",
    "mittag_leffler_array",
    "airy_ai",
    "airy_ai_array",
    "airy_zeros",
    "frac_free_kernel",
    "fox_h_identity",
    "DEFAULT_REGULATOR",
]

log = logging.getLogger(f"fracwave.{__name__}")

# ---------------- Constants ----------------
ML_NU_MIN, ML_NU_MAX = 0.3, 2.0
ML_MAX_ABS_Z = 50.0
ML_SERIES_RADIUS = 50.0          # switch on r = |z|**(1/nu)

AIRY_MIN, AIRY_MAX = -20.0, 10.0
AIRY_SERIES_LIMIT = 8.0

DEFAULT_REGULATOR = 1e-6
DELTA_WIDTH = 1e-3
TAU_FLOOR = 1e-14
KERNEL_TOL = 1e-9

# Lanczos g=7, n=9
_LANCZOS_G = 7.0
_LANCZOS_P = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


# ---------------- Gamma ----------------
def _is_pole(x: complex) -> bool:
    return x.imag == 0 and x.real <= 0 and float(x.real).is_integer()


def gamma_fn(x) -> complex:
    """Gamma function for real or complex argument (Lanczos with reflection)."""
    z = complex(x)
    if _is_pole(z):
        raise GammaPoleError(x)
    if z.real < 0.5:
        return cmath.pi / (cmath.sin(cmath.pi * z) * gamma_fn(1.0 - z))
    z -= 1.0
    acc = _LANCZOS_P[0]
    for i, p in enumerate(_LANCZOS_P[1:], start=1):
        acc += p / (z + i)
    t = z + _LANCZOS_G + 0.5
    return cmath.sqrt(2.0 * cmath.pi) * cmath.exp((z + 0.5) * cmath.log(t) - t) * acc


# ---------------- Mittag-Leffler ----------------
@dataclass(frozen=True)
class MLArgs:
    nu: float
    beta_idx: float
    z: complex

    def __post_init__(self) -> None:
        if not self.nu > 0:
            raise DomainError("nu must be > 0")
        if not self.beta_idx > 0:
            raise DomainError("beta_idx must be > 0")

    def evaluate(self, **kw) -> complex:
        return mittag_leffler(self.nu, self.beta_idx, self.z, **kw)


class _AsymptoticNotConverged(Exception):
    pass


def _series_terms(nu: float, beta: float, abs_z: float, dps: int) -> int:
    """Smallest term count past the peak whose tail is below 10**-dps."""
    target = -dps * math.log(10.0)
    k = max(8, int((abs_z ** (1.0 / nu)) / nu) + 1)
    log_z = math.log(abs_z)
    while k * log_z - math.lgamma(nu * k + beta) > target:
        k += 8
    return k


@lru_cache(maxsize=128)
def _series_coefficients(nu: float, beta: float, terms: int, dps: int) -> tuple:
    with mpmath.workdps(dps):
        mnu, mbeta = mpmath.mpf(nu), mpmath.mpf(beta)
        return tuple(mpmath.rgamma(mnu * k + mbeta) for k in range(terms))


def _ml_series(nu: float, beta: float, z: complex) -> complex:
    r = abs(z) ** (1.0 / nu)
    dps = 10 * (int(0.4343 * r + 25) // 10 + 1)
    terms = _series_terms(nu, beta, abs(z), dps)
    terms = 32 * (terms // 32 + 1)
    coeffs = _series_coefficients(nu, beta, terms, dps)
    with mpmath.workdps(dps):
        zz = mpmath.mpc(z.real, z.imag)
        acc = mpmath.mpc(0)
        power = mpmath.mpc(1)
        for c in coeffs:
            acc += c * power
            power *= zz
        return complex(acc)


def _ml_asymptotic(nu: float, beta: float, z: complex) -> complex:
    r = abs(z) ** (1.0 / nu)
    phi = cmath.phase(z)
    with mpmath.workdps(30):
        exp_part = mpmath.mpc(0)
        jmax = int(math.ceil(nu)) + 1
        for j in range(-jmax, jmax + 1):
            ang = phi + 2.0 * math.pi * j
            # poles of the Hankel integrand on the principal sheet: -pi < arg s <= pi
            if -nu * math.pi < ang <= nu * math.pi:
                s = mpmath.mpf(r) * mpmath.expjpi(ang / (nu * math.pi))
                exp_part += s ** (1 - mpmath.mpf(beta)) * mpmath.exp(s) / nu

        zz = mpmath.mpc(z.real, z.imag)
        alg = mpmath.mpc(0)
        inv = 1 / zz
        power = inv
        best = mpmath.inf
        rising = 0
        scale = abs(exp_part)
        for k in range(1, int(4 * r / nu) + 16):
            c = mpmath.rgamma(beta - nu * k)
            term = power * c
            power *= inv
            mag = abs(term)
            if c == 0:
                continue
            if mag > best:
                rising += 1
                if rising >= 3:
                    break
                continue
            rising = 0
            best = mag
            alg -= term
            if mag <= 1e-18 * max(scale, abs(alg)):
                break
        value = exp_part + alg
        if best > 1e-12 * max(abs(value), mpmath.mpf("1e-300")):
            raise _AsymptoticNotConverged(float(best))
        return complex(value)


def _finite(value: complex, nu: float, beta: float, z: complex) -> complex:
    if not cmath.isfinite(value):
        raise MLDomainError(f"E_({nu},{beta})({z}) overflows double precision")
    return value


def mittag_leffler(nu: float, beta: float, z, *, max_abs_z: float = ML_MAX_ABS_Z) -> complex:
    """E_{nu,beta}(z) inside the validated domain nu in [0.3, 2], |z| <= max_abs_z.

    Values beyond double range (large positive z at small nu) raise MLDomainError.
    """
    MLArgs(nu, beta, complex(z))
    if not (ML_NU_MIN <= nu <= ML_NU_MAX):
        raise MLDomainError(f"nu={nu} outside the validated range [{ML_NU_MIN}, {ML_NU_MAX}]")
    z = complex(z)
    if not (cmath.isfinite(z)):
        raise MLDomainError("non-finite Mittag-Leffler argument")
    if abs(z) > max_abs_z:
        raise MLDomainError(f"|z|={abs(z):.6g} exceeds the validated bound {max_abs_z}")
    if z == 0:
        return complex(mpmath.rgamma(beta))
    r = abs(z) ** (1.0 / nu)
    if r > ML_SERIES_RADIUS:
        try:
            return _finite(_ml_asymptotic(nu, beta, z), nu, beta, z)
        except _AsymptoticNotConverged as exc:
            log.debug("ML asymptotic branch not converged (smallest term %s), using series", exc)
            if r > 20 * ML_SERIES_RADIUS:
                raise MLDomainError(f"no convergent branch for nu={nu}, z={z}") from exc
    try:
        return _finite(_ml_series(nu, beta, z), nu, beta, z)
    except OverflowError as exc:
        raise MLDomainError(f"overflow evaluating E_({nu},{beta})({z})") from exc


def mittag_leffler_array(nu: float, beta: float, z, **kw) -> np.ndarray:
    arr = np.asarray(z, dtype=complex)
    out = np.fromiter((mittag_leffler(nu, beta, v, **kw) for v in arr.ravel()),
                      dtype=complex, count=arr.size)
    return out.reshape(arr.shape)


# ---------------- Airy ----------------
def _airy_u(k_max: int) -> list[float]:
    u = [1.0]
    for k in range(1, k_max + 1):
        u.append(u[-1] * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216.0 * k))
    return u


_AIRY_U = _airy_u(40)


def _airy_series(x: float) -> float:
    with mpmath.workdps(40):
        xm = mpmath.mpf(x)
        x3 = xm ** 3
        c1 = mpmath.mpf(3) ** (mpmath.mpf(-2) / 3) / mpmath.gamma(mpmath.mpf(2) / 3)
        c2 = mpmath.mpf(3) ** (mpmath.mpf(-1) / 3) / mpmath.gamma(mpmath.mpf(1) / 3)
        f_term, g_term = mpmath.mpf(1), xm
        f_sum, g_sum = f_term, g_term
        k = 1
        eps = mpmath.mpf(10) ** -38
        while True:
            f_term *= x3 / ((3 * k) * (3 * k - 1))
            g_term *= x3 / ((3 * k + 1) * (3 * k))
            f_sum += f_term
            g_sum += g_term
            if abs(f_term) + abs(g_term) < eps * (abs(f_sum) + abs(g_sum) + 1):
                break
            k += 1
        return float(c1 * f_sum - c2 * g_sum)


def _airy_asymptotic(x: float) -> float:
    if x > 0:
        zeta = 2.0 / 3.0 * x ** 1.5
        acc, prev = 0.0, math.inf
        for k, u in enumerate(_AIRY_U):
            term = (-1) ** k * u / zeta ** k
            if abs(term) > prev:
                break
            acc += term
            prev = abs(term)
            if prev < 1e-17:
                break
        return math.exp(-zeta) / (2.0 * math.sqrt(math.pi) * x ** 0.25) * acc
    y = -x
    zeta = 2.0 / 3.0 * y ** 1.5
    p_sum = q_sum = 0.0
    prev = math.inf
    for k in range(len(_AIRY_U) // 2):
        tp = (-1) ** k * _AIRY_U[2 * k] / zeta ** (2 * k)
        tq = (-1) ** k * _AIRY_U[2 * k + 1] / zeta ** (2 * k + 1)
        size = abs(tp) + abs(tq)
        if size > prev:
            break
        p_sum += tp
        q_sum += tq
        prev = size
        if size < 1e-17:
            break
    phase = zeta + math.pi / 4.0
    return (math.sin(phase) * p_sum - math.cos(phase) * q_sum) / (math.sqrt(math.pi) * y ** 0.25)


def airy_ai(x: float) -> float:
    """Ai(x) for x in [-20, 10], absolute error below 1e-10."""
    x = float(x)
    if not (AIRY_MIN <= x <= AIRY_MAX):
        raise DomainError(f"airy_ai argument {x} outside [{AIRY_MIN}, {AIRY_MAX}]")
    if abs(x) <= AIRY_SERIES_LIMIT:
        return _airy_series(x)
    return _airy_asymptotic(x)


def airy_ai_array(x) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    return np.fromiter((airy_ai(v) for v in arr.ravel()), dtype=float, count=arr.size).reshape(arr.shape)


def airy_zeros(count: int, *, step: float = 0.05) -> np.ndarray:
    """First `count` zeros of Ai inside the supported range, bracketed then refined with Brent."""
    zeros: list[float] = []
    right = 0.0
    f_right = airy_ai(right)
    while len(zeros) < count:
        left = right - step
        if left < AIRY_MIN:
            raise DomainError(f"only {len(zeros)} Airy zeros lie in [{AIRY_MIN}, 0]")
        f_left = airy_ai(left)
        if f_left == 0.0:
            zeros.append(left)
        elif f_left * f_right < 0:
            zeros.append(brentq(airy_ai, left, right, xtol=1e-15, rtol=4e-16))
        right, f_right = left, f_left
    return np.asarray(zeros)


# ---------------- Oscillatory kernel ----------------
@dataclass(frozen=True)
class KernelQuery:
    x: float
    tau: float
    alpha: float
    coeff: complex

    def __post_init__(self) -> None:
        if not self.tau >= 0:
            raise DomainError("tau must be >= 0")
        if not (0 < self.alpha <= 2):
            raise DomainError("alpha must lie in (0,2]")

    def evaluate(self, **kw) -> complex:
        return frac_free_kernel(self.x, self.tau, self.alpha, self.coeff, **kw)


def _quad_complex(fn: Callable[[float], complex], a: float, b: float, *, limit: int,
                  epsabs: float, epsrel: float = 1e-12) -> tuple[complex, float]:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        re, re_err = quad(lambda t: fn(t).real, a, b, limit=limit, epsabs=epsabs, epsrel=epsrel)
        im, im_err = quad(lambda t: fn(t).imag, a, b, limit=limit, epsabs=epsabs, epsrel=epsrel)
    return complex(re, im), math.hypot(re_err, im_err)


def _half_line(s: float, tau: float, alpha: float, c: complex, tol: float) -> tuple[complex, float]:
    """int_0^inf exp(i k s - c tau k^alpha) dk for Im c > 0, alpha != 1.

    Real axis up to twice the stationary point, then a ray into the half plane where
    the integrand decays monotonically.
    """
    a = c.imag

    def integrand(k):
        return np.exp(1j * k * s - c * tau * k ** alpha)

    if alpha > 1:
        kstar = (s / (alpha * tau * a)) ** (1.0 / (alpha - 1.0)) if s > 0 else 0.0
        theta = -math.pi / (2.0 * alpha)
    elif s > 0:
        kstar = (alpha * tau * a / s) ** (1.0 / (1.0 - alpha))
        theta = math.pi / 2.0
    else:
        kstar = 0.0
        theta = -math.pi / 2.0

    total, err = 0j, 0.0
    split = 2.0 * kstar
    if split > 0:
        n_osc = (abs(s) * split + a * tau * split ** alpha) / (2.0 * math.pi)
        limit = int(min(max(200, 10 * n_osc), 50_000))
        seg, seg_err = _quad_complex(lambda k: complex(integrand(k)), 0.0, split,
                                     limit=limit, epsabs=0.05 * tol)
        total += seg
        err += seg_err

    direction = cmath.exp(1j * theta)
    tail, tail_err = _quad_complex(lambda r: complex(integrand(split + r * direction) * direction),
                                   0.0, math.inf, limit=500, epsabs=0.05 * tol)
    return total + tail, err + tail_err


def _kernel(x: float, tau: float, alpha: float, c: complex, delta_width: float, tol: float) -> complex:
    x = abs(x)
    if tau <= TAU_FLOOR:
        return complex(math.exp(-0.5 * (x / delta_width) ** 2) / (delta_width * math.sqrt(2.0 * math.pi)))
    if alpha == 1:
        ct = c * tau
        return ct / (math.pi * (ct * ct + x * x))
    if c.imag == 0:
        rate = c.real * tau
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", IntegrationWarning)
            if x == 0:
                val, err = quad(lambda k: math.exp(-rate * k ** alpha), 0.0, math.inf, epsabs=0.05 * tol)
            else:
                val, err = quad(lambda k: math.exp(-rate * k ** alpha), 0.0, math.inf,
                                weight="cos", wvar=x, epsabs=0.05 * tol)
        if err > tol:
            raise KernelConvergenceError(tol, err, f"diffusive kernel x={x}, tau={tau}")
        return complex(val / math.pi)

    forward, e1 = _half_line(x, tau, alpha, c, tol)
    backward, e2 = _half_line(-x, tau, alpha, c, tol)
    value = (forward + backward) / (2.0 * math.pi)
    achieved = (e1 + e2) / (2.0 * math.pi)
    requested = tol * max(1.0, abs(value))
    if not cmath.isfinite(value) or achieved > requested:
        raise KernelConvergenceError(requested, achieved, f"x={x}, tau={tau}, alpha={alpha}")
    return value


def frac_free_kernel(x: float, tau: float, alpha: float, coeff: complex, *,
                     regulator: float = DEFAULT_REGULATOR,
                     delta_width: float = DELTA_WIDTH,
                     tol: float = KERNEL_TOL) -> complex:
    """(1/pi) int_0^inf cos(kx) exp(-(coeff + regulator) tau k^alpha) dk.

    Even in x by construction. tau below TAU_FLOOR returns a Gaussian delta sequence of
    width `delta_width`.
    """
    KernelQuery(x, tau, alpha, coeff)
    if regulator < 0:
        raise DomainError("regulator must be >= 0")
    c = complex(coeff) + regulator
    if c.real < 0:
        raise DomainError("coeff must have a non-negative real part")
    if c == 0:
        raise DomainError("coeff + regulator must be non-zero")
    if c.imag < 0:
        return _kernel(x, tau, alpha, c.conjugate(), delta_width, tol).conjugate()
    return _kernel(x, tau, alpha, c, delta_width, tol)


# ---------------- H-function identity cases ----------------
def fox_h_identity(z, alpha: Optional[float] = None, beta: Optional[float] = None,
                   *, max_abs_z: float = 10.0) -> complex:
    """Residue sum of the two closed-form H-function cases.

    alpha None: H^{1,0}_{0,1}[z | -; (0,1)], residues of Gamma(s) only (equals exp(-z)).
    Otherwise:  H^{1,1}_{1,2}[-z | (0,1); (0,1), (1-beta, alpha)] (equals E_{alpha,beta}(z)).
    """
    z = complex(z)
    if abs(z) > max_abs_z:
        raise DomainError(f"|z| <= {max_abs_z} required for the residue series")
    if alpha is not None and (beta is None or alpha <= 0 or beta <= 0):
        raise DomainError("alpha and beta must both be positive")
    with mpmath.workdps(40):
        zz = mpmath.mpc(z.real, z.imag)
        acc = mpmath.mpc(0)
        for k in range(400):
            # residue of Gamma(s) at s = -k
            res = mpmath.mpf(-1) ** k / mpmath.factorial(k)
            if alpha is None:
                term = res * zz ** k
            else:
                s = -k
                theta_rest = mpmath.gamma(1 - s) * mpmath.rgamma(1 - (1 - beta) - alpha * s)
                term = res * theta_rest * (-zz) ** k
            acc += term
            if k > 8 and abs(term) < mpmath.mpf(10) ** -30 * (abs(acc) + 1):
                break
        return complex(acc)
