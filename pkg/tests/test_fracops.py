"""Riesz operator, its finite-difference oracles, fractional time calculus, harmonic extension."""
import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import gamma as sp_gamma
from scipy.stats import linregress

from physics.errors import DomainError, NonFiniteError
from physics.fracops import (
    FracParams,
    Grid1D,
    WaveField,
    apply_riesz,
    caputo_l1_derivative,
    caputo_l1_weights,
    extension_solve,
    extension_symbol,
    frac_integral,
    gl_riesz_oracle,
    hilbert_riesz_oracle,
    neumann_limit,
    poisson_kernel,
    riesz_multiplier,
)


def rel_l2(a, b) -> float:
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))


@pytest.fixture
def gaussian512():
    grid = Grid1D(-16.0, 16.0, 512)
    return WaveField(grid, np.exp(-grid.x ** 2 / 8.0))


# ---------------- Types ----------------
def test_grid_rejects_non_power_of_two():
    with pytest.raises(DomainError):
        Grid1D(0.0, 1.0, 100)
    with pytest.raises(DomainError):
        Grid1D(1.0, 0.0, 64)


def test_params_report_every_violation():
    with pytest.raises(DomainError) as exc:
        FracParams(alpha=2.5, beta=0.0)
    assert "alpha" in str(exc.value) and "beta" in str(exc.value)


# ---------------- Spectral Riesz ----------------
@pytest.mark.parametrize("alpha", [2.0, 1.3, 0.6])
def test_riesz_eigenfunction(alpha):
    grid = Grid1D(0.0, 2.0 * math.pi, 64)
    out = apply_riesz(WaveField(grid, np.sin(3.0 * grid.x)), alpha)
    assert np.max(np.abs(out.values - 3.0 ** alpha * np.sin(3.0 * grid.x))) <= 1e-10


def test_riesz_constant_is_annihilated():
    grid = Grid1D(0.0, 1.0, 32)
    assert np.max(np.abs(apply_riesz(WaveField(grid, np.ones(32)), 1.4).values)) <= 1e-13


def test_riesz_is_self_adjoint():
    rng = np.random.default_rng(3)
    grid = Grid1D(-5.0, 5.0, 128)
    f = WaveField(grid, rng.normal(size=128))
    g = WaveField(grid, rng.normal(size=128))
    lhs = np.vdot(f.values, apply_riesz(g, 1.7).values)
    rhs = np.vdot(apply_riesz(f, 1.7).values, g.values)
    assert abs(lhs - rhs) <= 1e-10 * abs(lhs)


def test_riesz_rejects_nonfinite_field():
    grid = Grid1D(0.0, 1.0, 8)
    values = np.zeros(8)
    values[3] = np.nan
    with pytest.raises(NonFiniteError):
        apply_riesz(WaveField(grid, values), 1.0)


# ---------------- Oracles ----------------
@pytest.mark.parametrize("alpha", [0.5, 1.5, 1.9])
def test_spectral_matches_grunwald_letnikov(gaussian512, alpha):
    spectral = apply_riesz(gaussian512, alpha).values
    oracle = gl_riesz_oracle(gaussian512, alpha).values
    assert rel_l2(spectral, oracle) <= 1e-3


def test_spectral_matches_hilbert_oracle_at_alpha_one(gaussian512):
    spectral = apply_riesz(gaussian512, 1.0).values
    oracle = hilbert_riesz_oracle(gaussian512).values
    assert rel_l2(spectral, oracle) <= 1e-3


def test_truncated_gl_close_to_periodic_for_compact_field(gaussian512):
    periodic = gl_riesz_oracle(gaussian512, 1.5, boundary="periodic").values
    truncated = gl_riesz_oracle(gaussian512, 1.5, boundary="truncate").values
    assert rel_l2(truncated, periodic) <= 1e-2


def test_gl_oracle_rejects_alpha_one_and_unknown_boundary(gaussian512):
    with pytest.raises(DomainError):
        gl_riesz_oracle(gaussian512, 1.0)
    with pytest.raises(DomainError):
        gl_riesz_oracle(gaussian512, 1.5, boundary="reflect")


# ---------------- Time-fractional calculus ----------------
def test_l1_weights_leading_entry():
    beta, dt = 0.4, 0.01
    b = caputo_l1_weights(beta, 5, dt)
    assert b[0] == pytest.approx(dt ** -beta / sp_gamma(2.0 - beta), rel=1e-14)
    assert np.all(np.diff(b) < 0)


@pytest.mark.parametrize("beta", [0.3, 0.7, 1.0])
def test_l1_exact_for_linear_history(beta):
    dt = 0.02
    t = dt * np.arange(51)
    deriv = caputo_l1_derivative(t, beta, dt)
    exact = t ** (1.0 - beta) / sp_gamma(2.0 - beta)
    assert np.max(np.abs(deriv - exact)) <= 1e-12


@pytest.mark.parametrize("beta", [0.3, 0.6, 0.9])
def test_l1_convergence_order_on_quadratic(beta):
    steps = np.array([40, 80, 160, 320])
    errors = []
    for n in steps:
        dt = 1.0 / n
        t = dt * np.arange(n + 1)
        approx = caputo_l1_derivative(t ** 2, beta, dt)[-1]
        errors.append(abs(approx - 2.0 / sp_gamma(3.0 - beta)))
    slope = linregress(np.log(1.0 / steps), np.log(errors)).slope
    assert abs(slope - (2.0 - beta)) <= 0.1


@pytest.mark.parametrize("beta", [0.3, 0.5, 1.0, 1.6])
def test_frac_integral_exact_for_linear(beta):
    dt = 0.05
    t = dt * np.arange(41)
    ones = frac_integral(np.ones_like(t), beta, dt)
    ramp = frac_integral(t, beta, dt)
    assert np.max(np.abs(ones - t ** beta / sp_gamma(beta + 1.0))) <= 1e-12
    assert np.max(np.abs(ramp - t ** (beta + 1.0) / sp_gamma(beta + 2.0))) <= 1e-11


def test_frac_integral_order_one_is_trapezoid():
    dt = 1e-2
    t = dt * np.arange(101)
    assert np.max(np.abs(frac_integral(np.cos(t), 1.0, dt) - np.sin(t))) <= 1e-4


def test_frac_integral_group_property():
    dt = 1e-2
    t = dt * np.arange(101)
    f = np.cos(t)
    composed = frac_integral(frac_integral(f, 0.7, dt), 0.3, dt)
    assert np.max(np.abs(composed - frac_integral(f, 1.0, dt))) <= dt


# ---------------- Harmonic extension ----------------
@pytest.mark.parametrize("alpha", [0.8, 1.0, 1.5])
def test_poisson_kernel_unit_mass(alpha):
    half, _ = quad(lambda x: poisson_kernel(x, 0.3, alpha), 0.0, np.inf, limit=200)
    assert abs(2.0 * half - 1.0) <= 1e-8


def test_extension_symbol_alpha_one_is_exponential():
    t = np.array([0.0, 0.1, 1.0, 3.0])
    assert np.max(np.abs(extension_symbol(t, 1.0) - np.exp(-t))) <= 1e-9


@pytest.mark.parametrize("alpha", [0.8, 1.0, 1.5])
def test_neumann_limit_matches_spectral(alpha):
    grid = Grid1D(-20.0, 20.0, 256)
    f = WaveField(grid, np.exp(-0.5 * grid.x ** 2))
    y = np.array([1e-3, 2e-3, 4e-3])
    u = extension_solve(f, alpha, y)
    assert u.shape == (3, 256)
    limit = neumann_limit(u, f, alpha, y)
    assert rel_l2(limit.values, apply_riesz(f, alpha).values) <= 2e-2


def test_neumann_limit_on_sine():
    grid = Grid1D(0.0, 2.0 * math.pi, 64)
    f = WaveField(grid, np.sin(2.0 * grid.x))
    y = np.array([2e-3, 4e-3, 8e-3])
    limit = neumann_limit(extension_solve(f, 1.0, y), f, 1.0, y)
    assert rel_l2(limit.values, 2.0 * np.sin(2.0 * grid.x)) <= 1e-2


def test_neumann_limit_preconditions():
    grid = Grid1D(0.0, 2.0 * math.pi, 16)
    f = WaveField(grid, np.sin(grid.x))
    far = np.array([0.05, 0.1, 0.2])
    with pytest.raises(DomainError):
        neumann_limit(extension_solve(f, 1.0, far), f, 1.0, far)
    two = np.array([1e-3, 2e-3])
    with pytest.raises(DomainError):
        neumann_limit(extension_solve(f, 1.0, two), f, 1.0, two)
    with pytest.raises(DomainError):
        extension_solve(f, 1.0, [2e-3, 1e-3])


# ---------------- Symbols and limits ----------------
def test_riesz_multiplier_entries():
    grid = Grid1D(0.0, 2.0 * math.pi, 16)
    k = grid.wavenumbers
    assert riesz_multiplier(grid, 1.3)[0] == 0.0
    assert np.max(np.abs(riesz_multiplier(grid, 2.0) - k ** 2)) <= 1e-12
    assert riesz_multiplier(grid, 1.0)[2] == pytest.approx(2.0)


def test_riesz_is_linear():
    rng = np.random.default_rng(5)
    grid = Grid1D(-4.0, 4.0, 64)
    f, g = rng.normal(size=64), rng.normal(size=64)
    a, b = 1.5 - 0.5j, -2.0
    lhs = apply_riesz(WaveField(grid, a * f + b * g), 0.9).values
    rhs = a * apply_riesz(WaveField(grid, f), 0.9).values + b * apply_riesz(WaveField(grid, g), 0.9).values
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * np.max(np.abs(rhs))


def test_gl_alpha_two_is_three_point_laplacian():
    grid = Grid1D(0.0, 2.0 * math.pi, 64)
    f = np.sin(grid.x) + 0.3 * np.cos(4.0 * grid.x)
    stencil = -(np.roll(f, -1) - 2.0 * f + np.roll(f, 1)) / grid.dx ** 2
    out = gl_riesz_oracle(WaveField(grid, f), 2.0).values
    assert np.max(np.abs(out - stencil)) <= 1e-9


def test_gl_continuous_as_alpha_reaches_two(gaussian512):
    ref = gl_riesz_oracle(gaussian512, 2.0).values
    gaps = [rel_l2(gl_riesz_oracle(gaussian512, a).values, ref) for a in (1.9, 1.99, 1.999)]
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] <= 1e-2


def test_extension_of_constant_is_constant():
    grid = Grid1D(-5.0, 5.0, 64)
    f = WaveField(grid, np.full(64, 2.5))
    u = extension_solve(f, 1.5, [0.01, 0.1, 1.0])
    assert np.max(np.abs(u - 2.5)) <= 1e-12


def test_poisson_kernel_alpha_one_is_classical():
    x = np.array([0.0, 0.3, 2.0])
    y = 0.4
    assert np.allclose(poisson_kernel(x, y, 1.0), y / (math.pi * (x ** 2 + y ** 2)), rtol=1e-10, atol=0)
