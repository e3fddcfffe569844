"""Fractional Schrodinger-Newton: single-mode solution, linear stability, four-wave decay."""
import cmath

import numpy as np
import pytest

from physics.errors import DomainError, NoGrowthWindow
from physics.beams import linear_step
from physics.fracops import FracParams, Grid1D, WaveField
from physics.sne import (
    DecaySetup,
    StabilityMatrix,
    commensurate_grid,
    decay_experiment,
    growth_increment,
    pump_phase_rate,
    single_mode_solution,
    sne_evolve,
    sne_rhs,
    stability_matrix,
    thermal_field,
)
from services.config import parse_config

UNSTABLE = FracParams(alpha=1.5, nu=0.5, G=1.0)
STABLE = FracParams(alpha=1.5, nu=0.5, G=0.02)


def test_commensurate_grid_places_modes_on_lattice():
    grid = commensurate_grid(3.0, 1.0)
    k = grid.wavenumbers
    for target in (2.0, 3.0, 4.0):
        assert np.min(np.abs(k - target)) <= 1e-12
    assert commensurate_grid(1.5, 0.5).n >= 64
    with pytest.raises(DomainError):
        commensurate_grid(1.0, np.sqrt(2.0) / 10.0, max_ratio=4)


def test_uniform_density_adds_no_gravity():
    grid = Grid1D(0.0, 2.0 * np.pi, 64)
    psi = WaveField(grid, np.exp(3j * grid.x))
    free = FracParams(alpha=UNSTABLE.alpha, nu=UNSTABLE.nu, G=0.0)
    gap = sne_rhs(psi, UNSTABLE).values - sne_rhs(psi, free).values
    assert np.max(np.abs(gap)) <= 1e-12


def test_rhs_of_single_mode_is_phase_rate():
    q, a_q = 3.0, 0.8 + 0.2j
    grid = commensurate_grid(q, 1.0)
    psi = WaveField(grid, a_q * np.exp(1j * q * grid.x))
    for form in ("density", "mode"):
        rhs = sne_rhs(psi, UNSTABLE, gravity_form=form)
        rate = pump_phase_rate(q, a_q, UNSTABLE, form)
        assert np.max(np.abs(rhs.values + 1j * rate * psi.values)) <= 1e-10
    assert pump_phase_rate(q, a_q, UNSTABLE) == pytest.approx(0.5 * q ** 1.5)


def test_single_mode_modulus_and_phase_mode_form():
    q, a_q = 3.0, 1.0 + 0j
    grid = commensurate_grid(q, 1.0)
    psi0 = WaveField(grid, a_q * np.exp(1j * q * grid.x))
    report = sne_evolve(psi0, UNSTABLE, 10.0, 1e-3, record_every=100, gravity_form="mode", track=(q,))
    amps = report.extras["amplitudes"][:, 0]
    assert np.max(np.abs(np.abs(amps) - 1.0)) <= 1e-10
    exact = single_mode_solution(q, a_q, UNSTABLE, report.times, "mode")
    phase_err = np.abs(np.angle(amps / exact))
    rate = abs(pump_phase_rate(q, a_q, UNSTABLE, "mode"))
    assert np.max(phase_err) <= 1e-6 * rate * report.times[-1]


def test_single_mode_is_free_under_default_form():
    # |psi|^2 is constant, and |k|^nu removes the k = 0 component
    q = 3.0
    grid = commensurate_grid(q, 1.0)
    psi0 = WaveField(grid, np.exp(1j * q * grid.x))
    report = sne_evolve(psi0, UNSTABLE, 2.0, 1e-3, record_every=100, track=(q,))
    amps = report.extras["amplitudes"][:, 0]
    assert np.max(np.abs(np.abs(amps) - 1.0)) <= 1e-10
    free = FracParams(alpha=UNSTABLE.alpha, nu=UNSTABLE.nu, G=0.0)
    exact = single_mode_solution(q, 1.0, free, report.times)
    assert np.max(np.abs(amps - exact)) <= 1e-10


def test_default_evolution_conserves_norm():
    grid = Grid1D(0.0, 2.0 * np.pi, 64)
    psi0 = WaveField(grid, (1.0 + 0.3 * np.cos(grid.x)) * np.exp(2j * grid.x))
    report = sne_evolve(psi0, UNSTABLE, 1.0, 1e-3, record_every=100)
    assert np.max(np.abs(report.norms - report.norms[0])) <= 1e-10 * report.norms[0]


def test_scenario_default_run_conserves_norm():
    cfg = parse_config("[params]\nalpha = 1.5\nG = 1.0\n[run]\nt_final = 0.5\ndt = 0.001\n", "sne")
    assert cfg.sne.gravity_form == "density"
    setup = DecaySetup(cfg.sne.q, cfg.sne.p, cfg.sne.a_q, cfg.sne.epsilon_seed)
    result = decay_experiment(setup, cfg.params.to_params(), cfg.run.t_final, cfg.run.dt,
                              require_growth=False, record_every=50, gravity_form=cfg.sne.gravity_form)
    norms = result.report.norms
    assert np.max(np.abs(norms - norms[0])) <= 1e-10 * norms[0]
    assert result.convention == "density"


def test_stability_matrix_linearized_rate():
    setup = DecaySetup(3.0, 1.0, 1.0, 1e-5)
    M = stability_matrix(setup, UNSTABLE, "linearized")
    lam, minus = growth_increment(M)
    assert lam.real == pytest.approx(0.595, abs=2e-3)
    assert minus == -lam


def test_growth_increment_matches_matrix_eigenvalues():
    setup = DecaySetup(3.0, 0.1, 1.0, 1e-5)
    for convention in ("bare", "linearized", "density"):
        M = stability_matrix(setup, UNSTABLE, convention)
        eig = np.linalg.eigvals(M.as_array())
        lam, _ = growth_increment(M)
        assert np.max(eig.real) == pytest.approx(abs(lam.real), abs=1e-12)


def test_weak_gravity_is_stable():
    setup = DecaySetup(3.0, 1.0, 1.0, 1e-5)
    lam, _ = growth_increment(stability_matrix(setup, STABLE, "linearized"))
    assert lam.real == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(NoGrowthWindow):
        decay_experiment(setup, STABLE, 1.0, 1e-3)


def test_decay_setup_validation():
    with pytest.raises(DomainError):
        DecaySetup(3.0, 4.0, 1.0, 1e-5)
    with pytest.raises(DomainError):
        decay_experiment(DecaySetup(3.0, 1.0, 1.0, 1e-3), UNSTABLE, 1.0, 1e-3)


@pytest.mark.slow
def test_decay_rate_matches_linear_prediction():
    setup = DecaySetup(3.0, 1.0, 1.0, 1e-5)
    result = decay_experiment(setup, UNSTABLE, 12.0, 1e-3, record_every=10)
    assert result.ratio == pytest.approx(1.0, abs=0.05)
    assert result.window[1] > result.window[0]


@pytest.mark.slow
def test_decay_rate_independent_of_seed_size():
    small = decay_experiment(DecaySetup(3.0, 1.0, 1.0, 1e-6), UNSTABLE, 14.0, 1e-3, record_every=10)
    large = decay_experiment(DecaySetup(3.0, 1.0, 1.0, 2e-6), UNSTABLE, 14.0, 1e-3, record_every=10)
    assert large.measured_rate == pytest.approx(small.measured_rate, rel=0.01)


@pytest.mark.slow
def test_stable_configuration_shows_no_growth():
    setup = DecaySetup(3.0, 1.0, 1.0, 1e-5)
    result = decay_experiment(setup, STABLE, 5.0, 1e-3, require_growth=False, record_every=10)
    scale = growth_increment(stability_matrix(setup, UNSTABLE, "density"))[0].real
    assert abs(result.measured_rate) <= 0.1 * scale


def test_seed_phase_keeps_the_growing_direction():
    setup = DecaySetup(3.0, 1.0, 1.0, 1e-5)
    base = decay_experiment(setup, UNSTABLE, 2.0, 1e-3, record_every=10)
    rotated = decay_experiment(setup, UNSTABLE, 2.0, 1e-3, record_every=10, seed_phase=1.3)
    assert rotated.measured_rate == pytest.approx(base.measured_rate, rel=1e-6)
    assert np.abs(rotated.amplitudes[0, 1]) == pytest.approx(np.abs(base.amplitudes[0, 1]), rel=1e-9)
    assert cmath.phase(rotated.amplitudes[0, 1] / base.amplitudes[0, 1]) == pytest.approx(1.3, abs=1e-8)


def test_thermal_field_at_alpha_two_is_free_propagator():
    params = FracParams(alpha=2.0, mass=2.0)
    c = 0.5j / params.mass + 1e-6
    for x in (0.0, 1.0):
        expected = cmath.exp(-x * x / (4.0 * c)) / (2.0 * cmath.sqrt(np.pi * c))
        assert abs(thermal_field(x, 1.0, params) - expected) <= 1e-8


# ---------------- Limits ----------------
def test_no_gravity_is_the_linear_propagator():
    grid = Grid1D(0.0, 2.0 * np.pi, 64)
    psi0 = WaveField(grid, (1.0 + 0.3 * np.cos(grid.x)) * np.exp(2j * grid.x))
    free = FracParams(alpha=1.5, G=0.0)
    report = sne_evolve(psi0, free, 1.0, 1e-2, record_every=100)
    assert np.max(np.abs(report.final.values - linear_step(psi0, free, 1.0).values)) <= 1e-10


def test_bare_detuning_at_vanishing_offset():
    setup = DecaySetup(3.0, 1e-6, 1.0, 1e-5)
    M = stability_matrix(setup, UNSTABLE, "bare")
    assert M.calF == pytest.approx(3.0 * np.sqrt(3.0), rel=1e-6)


def test_detuning_without_gravity_is_curvature():
    q, p, alpha = 3.0, 0.01, 1.5
    M = stability_matrix(DecaySetup(q, p, 1.0, 1e-5), FracParams(alpha=alpha, G=0.0))
    expected = -0.25 * alpha * (alpha - 1.0) * q ** (alpha - 2.0) * p ** 2
    assert M.calF == pytest.approx(expected, rel=1e-3)
    lam, _ = growth_increment(M)
    assert lam == pytest.approx(1j * abs(M.calF), abs=1e-15)


def test_resonant_growth_scales_with_pump_intensity():
    rates = [growth_increment(StabilityMatrix(0.0, 0.0, 0.0, 0.0, 2.0, 0.5, I))[0] for I in (0.5, 1.0)]
    assert rates[0] == pytest.approx(0.5)
    assert rates[1] == pytest.approx(2.0 * rates[0])


def test_faint_pump_is_stable():
    M = stability_matrix(DecaySetup(3.0, 1.0, 1e-4, 1e-9), UNSTABLE, "linearized")
    lam, _ = growth_increment(M)
    assert lam.real == 0.0
    assert lam.imag == pytest.approx(abs(M.calF), rel=1e-6)
