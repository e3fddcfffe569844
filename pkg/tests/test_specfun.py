"""Special functions against mpmath / scipy oracles and closed forms."""
import cmath
import math

import mpmath
import numpy as np
import pytest
from scipy import special

from physics import specfun
from physics.errors import DomainError, GammaPoleError, MLDomainError
from scenarios.specfun_table import ml_series_oracle


# ---------------- Gamma ----------------
def test_gamma_recurrence():
    for x in np.linspace(0.1, 20.0, 60):
        lhs = specfun.gamma_fn(x + 1.0)
        rhs = x * specfun.gamma_fn(x)
        assert abs(lhs - rhs) <= 1e-12 * abs(rhs)


@pytest.mark.parametrize("x", [0.5, 1.0, 2.5, 7.25, 17.0, 29.9, -0.5, -3.7, -12.25, 1 + 2j, -1.5 + 0.5j])
def test_gamma_matches_mpmath(x):
    ref = complex(mpmath.gamma(x))
    assert abs(specfun.gamma_fn(x) - ref) <= 1e-12 * abs(ref)


@pytest.mark.parametrize("x", [0, -1, -3, -10.0])
def test_gamma_poles_rejected(x):
    with pytest.raises(GammaPoleError):
        specfun.gamma_fn(x)


def test_effective_mass_half():
    # m_{1/2} = Gamma(3/2)^2
    assert abs(specfun.gamma_fn(1.5) ** 2 - math.pi / 4) <= 1e-14


# ---------------- Mittag-Leffler ----------------
def test_ml_at_zero_is_one():
    assert specfun.mittag_leffler(0.7, 1.0, 0) == 1.0


def test_ml_exponential_identity():
    for z in np.linspace(-10.0, 5.0, 100):
        ref = math.exp(z)
        assert abs(specfun.mittag_leffler(1.0, 1.0, z) - ref) <= 1e-10 * max(1.0, ref)


def test_ml_cosine_identity():
    for z in np.linspace(0.0, 7.0, 100):
        assert abs(specfun.mittag_leffler(2.0, 1.0, -z * z) - math.cos(z)) <= 1e-10


@pytest.mark.parametrize("z", [-1.0, -3.0, 0.5, -40.0])
def test_ml_half_is_scaled_erfc(z):
    # E_{1/2}(z) = exp(z^2) erfc(-z) = erfcx(-z)
    ref = special.erfcx(-z)
    assert abs(specfun.mittag_leffler(0.5, 1.0, z) - ref) <= 1e-10 * max(1.0, abs(ref))


@pytest.mark.parametrize("nu,beta", [(0.5, 1.0), (0.8, 1.0), (0.8, 0.7), (1.5, 1.0), (1.5, 2.0)])
def test_ml_matches_bigfloat_series(nu, beta):
    for z in (-20.0, -5.0, -1.0, 0.3, 2.0, 6.0):
        ref = ml_series_oracle(nu, beta, z)
        if ref is None:
            continue
        assert abs(specfun.mittag_leffler(nu, beta, z) - ref) <= 1e-10 * max(1.0, abs(ref))


def test_ml_imaginary_argument_beta_one_is_bounded():
    # E_beta(i x) oscillates; for beta = 1 it is a pure phase
    for x in (0.5, 3.0, 20.0):
        assert abs(abs(specfun.mittag_leffler(1.0, 1.0, 1j * x)) - 1.0) <= 1e-10


def test_ml_array_matches_scalar():
    z = np.array([[-2.0, 0.0], [1j, 3.0 - 1j]])
    out = specfun.mittag_leffler_array(0.9, 1.0, z)
    assert out.shape == z.shape
    assert out[1, 0] == specfun.mittag_leffler(0.9, 1.0, 1j)


def test_ml_domain_guards():
    with pytest.raises(MLDomainError):
        specfun.mittag_leffler(0.8, 1.0, 60.0)
    with pytest.raises(MLDomainError):
        specfun.mittag_leffler(0.2, 1.0, 1.0)
    with pytest.raises(DomainError):
        specfun.mittag_leffler(0.8, -1.0, 1.0)


def test_ml_overflow_at_domain_corner_is_rejected():
    # e^{50^{1/0.3}} is far beyond double range
    with pytest.raises(MLDomainError) as exc:
        specfun.mittag_leffler(0.3, 1.0, 50.0)
    assert exc.value.exit_code == 2
    decayed = specfun.mittag_leffler(0.3, 1.0, -50.0)
    assert np.isfinite(decayed)
    assert decayed.real == pytest.approx(1.0 / (50.0 * math.gamma(0.7)), rel=0.02)


def test_fox_h_identity_cases():
    for z in (0.0, 0.7, -2.0, 1.5 + 0.5j):
        assert abs(specfun.fox_h_identity(z) - cmath.exp(-z)) <= 1e-12 * max(1.0, abs(cmath.exp(-z)))
        ml = specfun.mittag_leffler(0.8, 1.2, z)
        assert abs(specfun.fox_h_identity(z, 0.8, 1.2) - ml) <= 1e-10 * max(1.0, abs(ml))
    with pytest.raises(DomainError):
        specfun.fox_h_identity(20.0)


# ---------------- Airy ----------------
def test_airy_at_zero():
    ref = 3.0 ** (-2.0 / 3.0) / math.gamma(2.0 / 3.0)
    assert abs(specfun.airy_ai(0.0) - ref) <= 1e-12


def test_airy_matches_mpmath_across_range():
    for x in np.linspace(-20.0, 10.0, 121):
        assert abs(specfun.airy_ai(x) - float(mpmath.airyai(x))) <= 1e-10


def test_airy_decays_monotonically_for_positive_x():
    values = specfun.airy_ai_array(np.linspace(0.0, 10.0, 50))
    assert np.all(np.diff(values) < 0)
    assert abs(specfun.airy_ai(5.0) - float(mpmath.airyai(5))) <= 1e-8 * float(mpmath.airyai(5))


def test_airy_first_zeros():
    zeros = specfun.airy_zeros(3)
    assert abs(zeros[0] - (-2.338107410459767)) <= 1e-10
    for k, z in enumerate(zeros, 1):
        assert abs(z - float(mpmath.airyaizero(k))) <= 1e-10


@pytest.mark.parametrize("x", [-20.5, 10.5])
def test_airy_outside_supported_range(x):
    with pytest.raises(DomainError):
        specfun.airy_ai(x)


# ---------------- Oscillatory kernel ----------------
def _fresnel(x, tau, c):
    ct = c * tau
    return cmath.exp(-x * x / (4.0 * ct)) / (2.0 * cmath.sqrt(math.pi * ct))


@pytest.mark.parametrize("tau", [0.1, 1.0, 10.0])
@pytest.mark.parametrize("x", [0.0, 1.0, 3.0, 10.0])
def test_kernel_alpha_two_is_fresnel(tau, x):
    value = specfun.frac_free_kernel(x, tau, 2.0, 0.5j, regulator=0.0)
    assert abs(value - _fresnel(x, tau, 0.5j)) <= 1e-8


def test_kernel_alpha_one_is_lorentzian():
    c = 0.5j + 1e-6
    for x in (0.0, 0.4, 2.0):
        ref = c / (math.pi * (c * c + x * x))
        assert abs(specfun.frac_free_kernel(x, 1.0, 1.0, 0.5j) - ref) <= 1e-12


def test_kernel_diffusive_case_matches_heat_kernel():
    # coeff real: ordinary heat kernel at alpha = 2
    for x in (0.0, 0.5, 2.0):
        ref = math.exp(-x * x / 4.0) / (2.0 * math.sqrt(math.pi))
        assert abs(specfun.frac_free_kernel(x, 1.0, 2.0, 1.0, regulator=0.0) - ref) <= 1e-9


def test_kernel_even_and_conjugate_symmetric():
    k_pos = specfun.frac_free_kernel(0.7, 1.0, 1.5, 0.5j)
    assert specfun.frac_free_kernel(-0.7, 1.0, 1.5, 0.5j) == k_pos
    k_conj = specfun.frac_free_kernel(0.7, 1.0, 1.5, -0.5j)
    assert abs(k_conj - k_pos.conjugate()) <= 1e-12


def test_kernel_converges_as_regulator_shrinks():
    ref = specfun.frac_free_kernel(0.5, 1.0, 1.5, 0.5j, regulator=1e-7)
    errors = [abs(specfun.frac_free_kernel(0.5, 1.0, 1.5, 0.5j, regulator=eps) - ref)
              for eps in (1e-3, 1e-4, 1e-5)]
    assert errors[0] > errors[1] > errors[2]
    assert errors[2] < 1e-4


def test_kernel_small_tau_is_delta_sequence():
    width = 1e-2
    peak = specfun.frac_free_kernel(0.0, 0.0, 1.5, 0.5j, delta_width=width)
    assert abs(peak - 1.0 / (width * math.sqrt(2.0 * math.pi))) <= 1e-9


def test_kernel_rejects_negative_real_part():
    with pytest.raises(DomainError):
        specfun.frac_free_kernel(0.0, 1.0, 1.5, -1.0 + 0.5j)
