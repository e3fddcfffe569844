# scenarios/specfun_table.py
from __future__ import annotations

import cmath
import logging
import math
from typing import Optional

import mpmath

from physics import specfun
from services.config import ScenarioConfig, SpecfunSection
from services.runner import RunContext, ScenarioRegistry

log = logging.getLogger(f"fracwave.{__name__}")

TABLE_HEADER = ("input", "value_re", "value_im", "oracle_re", "oracle_im", "abs_err")

# r = |z|^{1/nu} above which the plain big-float series is too long to serve as an oracle
ORACLE_SERIES_RADIUS = 150.0


def ml_series_oracle(nu: float, beta: float, z: float) -> Optional[complex]:
    """sum z^k / Gamma(nu k + beta) in mpmath, sized from the peak term."""
    r = abs(z) ** (1.0 / nu) if z else 0.0
    if r > ORACLE_SERIES_RADIUS:
        return None
    dps = 30 + int(0.4343 * r)
    with mpmath.workdps(dps):
        zz = mpmath.mpf(z)
        acc = mpmath.mpf(0)
        tiny = mpmath.mpf(10) ** -(dps - 5)
        for k in range(20_000):
            term = zz ** k * mpmath.rgamma(nu * k + beta)
            acc += term
            if k > r + 10 and abs(term) <= tiny * max(abs(acc), 1):
                break
        return complex(acc)


def kernel_closed_form(x: float, knobs: SpecfunSection) -> Optional[complex]:
    """alpha = 1 (Lorentzian) and alpha = 2 (complex Gaussian); None otherwise."""
    c = complex(knobs.kernel_coeff_re, knobs.kernel_coeff_im) + knobs.regulator
    ct = c * knobs.kernel_tau
    if knobs.kernel_tau <= specfun.TAU_FLOOR or ct == 0:
        return None
    if knobs.kernel_alpha == 2.0:
        return cmath.exp(-x * x / (4.0 * ct)) / (2.0 * cmath.sqrt(math.pi * ct))
    if knobs.kernel_alpha == 1.0:
        return ct / (math.pi * (ct * ct + x * x))
    return None


def _evaluate(knobs: SpecfunSection, x: float) -> tuple[complex, Optional[complex]]:
    fn = knobs.function
    if fn == "gamma":
        return specfun.gamma_fn(x), complex(mpmath.gamma(x))
    if fn == "mittag_leffler":
        return specfun.mittag_leffler(knobs.ml_nu, knobs.ml_beta, x), ml_series_oracle(knobs.ml_nu, knobs.ml_beta, x)
    if fn == "airy":
        return complex(specfun.airy_ai(x)), complex(mpmath.airyai(x))
    coeff = complex(knobs.kernel_coeff_re, knobs.kernel_coeff_im)
    value = specfun.frac_free_kernel(x, knobs.kernel_tau, knobs.kernel_alpha, coeff, regulator=knobs.regulator)
    return value, kernel_closed_form(x, knobs)


def run_specfun_table(cfg: ScenarioConfig, ctx: RunContext) -> dict:
    knobs = cfg.specfun
    rows, worst, checked = [], 0.0, 0
    for x in knobs.inputs():
        value, oracle = _evaluate(knobs, x)
        if oracle is None:
            rows.append((x, value.real, value.imag, math.nan, math.nan, math.nan))
            continue
        err = abs(value - oracle)
        worst, checked = max(worst, err), checked + 1
        rows.append((x, value.real, value.imag, oracle.real, oracle.imag, err))
    ctx.csv("table.csv", TABLE_HEADER, rows)
    summary = {"function": knobs.function, "points": len(rows), "checked": checked, "max_abs_err": worst}
    ctx.summary(summary)
    return summary


def setup(registry: ScenarioRegistry) -> None:
    registry.add("specfun-table", run_specfun_table, "Tabulate a special function against its oracle")
