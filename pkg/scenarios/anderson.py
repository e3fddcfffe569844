# scenarios/anderson.py
from __future__ import annotations

import logging

import numpy as np

from physics.anderson import (
    OscillatorState,
    build_hamiltonian,
    compute_modes,
    evolve_oscillators,
    fit_msd_exponent,
    overlap_tensor,
    participation_ratios,
    random_potential,
)
from physics.errors import DomainError
from services import settings
from services.config import ScenarioConfig
from services.runner import RunContext, ScenarioRegistry

log = logging.getLogger(f"fracwave.{__name__}")

OSC_HEADER = ("t", "norm", "h_osc", "centroid", "msd")


def mode_window(centers: np.ndarray, at: float, size: int) -> np.ndarray:
    """The `size` modes localized closest to `at`, ascending by index (ties by index)."""
    order = np.lexsort((np.arange(centers.size), np.abs(centers - at)))
    return np.sort(order[:size])


def run_anderson(cfg: ScenarioConfig, ctx: RunContext) -> dict:
    params = cfg.params.to_params()
    grid = cfg.grid.to_grid()
    knobs, run = cfg.anderson, cfg.run

    pot = random_potential(grid, knobs.W, ctx.seeds["disorder"])
    modes = compute_modes(build_hamiltonian(grid, pot, params.alpha, params), grid)
    pr = participation_ratios(modes)
    ctx.csv("energies.csv", ("k", "energy", "center"),
            zip(range(modes.n_modes), modes.energies, modes.centers))
    ctx.csv("participation.csv", ("k", "participation"), zip(range(modes.n_modes), pr))

    window = mode_window(modes.centers, knobs.excite_at, knobs.window_size)
    A = overlap_tensor(modes, knobs.cutoff, window=window, budget=settings.TENSOR_BUDGET,
                       workers=knobs.threads)
    C0 = np.zeros(window.size, dtype=complex)
    C0[int(np.argmin(np.abs(modes.centers[window] - knobs.excite_at)))] = knobs.amplitude
    _, report = evolve_oscillators(OscillatorState(C0), modes, A, params.B, run.t_final, run.dt,
                                   run.record_every)
    h_osc = report.extras["h_osc"]
    ctx.csv("oscillators.csv", OSC_HEADER,
            zip(report.times, report.norms, h_osc, report.centroids, report.msd))

    norm0 = report.norms[0]
    summary = {
        "window": [int(k) for k in window],
        "tensor_entries": A.nnz,
        "norm2_drift": float(np.max(np.abs(report.norms ** 2 - norm0 ** 2))),
        "h_osc_rel_drift": float(np.max(np.abs(h_osc - h_osc[0])) / max(abs(h_osc[0]), 1e-300)),
        "mean_participation": float(np.mean(pr)),
        "msd_fit": None,
    }
    lo = knobs.fit_start if knobs.fit_start is not None else 0.1 * run.t_final
    hi = knobs.fit_stop if knobs.fit_stop is not None else run.t_final
    try:
        fit = fit_msd_exponent(report, (lo, hi))
        summary["msd_fit"] = {"exponent": fit.exponent, "stderr": fit.stderr, "n": fit.n}
    except DomainError as e:
        log.info("anderson: MSD fit skipped: %s", e)
    ctx.summary(summary)
    return summary


def setup(registry: ScenarioRegistry) -> None:
    registry.add("anderson", run_anderson, "Nonlinear Anderson-mode oscillators with fractional hopping")
