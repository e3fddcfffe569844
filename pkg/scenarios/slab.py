# scenarios/slab.py
from __future__ import annotations

import logging
import math

import numpy as np

from physics.beams import SlabConfig, gaussian_initial, paraxial_residual, slab_evolve, slab_grid
from services.config import ScenarioConfig
from services.runner import RunContext, ScenarioRegistry

log = logging.getLogger(f"fracwave.{__name__}")

SLAB_HEADER = ("z", "norm", "centroid", "msd", "peak", "paraxial_ratio")
MODES_HEADER = ("m", "eigenvalue", "abs_c0", "abs_c_final", "re_c_final", "im_c_final")


def _recorded_steps(steps: int, every: int) -> list[int]:
    marks = list(range(0, steps + 1, every))
    if marks[-1] != steps:
        marks.append(steps)
    return marks


def run_slab(cfg: ScenarioConfig, ctx: RunContext) -> dict:
    params = cfg.params.to_params()
    knobs = cfg.slab
    scfg = SlabConfig(knobs.L, knobs.k_carrier, knobs.omega, params.alpha, params.beta, knobs.n_modes)
    grid = slab_grid(knobs.L, cfg.grid.n)
    psi0 = gaussian_initial(grid, knobs.width, knobs.center)
    z = cfg.run.dt * np.asarray(_recorded_steps(cfg.run.steps, cfg.run.record_every), dtype=float)

    report = slab_evolve(psi0, scfg, z)
    stack = np.array([snap.values for _, snap in report.snapshots])
    ratio = np.full(z.size, math.nan)
    for i in range(1, z.size - 1):
        dz_left, dz_right = z[i] - z[i - 1], z[i + 1] - z[i]
        if math.isclose(dz_left, dz_right, rel_tol=1e-9):
            ratio[i] = paraxial_residual(stack[i - 1:i + 2], scfg.k_carrier, dz_left)

    ctx.csv("slab.csv", SLAB_HEADER,
            zip(report.times, report.norms, report.centroids, report.msd, report.peak_positions, ratio))
    amps = report.extras["amplitudes"]
    lam = report.extras["eigenvalues"]
    ctx.csv("modes.csv", MODES_HEADER,
            ((m + 1, lam[m], abs(amps[0, m]), abs(amps[-1, m]), amps[-1, m].real, amps[-1, m].imag)
             for m in range(scfg.n_modes)))

    finite = ratio[np.isfinite(ratio)]
    summary = {
        "paraxial_regime": scfg.paraxial_regime,
        "max_paraxial_ratio": float(finite.max()) if finite.size else None,
        "norm_initial": float(report.norms[0]),
        "norm_final": float(report.norms[-1]),
        "n_modes": scfg.n_modes,
        "beta": params.beta,
    }
    ctx.summary(summary)
    return summary


def setup(registry: ScenarioRegistry) -> None:
    registry.add("slab", run_slab, "Caputo-in-z slab waveguide on the sine basis")
