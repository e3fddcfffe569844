# scenarios/ftse.py
from __future__ import annotations

import logging

import numpy as np

from physics.fracops import Grid1D
from physics.ftse import (
    FracGreenQuery,
    HamiltonianMatrix,
    caputo_l1_evolution,
    discretized_hamiltonian,
    frac_green,
    fractional_action_trajectory,
    green_normalization,
    ml_evolution,
)
from services import artifacts
from services.config import ScenarioConfig
from services.runner import RunContext, ScenarioRegistry

log = logging.getLogger(f"fracwave.{__name__}")


def _state_header(dim: int) -> tuple[str, ...]:
    cols = ["t", "norm"]
    for j in range(dim):
        cols += [f"re_{j}", f"im_{j}"]
    return tuple(cols)


def _state_rows(times, states):
    for t, psi in zip(times, states):
        row = [t, float(np.linalg.norm(psi))]
        for c in psi:
            row += [c.real, c.imag]
        yield row


def _system(cfg: ScenarioConfig) -> tuple[HamiltonianMatrix, np.ndarray]:
    knobs, params = cfg.ftse, cfg.params
    if knobs.matrix is not None:
        H = HamiltonianMatrix(artifacts.read_matrix(knobs.matrix))
        psi0 = np.zeros(H.dim, dtype=complex)
        psi0[0] = 1.0
        return H, psi0
    grid = Grid1D(-0.5 * knobs.length, 0.5 * knobs.length, knobs.dim)
    potential = (lambda x: 0.5 * x * x) if knobs.potential == "harmonic" else None
    H = discretized_hamiltonian(grid, params.beta, potential, params.hbar_ef)
    psi0 = np.exp(-0.5 * ((grid.x - knobs.center) / knobs.width) ** 2).astype(complex)
    return H, psi0 / np.linalg.norm(psi0)


def run_ftse(cfg: ScenarioConfig, ctx: RunContext) -> dict:
    knobs, run = cfg.ftse, cfg.run
    beta, hbar = cfg.params.beta, cfg.params.hbar_ef
    H, psi0 = _system(cfg)
    marks = list(range(0, run.steps + 1, run.record_every))
    if marks[-1] != run.steps:
        marks.append(run.steps)
    times = run.dt * np.asarray(marks, dtype=float)
    summary: dict = {"dim": H.dim, "beta": beta, "method": knobs.method}

    ml_states = None
    if knobs.method in ("ml", "both"):
        ml_states = np.array([ml_evolution(H, psi0, t, beta, hbar) for t in times])
        ctx.csv("ftse.csv", _state_header(H.dim), _state_rows(times, ml_states))
        norms = np.linalg.norm(ml_states, axis=1)
        summary["ml_norm_drift"] = float(np.max(np.abs(norms - norms[0])))
        half = ml_evolution(H, psi0, 0.5 * run.t_final, beta, hbar)
        twice = ml_evolution(H, half, 0.5 * run.t_final, beta, hbar)
        summary["semigroup_defect"] = float(np.max(np.abs(twice - ml_states[-1])))
    if knobs.method in ("l1", "both"):
        traj = caputo_l1_evolution(H, psi0, run.t_final, run.dt, beta, hbar)
        l1_states = traj.states[marks]
        name = "ftse.csv" if ml_states is None else "ftse_l1.csv"
        ctx.csv(name, _state_header(H.dim), _state_rows(times, l1_states))
        summary["l1_norm_final"] = float(np.linalg.norm(l1_states[-1]))
        if ml_states is not None:
            summary["l1_vs_ml_max_error"] = float(np.max(np.abs(l1_states - ml_states)))

    x = cfg.grid.to_grid().x
    green = np.array([frac_green(FracGreenQuery(xi, 0.0, run.t_final, beta, hbar)) for xi in x])
    ctx.csv("green.csv", ("x", "re", "im", "abs"), zip(x, green.real, green.imag, np.abs(green)))
    total = green_normalization(FracGreenQuery(0.0, 0.0, run.t_final, beta, hbar))
    summary["green_normalization_error"] = float(abs(total - 1.0))

    if knobs.trajectory:
        path = fractional_action_trajectory(knobs.q0, knobs.v0, knobs.trajectory_potential,
                                            cfg.params.nu, (knobs.t_start, run.t_final), run.dt)
        ctx.csv("trajectory.csv", ("t", "q", "v"), zip(path.times, path.q, path.v))
        summary["trajectory_final_q"] = float(path.q[-1])

    ctx.summary(summary)
    return summary


def setup(registry: ScenarioRegistry) -> None:
    registry.add("ftse", run_ftse, "Fractional-time evolution: Mittag-Leffler vs Caputo L1, Green's function")
