# services/runner.py
from __future__ import annotations

import hashlib
import importlib
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from physics.errors import DomainError, FracwaveError
from physics.fracops import WaveField
from services import artifacts, db, settings
from services.config import ScenarioConfig, load_config, serialize_config

__all__ = [
    "ScenarioRegistry",
    "RunContext",
    "ExitReport",
    "SEED_CONSUMERS",
    "seed_streams",
    "config_digest",
    "default_registry",
    "run_scenario",
    "run_sweep",
]

log = logging.getLogger(f"fracwave.{__name__}")

# Order is part of the reproducibility contract: appending is fine, reordering is not.
SEED_CONSUMERS = ("disorder", "sideband_phases", "initial_state")

ScenarioFn = Callable[[ScenarioConfig, "RunContext"], dict]


def seed_streams(seed: int) -> dict[str, np.random.SeedSequence]:
    children = np.random.SeedSequence(seed).spawn(len(SEED_CONSUMERS))
    return dict(zip(SEED_CONSUMERS, children))


# ---------------- Registry ----------------
class ScenarioRegistry:
    def __init__(self) -> None:
        self._scenarios: dict[str, tuple[ScenarioFn, str]] = {}

    def add(self, name: str, fn: ScenarioFn, help: str = "") -> None:
        if name in self._scenarios:
            raise DomainError(f"scenario {name!r} registered twice")
        self._scenarios[name] = (fn, help)

    def get(self, name: str) -> ScenarioFn:
        try:
            return self._scenarios[name][0]
        except KeyError:
            raise DomainError(f"scenario {name!r} is not loaded (FRACWAVE_SCENARIOS)") from None

    def help(self, name: str) -> str:
        return self._scenarios[name][1] if name in self._scenarios else ""

    def names(self) -> list[str]:
        return sorted(self._scenarios)

    def __contains__(self, name: str) -> bool:
        return name in self._scenarios


def _load_scenarios_safely(registry: ScenarioRegistry, modules: Iterable[str]) -> None:
    for ext in modules:
        try:
            importlib.import_module(ext).setup(registry)
            log.debug("Loaded scenario module: %s", ext)
        except Exception as e:
            log.error("Failed to load scenario module %s: %s", ext, e)


_DEFAULT: Optional[ScenarioRegistry] = None


def default_registry() -> ScenarioRegistry:
    global _DEFAULT
    if _DEFAULT is None:
        reg = ScenarioRegistry()
        _load_scenarios_safely(reg, settings.SCENARIOS)
        _DEFAULT = reg
    return _DEFAULT


# ---------------- Context / report ----------------
@dataclass
class RunContext:
    """What a scenario may touch: its output directory, formats and seed streams."""

    out_dir: Path
    formats: tuple[str, ...]
    seeds: dict[str, np.random.SeedSequence]
    outputs: list[str] = field(default_factory=list)

    def _track(self, path: Path) -> None:
        self.outputs.append(str(path))

    def csv(self, name: str, header: Sequence[str], rows) -> None:
        if "csv" in self.formats:
            self._track(artifacts.write_csv(self.out_dir / name, header, rows))

    def summary(self, data: dict, name: str = "summary.json") -> None:
        if "json" in self.formats:
            self._track(artifacts.write_summary(self.out_dir / name, data))

    def snapshot(self, name: str, field_: WaveField) -> None:
        if "snapshot" in self.formats:
            self._track(artifacts.write_snapshot(self.out_dir / name, field_))

    def rng(self, consumer: str) -> np.random.Generator:
        return np.random.default_rng(self.seeds[consumer])


@dataclass
class ExitReport:
    subcommand: str
    exit_code: int
    runtime_s: float
    output_dir: str
    outputs: list[str] = field(default_factory=list)
    headline: dict = field(default_factory=dict)
    config_sha256: str = ""
    error: Optional[str] = None
    run_id: Optional[int] = None

    def as_dict(self) -> dict:
        return {
            "subcommand": self.subcommand,
            "exit_code": self.exit_code,
            "runtime_s": self.runtime_s,
            "output_dir": self.output_dir,
            "outputs": list(self.outputs),
            "headline": self.headline,
            "config_sha256": self.config_sha256,
            "error": self.error,
            "run_id": self.run_id,
        }


def config_digest(cfg: ScenarioConfig) -> str:
    return hashlib.sha256(serialize_config(cfg).encode("utf-8")).hexdigest()


def _ledger(report: ExitReport, seed: int, ledger: Optional[bool]) -> None:
    if not (settings.LEDGER_ENABLED if ledger is None else ledger):
        return
    try:
        db.init()
        report.run_id = db.record_run(
            report.subcommand, report.config_sha256, seed,
            "ok" if report.exit_code == 0 else "error", report.exit_code,
            output_dir=report.output_dir, headline=report.headline, error=report.error,
            runtime_s=report.runtime_s,
        )
    except Exception as e:
        log.warning("Failed to record run in ledger %s: %s", db.DB_PATH, e)


# ---------------- Run ----------------
def run_scenario(cfg: ScenarioConfig, registry: Optional[ScenarioRegistry] = None, *,
                 ledger: Optional[bool] = None) -> ExitReport:
    """Dispatch a validated config. Module errors are logged with the scenario and re-raised."""
    if cfg.subcommand is None:
        raise DomainError("config does not name a subcommand")
    registry = registry or default_registry()
    fn = registry.get(cfg.subcommand)
    out_dir = Path(cfg.output.dir)
    ctx = RunContext(out_dir, cfg.output.formats, seed_streams(cfg.run.seed))
    report = ExitReport(cfg.subcommand, 0, 0.0, str(out_dir), config_sha256=config_digest(cfg))

    log.info("Running %s -> %s (seed=%d)", cfg.subcommand, out_dir, cfg.run.seed)
    started = time.perf_counter()
    try:
        report.headline = fn(cfg, ctx) or {}
    except FracwaveError as e:
        report.exit_code, report.error = e.exit_code, str(e)
        log.error("Scenario %s failed (exit %d): %s", cfg.subcommand, e.exit_code, e)
        raise
    except Exception as e:
        report.exit_code, report.error = 3, f"{type(e).__name__}: {e}"
        log.exception("Scenario %s crashed", cfg.subcommand)
        raise
    finally:
        report.runtime_s = time.perf_counter() - started
        report.outputs = list(ctx.outputs)
        _ledger(report, cfg.run.seed, ledger)
    log.info("Finished %s in %.2fs: %s", cfg.subcommand, report.runtime_s, report.headline)
    return report


def _sweep_one(path: str) -> ExitReport:
    try:
        cfg = load_config(path)
    except FracwaveError as e:
        return ExitReport("?", e.exit_code, 0.0, "", error=f"{path}: {e}")
    try:
        return run_scenario(cfg)
    except FracwaveError as e:
        return ExitReport(cfg.subcommand or "?", e.exit_code, 0.0, cfg.output.dir, error=str(e))
    except Exception as e:
        return ExitReport(cfg.subcommand or "?", 3, 0.0, cfg.output.dir, error=f"{type(e).__name__}: {e}")


def run_sweep(paths: Sequence[str], workers: Optional[int] = None) -> list[ExitReport]:
    """Independent configs across a process pool; results come back in input order."""
    workers = workers or settings.WORKERS
    dirs: dict[str, str] = {}
    for p in paths:
        cfg = load_config(p)
        if cfg.subcommand is None:
            raise DomainError(f"{p}: sweep configs must set [scenario] subcommand")
        key = str(Path(cfg.output.dir).resolve())
        if key in dirs:
            raise DomainError(f"{p} and {dirs[key]} write to the same directory {cfg.output.dir}")
        dirs[key] = p
    log.info("Sweep: %d configs on %d workers", len(paths), workers)
    if workers <= 1:
        return [_sweep_one(p) for p in paths]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_sweep_one, paths))
