# services/config.py
"""Scenario configuration: INI text -> validated ScenarioConfig, and back.

Every section and key has a default; a minimal file can be a single `[params]` line.

    [scenario]  subcommand = beam | slab | sne | ftse | anderson | specfun-table
    [params]    alpha = 2.0, beta = 1.0, nu = 0.5, hbar_ef = 1.0, mass = 1.0, B = 0.0, G = 0.0
    [grid]      x_min = -20.0, x_max = 20.0, n = 512
    [profile]   metric_kind = constant, metric_value = 1.0, metric_table =
    [run]       t_final = 1.0, dt = 0.001, record_every = 1, seed = 0
    [output]    dir = out, formats = csv, json

plus the section named after the subcommand (see the *Section models below).
"""
from __future__ import annotations

import configparser
import logging
import math
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, ValidationError, field_validator, model_validator

from physics import specfun
from physics.beams import MetricProfile
from physics.errors import ArtifactError, DomainError
from physics.fracops import FracParams, Grid1D
from services import artifacts, settings

__all__ = [
    "ConfigError",
    "ScenarioConfig",
    "ParamsSection",
    "GridSection",
    "ProfileSection",
    "RunSection",
    "OutputSection",
    "BeamSection",
    "SlabSection",
    "SneSection",
    "FtseSection",
    "AndersonSection",
    "SpecfunSection",
    "SUBCOMMANDS",
    "parse_config",
    "serialize_config",
    "load_config",
]

log = logging.getLogger(f"fracwave.{__name__}")

Subcommand = Literal["beam", "slab", "sne", "ftse", "anderson", "specfun-table"]
SUBCOMMANDS: tuple[str, ...] = ("beam", "slab", "sne", "ftse", "anderson", "specfun-table")
SCENARIO_SECTION = {
    "beam": "beam",
    "slab": "slab",
    "sne": "sne",
    "ftse": "ftse",
    "anderson": "anderson",
    "specfun-table": "specfun",
}
CORE_SECTIONS = ("scenario", "params", "grid", "profile", "run", "output")
OUTPUT_FORMATS = ("csv", "json", "snapshot")


class ConfigError(DomainError):
    """Collects every offending key of a config; exit code 2."""

    def __init__(self, messages: list[str]) -> None:
        self.messages = list(messages)
        super().__init__("; ".join(self.messages) if self.messages else "invalid config")


# ---------------- Helpers ----------------
def _interval(name: str, v: float, lo: float, hi: float, *, lo_open: bool = True, hi_open: bool = False) -> float:
    lo_ok = v > lo if lo_open else v >= lo
    hi_ok = v < hi if hi_open else v <= hi
    if not (math.isfinite(v) and lo_ok and hi_ok):
        left = "(" if lo_open else "["
        right = ")" if hi_open else "]"
        raise ValueError(f"{name} must lie in {left}{lo:g},{hi:g}{right}")
    return v


def _positive(name: str, v: float) -> float:
    if not (math.isfinite(v) and v > 0):
        raise ValueError(f"{name} must be > 0")
    return v


def _none_if_blank(v):
    if isinstance(v, str) and not v.strip():
        return None
    return v


def _is_power_of_two(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


# ---------------- Core sections ----------------
class ScenarioSection(_Section):
    subcommand: Optional[Subcommand] = None

    @field_validator("subcommand", mode="before")
    @classmethod
    def blank_to_none(cls, v):
        return _none_if_blank(v)


class ParamsSection(_Section):
    alpha: float = 2.0
    beta: float = 1.0
    nu: float = 0.5
    hbar_ef: float = 1.0
    mass: float = 1.0
    B: float = 0.0
    G: float = 0.0

    @field_validator("alpha")
    @classmethod
    def check_alpha(cls, v: float) -> float:
        return _interval("alpha", v, 0.0, 2.0)

    @field_validator("beta")
    @classmethod
    def check_beta(cls, v: float) -> float:
        return _interval("beta", v, 0.0, 1.0)

    @field_validator("nu")
    @classmethod
    def check_nu(cls, v: float) -> float:
        return _interval("nu", v, 0.0, 1.0, hi_open=True)

    @field_validator("hbar_ef", "mass")
    @classmethod
    def check_pos(cls, v: float, info) -> float:
        return _positive(info.field_name, v)

    @field_validator("B")
    @classmethod
    def check_finite(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("B must be finite")
        return v

    @field_validator("G")
    @classmethod
    def check_gravity(cls, v: float) -> float:
        if not (math.isfinite(v) and v >= 0):
            raise ValueError("G must be >= 0")
        return v

    def to_params(self) -> FracParams:
        return FracParams(**self.model_dump())


class GridSection(_Section):
    x_min: float = -20.0
    x_max: float = 20.0
    n: int = 512

    @field_validator("n")
    @classmethod
    def check_n(cls, v: int) -> int:
        if v < 8 or not _is_power_of_two(v):
            raise ValueError("n must be a power of two >= 8")
        return v

    @model_validator(mode="after")
    def check_extent(self) -> "GridSection":
        if not (math.isfinite(self.x_min) and math.isfinite(self.x_max) and self.x_max > self.x_min):
            raise ValueError("x_max must exceed x_min")
        return self

    def to_grid(self) -> Grid1D:
        return Grid1D(self.x_min, self.x_max, self.n)


class ProfileSection(_Section):
    metric_kind: Literal["constant", "power", "tabulated"] = "constant"
    metric_value: float = 1.0
    metric_table: Optional[str] = None

    @field_validator("metric_table", mode="before")
    @classmethod
    def blank_to_none(cls, v):
        return _none_if_blank(v)

    @model_validator(mode="after")
    def check_kind(self) -> "ProfileSection":
        if self.metric_kind == "constant" and not self.metric_value > 0:
            raise ValueError("metric_value must be > 0 for a constant metric")
        if self.metric_kind == "power" and not self.metric_value < 1:
            raise ValueError("metric power must be < 1 (int_0^t dt'/t'^p diverges for p >= 1)")
        if self.metric_kind == "tabulated" and self.metric_table is None:
            raise ValueError("metric_table is required for metric_kind = tabulated")
        return self

    def to_profile(self, hbar_ef: float) -> MetricProfile:
        if self.metric_kind == "tabulated":
            table = artifacts.read_table(self.metric_table, 2)
            return MetricProfile.from_table(table[:, 0], table[:, 1], hbar_ef)
        return MetricProfile(self.metric_kind, self.metric_value, hbar_ef)


class RunSection(_Section):
    t_final: float = 1.0
    dt: float = 1e-3
    record_every: int = 1
    seed: int = 0

    @field_validator("t_final", "dt")
    @classmethod
    def check_pos(cls, v: float, info) -> float:
        return _positive(info.field_name, v)

    @field_validator("record_every")
    @classmethod
    def check_every(cls, v: int) -> int:
        if v < 1:
            raise ValueError("record_every must be >= 1")
        return v

    @field_validator("seed")
    @classmethod
    def check_seed(cls, v: int) -> int:
        if not 0 <= v < 2 ** 64:
            raise ValueError("seed must lie in [0, 2^64)")
        return v

    @model_validator(mode="after")
    def check_steps(self) -> "RunSection":
        if self.dt > self.t_final:
            raise ValueError("dt must be <= t_final")
        if abs(self.steps * self.dt - self.t_final) > 1e-9 * self.t_final:
            raise ValueError("t_final must be an integral number of dt steps")
        return self

    @property
    def steps(self) -> int:
        return int(round(self.t_final / self.dt))


class OutputSection(_Section):
    dir: str = "out"
    formats: tuple[str, ...] = ("csv", "json")

    @field_validator("formats", mode="before")
    @classmethod
    def check_split(cls, v):
        if isinstance(v, str):
            return tuple(settings.split_list(v))
        return v

    @field_validator("formats")
    @classmethod
    def check_known(cls, v: tuple[str, ...]) -> tuple[str, ...]:
        bad = [f for f in v if f not in OUTPUT_FORMATS]
        if bad:
            raise ValueError(f"unknown formats {bad}; choose from {list(OUTPUT_FORMATS)}")
        if not v:
            raise ValueError("formats must name at least one of csv, json, snapshot")
        return v


# ---------------- Scenario sections ----------------
class BeamSection(_Section):
    initial: Literal["airy", "gaussian"] = "airy"
    airy_a: float = 1.0
    taper: float = 0.15
    width: float = 1.0
    center: float = 0.0
    carrier: float = 0.0

    @field_validator("airy_a", "width")
    @classmethod
    def check_pos(cls, v: float, info) -> float:
        return _positive(info.field_name, v)

    @field_validator("taper")
    @classmethod
    def check_taper(cls, v: float) -> float:
        return _interval("taper", v, 0.0, 1.0, lo_open=False, hi_open=True)


class SlabSection(_Section):
    L: float = 10.0
    k_carrier: float = 0.5
    omega: float = 0.0
    n_modes: int = 16
    width: float = 1.0
    center: float = 0.0

    @field_validator("L", "k_carrier", "width")
    @classmethod
    def check_pos(cls, v: float, info) -> float:
        return _positive(info.field_name, v)

    @field_validator("n_modes")
    @classmethod
    def check_modes(cls, v: int) -> int:
        if v < 4:
            raise ValueError("n_modes must be >= 4")
        return v


class SneSection(_Section):
    experiment: Literal["decay", "single"] = "decay"
    q: float = 3.0
    p: float = 1.0
    a_q: float = 1.0
    a_q_phase: float = 0.0
    epsilon_seed: float = 1e-5
    gravity_form: Literal["density", "mode"] = "density"
    require_growth: bool = True
    random_phase: bool = False

    @field_validator("a_q", "epsilon_seed")
    @classmethod
    def check_pos(cls, v: float, info) -> float:
        return _positive(info.field_name, v)

    @model_validator(mode="after")
    def check_triplet(self) -> "SneSection":
        if self.q == 0:
            raise ValueError("pump wavenumber q must be non-zero")
        if not 0 < self.p < abs(self.q):
            raise ValueError("sideband offset p must lie in (0,|q|)")
        if self.epsilon_seed > 1e-4 * self.a_q:
            raise ValueError("epsilon_seed must be <= 1e-4 * a_q")
        return self


class FtseSection(_Section):
    matrix: Optional[str] = None
    dim: int = 16
    length: float = 8.0
    potential: Literal["free", "harmonic"] = "harmonic"
    width: float = 1.0
    center: float = 0.0
    method: Literal["ml", "l1", "both"] = "both"
    trajectory: bool = False
    trajectory_potential: Literal["free", "harmonic", "quartic"] = "harmonic"
    q0: float = 1.0
    v0: float = 0.0
    t_start: float = 0.1

    @field_validator("matrix", mode="before")
    @classmethod
    def blank_to_none(cls, v):
        return _none_if_blank(v)

    @field_validator("dim")
    @classmethod
    def check_dim(cls, v: int) -> int:
        if v < 8 or not _is_power_of_two(v):
            raise ValueError("dim must be a power of two >= 8")
        return v

    @field_validator("length", "width")
    @classmethod
    def check_pos(cls, v: float, info) -> float:
        return _positive(info.field_name, v)

    @field_validator("t_start")
    @classmethod
    def check_start(cls, v: float) -> float:
        if not v > 0:
            raise ValueError("t_start must be > 0 (the action trajectory is singular at t = 0)")
        return v


class AndersonSection(_Section):
    W: float = 1.0
    window_size: int = 16
    cutoff: float = 1e-8
    amplitude: float = 1.0
    excite_at: float = 0.0
    fit_start: Optional[float] = None
    fit_stop: Optional[float] = None
    threads: int = 1

    @field_validator("fit_start", "fit_stop", mode="before")
    @classmethod
    def blank_to_none(cls, v):
        return _none_if_blank(v)

    @field_validator("W", "cutoff")
    @classmethod
    def check_nonneg(cls, v: float, info) -> float:
        if not (math.isfinite(v) and v >= 0):
            raise ValueError(f"{info.field_name} must be >= 0")
        return v

    @field_validator("window_size", "threads")
    @classmethod
    def check_count(cls, v: int, info) -> int:
        if v < 1:
            raise ValueError(f"{info.field_name} must be >= 1")
        return v

    @field_validator("amplitude")
    @classmethod
    def check_amp(cls, v: float) -> float:
        return _positive("amplitude", v)


class SpecfunSection(_Section):
    function: Literal["gamma", "mittag_leffler", "airy", "kernel"] = "gamma"
    start: float = 0.5
    stop: float = 5.0
    count: int = 10
    ml_nu: float = 1.0
    ml_beta: float = 1.0
    kernel_tau: float = 1.0
    kernel_alpha: float = 2.0
    kernel_coeff_re: float = 0.0
    kernel_coeff_im: float = 0.5
    regulator: float = settings.KERNEL_EPS

    @field_validator("count")
    @classmethod
    def check_count(cls, v: int) -> int:
        if v < 1:
            raise ValueError("count must be >= 1")
        return v

    @field_validator("ml_nu")
    @classmethod
    def check_nu(cls, v: float) -> float:
        return _interval("ml_nu", v, specfun.ML_NU_MIN, specfun.ML_NU_MAX, lo_open=False)

    @field_validator("ml_beta")
    @classmethod
    def check_beta(cls, v: float) -> float:
        return _positive("ml_beta", v)

    @field_validator("kernel_alpha")
    @classmethod
    def check_alpha(cls, v: float) -> float:
        return _interval("kernel_alpha", v, 0.0, 2.0)

    @field_validator("kernel_tau", "regulator")
    @classmethod
    def check_nonneg(cls, v: float, info) -> float:
        if not (math.isfinite(v) and v >= 0):
            raise ValueError(f"{info.field_name} must be >= 0")
        return v

    @model_validator(mode="after")
    def check_domain(self) -> "SpecfunSection":
        lo, hi = min(self.start, self.stop), max(self.start, self.stop)
        if self.function == "mittag_leffler" and max(abs(lo), abs(hi)) > specfun.ML_MAX_ABS_Z:
            raise ValueError(f"Mittag-Leffler inputs must satisfy |z| <= {specfun.ML_MAX_ABS_Z:g}")
        if self.function == "airy" and (lo < specfun.AIRY_MIN or hi > specfun.AIRY_MAX):
            raise ValueError(f"Airy inputs must lie in [{specfun.AIRY_MIN:g},{specfun.AIRY_MAX:g}]")
        if self.function == "kernel" and self.kernel_coeff_re + self.regulator < 0:
            raise ValueError("kernel_coeff_re + regulator must be >= 0")
        return self

    def inputs(self) -> list[float]:
        if self.count == 1:
            return [self.start]
        step = (self.stop - self.start) / (self.count - 1)
        return [self.start + i * step for i in range(self.count)]


SECTION_MODELS: dict[str, type[_Section]] = {
    "scenario": ScenarioSection,
    "params": ParamsSection,
    "grid": GridSection,
    "profile": ProfileSection,
    "run": RunSection,
    "output": OutputSection,
    "beam": BeamSection,
    "slab": SlabSection,
    "sne": SneSection,
    "ftse": FtseSection,
    "anderson": AndersonSection,
    "specfun": SpecfunSection,
}


# ---------------- ScenarioConfig ----------------
class ScenarioConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    subcommand: Optional[Subcommand] = None
    params: ParamsSection = ParamsSection()
    grid: GridSection = GridSection()
    profile: ProfileSection = ProfileSection()
    run: RunSection = RunSection()
    output: OutputSection = OutputSection()
    beam: Optional[BeamSection] = None
    slab: Optional[SlabSection] = None
    sne: Optional[SneSection] = None
    ftse: Optional[FtseSection] = None
    anderson: Optional[AndersonSection] = None
    specfun: Optional[SpecfunSection] = None

    @property
    def scenario(self):
        """The knobs section of the resolved subcommand."""
        if self.subcommand is None:
            return None
        return getattr(self, SCENARIO_SECTION[self.subcommand])


def _format_errors(section: str, exc: ValidationError) -> list[str]:
    out = []
    for err in exc.errors():
        loc = ".".join(str(p) for p in err["loc"])
        if err["type"] == "extra_forbidden":
            msg = "unknown key"
        else:
            msg = err["msg"].removeprefix("Value error, ")
        out.append(f"[{section}] {loc}: {msg}" if loc else f"[{section}] {msg}")
    return out


def _cross_checks(cfg: ScenarioConfig) -> list[str]:
    """Preconditions that involve more than one section."""
    problems: list[str] = []
    p, g, run = cfg.params, cfg.grid, cfg.run
    sub = cfg.subcommand

    if sub == "beam" and cfg.beam.initial == "airy":
        lowest = cfg.beam.airy_a * g.x_min / p.hbar_ef ** (2.0 / 3.0)
        if lowest < specfun.AIRY_MIN:
            problems.append(
                f"[beam] airy_a: Ai argument at x_min is {lowest:.4g}, must be >= {specfun.AIRY_MIN:g}"
            )
    if sub == "slab":
        s = cfg.slab
        if s.n_modes > g.n - 1:
            problems.append(f"[slab] n_modes: at most {g.n - 1} modes fit on n={g.n}")
        lam_max = (s.n_modes * math.pi / (2.0 * s.L)) ** p.alpha
        rate = max(abs(lam_max - s.omega), abs((math.pi / (2.0 * s.L)) ** p.alpha - s.omega))
        z_arg = rate / (2.0 * s.k_carrier) * run.t_final ** p.beta
        if p.beta != 1.0 and z_arg > specfun.ML_MAX_ABS_Z:
            problems.append(
                f"[slab] Mittag-Leffler argument reaches |z|={z_arg:.4g} > {specfun.ML_MAX_ABS_Z:g}; "
                "reduce n_modes, t_final or raise k_carrier"
            )
        if p.beta < specfun.ML_NU_MIN:
            problems.append(f"[params] beta: slab evolution needs beta >= {specfun.ML_NU_MIN:g}")
    if sub == "ftse":
        f = cfg.ftse
        if f.method in ("ml", "both") and p.beta < specfun.ML_NU_MIN:
            problems.append(f"[params] beta: Mittag-Leffler evolution needs beta >= {specfun.ML_NU_MIN:g}")
        if f.matrix is None and f.method in ("ml", "both"):
            dx = f.length / f.dim
            m_beta = math.gamma(p.beta + 1.0) ** 2
            hop = p.hbar_ef ** 2 / (2.0 * m_beta * dx * dx)
            v_max = 0.5 * (0.5 * f.length) ** 2 if f.potential == "harmonic" else 0.0
            z_arg = (4.0 * hop + v_max) * run.t_final ** p.beta / p.hbar_ef
            if z_arg > specfun.ML_MAX_ABS_Z:
                problems.append(
                    f"[ftse] Mittag-Leffler argument may reach |z|={z_arg:.4g} > {specfun.ML_MAX_ABS_Z:g}; "
                    "coarsen dim or shorten t_final"
                )
        if f.trajectory and f.t_start >= run.t_final:
            problems.append("[ftse] t_start must be < [run] t_final")
        elif f.trajectory:
            span = (run.t_final - f.t_start) / run.dt
            if abs(span - round(span)) > 1e-9 * span:
                problems.append("[ftse] t_final - t_start must be an integral number of dt steps")
    if sub == "anderson":
        a = cfg.anderson
        if g.n > settings.DENSE_MAX_N:
            problems.append(f"[grid] n: dense eigensolve supports n <= {settings.DENSE_MAX_N}, got {g.n}")
        if a.window_size > g.n:
            problems.append(f"[anderson] window_size: at most n={g.n} modes exist")
        if a.window_size ** 4 > settings.TENSOR_BUDGET:
            problems.append(
                f"[anderson] window_size: {a.window_size}^4 overlap entries exceed the budget "
                f"{settings.TENSOR_BUDGET}"
            )
        lo = a.fit_start if a.fit_start is not None else 0.1 * run.t_final
        hi = a.fit_stop if a.fit_stop is not None else run.t_final
        if not 0 < lo < hi <= run.t_final:
            problems.append("[anderson] fit window must satisfy 0 < fit_start < fit_stop <= t_final")
    return problems


# ---------------- Parse / serialize ----------------
def parse_config(text: str, subcommand: Optional[str] = None) -> ScenarioConfig:
    """Strict parse. Raises ConfigError naming every offending key."""
    parser = configparser.ConfigParser(strict=True, interpolation=None, default_section="\x00defaults")
    parser.optionxform = str  # keep B and G
    try:
        parser.read_string(text, source="<config>")
    except configparser.Error as exc:
        raise ConfigError([str(exc).replace("\n", " ")]) from exc

    errors: list[str] = []
    for name in parser.sections():
        if name not in SECTION_MODELS:
            errors.append(f"[{name}] unknown section")

    sections: dict[str, _Section] = {}
    for name, model in SECTION_MODELS.items():
        if not parser.has_section(name):
            continue
        try:
            sections[name] = model(**dict(parser.items(name)))
        except ValidationError as exc:
            errors.extend(_format_errors(name, exc))

    declared = sections["scenario"].subcommand if "scenario" in sections else None
    if subcommand is not None and subcommand not in SUBCOMMANDS:
        errors.append(f"unknown subcommand {subcommand!r}")
    if declared and subcommand and declared != subcommand:
        errors.append(f"[scenario] subcommand: config declares {declared!r}, invoked as {subcommand!r}")
    resolved = subcommand or declared

    if resolved in SCENARIO_SECTION:
        for other_sub, other in SCENARIO_SECTION.items():
            if other != SCENARIO_SECTION[resolved] and other in sections:
                errors.append(f"[{other}] section does not apply to subcommand {resolved!r}")
    if errors:
        raise ConfigError(errors)

    fields = {k: v for k, v in sections.items() if k != "scenario"}
    if resolved in SCENARIO_SECTION:
        knob = SCENARIO_SECTION[resolved]
        fields.setdefault(knob, SECTION_MODELS[knob]())
    cfg = ScenarioConfig(subcommand=resolved, **fields)

    problems = _cross_checks(cfg)
    if problems:
        raise ConfigError(problems)
    log.debug("parse_config: subcommand=%s sections=%s", resolved, sorted(sections))
    return cfg


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ", ".join(value)
    return str(value)


def serialize_config(cfg: ScenarioConfig) -> str:
    """Every section and key in a fixed order; parse_config(serialize_config(c)) == c."""
    lines = ["[scenario]", f"subcommand = {_fmt(cfg.subcommand)}", ""]
    for name in CORE_SECTIONS[1:] + tuple(dict.fromkeys(SCENARIO_SECTION.values())):
        section = getattr(cfg, name)
        if section is None:
            continue
        lines.append(f"[{name}]")
        for key, value in section.model_dump().items():
            lines.append(f"{key} = {_fmt(value)}".rstrip())
        lines.append("")
    return "\n".join(lines)


def load_config(path: str | Path, subcommand: Optional[str] = None) -> ScenarioConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ArtifactError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, subcommand)
