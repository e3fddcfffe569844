import numpy as np
import pytest

from physics.errors import DomainError, NumericalError
from services import db
from services.config import parse_config
from services.runner import (
    SEED_CONSUMERS,
    ScenarioRegistry,
    config_digest,
    default_registry,
    run_scenario,
    run_sweep,
    seed_streams,
)

ANDERSON = """
[scenario]
subcommand = anderson
[params]
alpha = 1.5
B = 0.5
[grid]
x_min = 0
x_max = 32
n = 32
[run]
t_final = 1.0
dt = 0.01
record_every = 10
seed = {seed}
[anderson]
W = 1.0
window_size = 4
cutoff = 0
[output]
dir = {out}
"""


def test_seed_streams_are_reproducible_and_independent():
    a, b = seed_streams(5), seed_streams(5)
    assert tuple(a) == SEED_CONSUMERS
    draws = {k: np.random.default_rng(a[k]).random() for k in a}
    assert draws == {k: np.random.default_rng(b[k]).random() for k in b}
    assert len(set(draws.values())) == len(SEED_CONSUMERS)


def test_default_registry_loads_every_scenario():
    names = default_registry().names()
    assert names == sorted(["anderson", "beam", "ftse", "slab", "sne", "specfun-table"])


def test_registry_rejects_duplicates_and_unknown():
    reg = ScenarioRegistry()
    reg.add("x", lambda cfg, ctx: {})
    with pytest.raises(DomainError):
        reg.add("x", lambda cfg, ctx: {})
    with pytest.raises(DomainError):
        reg.get("y")


def test_run_writes_outputs_and_ledger(tmp_path):
    cfg = parse_config(ANDERSON.format(seed=3, out="a"))
    report = run_scenario(cfg, ledger=True)
    assert report.exit_code == 0
    assert sorted(p.rsplit("/", 1)[-1] for p in report.outputs) == [
        "energies.csv", "oscillators.csv", "participation.csv", "summary.json"]
    assert report.headline["tensor_entries"] == 4 ** 4
    assert report.headline["norm2_drift"] <= 1e-10
    row = db.get_run(report.run_id)
    assert row["config_sha256"] == config_digest(cfg)
    assert row["seed"] == 3 and row["status"] == "ok"


def test_same_seed_same_bytes_other_seed_other_disorder(tmp_path):
    run_scenario(parse_config(ANDERSON.format(seed=3, out="a")))
    run_scenario(parse_config(ANDERSON.format(seed=3, out="b")))
    run_scenario(parse_config(ANDERSON.format(seed=4, out="c")))
    for name in ("energies.csv", "oscillators.csv", "summary.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    assert (tmp_path / "a" / "energies.csv").read_bytes() != (tmp_path / "c" / "energies.csv").read_bytes()


def test_failed_scenario_is_recorded_and_reraised():
    def broken(cfg, ctx):
        raise NumericalError("diverged")

    reg = ScenarioRegistry()
    reg.add("sne", broken)
    with pytest.raises(NumericalError):
        run_scenario(parse_config("", "sne"), reg, ledger=True)
    (row,) = db.list_runs()
    assert row["status"] == "error" and row["exit_code"] == 3
    assert row["error"] == "diverged"


def test_ledger_failure_does_not_fail_the_run(tmp_path, monkeypatch, caplog):
    blocker = tmp_path / "blocker"
    blocker.write_text("")
    monkeypatch.setattr(db, "DB_PATH", str(blocker / "runs.db"))
    reg = ScenarioRegistry()
    reg.add("sne", lambda cfg, ctx: {"ok": True})
    with caplog.at_level("WARNING", logger="fracwave"):
        report = run_scenario(parse_config("", "sne"), reg, ledger=True)
    assert report.exit_code == 0 and report.run_id is None
    failed = [r for r in caplog.records if "Failed to record run" in r.getMessage()]
    assert failed and all(r.levelname == "WARNING" for r in failed)


def test_formats_select_outputs():
    reg = ScenarioRegistry()

    def both(cfg, ctx):
        ctx.csv("t.csv", ("a",), [(1.0,)])
        ctx.summary({"a": 1})
        return {}

    reg.add("sne", both)
    report = run_scenario(parse_config("[output]\nformats = json\n", "sne"), reg)
    assert [p.rsplit("/", 1)[-1] for p in report.outputs] == ["summary.json"]


def test_sweep_in_order_and_rejects_shared_directory(write_config, tmp_path):
    p1 = write_config("a.ini", ANDERSON.format(seed=1, out="s1"))
    p2 = write_config("b.ini", ANDERSON.format(seed=2, out="s2"))
    reports = run_sweep([str(p1), str(p2)], workers=1)
    assert [r.exit_code for r in reports] == [0, 0]
    assert reports[0].output_dir == "s1" and reports[1].output_dir == "s2"
    p3 = write_config("c.ini", ANDERSON.format(seed=3, out="s1"))
    with pytest.raises(DomainError):
        run_sweep([str(p1), str(p3)], workers=1)


def test_sweep_requires_declared_subcommand(write_config):
    path = write_config("bare.ini", "[params]\n")
    with pytest.raises(DomainError):
        run_sweep([str(path)], workers=1)
