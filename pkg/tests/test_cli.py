import json

import numpy as np
import pytest
from click.testing import CliRunner

from fracwave import cli
from services import artifacts

CONFIGS = {
    "beam": """
[params]
alpha = 1.6
B = 0.5
[grid]
x_min = -20
x_max = 20
n = 128
[run]
t_final = 0.1
dt = 0.01
record_every = 2
[beam]
initial = gaussian
width = 1.5
[output]
formats = csv, json, snapshot
""",
    "slab": """
[params]
alpha = 1.5
beta = 0.8
[grid]
n = 128
[run]
t_final = 0.5
dt = 0.05
[slab]
L = 10
n_modes = 8
""",
    "sne": """
[params]
alpha = 1.5
G = 1.0
[run]
t_final = 0.5
dt = 0.001
record_every = 50
[sne]
experiment = single
""",
    "ftse": """
[params]
beta = 0.8
[grid]
x_min = -5
x_max = 5
n = 64
[run]
t_final = 0.5
dt = 0.01
record_every = 10
[ftse]
dim = 8
length = 8
trajectory = true
""",
    "anderson": """
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
[anderson]
window_size = 4
cutoff = 0
""",
    "specfun-table": """
[specfun]
function = gamma
start = 0.5
stop = 5
count = 10
""",
}

EXPECTED_FILES = {
    "beam": {"beam.csv", "final.frse", "summary.json"},
    "slab": {"slab.csv", "modes.csv", "summary.json"},
    "sne": {"sne.csv", "summary.json"},
    "ftse": {"ftse.csv", "ftse_l1.csv", "green.csv", "trajectory.csv", "summary.json"},
    "anderson": {"energies.csv", "participation.csv", "oscillators.csv", "summary.json"},
    "specfun-table": {"table.csv", "summary.json"},
}


def invoke(*args):
    return CliRunner().invoke(cli, list(args))


@pytest.mark.parametrize("name", sorted(CONFIGS))
def test_each_scenario_runs(name, write_config, tmp_path):
    path = write_config(f"{name}.ini", CONFIGS[name])
    result = invoke(name, str(path), "--out", "run")
    assert result.exit_code == 0, result.output
    report = json.loads(result.stdout)
    assert report["exit_code"] == 0
    assert {p.rsplit("/", 1)[-1] for p in report["outputs"]} == EXPECTED_FILES[name]
    assert (tmp_path / "run" / "summary.json").exists()


def test_headlines(write_config):
    sne = json.loads(invoke("sne", str(write_config("sne.ini", CONFIGS["sne"])), "--out", "s").stdout)
    assert sne["headline"]["modulus_drift"] <= 1e-10
    assert sne["headline"]["phase_rate"] == pytest.approx(sne["headline"]["predicted_phase_rate"], rel=1e-6)
    assert sne["headline"]["sideband_max"] <= 1e-12

    table = json.loads(invoke("specfun-table", str(write_config("t.ini", CONFIGS["specfun-table"])),
                              "--out", "t").stdout)
    assert table["headline"]["checked"] == 10
    assert table["headline"]["max_abs_err"] <= 1e-10


def test_rerun_is_byte_identical(write_config, tmp_path):
    path = write_config("beam.ini", CONFIGS["beam"])
    assert invoke("beam", str(path), "--out", "one").exit_code == 0
    assert invoke("beam", str(path), "--out", "two").exit_code == 0
    for name in EXPECTED_FILES["beam"]:
        assert (tmp_path / "one" / name).read_bytes() == (tmp_path / "two" / name).read_bytes()


def test_bad_config_exits_2(write_config):
    path = write_config("bad.ini", "[params]\nalpha = 2.5\n[grid]\nn = 100\n")
    result = invoke("beam", str(path))
    assert result.exit_code == 2
    assert "(0,2]" in result.stderr
    assert "power of two" in result.stderr


def test_missing_config_exits_4():
    result = invoke("sne", "does-not-exist.ini")
    assert result.exit_code == 4
    assert "cannot read config" in result.stderr


def test_no_growth_exits_3(write_config):
    # alpha = 2 without gravity: the pump is linearly stable
    path = write_config("stable.ini", "[run]\nt_final = 0.1\ndt = 0.01\n")
    result = invoke("sne", str(path), "--out", "x")
    assert result.exit_code == 3
    assert "growth" in result.stderr


def test_validate_prints_normalized_config(write_config):
    path = write_config("v.ini", CONFIGS["slab"])
    result = invoke("validate", str(path), "--subcommand", "slab")
    assert result.exit_code == 0
    assert result.stdout.startswith("[scenario]\nsubcommand = slab\n")
    assert "beta = 0.8\n" in result.stdout
    assert "n_modes = 8\n" in result.stdout
    again = write_config("again.ini", result.stdout)
    assert invoke("validate", str(again)).stdout == result.stdout


def test_runs_lists_the_ledger(write_config):
    path = write_config("sne.ini", CONFIGS["sne"])
    assert invoke("sne", str(path), "--out", "a", "--ledger").exit_code == 0
    assert invoke("sne", str(path), "--out", "b", "--no-ledger").exit_code == 0
    listing = invoke("runs")
    assert listing.exit_code == 0
    lines = listing.stdout.strip().splitlines()
    assert len(lines) == 1 and "sne" in lines[0]
    run_id = int(lines[0].split()[0])
    row = json.loads(invoke("runs", "--id", str(run_id)).stdout)
    assert row["status"] == "ok" and row["output_dir"] == "a"
    assert invoke("runs", "--id", "999").exit_code == 1


def test_sweep_reports_worst_exit(write_config):
    good = write_config("good.ini", "[scenario]\nsubcommand = specfun-table\n[output]\ndir = g\n")
    stable = write_config("stable.ini", "[scenario]\nsubcommand = sne\n[run]\nt_final = 0.1\ndt = 0.01\n"
                                        "[output]\ndir = s\n")
    result = invoke("sweep", str(good), str(stable), "--workers", "1")
    assert result.exit_code == 3
    lines = [json.loads(line) for line in result.stdout.strip().splitlines()]
    assert [line["exit_code"] for line in lines] == [0, 3]
    assert lines[0]["config"] == str(good)


def test_linear_beam_norm_column_is_flat(write_config, tmp_path):
    config = CONFIGS["beam"].replace("alpha = 1.6", "alpha = 2").replace("B = 0.5", "B = 0")
    assert invoke("beam", str(write_config("linear.ini", config)), "--out", "lin").exit_code == 0
    header, data = artifacts.read_csv(tmp_path / "lin" / "beam.csv")
    norms = data[:, header.index("norm")]
    assert np.max(np.abs(norms - norms[0])) <= 1e-12 * norms[0]
