import json

import numpy as np
import pandas as pd
import pytest
from click.testing import CliRunner

from pyxbar.cli import cli
from pyxbar.data import DEMO_FILES
from pyxbar.designfile import load_resonator
from pyxbar.netcore import FrequencyGrid, Kind, SweepResponse
from pyxbar.resonator import series_resonance
from pyxbar.touchstone import read_touchstone, write_touchstone

SERIAL = {"PARALLEL": "no"}


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    result = CliRunner().invoke(cli, ["demo", str(tmp_path)])
    assert result.exit_code == 0, result.output
    return tmp_path


def run(*args):
    return CliRunner().invoke(cli, [str(a) for a in args], env=SERIAL)


def test_demo_copies_every_file(workdir):
    for name in DEMO_FILES:
        assert (workdir / name).exists()


def test_version():
    result = CliRunner().invoke(cli, ["--version"])
    assert result.exit_code == 0
    assert "pyxbar" in result.output


def test_simulate_writes_raw_sweep_and_metrics(workdir):
    result = run("simulate", workdir / "direct_lattice.json", "--out", workdir / "d.s2p", "--metrics", workdir / "m.csv")
    assert result.exit_code == 0, result.output
    r = read_touchstone(workdir / "d.s2p")
    assert r.ref_impedances == (50 + 0j, 50 + 0j)
    metrics = pd.read_csv(workdir / "m.csv")
    assert metrics.loc[0, "fbw_pct"] > 25
    assert metrics.loc[0, "il_min_dB"] < 1.0


def test_matched_sweep_needs_a_sidecar(workdir):
    design = workdir / "direct_lattice.json"
    result = run("simulate", design, "--out", workdir / "m.s2p", "--matched")
    assert result.exit_code == 2
    result = run("simulate", design, "--out", workdir / "m.s2p", "--matched", "--sidecar")
    assert result.exit_code == 0, result.output
    assert (workdir / "m.s2p.refs.json").exists()


def test_match_then_metrics(workdir):
    assert run("simulate", workdir / "direct_lattice.json", "--out", workdir / "d.s2p").exit_code == 0
    result = run(
        "match", workdir / "d.s2p", "--out", workdir / "dm.s2p", "--report", workdir / "match.json", "--sidecar"
    )
    assert result.exit_code == 0, result.output
    with open(workdir / "match.json") as f:
        report = json.load(f)
    assert report["feasible"]

    result = run("metrics", workdir / "dm.s2p", "--stopband", "1.05e10:1.15e10", "--out", workdir / "m.csv")
    assert result.exit_code == 0, result.output
    metrics = pd.read_csv(workdir / "m.csv")
    assert metrics.loc[0, "fbw_pct"] > 25
    assert metrics.loc[0, "il_min_dB"] < 1.0
    assert "oob1_dB" in metrics.columns


def test_matching_a_matched_file_changes_nothing(workdir):
    grid = FrequencyGrid.linear(1e9, 2e9, 11)
    data = np.tile(np.array([[0.0, 0.6j], [0.6j, 0.0]]), (11, 1, 1))
    write_touchstone(SweepResponse(grid, Kind.S, data, (50, 50)), workdir / "thru.s2p", fmt="RI")
    result = run("match", workdir / "thru.s2p", "--out", workdir / "again.s2p", "--report", workdir / "r.json")
    assert result.exit_code == 0, result.output
    with open(workdir / "r.json") as f:
        assert json.load(f)["gamma_m"] == [[0.0, 0.0], [0.0, 0.0]]
    again = read_touchstone(workdir / "again.s2p")
    assert np.max(np.abs(again.data - data)) < 1e-12


def test_bad_stopband_is_a_usage_error(workdir):
    assert run("simulate", workdir / "direct_lattice.json", "--out", workdir / "d.s2p").exit_code == 0
    result = run("metrics", workdir / "d.s2p", "--stopband", "12e9:11e9", "--out", workdir / "m.csv")
    assert result.exit_code == 2


def test_fit_recovers_the_bundled_three_mode_resonator(workdir):
    truth = load_resonator(workdir / "three_mode_resonator.json")
    result = run(
        "synthesize", workdir / "three_mode_resonator.json", "--out", workdir / "meas.s1p",
        "--f-start-hz", 6e9, "--f-stop-hz", 34e9, "--n-points", 701,
    )
    assert result.exit_code == 0, result.output
    result = run(
        "fit", workdir / "meas.s1p", "--branches", 3, "--restarts", 2, "--peak-weighting",
        "--out", workdir / "fit.json", "--report", workdir / "fit.csv",
    )
    assert result.exit_code == 0, result.output
    fitted = load_resonator(workdir / "fit.json")
    np.testing.assert_allclose(
        [series_resonance(b) for b in fitted.branches],
        [series_resonance(b) for b in truth.branches],
        rtol=1e-3,
    )
    assert list(pd.read_csv(workdir / "fit.csv")["mode"]) == ["A1", "S2", "A3"]


def test_fit_needs_a_branch_count(workdir):
    run("synthesize", workdir / "three_mode_resonator.json", "--out", workdir / "meas.s1p", "--n-points", 301)
    assert run("fit", workdir / "meas.s1p", "--out", workdir / "fit.json").exit_code == 2
    result = run(
        "fit", workdir / "meas.s1p", "--branches", 2, "--seed-from", workdir / "three_mode_resonator.json",
        "--out", workdir / "fit.json",
    )
    assert result.exit_code == 2


def test_fit_rejects_two_port_files(workdir):
    assert run("simulate", workdir / "ladder.json", "--out", workdir / "l.s2p").exit_code == 0
    assert run("fit", workdir / "l.s2p", "--branches", 1, "--out", workdir / "fit.json").exit_code == 2


def test_optimize_with_strict_budget(workdir):
    args = ["optimize", workdir / "ladder.json", workdir / "compare_spec.json", "--budget", 6, "--starts", 2]
    result = run(*args, "--out", workdir / "best.json", "--history", workdir / "h.csv")
    assert result.exit_code == 0, result.output
    assert len(pd.read_csv(workdir / "h.csv")) <= 6
    assert (workdir / "best.json").exists()
    assert run(*args, "--out", workdir / "best.json", "--strict").exit_code == 3


def test_compare_optimizes_against_the_spec(workdir):
    result = run(
        "compare", workdir / "direct_lattice.json", workdir / "ladder.json",
        "--spec", workdir / "compare_spec.json", "--budget", 160, "--starts", 2,
        "--out", workdir / "cmp.csv",
    )
    assert result.exit_code == 0, result.output
    table = pd.read_csv(workdir / "cmp.csv").set_index("topology")
    assert list(table.index) == ["direct_lattice", "ladder"]
    assert (table["evaluations"] <= 160).all()
    assert {"A.scale", "B.scale", "cost"} <= set(table.columns)
    assert table.loc["direct_lattice", "fbw_pct"] > table.loc["ladder", "fbw_pct"]


def test_compare_as_is(workdir):
    result = run(
        "compare", workdir / "direct_lattice.json", workdir / "ladder.json",
        "--spec", workdir / "compare_spec.json", "--as-is", "--out", workdir / "cmp.csv",
    )
    assert result.exit_code == 0, result.output
    table = pd.read_csv(workdir / "cmp.csv")
    assert list(table["topology"]) == ["direct_lattice", "ladder"]
    assert "cost" in table.columns
    assert "evaluations" not in table.columns


def test_compare_needs_two_designs(workdir):
    result = run("compare", workdir / "ladder.json", "--out", workdir / "cmp.csv")
    assert result.exit_code == 2


def test_validate_commands(workdir):
    assert run("validate", "design", workdir / "layout_balanced.json").exit_code == 0
    assert run("validate", "spec", workdir / "compare_spec.json").exit_code == 0
    broken = workdir / "broken.json"
    broken.write_text(json.dumps({"schema": 1, "topology": "ladder"}))
    assert run("validate", "design", broken).exit_code == 2
    future = workdir / "future.json"
    with open(workdir / "ladder.json") as f:
        document = json.load(f)
    document["schema"] = 7
    future.write_text(json.dumps(document))
    assert run("validate", "design", future).exit_code == 2
