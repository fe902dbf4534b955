import json
import math
import re
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from phasecell import cli
from phasecell.io import csv_text, dumps

SUBCOMMANDS = [
    ("peano", "approx"), ("peano", "distance"), ("peano", "coverage"), ("peano", "limit"),
    ("basis", "xi"), ("basis", "orthocheck"),
    ("phase", "map"), ("phase", "area"), ("phase", "winding"), ("phase", "torus"), ("phase", "bundle"),
    ("kg", "residual"), ("kg", "synth"), ("kg", "observables"),
    ("pipeline",),
]


def run(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def tree_bytes(root: Path):
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


@pytest.mark.parametrize("argv", [(), *SUBCOMMANDS, ("peano",), ("basis",), ("phase",), ("kg",)])
def test_help_exits_zero(capsys, argv):
    code, out, _ = run(capsys, *argv, "--help")
    assert code == 0 and "usage" in out


def test_unknown_subcommand_is_usage_error(capsys):
    code, _, err = run(capsys, "peano", "spiral")
    assert code == 2 and "invalid choice" in err
    assert run(capsys, "--level", "3")[0] == 2


def test_peano_distance_example(capsys):
    code, out, _ = run(capsys, "peano", "distance", "--level", "3")
    data = json.loads(out)
    assert code == 0 and data["satisfied"] is True
    assert data["bound"] == pytest.approx(math.sqrt(2) / 27, rel=1e-16)


def test_peano_approx_csv_and_svg(capsys, tmp_path):
    svg_path = tmp_path / "curve.svg"
    code, out, _ = run(capsys, "peano", "approx", "--level", "1", "--svg", str(svg_path))
    lines = out.strip().splitlines()
    assert code == 0 and lines[0] == "index,u,x,y" and len(lines) == 11
    assert lines[-1].startswith("9,1,1,1")
    assert svg_path.read_text().count("<polyline") == 1


def test_peano_coverage_and_limit(capsys):
    assert json.loads(run(capsys, "peano", "coverage", "--level", "2")[1])["fraction"] == 1.0
    data = json.loads(run(capsys, "peano", "limit", "--u", "1", "--tol", "1e-3")[1])
    assert (data["x"], data["y"], data["level"]) == (1.0, 1.0, 7)


def test_bad_level_is_json_error(capsys):
    code, out, err = run(capsys, "peano", "distance", "--level", "0")
    assert code == 1 and out == ""
    assert json.loads(err)["error"] == "ValueError"


def test_basis_commands(capsys):
    code, out, _ = run(capsys, "basis", "xi", "--nmax", "2", "--k", "0")
    rows = out.strip().splitlines()
    assert rows[0] == "n,k,re,im" and len(rows) == 4
    assert float(rows[1].split(",")[2]) == math.pi**-0.25
    data = json.loads(run(capsys, "basis", "orthocheck", "--nmax", "40", "--order", "60")[1])
    assert data["max_deviation"] <= 1e-12 and data["order"] == 60


def test_basis_orthocheck_low_order_warning(capsys):
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        data = json.loads(run(capsys, "basis", "orthocheck", "--nmax", "10", "--order", "5")[1])
    assert "order 5" in data["warning"]


def test_phase_commands(capsys):
    data = json.loads(run(capsys, "phase", "area", "--M", "2", "--n", "1", "--samples", "20000")[1])
    assert (data["geometric"], data["covered"]) == (0.5, 1.0)
    assert json.loads(run(capsys, "phase", "winding", "--M", "7", "--n", "2", "--x", "1")[1])["winding_number"] == 7
    rows = run(capsys, "phase", "map", "--M", "1", "--n", "0", "--grid", "3x4")[1].strip().splitlines()
    assert rows[0] == "x,y,q,p" and len(rows) == 13
    torus = json.loads(run(capsys, "phase", "torus", "--n1", "1", "--n2", "2", "--n3", "3", "--samples", "4")[1])
    assert len(torus["points"]) == 64 and torus["max_radius_sq_residual"] <= 1e-12
    rows = run(capsys, "phase", "bundle", "--n", "0", "--fibre=-2,2", "--kind", "momentum",
               "--base-samples", "4", "--fibre-samples", "2")[1].strip().splitlines()
    assert rows[0] == "base_index,q,p,k" and len(rows) == 9


def test_phase_bad_input(capsys):
    assert run(capsys, "phase", "map", "--M", "1", "--n", "0", "--grid", "3by3")[0] == 2
    code, _, err = run(capsys, "phase", "winding", "--M", "1", "--n", "0", "--x", "2")
    assert code == 1 and json.loads(err)["error"] == "domain"
    code, _, err = run(capsys, "phase", "bundle", "--n", "0", "--fibre", "1,1")
    assert code == 1


def write_spec(path, **overrides):
    spec = dict(cli.PIPELINE_SPECS["gauss_d1.json"])
    spec.update(overrides)
    path.write_text(json.dumps(spec))
    return str(path)


def test_kg_observables_example(capsys, tmp_path):
    data = json.loads(run(capsys, "kg", "observables", "--spec", write_spec(tmp_path / "s.json"))[1])
    assert abs(data["H"] - 1.0) <= 1e-10
    assert abs(data["Q"] - math.sqrt(math.pi)) <= 1e-10
    assert abs(data["P"][0]) <= 1e-12
    assert data["vacuum_term"] == "dropped"


def test_kg_residual_and_synth(capsys, tmp_path):
    data = json.loads(run(capsys, "kg", "residual", "--d", "3", "--n", "1", "2", "3", "--k", "0.3", "-0.2", "1.1", "--m", "0.5")[1])
    assert data["within_tolerance"] is True and data["residual_abs"] <= 1e-10
    rows = run(capsys, "kg", "synth", "--spec", write_spec(tmp_path / "s.json"), "--nmax", "4", "--t", "0.1")[1].strip().splitlines()
    assert rows[0] == "n1,re,im" and len(rows) == 6


def test_kg_errors(capsys, tmp_path):
    code, _, err = run(capsys, "kg", "residual", "--d", "1", "--n", "2", "--k", "0", "--m", "0")
    assert code == 1 and json.loads(err)["error"] == "degenerate-mode"
    assert run(capsys, "kg", "residual", "--d", "2", "--n", "2", "--k", "0.1", "--m", "1")[0] == 1
    assert run(capsys, "kg", "synth", "--spec", str(tmp_path / "missing.json"))[0] == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert json.loads(run(capsys, "kg", "observables", "--spec", str(bad))[2])["error"] == "ValueError"
    neg = write_spec(tmp_path / "neg.json", Nplus={"family": "gaussian", "params": {"amplitude": -1.0}})
    assert run(capsys, "kg", "observables", "--spec", neg)[0] == 1


def test_json_seventeen_digits():
    text = dumps({"a": 0.1, "b": 1.0, "c": [math.pi, 2], "d": float("nan"), "e": True})
    assert '"a": 0.10000000000000001' in text
    assert '"b": 1.0' in text and "3.1415926535897931" in text
    assert '"d": null' in text and '"e": true' in text
    assert json.loads(text)["c"][0] == math.pi


def test_csv_round_trip():
    x = np.array([0.1, 1 / 3, -2.5e-300])
    text = csv_text(["i", "x"], [np.arange(3), x])
    back = np.loadtxt(text.splitlines()[1:], delimiter=",")
    assert np.array_equal(back[:, 1], x)
    assert text.splitlines()[1].startswith("0,")


def test_manifest(capsys, tmp_path):
    target = tmp_path / "d.json"
    manifest = tmp_path / "m.json"
    code, _, _ = run(capsys, "--manifest", str(manifest), "--seed", "3", "peano", "distance", "--level", "2", "--out", str(target))
    assert code == 0
    data = json.loads(manifest.read_text())
    assert data["subcommand"] == "peano distance" and data["seed"] == 3
    assert data["flags"]["level"] == 2
    assert re.fullmatch(r"[0-9a-f]{64}", data["outputs"][str(target)])


def test_threads_env(capsys, monkeypatch):
    monkeypatch.setenv("PHASECELL_THREADS", "1")
    assert run(capsys, "peano", "distance", "--level", "1")[0] == 0
    monkeypatch.setenv("PHASECELL_THREADS", "many")
    assert run(capsys, "peano", "distance", "--level", "1")[0] == 1


def test_seed_changes_monte_carlo_only(capsys):
    a = json.loads(run(capsys, "--seed", "0", "phase", "area", "--M", "3", "--n", "0", "--samples", "5000")[1])
    b = json.loads(run(capsys, "--seed", "1", "phase", "area", "--M", "3", "--n", "0", "--samples", "5000")[1])
    assert a["geometric"] == b["geometric"] and a["mc_estimate"] != b["mc_estimate"]


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "phasecell", "peano", "distance", "--level", "1"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and json.loads(proc.stdout)["level"] == 1


def test_pipeline_deterministic(tmp_path):
    for name in ("a", "b"):
        assert cli.main(["--seed", "0", "pipeline", "--outdir", str(tmp_path / name)]) == 0
    first, second = tree_bytes(tmp_path / "a"), tree_bytes(tmp_path / "b")
    assert first.keys() == second.keys() and first == second
    manifest = json.loads(first["manifest.json"])
    assert set(manifest["outputs"]) == set(first) - {"manifest.json"}
