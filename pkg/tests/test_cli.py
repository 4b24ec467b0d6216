from __future__ import annotations

import json
import subprocess
import sys
from fractions import Fraction

import pytest

from ribbonclass import __version__
from ribbonclass.ainfinity import dump_algebra, perturbed_dual
from ribbonclass.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def rows_of(text):
    lines = text.splitlines()
    assert lines[0].startswith(f"# ribbonclass {__version__}")
    header = lines[1].split("\t")
    return [dict(zip(header, line.split("\t"))) for line in lines[2:]]


def test_enumerate_rows_and_infeasible_cells(capsys):
    code, out = run(capsys, "enumerate", "--max-edges", "3")
    assert code == 0
    rows = {(r["vertices"], r["edges"]): r for r in rows_of(out)}
    assert rows[("2", "3")]["dim"] == "3"
    assert rows[("1", "2")]["aut_mass"] == "1/2"
    # no vertex of valence three fits with two vertices and two edges
    assert rows[("2", "2")]["dim"] == "0"


def test_output_is_deterministic(capsys):
    _, a = run(capsys, "partition", "--algebra", "builtin:ground", "--max-edges", "4", "--format", "json")
    _, b = run(capsys, "partition", "--algebra", "builtin:ground", "--max-edges", "4", "--format", "json")
    assert a == b
    doc = json.loads(a)
    assert doc["meta"]["seed"] == 0 and doc["meta"]["version"] == __version__
    values = {r["graph_key"]: r["value"] for r in doc["rows"]}
    assert values["valences=[3,3]; chords=[(1,4),(2,5),(3,6)]"] == "-1/6"


def test_jobs_do_not_change_output(capsys):
    _, serial = run(capsys, "partition", "--algebra", "builtin:ground+ground", "--max-edges", "4", "--all")
    _, parallel = run(capsys, "partition", "--algebra", "builtin:ground+ground", "--max-edges", "4", "--all", "--jobs", "2")
    assert serial == parallel


def test_homology_empty_range(capsys):
    code, out = run(capsys, "homology", "--chi", "-3", "--max-edges", "3")
    assert code == 0
    assert rows_of(out) == []


def test_homology_chi_minus_one(capsys):
    _, out = run(capsys, "homology", "--chi", "-1", "--max-edges", "3", "--format", "json")
    rows = json.loads(out)["rows"]
    assert [(r["vertices"], r["edges"], r["homology"]) for r in rows] == [(1, 2, 0), (2, 3, 2)]


def test_correlate_and_characteristic(capsys):
    _, out = run(capsys, "correlate", "--algebra", "builtin:dual", "--graph", "valences=[3]; chords=[]; in=[1,2]; out=[3]")
    assert {(r["in"], r["out"], r["value"]) for r in rows_of(out)} == {("x1 x1", "x2", "1"), ("x1 x2", "x1", "1"), ("x2 x1", "x1", "1")}
    _, out = run(capsys, "characteristic", "--algebra", "builtin:ground")
    assert [r["coefficient"] for r in rows_of(out)] == ["1", "1/3", "1/18"]


def test_verify_all_builtins_pass(capsys):
    for name in ["ground", "dual", "ground+ground"]:
        code, out = run(capsys, "verify", "--algebra", f"builtin:{name}", "--max-edges", "3")
        assert code == 0
        assert all(r["status"] == "pass" for r in rows_of(out))


def test_verify_reports_broken_algebra(capsys, tmp_path):
    path = tmp_path / "broken.alg"
    path.write_text(dump_algebra(perturbed_dual(Fraction(1))))
    code, out = run(capsys, "verify", "--algebra", str(path), "--suite", "master")
    assert code == 1
    (row,) = rows_of(out)
    assert row["status"] == "FAIL" and row["witness"]
    code, out = run(capsys, "verify", "--algebra", str(path), "--suite", "cycle", "--max-edges", "4")
    assert code == 1
    assert "valences=" in rows_of(out)[0]["witness"]


def test_unknown_suite_and_cap_are_refused(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["verify", "--suite", "nope"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["partition", "--algebra", "builtin:ground", "--max-edges", "7"])
    assert exc.value.code == 2
    assert "cap" in capsys.readouterr().err


def test_missing_algebra_file(capsys, tmp_path):
    code = main(["partition", "--algebra", str(tmp_path / "missing.alg")])
    assert code == 2
    assert "error" in capsys.readouterr().err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "ribbonclass", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.strip() == f"ribbonclass {__version__}"
