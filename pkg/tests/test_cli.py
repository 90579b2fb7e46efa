import json
import math
import subprocess
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from lptv import catalog, cli, floquet
from lptv.trigmat import TrigMatrix
from lptv.cli import EXIT_NO_SOLUTION, EXIT_NUMERIC, EXIT_OK, EXIT_PARSE, EXIT_VERIFY

DATA = Path(__file__).resolve().parent.parent / "data" / "systems"


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def csv_rows(text):
    return [line.split(",") for line in text.strip().splitlines()]


# ---------------------------------------------------------------- file format


@pytest.mark.parametrize("entry_id", [e["id"] for e in catalog.list_entries()])
def test_emit_parse_emit_is_byte_identical(entry_id):
    entry = catalog.get(entry_id)
    text = cli.emit_system(entry.id, entry, dict(entry.params))
    defn = cli.parse_system(text)
    again = cli.emit_system(defn.name, defn.system, defn.params)
    assert again == text


@pytest.mark.parametrize("path", sorted(DATA.glob("*.sys")), ids=lambda p: p.name)
def test_shipped_files_parse_and_match_catalog(path):
    defn = cli.parse_system(path.read_text())
    entry = catalog.get(defn.name)
    if isinstance(defn.system, TrigMatrix):
        assert defn.system == entry.A
    assert cli.emit_system(defn.name, defn.system, defn.params) == path.read_text()


def test_numbers_keep_exact_values():
    assert cli.format_number(cli.parse_number("-7/21")) == "-1/3"
    assert cli.parse_number("0.25") == Fraction(1, 4)
    assert cli.format_number(0.1) == "0.10000000000000001"


@pytest.mark.parametrize("text,where", [
    ("[header]\nname = x\nkind = trig\nn = 2\nL = 0\nN = 0\nbogus = 1\n", ":7:"),
    ("[header]\nname = x\nkind = trig\nn = 2\nL = 0\nN = 0\n\n[params]\n\n[coefficients]\n0 0 cos : 1 2 3\n", ":11:"),
    ("[header]\nname = x\nkind = trig\nn = 2\nL = 0\nN = 0\n\n[params]\n\n[coefficients]\n0 1 cos : 1 0 0 1\n", ":5:"),
    ("[header]\nname = x\nkind = trig\nn = two\n", ":4:"),
    ("[headr]\n", ":1:"),
])
def test_parse_errors_carry_positions(text, where):
    with pytest.raises(cli.ParseError) as info:
        cli.parse_system(text, "sys")
    assert where in str(info.value)


def test_malformed_header_exits_one(tmp_path, capsys):
    f = tmp_path / "bad.sys"
    f.write_text("[header]\nname = x\nkind = trig\nn = 2\n")
    code, out, err = run(capsys, "solve", f)
    assert code == EXIT_PARSE and out == "" and "bad.sys" in err


def test_missing_input_and_bad_flags(capsys):
    assert run(capsys, "solve")[0] == EXIT_PARSE
    assert run(capsys, "solve", "--system", "no-such")[0] == EXIT_PARSE
    assert run(capsys, "frobnicate")[0] == EXIT_PARSE
    assert run(capsys, "solve", "/nonexistent/file.sys")[0] == EXIT_PARSE


# ---------------------------------------------------------------- solve


def test_solve_row_e_file(capsys):
    code, out, _ = run(capsys, "solve", DATA / "4-4-E.sys", "--omega", "1,1/2")
    assert code == EXIT_OK
    report = json.loads(out)
    assert report["R_text"] == "[[1, -3], [1/3, -1]] + omega*[[0, 3], [-1/3, 0]]"
    assert report["residual_norm"] == 0 and report["det_P"] == ["1"]
    assert [e["omega"] for e in report["evaluations"]] == [1.0, 0.5]


def test_solve_with_similarity_gives_unit_form(capsys):
    code, out, _ = run(capsys, "solve", DATA / "4-4-E.sys", "--similarity", "3 0; 0 1")
    assert code == EXIT_OK
    assert json.loads(out)["R_text"] == "[[1, -1], [1, -1]] + omega*[[0, 1], [-1, 0]]"


def test_solve_catalog_shortcut(capsys):
    code, out, _ = run(capsys, "solve", "--system", "4-4:H")
    assert code == EXIT_OK and json.loads(out)["name"] == "4-4:H"


def test_solve_csv_and_float(capsys):
    code, out, _ = run(capsys, "solve", "--system", "4-4:E", "--csv")
    rows = csv_rows(out)
    assert code == EXIT_OK and rows[0] == ["kind", "power", "harmonic", "parity", "i", "j", "value"]
    assert ["R", "1", "0", "-", "0", "1", "3"] in rows
    code, out, _ = run(capsys, "solve", "--system", "4-4:E", "--float")
    assert code == EXIT_OK and json.loads(out)["residual_norm"] <= 1e-9


def test_solve_no_solution_exit_two(capsys):
    # A is a finite cosine series but P needs infinitely many harmonics
    code, out, err = run(capsys, "solve", "--system", "mathieu", "--p-max", "3")
    assert code == EXIT_NO_SOLUTION and out == ""
    code, out, err = run(capsys, "solve", "--system", "4-4:E", "--p-max", "1")
    assert code == EXIT_NO_SOLUTION and "no solution" in err


def test_solve_rejects_reference_kind(capsys):
    code, _, err = run(capsys, "solve", "--system", "4-1:A")
    assert code == EXIT_PARSE and "not a finite-harmonic" in err


def test_solve_is_deterministic(capsys):
    first = run(capsys, "solve", DATA / "example-3x3.sys", "--omega", "0.5,2")[1]
    second = run(capsys, "solve", DATA / "example-3x3.sys", "--omega", "0.5,2")[1]
    assert first == second


def test_emit_then_solve_pipeline(tmp_path, capsys):
    code, out, _ = run(capsys, "catalog", "emit", "4-4:H")
    assert code == EXIT_OK
    f = tmp_path / "h.sys"
    f.write_text(out)
    sol_file = tmp_path / "h.sol"
    code, out, _ = run(capsys, "solve", f, "--solution-out", sol_file)
    assert code == EXIT_OK and sol_file.exists()
    assert json.loads(out)["residual_norm"] == 0


# ---------------------------------------------------------------- verify


def test_verify_row_h_passes(tmp_path, capsys):
    sol_file = tmp_path / "h.sol"
    code, out, _ = run(capsys, "solve", "--system", "4-4:H", "--emit-solution")
    sol_file.write_text(out)
    code, out, _ = run(capsys, "verify", "--system", "4-4:H", "--solution", sol_file, "--omega", "0.7")
    report = json.loads(out)
    assert code == EXIT_OK and report["all_pass"]
    assert set(report["checks"]) >= {"residual", "trace_identity", "det_constancy_equivalence", "phi_cross_check"}


def test_verify_corrupted_solution_exits_three(tmp_path, capsys):
    code, out, _ = run(capsys, "solve", "--system", "4-4:H", "--emit-solution")
    sol = cli.parse_solution(out, catalog.get("4-4:H").A)
    slices = [s.copy() for s in sol.R.slices]
    slices[0][0, 0] += 1
    bad = floquet.FloquetSolution(**{**sol.__dict__, "R": type(sol.R)(slices)})
    f = tmp_path / "bad.sol"
    f.write_text(cli.emit_solution("4-4:H", bad))
    code, out, err = run(capsys, "verify", "--system", "4-4:H", "--solution", f)
    assert code == EXIT_VERIFY
    assert "residual" in json.loads(out)["failed"] and "residual" in err


def test_verify_identity_lti(tmp_path, capsys):
    sysf = tmp_path / "lti.sys"
    sysf.write_text("[header]\nname = lti\nkind = trig\nn = 2\nL = 0\nN = 0\n\n[params]\n\n"
                    "[coefficients]\n0 0 cos : -1 0 0 -2\n")
    solf = tmp_path / "lti.sol"
    assert run(capsys, "solve", sysf, "--solution-out", solf)[0] == EXIT_OK
    code, out, _ = run(capsys, "verify", sysf, "--solution", solf)
    assert code == EXIT_OK and json.loads(out)["all_pass"]


# ---------------------------------------------------------------- sweep


def test_sweep_markus_yamabe_critical(capsys):
    code, out, _ = run(capsys, "sweep", "--system", "markus-yamabe", "--omegas", "0,1,2", "--critical")
    assert code == EXIT_OK
    table, critical = out.split("\n\n")
    rows = csv_rows(table)
    assert [r[-1] for r in rows[1:]] == ["stable", "unstable", "stable"]
    crit = sorted(float(r[0]) for r in csv_rows(critical)[1:])
    assert crit == pytest.approx([0.25, 1 - math.sqrt(2) / 2, 1 + math.sqrt(2) / 2, 1.75], abs=1e-12)


def test_sweep_single_point(capsys):
    code, out, _ = run(capsys, "sweep", "--system", "markus-yamabe", "--omega-min", "1", "--steps", "1")
    rows = csv_rows(out)
    assert code == EXIT_OK and len(rows) == 2 and rows[1][-1] == "unstable"


def test_sweep_with_solution_file(tmp_path, capsys):
    solf = tmp_path / "e.sol"
    run(capsys, "solve", "--system", "4-4:E", "--solution-out", solf)
    code, out, _ = run(capsys, "sweep", "--system", "4-4:E", "--R", solf, "--steps", "5")
    assert code == EXIT_OK and len(csv_rows(out)) == 6


# ---------------------------------------------------------------- monodromy


def test_monodromy_mathieu_product_one(capsys):
    code, out, _ = run(capsys, "monodromy", "--system", "mathieu", "--omega", "2")
    report = json.loads(out)
    assert code == EXIT_OK and report["method"] == "rk4" and report["product_check"]
    prod = complex(report["multiplier_product"]["re"], report["multiplier_product"]["im"])
    assert abs(prod - 1) <= 1e-9


def test_monodromy_meissner_uses_piecewise(capsys):
    code, out, _ = run(capsys, "monodromy", DATA / "meissner.sys", "--omega", "2")
    assert code == EXIT_OK and json.loads(out)["method"] == "piecewise"


def test_monodromy_factorize_negative_multipliers(tmp_path, capsys):
    f = tmp_path / "hill.sys"
    entry = catalog.mathieu(1, 3)
    f.write_text(cli.emit_system("mathieu", entry, dict(entry.params)))
    code, out, _ = run(capsys, "monodromy", f, "--omega", "2", "--factorize", "--steps", "2048")
    fac = json.loads(out)["factorization"]
    assert code == EXIT_OK and fac["period_multiplier"] == 2 and fac["branch_ambiguous"]


def test_monodromy_singular_exit_four(tmp_path, capsys):
    f = tmp_path / "blowdown.sys"
    # the monodromy exp(-80 pi) is singular to working precision
    f.write_text("[header]\nname = d\nkind = trig\nn = 1\nL = 0\nN = 0\n\n[params]\n\n"
                 "[coefficients]\n0 0 cos : -40\n")
    code, _, err = run(capsys, "monodromy", f, "--factorize")
    assert code == EXIT_NUMERIC and "SingularMonodromy" in err


# ---------------------------------------------------------------- htf and catalog


def test_htf_lti_matches_resolvent(capsys):
    code, out, _ = run(capsys, "htf", "--system", "4-4:A", "--B", "1; 0", "--C", "0 1",
                       "--s-grid", "0.1+0.2j", "--trunc", "4")
    assert code == EXIT_OK
    rows = csv_rows(out)
    assert rows[0] == ["s_re", "s_im", "k", "l", "i", "j", "abs", "re", "im"] and len(rows) == 2


def test_htf_on_time_invariant_file(tmp_path, capsys):
    sysf = tmp_path / "lti.sys"
    sysf.write_text("[header]\nname = lti\nkind = trig\nn = 2\nL = 0\nN = 0\n\n[params]\n\n"
                    "[coefficients]\n0 0 cos : 0 1 -2 -3\n")
    code, out, _ = run(capsys, "htf", sysf, "--B", "0; 1", "--C", "3 1", "--s-grid", "0.1+0.2j,1-1j")
    assert code == EXIT_OK
    for row in csv_rows(out)[1:]:
        s = complex(float(row[0]), float(row[1]))
        expected = (s + 3) / ((s + 1) * (s + 2))
        assert abs(complex(float(row[7]), float(row[8])) - expected) <= 1e-12


def test_htf_dimension_error(capsys):
    code, _, _ = run(capsys, "htf", "--system", "4-4:A", "--B", "1; 0; 0")
    assert code == EXIT_PARSE


def test_catalog_list(capsys):
    code, out, _ = run(capsys, "catalog", "list")
    rows = csv_rows(out)
    assert code == EXIT_OK and len(rows) - 1 >= 20
    assert run(capsys, "catalog", "emit")[0] == EXIT_PARSE
    assert run(capsys, "catalog", "emit", "nope")[0] == EXIT_PARSE


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "lptv", "catalog", "list"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("id,")


def test_json_serializer_is_stable():
    obj = {"b": [1, 0.1, complex(1, -2)], "a": {"x": np.float64(2.5)}}
    assert cli.to_json(obj) == cli.to_json(obj)
    assert json.loads(cli.to_json(obj))["b"][1] == 0.1
