import csv
import json
import subprocess
import sys
from pathlib import Path

import pytest

from coarse_coorbit.cli import main

SPECS = Path(__file__).resolve().parents[1] / "specs"


def spec(name):
    return str(SPECS / name)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def report(capsys, *argv):
    code, out, _ = run(capsys, *argv)
    return code, json.loads(out)


def test_standard_vs_toeplitz_d4(capsys):
    code, rep = report(capsys, "equivalence", "check", spec("standard_d4.json"), spec("toeplitz_d4.json"))
    assert code == 1
    assert rep["result"]["reason"] == "algebra-invariant-mismatch"
    assert rep["schema"] == 1


def test_s1_s2_equivalent_with_conjugator(capsys):
    code, rep = report(capsys, "equivalence", "check", spec("s1_d4.json"), spec("s2_d4.json"))
    assert code == 0 and rep["result"]["result"] == "EQUIVALENT"
    assert len(rep["result"]["evidence"]["C"]) == 4
    code, rep = report(capsys, "equivalence", "check", spec("s1_d4.json"), spec("s2_d4.json"), "--candidate", spec("s2_conjugator.json"))
    assert code == 0


def test_diagonal_mismatch(capsys):
    code, rep = report(capsys, "equivalence", "check", spec("standard_d2_half.json"), spec("standard_d2_third.json"))
    assert code == 1 and rep["result"]["reason"] == "diagonal-mismatch"


def test_alpha_coverings_compare(capsys):
    code, rep = report(capsys, "covering", "compare", spec("alpha0.json"), spec("alpha05.json"), "--radii", "64,256,1024")
    assert code == 1 and rep["result"]["verdict"] == "NOT-EQUIVALENT"
    assert rep["config"]["radii"] == [64.0, 256.0, 1024.0]


def test_dyadic_vs_uniform_compare(capsys):
    code, _, _ = run(capsys, "covering", "compare", spec("dyadic.json"), spec("uniform_positive.json"))
    assert code == 1


def test_covering_make_and_group_info(capsys):
    code, rep = report(capsys, "covering", "make", spec("remark.json"))
    assert code == 0 and rep["result"]["admissibility"] == {"lower": 3, "upper": 3}
    code, rep = report(capsys, "group", "info", spec("d4_alpha1.json"))
    assert code == 0 and "invariants" in json.dumps(rep)


def test_group_make_round_trips(capsys, tmp_path):
    out = tmp_path / "g.json"
    code, _, _ = run(capsys, "group", "make", "--kind", "toeplitz", "--d", "3", "--out", str(out))
    assert code == 0
    code, rep = report(capsys, "group", "info", str(out))
    assert code == 0 and rep["result"]["invariants"]["power_dims"] == [2, 1, 0]


def test_witness_exit(capsys):
    code, rep = report(capsys, "witness", spec("standard_d2_half.json"), spec("standard_d2_one.json"))
    assert code == 1
    code, _, _ = run(capsys, "witness", spec("standard_d2_half.json"), spec("standard_d2_one.json"), "--cap", "3", "--bound", "1e30")
    assert code == 2


def test_reports_are_byte_identical_and_embed_config(tmp_path, capsys):
    outs = []
    out = tmp_path / "r.json"
    for _ in range(2):
        code, _, _ = run(capsys, "covering", "metric", spec("alpha05.json"), "--seed", "7", "--budget-pairs", "40", "--radii", "100", "--out", str(out))
        assert code == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    cfg = json.loads(outs[0])["config"]
    assert cfg["seed"] == 7 and cfg["budgets"]["pairs"] == 40 and cfg["radii"] == [100.0]
    assert {"depth", "seeds"} <= set(cfg["budgets"]) and cfg["arithmetic"] == "exact"
    table = tmp_path / "r.distances.csv"
    rows = list(csv.reader(table.open()))
    assert rows[0][-1] == "d" and len(rows) == 41


def test_csv_tables_written_next_to_report(tmp_path, capsys):
    out = tmp_path / "cmp.json"
    run(capsys, "covering", "compare", spec("dyadic.json"), spec("uniform_positive.json"), "--out", str(out))
    header = next(csv.reader((tmp_path / "cmp.counts.csv").open()))
    assert header == ["direction", "radius", "max_count_lower", "max_count_upper"]
    out = tmp_path / "w.json"
    run(capsys, "witness", spec("standard_d2_half.json"), spec("standard_d2_one.json"), "--out", str(out))
    assert next(csv.reader((tmp_path / "w.witness.csv").open())) == ["n", "log_increment"]


def test_env_overrides(capsys, monkeypatch):
    monkeypatch.setenv("COARSE_COORBIT_SEED", "11")
    monkeypatch.setenv("COARSE_COORBIT_RADII", "8,16")
    _, rep = report(capsys, "covering", "make", spec("remark.json"))
    assert rep["config"]["seed"] == 11 and rep["config"]["radii"] == [8.0, 16.0]
    _, rep = report(capsys, "covering", "make", spec("remark.json"), "--seed", "3")
    assert rep["config"]["seed"] == 3


def test_float_mode_recorded(capsys):
    code, rep = report(capsys, "covering", "make", spec("remark.json"), "--float")
    assert code == 0 and rep["config"]["arithmetic"] == "float"
    assert rep["result"]["admissibility"] == {"lower": 3, "upper": 3}


def test_malformed_json_reports_line(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{\n  "kind": "dyadic",\n  oops\n}\n')
    code, _, err = run(capsys, "covering", "make", str(bad))
    assert code == 65 and "line 3" in err


def test_bad_field_names_field(tmp_path, capsys):
    bad = tmp_path / "g.json"
    bad.write_text(json.dumps({"d": 3, "kind": "standard", "lambda": ["1/2"]}))
    code, _, err = run(capsys, "group", "info", str(bad))
    assert code == 65 and "lambda" in err


def test_missing_file_and_usage_errors(capsys, tmp_path):
    assert run(capsys, "group", "info", str(tmp_path / "nope.json"))[0] == 66
    assert run(capsys, "covering", "make", spec("remark.json"), "--radii", "4,2")[0] == 64
    assert run(capsys, "covering", "make", spec("remark.json"), "--radii", "a,b")[0] == 64
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 64


def test_unwritable_output(capsys, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    # a regular file in place of the parent directory fails even with elevated privileges
    assert run(capsys, "covering", "make", spec("remark.json"), "--out", str(blocker / "r.json"))[0] == 73


def test_help_documents_csv_columns(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["covering", "compare", "--help"])
    assert exc.value.code == 0
    text = capsys.readouterr().out
    for col in ("max_count_lower", "d_image_min", "log_increment", "status"):
        assert col in text


def test_module_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "coarse_coorbit", "equivalence", "check", spec("standard_d3.json"), spec("toeplitz_d3.json")],
        capture_output=True,
        text=True,
    )
    assert res.returncode == 1
    assert json.loads(res.stdout)["result"]["reason"] == "algebra-invariant-mismatch"
