import io
import json
import subprocess
import sys

import pytest

from arp.cli import main
from arp.problemfile import data_path


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out)
    return code, out.getvalue()


def gapping():
    return str(data_path("gapping.arp"))


def test_solve_text():
    code, text = run("solve", gapping())
    assert code == 0
    assert "solution 1  cost 2" in text and "solution 2  cost 5" in text
    assert "reading l(m, g)" in text and "reading l(j, m)" in text
    assert "2 solution(s)" in text and "search complete" in text


def test_threshold_flag():
    code, text = run("solve", gapping(), "--threshold", "3", "--json")
    assert code == 0
    assert [s["cost"] for s in json.loads(text)["solutions"]] == [2]


def test_no_solutions_exit_code():
    code, _ = run("solve", gapping(), "--threshold", "1")
    assert code == 1


def test_json_is_deterministic():
    a = json.loads(run("solve", gapping(), "--json")[1])
    b = json.loads(run("solve", gapping(), "--json")[1])
    a["summary"].pop("seconds"), b["summary"].pop("seconds")
    assert a == b
    (first, second) = a["solutions"]
    assert first["substitution"] == [{"var": "R", "color": "~pe",
                                      "term": r"\Z:Woman. l_~pe(Z, g_~pe)"}]
    assert first["colors"] == {"A": "pe"}
    assert (first["abducibles"][0]["left"], first["abducibles"][0]["right"]) == ("j_pe", "m_pe")
    assert second["readings"] == ["l(j, m)"]


def test_report_round_trip(tmp_path):
    report = tmp_path / "r.json"
    report.write_text(run("solve", gapping(), "--json")[1])
    code, text = run("check", gapping(), "--report", str(report))
    assert code == 0
    assert text.splitlines() == ["solution 1: OK", "solution 2: OK"]


def test_tampered_report_rejected(tmp_path):
    data = json.loads(run("solve", gapping(), "--json")[1])
    data["solutions"][0]["substitution"][0]["term"] = r"\Z:Woman. l_~pe(Z, Z)"
    report = tmp_path / "r.json"
    report.write_text(json.dumps(data))
    code, text = run("check", gapping(), "--report", str(report))
    assert code == 1
    assert "solution 1: INVALID" in text and "solution 2: OK" in text


def test_check_hierarchy():
    code, text = run("check", str(data_path("parallelism.srt")))
    assert code == 0 and text.startswith("OK types")


def test_check_problem():
    code, text = run("check", gapping())
    assert code == 0 and text.strip() == "OK 1 equation(s), 1 variable(s)"


def test_derive_clinton():
    code, text = run("derive", str(data_path("clinton.arp")))
    assert code == 0
    assert text.count("derivation ") == 3
    assert "X := c" in text


def test_derive_json():
    data = json.loads(run("derive", str(data_path("clinton.arp")), "--json")[1])
    assert [len(d["abducibles"]) for d in data["derivations"]] == [3, 3, 3]


def test_explain():
    code, text = run("explain", gapping(), "2")
    assert code == 0
    assert text.startswith("solution 2  cost 5")
    assert "trace:" in text and "derivation:" in text


def test_explain_out_of_range(capsys):
    code, _ = run("explain", gapping(), "9")
    assert code == 2
    assert "out of range" in capsys.readouterr().err


def test_trace_goes_to_stderr(capsys):
    code, text = run("solve", gapping(), "--trace")
    err = capsys.readouterr().err
    assert code == 0
    assert "trace imitation | " in err and "trace " not in text


@pytest.mark.parametrize("body, msg", [
    ("hierarchy: parallelism.srt\nequations:\n  l(j, zz) =p l(m, g)\n", "3:8: unknown symbol 'zz'"),
    ("hierarchy: nowhere.srt\n", "not found"),
])
def test_input_errors(tmp_path, capsys, body, msg):
    f = tmp_path / "bad.arp"
    f.write_text(body)
    code, _ = run("solve", str(f))
    assert code == 2
    assert msg in capsys.readouterr().err


def test_missing_file(capsys):
    assert run("solve", "/nonexistent.arp")[0] == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "arp", "solve", gapping(), "--max-solutions", "1"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert "1 solution(s)" in proc.stdout
