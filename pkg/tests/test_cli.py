import io
import json
import subprocess
import sys

import pytest

from golden_cases import CASES, FIXTURES, GOLDEN, argv_for, render
from mltmf.cli import SCHEMA, run


def call(*argv):
    buf = io.StringIO()
    code = run(list(argv), buf)
    return code, buf.getvalue()


def report(*argv):
    code, text = call(*argv, "--format", "json")
    doc = json.loads(text)
    assert doc["schema"] == SCHEMA and doc["exit_code"] == code
    return code, doc["result"]


def fx(name):
    return str(FIXTURES / name)


@pytest.mark.parametrize("name", sorted(CASES))
def test_golden_reports(name):
    code, text = render(name)
    assert code == CASES[name][0]
    assert text == (GOLDEN / f"{name}.json").read_text()


@pytest.mark.parametrize("name", sorted(CASES))
def test_reports_repeat_byte_for_byte(name):
    assert render(name) == render(name)


def test_self_application_is_input_error():
    code, result = report("check", "--sig", fx("signature.json"), "P(P(x))")
    assert code == 2
    assert result["formulas"][0]["findings"][0]["kind"] == "self_application"


def test_ethics_names_safe_subset():
    code, result = report("ethics", "--formulas", fx("ethics_outputs.json"),
                          "--constraint", fx("ethics_constraint.json"), "--mode", "exact")
    assert code == 0
    assert "p1" in json.dumps(result)
    assert result["safe_subset"] == ["p1", "p3", "p5"]


def test_subset_bound_is_zero():
    code, result = report("genbound", "--model", fx("genbound_subset_model.json"),
                          "--query", fx("genbound_query.json"))
    assert code == 0 and result["bound"] == 0


def test_negative_verdicts_carry_reason_codes():
    for name, (expected, _) in CASES.items():
        if expected != 1:
            continue
        code, text = render(name)
        assert code == 1
        assert json.loads(text)["result"]["reasons"], name


def test_budget_exceeded_exit_code():
    code, result = report("entail", "--problem", fx("entail_problem.json"), "--budget-atoms", "1")
    assert code == 3
    assert result["reasons"]


def test_missing_file_is_input_error():
    code, result = report("interpret", fx("no_such_file.json"))
    assert code == 2 and result["reasons"] == ["INPUT"]


def test_bad_budget_value_rejected():
    assert call("entail", "--problem", fx("entail_problem.json"), "--budget-atoms", "0")[0] == 2


def test_unknown_subcommand():
    assert call("frobnicate")[0] == 2


def test_text_output_has_no_color_when_piped():
    code, text = call("genbound", "--model", fx("genbound_model.json"), "--query", fx("genbound_query.json"))
    assert code == 0
    assert text.startswith("genbound: ok\n")
    assert "\033[" not in text


class _Tty(io.StringIO):
    def isatty(self):
        return True


def test_color_switch(monkeypatch):
    argv = ["entail", "--problem", fx("entail_problem.json")]
    monkeypatch.delenv("MLTMF_NO_COLOR", raising=False)
    tty = _Tty()
    run(argv, tty)
    assert "\033[32m" in tty.getvalue()
    monkeypatch.setenv("MLTMF_NO_COLOR", "1")
    tty = _Tty()
    run(argv, tty)
    assert "\033[" not in tty.getvalue()


def test_seed_changes_random_check():
    a = call("check", "--random", "30", "--seed", "1", "--format", "json")
    b = call("check", "--random", "30", "--seed", "1", "--format", "json")
    assert a == b and a[0] == 0


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "mltmf", *argv_for("genbound_subset")],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout == (GOLDEN / "genbound_subset.json").read_text()
