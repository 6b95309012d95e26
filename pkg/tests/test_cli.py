import json
import math

import numpy as np
import pytest

from halphen_lab import cli, frobenius, qseries
from halphen_lab.report import Check, Report, dumps


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def complex_of(d):
    return complex(d["re"], d["im"])


def test_series_csv(capsys):
    code, out, _ = run(capsys, "series", "--name", "E2", "--order", "2", "--format", "csv")
    assert code == 0
    assert out.splitlines() == ["0,1,1", "1,-24,1", "2,-72,1"]


def test_series_order_zero(capsys):
    code, out, _ = run(capsys, "series", "--name", "E6", "--order", "0")
    assert code == 0
    assert out.splitlines() == ["0,1,1"]


def test_series_json_round_trip(capsys):
    code, out, _ = run(capsys, "series", "--name", "E4", "--order", "12", "--format", "json")
    assert code == 0
    assert json.loads(out)["schema"] == "halphen-lab/1"
    assert cli.series_from_json(out) == qseries.eisenstein(4, 12)


def test_global_flags_before_subcommand(capsys):
    code, out, _ = run(capsys, "--json", "--order", "3", "series", "--name", "E2")
    assert code == 0
    assert json.loads(out)["order"] == 3


def test_eval_e4(capsys):
    code, out, _ = run(capsys, "eval", "--fn", "E4", "--tau", "0,2", "--json")
    assert code == 0
    value = complex_of(json.loads(out)["value"])
    assert abs(value - qseries.evaluate_value(qseries.eisenstein(4, 64), 2j)) < 1e-15


def test_eval_theta_and_constants(capsys):
    code, out, _ = run(capsys, "eval", "--fn", "theta", "--tau", "0,2", "--k", "3", "--json")
    assert code == 0
    assert abs(complex_of(json.loads(out)["value"]) - 1.003734885487739091) < 1e-15
    code, out, _ = run(capsys, "eval", "--fn", "ek", "--tau", "0.3,1.1", "--json")
    es = [complex_of(v) for v in json.loads(out)["value"]]
    assert abs(sum(es)) < 1e-10
    code, out, _ = run(capsys, "eval", "--fn", "wp", "--tau", "0,1", "--z", "0.25,0.1")
    assert code == 0 and out.strip().endswith("j")


def test_integrate_zero_length_path(capsys):
    code, out, _ = run(capsys, "integrate", "--system", "halphen", "--from", "0,2", "--to", "0,2", "--json")
    assert code == 0
    data = json.loads(out)
    assert data["final"] == data["initial"]
    assert data["accepted"] == 0


def test_integrate_ramanujan_from_series(capsys):
    code, out, _ = run(capsys, "integrate", "--system", "ramanujan", "--from", "0,2", "--to", "0.3,2", "--json")
    assert code == 0
    final = np.array([complex_of(v) for v in json.loads(out)["final"]])
    target = np.array([qseries.evaluate_value(qseries.eisenstein(w, 64), 2j + 0.3) for w in (2, 4, 6)])
    assert np.max(np.abs(final - target)) < 1e-7


def test_integrate_explicit_init_and_trajectory(capsys):
    code, out, _ = run(
        capsys, "integrate", "--system", "chazy", "--param", "time", "--from", "0", "--to", "0.1",
        "--init", "[0.1, {\"re\": 0, \"im\": 0.2}, [0.3, 0]]", "--trajectory", "--json",
    )
    assert code == 0
    data = json.loads(out)
    assert data["trajectory"][0]["t"] == {"re": 0.0, "im": 0.0}
    assert data["status"] == "ok"


def test_integrate_blowup_exit_code(capsys):
    code, out, _ = run(
        capsys, "integrate", "--system", "halphen", "--param", "time", "--from", "0", "--to", "5",
        "--init", "[-1, -1, -1]", "--json",
    )
    assert code == 1
    assert json.loads(out)["status"] == "error"


def test_integrate_max_steps_env(capsys, monkeypatch):
    monkeypatch.setenv("HALPHEN_MAX_STEPS", "2")
    code, out, _ = run(capsys, "integrate", "--system", "ramanujan", "--from", "0,2", "--to", "0.3,2", "--json")
    assert code == 1
    assert "max_steps" in json.loads(out)["message"]


@pytest.mark.parametrize(
    "argv",
    [
        ["eval", "--fn", "wp", "--tau", "0,-1"],
        ["eval", "--fn", "wp", "--tau", "abc"],
        ["verify", "--suite", "nope"],
        ["integrate", "--system", "halphen", "--from", "0,2", "--to", "0,3", "--init", "[1, 2]"],
        ["integrate", "--system", "halphen", "--from", "0,2", "--to", "0,3", "--init", "not json"],
        ["integrate", "--system", "halphen", "--param", "time", "--from", "0", "--to", "1"],
        ["frobenius", "--t1", "0", "--t2", "0", "--t3", "0,2"],
        ["eval", "--fn", "wp", "--tau", "0,1", "--z", "0"],
        ["series", "--name", "E2", "--order", "-1"],
        [],
    ],
)
def test_usage_errors_exit_2(capsys, argv):
    code, _, _ = run(capsys, *argv)
    assert code == 2


def test_frobenius_command(capsys):
    code, out, _ = run(capsys, "frobenius", "--t1", "0", "--t2", "1", "--t3", "0,2", "--json")
    assert code == 0
    data = json.loads(out)
    assert set(data) >= {"F", "C", "g", "charpoly", "u", "M", "residuals"}
    coeffs = [complex_of(c) for c in data["charpoly"]]
    u = [complex_of(c) for c in data["u"]]
    scale = max(1.0, max(abs(c) for c in coeffs))
    assert max(abs(np.polyval(coeffs, x)) for x in u) / scale < 1e-10
    assert data["residuals"]["charpoly_at_u"] < 1e-10
    expected = frobenius.canonical_coords(frobenius.FlatPoint(0, 1, 2j)).as_array()
    assert np.allclose(u, expected, atol=1e-15)


def test_connections_command(capsys):
    code, out, _ = run(capsys, "connections", "--tau", "0,2", "--json")
    assert code == 0
    data = json.loads(out)
    assert set(data["wirtinger"]) == {"[0;0]", "[1;0]", "[0;1]"}
    assert abs(complex_of(data["klein_invariant"])) < 1e-7
    assert data["serre_checks"]["serre2_E4_plus_E6_over_3_is_zero"] is True


def test_verify_single_suite(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "ramanujan", "--order", "64", "--json")
    assert code == 0
    data = json.loads(out)
    assert data["summary"]["status"] == "pass"
    ids = [c["id"] for c in data["checks"]]
    assert ids == sorted(ids)
    exact = next(c for c in data["checks"] if c["id"] == "ramanujan.series_relations")
    assert exact["residual"] == 0 and exact["tolerance"] == 0


def test_verify_all_is_deterministic(capsys):
    code1, out1, _ = run(capsys, "verify", "--suite", "all", "--json")
    code2, out2, _ = run(capsys, "verify", "--suite", "all", "--json")
    assert out1 == out2
    data = json.loads(out1)
    assert data["summary"]["total"] >= 25
    assert all(c["runtime_ms"] is None for c in data["checks"])
    statuses = {c["id"]: c["status"] for c in data["checks"]}
    assert statuses["frobenius.change_of_basis_printed_z"] == "flagged"
    assert statuses["frobenius.omega_first_line_printed"] == "flagged"
    # exit code follows the summary
    assert code1 == (0 if data["summary"]["status"] == "pass" else 1)


def test_verify_text_output(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "chazy")
    assert code == 0
    assert out.strip().splitlines()[-1].startswith("4 checks")


def test_timings_flag(capsys):
    _, out, _ = run(capsys, "verify", "--suite", "chazy", "--json", "--timings")
    assert all(isinstance(c["runtime_ms"], float) for c in json.loads(out)["checks"])


def test_dumps_formatting():
    text = dumps({"a": 0.1, "b": [1 + 2j, float("nan")], "c": {"x": 1.0}})
    assert json.loads(text) == {"a": 0.1, "b": [{"re": 1.0, "im": 2.0}, None], "c": {"x": 1.0}}
    assert dumps({"v": math.pi}) == dumps({"v": math.pi})
    assert "3.1415926535897931" in dumps({"v": math.pi})


def test_report_summary():
    r = Report("x", "0", {}, [Check("b", "r", "pass", 0.0, 1.0), Check("a", "r", "fail", 2.0, 1.0)])
    d = r.as_dict()
    assert [c["id"] for c in d["checks"]] == ["a", "b"]
    assert d["summary"] == {"total": 2, "passed": 1, "failed": 1, "flagged": 0, "status": "fail"}
    assert not r.ok


def test_verify_connections_only_stated_order_fails(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "connections", "--tau", "0,2", "--json")
    checks = json.loads(out)["checks"]
    failing = [c["id"] for c in checks if c["status"] == "fail"]
    assert failing == ["connections.wirtinger_stated_order"]
    assert code == 1
