import json
import subprocess
import sys

import pytest

from g2kummer import cli


def run(argv, tmp_path, name="r.json"):
    out = tmp_path / name
    code = cli.main(list(argv) + ["--json", str(out)])
    return code, json.loads(out.read_text()) if out.exists() else None


def strip_volatile(report):
    out = {k: v for k, v in report.items() if k not in ("timestamp", "timings")}
    out["config"] = {k: v for k, v in report["config"].items() if k != "output"}
    return out


@pytest.mark.parametrize("suite", ["group", "forms", "rep", "contraction", "dolbeault"])
def test_fast_suites_pass(suite, tmp_path):
    code, rep = run([suite], tmp_path)
    assert code == 0
    assert rep["summary"]["fail"] == 0
    assert rep["checks"]


def test_report_schema(tmp_path):
    code, rep = run(["group"], tmp_path)
    assert set(rep) == {"schema", "tool_version", "timestamp", "config", "warnings", "checks",
                        "summary", "timings"}
    assert rep["schema"] == cli.SCHEMA
    for c in rep["checks"]:
        assert set(c) >= {"id", "anchor", "status", "measured", "tolerance"}


def test_reports_are_deterministic(tmp_path):
    _, a = run(["rep", "--theta", "0.7", "--seed", "3"], tmp_path, "a.json")
    _, b = run(["rep", "--theta", "0.7", "--seed", "3"], tmp_path, "b.json")
    assert strip_volatile(a) == strip_volatile(b)


def test_quiver_solve(tmp_path):
    code, rep = run(["quiver", "--solve", "--zeta", "1/10,1/10,1/10,1/10,1/10,1/10,-3/5"], tmp_path)
    assert code == 0
    assert rep["config"]["zeta"][-1] == "-3/5"


def test_spectral_suite(tmp_path):
    code, rep = run(["spectral", "--theta", "0.7", "--block", "ker"], tmp_path)
    assert code == 0


def test_excluded_theta_warns(tmp_path):
    code, rep = run(["rep", "--theta", "0"], tmp_path)
    assert code == 0
    assert rep["warnings"]
    assert rep["summary"]["indeterminate"] > 0


def test_config_errors_exit_two(tmp_path, capsys):
    assert cli.main(["group", "--tol", "-1"]) == 2
    assert cli.main(["quiver", "--zeta", "1 2 3"]) == 2
    bad = tmp_path / "cfg.json"
    bad.write_text(json.dumps({"nonsense": 1}))
    assert cli.main(["group", "--config", str(bad)]) == 2


def test_config_file_values(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"thetas": ["exact:1/4"], "seed": 5}))
    code, rep = run(["rep", "--config", str(cfg)], tmp_path)
    assert code == 0
    assert rep["config"]["thetas"] == ["exact:1/4"]
    assert rep["config"]["seed"] == 5


def test_theta_parsing():
    th = cli.parse_thetas(["0.7,exact:1/4", "0.6+0.8j", "grid:2"])
    assert th[0] == 0.7 and th[1] == "exact:1/4" and th[2] == 0.6 + 0.8j
    assert len(th) == 5


def test_unknown_subcommand_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        cli.main(["nonsense"])
    assert exc.value.code == 2


def test_console_entry_point(tmp_path):
    out = tmp_path / "x.json"
    proc = subprocess.run([sys.executable, "-m", "g2kummer.cli", "group", "--json", str(out)],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(out.read_text())["summary"]["fail"] == 0
