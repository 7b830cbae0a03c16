import json
import os
import subprocess
import sys

import pytest

from kkalg.cli import (
    Params,
    SpecError,
    bundled_spec_path,
    bundled_specs,
    cmd_check,
    load_spec,
    load_spec_text,
    main,
    strip_timing,
)


def run_cli(*args, hashseed="0"):
    env = dict(os.environ, PYTHONHASHSEED=hashseed)
    proc = subprocess.run([sys.executable, "-m", "kkalg.cli", *args], capture_output=True, env=env, timeout=300)
    return proc.returncode, proc.stdout, proc.stderr.decode()


def mutated(tmp_path, old, new, name="mutant.yaml"):
    text = bundled_spec_path("green_julg_z2").read_text(encoding="utf-8")
    assert old in text
    path = tmp_path / name
    path.write_text(text.replace(old, new, 1), encoding="utf-8")
    return str(path)


def test_bundled_specs_listed(capsys):
    assert {"basics", "green_julg_z2"} <= set(bundled_specs())
    assert main(["list"]) == 0
    assert "green_julg_z2" in capsys.readouterr().out


@pytest.mark.parametrize("name,suite", [("green_julg_z2", "all"), ("basics", "all")])
def test_bundled_suites_pass(name, suite):
    spec = load_spec(name)
    report = cmd_check(spec, suite, Params())
    assert report.ok, [r.to_dict() for r in report.results if r.status == "fail"]
    assert report.summary()["pass"] == len(report.results) > 0


def test_empty_suite_passes(capsys):
    assert main(["check", "green_julg_z2", "empty", "--report", "json"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["ok"] and out["checks"] == []


def test_validate_and_run(capsys):
    assert main(["validate", "basics", "--no-timing"]) == 0
    assert "0 failed" in capsys.readouterr().out
    assert main(["run", "green_julg_z2", "green_julg", "--report", "json"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["command"] == "run" and out["ok"] and "output" in out


def test_reports_are_byte_identical_across_processes():
    args = ["check", "green_julg_z2", "all", "--report", "json", "--no-timing"]
    code1, out1, _ = run_cli(*args, hashseed="1")
    code2, out2, _ = run_cli(*args, hashseed="99")
    code3, out3, _ = run_cli(*args, "--jobs", "4", hashseed="7")
    assert code1 == code2 == code3 == 0
    assert out1 == out2 == out3
    payload = json.loads(out1)
    assert payload["parameters"]["seed"] == 0
    assert strip_timing(payload) == payload


def test_timing_fields_are_the_only_difference(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["check", "basics", "all", "--report", "json", "-o", str(a)]) == 0
    assert main(["check", "basics", "all", "--report", "json", "-o", str(b)]) == 0
    da, db = json.loads(a.read_text()), json.loads(b.read_text())
    assert "wall_time" in da["checks"][0]
    assert strip_timing(da) == strip_timing(db)


def test_corrupted_structure_constant(tmp_path, capsys):
    path = mutated(tmp_path, "[epq, eqp, {epp: 1}]", "[epq, eqp, {epp: 2}]")
    assert main(["check", path, "all", "--report", "json", "--no-timing"]) == 1
    out = json.loads(capsys.readouterr().out)
    failed = [c for c in out["checks"] if c["status"] == "fail"]
    # the broken declaration fails at load and the suite entries are skipped
    assoc = [c for c in failed if c["name"] == "algebroids.M2"]
    assert assoc and assoc[0]["witness"]["check"] == "associativity"
    assert {"x", "y", "z"} <= set(assoc[0]["witness"])
    assert out["summary"]["skipped"] == 19


def test_corrupted_homotopy(tmp_path, capsys):
    path = mutated(tmp_path, "g_inv: {p: {epq: 1}", "g_inv: {p: {epq: 3}")
    assert main(["check", path, "all", "--report", "text", "--no-timing"]) == 1
    out = capsys.readouterr().out
    line = [ln for ln in out.splitlines() if "FAIL" in ln]
    assert line and "witness:" in out


def test_parse_error_reports_position(tmp_path, capsys):
    path = tmp_path / "broken.yaml"
    path.write_text("schema: kkalg-spec/1\nname: broken\ndeclarations:\n  rings: [\n", encoding="utf-8")
    assert main(["validate", str(path)]) == 2
    err = capsys.readouterr().err
    assert "line" in err and "column" in err


def test_unresolved_reference(tmp_path, capsys):
    path = mutated(tmp_path, "source: M2\n      target: M2\n      objects: {p: p, q: q}",
                   "source: M3\n      target: M2\n      objects: {p: p, q: q}")
    assert main(["validate", path]) == 2
    assert "M3" in capsys.readouterr().err


def test_usage_errors(capsys):
    assert main(["frobnicate"]) == 2
    assert main(["check", "green_julg_z2", "no_such_suite"]) == 2
    assert main(["check", "no_such_spec_file.yaml", "all"]) == 2
    capsys.readouterr()


def test_spec_schema_is_checked():
    with pytest.raises(SpecError):
        load_spec_text("schema: other/9\nname: x\n", "x")
