import json
import os
import subprocess
from pathlib import Path

import pytest

CLI = os.environ["IGABEM_CLI"]
MODELS = Path(os.environ["IGABEM_MODELS_DIR"])


def run(*args, env=None):
    return subprocess.run([CLI, *map(str, args)], capture_output=True, text=True, env=env)


def test_solve_writes_files(tmp_path):
    r = run("solve", MODELS / "example1.json", "-o", tmp_path)
    assert r.returncode == 0, r.stderr
    for name in ("results.json", "probes.csv"):
        assert (tmp_path / name).exists()
    assert (tmp_path / "probes.csv").read_text().splitlines()[1].startswith("id,x,y,z,ux,uy,uz")


def test_missing_model_exits_2(tmp_path):
    r = run("solve", tmp_path / "nope.json", "-o", tmp_path)
    assert r.returncode == 2
    assert "nope.json" in r.stderr


def test_bad_model_exits_2(tmp_path):
    bad = tmp_path / "bad.json"
    data = json.loads((MODELS / "example1.json").read_text())
    data["inclusions"]["linear"][0]["radius"] = -1
    bad.write_text(json.dumps(data))
    r = run("solve", bad, "-o", tmp_path / "out")
    assert r.returncode == 2
    assert "/inclusions/linear/0/radius" in r.stderr


def test_bad_method_exits_2(tmp_path):
    assert run("solve", MODELS / "example1.json", "-o", tmp_path, "--method", "cg").returncode == 2


def test_override_in_provenance(tmp_path):
    r = run("solve", MODELS / "example1.json", "-o", tmp_path, "--method", "newton", "--tol", "1e-8", "--json")
    assert r.returncode == 0, r.stderr
    summary = json.loads(r.stdout)
    assert summary["method"] == "newton"
    prov = json.loads((tmp_path / "results.json").read_text())["provenance"]
    assert prov["method"] == "newton"
    assert prov["tol"] == 1e-8
    assert prov["overrides"] == {"method": "newton", "tol": "1e-08"}


def test_rerun_byte_identical_any_thread_count(tmp_path):
    for model in ("example1.json", "example2.json"):
        outs = []
        for i, threads in enumerate((1, 1, 3)):
            out = tmp_path / f"{model}-{i}"
            assert run("solve", MODELS / model, "-o", out, "--threads", threads).returncode == 0
            outs.append((out / "results.json").read_bytes())
        assert outs[0] == outs[1] == outs[2]


def test_sweep(tmp_path):
    r = run("sweep", MODELS / "example1.json", "-o", tmp_path, "-p", "bar_points", "--values", "3")
    assert r.returncode == 0, r.stderr
    lines = (tmp_path / "convergence.csv").read_text().splitlines()
    assert lines[0].startswith("# model_hash=")
    assert lines[1].startswith("bar_points,bar_top_ux")
    assert len(lines) == 3
    assert lines[2].startswith("3,")


def test_sweep_bad_parameter_exits_2(tmp_path):
    r = run("sweep", MODELS / "example1.json", "-o", tmp_path, "-p", "radius", "--values", "1")
    assert r.returncode == 2
    assert "radius" in r.stderr


def test_verify_and_negative_control():
    r = run("verify", "--json")
    assert r.returncode == 0
    report = json.loads(r.stdout)
    assert report["status"] == "pass"
    box = next(c for c in report["checks"] if c["id"] == "closed_box_T_identity")
    assert box["measured"] < 1e-4
    r = run("verify", "--perturb-kernel-constant", "1.01")
    assert r.returncode == 1
    assert "FAIL" in r.stdout


def test_info_json():
    r = run("info", MODELS / "example2.json", "--json")
    assert r.returncode == 0
    info = json.loads(r.stdout)
    assert info["general_inclusions"] == 1
    assert info["unknowns"] == 174


def test_log_level_env(tmp_path):
    env = dict(os.environ, IGABEM_LOG="error")
    r = run("solve", MODELS / "example1.json", "-o", tmp_path, env=env)
    assert r.returncode == 0
    assert r.stderr == ""
