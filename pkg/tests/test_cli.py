import json
import subprocess
import sys
import textwrap

import pytest

from cogradar.cli import EXIT_INVALID, EXIT_NUMERICAL, EXIT_OK, main

TINY = textwrap.dedent("""\
    name: tiny
    seed: 5
    frames: 3
    motion: {dt: 0.025}
    threat: {a: -100.0, b: 100.0, unit: 1000.0}
    asset: {position: [0.0, 0.0]}
    target: {state: [-900.0, 142.4, 0.0, 0.0]}
    initial_cov: {pos_sigma: 20.0}
    radars:
      - {id: 1, position: [5000.0, 0.0]}
      - {id: 2, position: [0.0, 5000.0]}
      - {id: 3, position: [-4000.0, -3000.0]}
    allocator: {p_threshold: 50.0, knn_k: 2}
    """)


@pytest.fixture
def tiny(tmp_path):
    path = tmp_path / "tiny.yaml"
    path.write_text(TINY)
    return path


def test_run_writes_file(tiny, tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["run", "--scenario", str(tiny), "--out", str(out), "--format", "csv"]) == EXIT_OK
    text = (out / "tiny_run_socp.csv").read_text()
    assert text.startswith("frame,allocator,trial,u_1,u_2,u_3,")
    assert len(text.splitlines()) == 4
    assert "wrote" in capsys.readouterr().out


def test_mc_to_stdout(tiny, capsys):
    assert main(["mc", "--scenario", str(tiny), "--trials", "2", "--allocator", "knn"]) == EXIT_OK
    doc = json.loads(capsys.readouterr().out)
    assert doc["allocators"] == ["knn"] and doc["trials"] == 2 and doc["seed"] == 5


def test_compare_deterministic(tiny, capsys):
    main(["compare", "--scenario", str(tiny), "--seed", "7", "--trials", "2"])
    first = capsys.readouterr().out
    main(["compare", "--scenario", str(tiny), "--seed", "7", "--trials", "2"])
    assert capsys.readouterr().out == first
    assert json.loads(first)["seed"] == 7


def test_validate(tiny, tmp_path, capsys):
    assert main(["validate", "--scenario", str(tiny), "scenario1"]) == EXIT_OK
    bad = tmp_path / "bad.yaml"
    bad.write_text(TINY.replace("a: -100.0", "a: 5.0"))
    assert main(["validate", "--scenario", str(bad)]) == EXIT_INVALID
    assert "threat.a" in capsys.readouterr().err


def test_invalid_scenario_exit_code(tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text(TINY.replace("frames: 3", "frames: -3"))
    assert main(["run", "--scenario", str(bad)]) == EXIT_INVALID
    assert main(["run", "--scenario", str(tmp_path / "missing.yaml")]) == EXIT_INVALID
    assert main(["run", "--bogus"]) == EXIT_INVALID


def test_numerical_failure_exit_code(tmp_path, capsys):
    path = tmp_path / "abort.yaml"
    path.write_text(TINY.replace("p_threshold: 50.0", "p_threshold: 1.0e-9, on_infeasible: abort"))
    assert main(["run", "--scenario", str(path)]) == EXIT_NUMERICAL
    assert "frame 1" in capsys.readouterr().err


def test_selftest_suite(capsys):
    assert main(["selftest", "--suite", "restriction", "--suite", "scaling"]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.count("PASS") == 2


def test_console_entry_point(tiny):
    proc = subprocess.run([sys.executable, "-m", "cogradar.cli", "validate", "--scenario", str(tiny)],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "ok:" in proc.stdout
