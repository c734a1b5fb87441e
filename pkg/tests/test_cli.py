import json
import subprocess
import sys

import pytest

from hybridleg.cli import main, replay


def run(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_delay_law(capsys):
    code, out, _ = run(["delay-law", "--mass", "2"], capsys)
    assert code == 0 and out.startswith("35.9 ms")
    code, _, err = run(["delay-law", "--mass", "0"], capsys)
    assert code == 2 and "--mass" in err


@pytest.mark.parametrize("argv, flag", [
    (["drop", "--lambda", "1.5"], "--lambda"),
    (["drop", "--delay-ms", "-5"], "--delay-ms"),
    (["drop", "--duty", "0"], "--duty"),
    (["drop", "--freq", "0"], "--freq"),
    (["step", "--delay-ms", "0.5", "--dt", "0.001"], "--dt"),
    (["poles", "--lambda", "-0.1"], "--lambda"),
    (["quadruped", "--case", "9"], "--case"),
])
def test_invalid_flags_exit_2(argv, flag, capsys):
    code, _, err = run(argv, capsys)
    assert code == 2 and flag in err


def test_help_and_unknown_command(capsys):
    assert run(["--help"], capsys)[0] == 0
    assert run(["nonsense"], capsys)[0] == 2


def test_poles_stdout(capsys):
    code, out, _ = run(["poles", "--lambda", "0.7", "--delay-ms", "20"], capsys)
    lines = out.strip().splitlines()
    assert code == 0 and lines[0] == "t_d,lambda,re,im" and len(lines) == 6


def test_step_reports_classification(capsys):
    code, out, err = run(["step", "--lambda", "0.7", "--delay-ms", "20"], capsys)
    assert code == 0 and "classification: settled" in err
    assert out.splitlines()[0] == "t,theta"


def test_drop_writes_outputs_and_manifest(tmp_path, capsys):
    code, out, _ = run(["drop", "--out", str(tmp_path)], capsys)
    assert code == 0 and out.startswith("viable")
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["command"] == "drop"
    assert manifest["outputs"] == ["trajectory.csv", "verdict.json"]
    assert manifest["parameters"]["lambda_"] == 1.0
    verdict = json.loads((tmp_path / "verdict.json").read_text())
    assert verdict["viable"] and set(verdict["band_sensitivity"]) == {"0.02", "0.05", "0.1"}


def test_replay_is_byte_identical(tmp_path, capsys):
    first, second = tmp_path / "a", tmp_path / "b"
    assert main(["drop", "--lambda", "0.4", "--delay-ms", "15", "--freq", "100",
                 "--out", str(first)]) == 0
    assert replay(first / "manifest.json", second) == 0
    capsys.readouterr()
    for name in ("trajectory.csv", "verdict.json"):
        assert (first / name).read_bytes() == (second / name).read_bytes()


def test_config_file_supplies_defaults(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"lambda": 0.0, "delay-ms": 30}))
    code, out, _ = run(["drop", "--config", str(cfg)], capsys)
    assert code == 0 and "slow_settling" in out
    code, out, _ = run(["drop", "--config", str(cfg), "--delay-ms", "0"], capsys)
    assert out.startswith("viable")
    cfg.write_text(json.dumps({"bogus": 1}))
    assert run(["drop", "--config", str(cfg)], capsys)[0] == 2


def test_compare(tmp_path, capsys):
    main(["drop", "--out", str(tmp_path / "a")])
    main(["drop", "--lambda", "0.5", "--out", str(tmp_path / "b")])
    capsys.readouterr()
    code, out, _ = run(["compare", str(tmp_path / "a/trajectory.csv"),
                        str(tmp_path / "a/trajectory.csv")], capsys)
    assert code == 0 and float(out) == 0.0
    code, out, _ = run(["compare", str(tmp_path / "a/trajectory.csv"),
                        str(tmp_path / "b/trajectory.csv")], capsys)
    assert code == 0 and float(out) >= 0.0
    assert run(["compare", str(tmp_path / "missing.csv"), str(tmp_path / "a/trajectory.csv")],
               capsys)[0] == 2


def test_sweep_small_grid(tmp_path, capsys):
    grid = tmp_path / "grid.json"
    grid.write_text(json.dumps({"lambdas": [0.0, 1.0], "delays_ms": [0, 30],
                                "frequencies_hz": [1000], "duty_cycles": [1.0]}))
    code, out, _ = run(["sweep", "--grid", str(grid), "--out", str(tmp_path / "s"),
                        "--workers", "1"], capsys)
    assert code == 0 and out.startswith("4 cells, 3 viable")
    rows = (tmp_path / "s/viability.csv").read_text().splitlines()
    assert len(rows) == 5
    grid.write_text(json.dumps({"lambdas": [2.0]}))
    assert run(["sweep", "--grid", str(grid), "--out", str(tmp_path / "t")], capsys)[0] == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "hybridleg", "delay-law", "--mass", "0.6"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0 and res.stdout.startswith("27.8 ms")
