import json
import math
import subprocess
import sys

import pytest

from horofarey.cli import (
    EXIT_FAIL,
    EXIT_PASS,
    EXIT_RESOURCE,
    EXIT_UNSUPPORTED,
    EXIT_USAGE,
    main,
)


def test_farey_counts(capsys):
    assert main(["farey", "--d", "2", "--Q", "3"]) == EXIT_PASS
    out = capsys.readouterr().out
    assert "exact count   4" in out
    assert "1.46216361498" in out  # 12 significant digits


def test_farey_csv_output(tmp_path, capsys):
    out = tmp_path / "f.csv"
    assert main(["farey", "--d", "2", "--Q", "5", "--out", str(out)]) == EXIT_PASS
    assert out.read_text().startswith("q,p1")


def test_missing_flags_is_usage_error():
    assert main(["farey", "--d", "2"]) == EXIT_USAGE
    assert main(["bogus"]) == EXIT_USAGE
    assert main([]) == EXIT_USAGE


def test_resource_cap_exit_code(tmp_path):
    code = main(["farey", "--d", "8", "--Q", "100", "--out", str(tmp_path / "x.csv")])
    assert code == EXIT_RESOURCE


def test_reference_builds_and_caches(tmp_path, capsys):
    args = ["reference", "--kind", "case_b_mc", "--d", "2", "--sigma", "0",
            "--observable", "sv", "--n", "2000", "--seed", "7",
            "--cache-dir", str(tmp_path)]
    assert main(args) == EXIT_PASS
    first = capsys.readouterr().out
    assert main(args) == EXIT_PASS  # cache hit, identical quantiles
    second = capsys.readouterr().out
    keep = [ln for ln in first.splitlines() if ln.startswith("q")]
    assert keep == [ln for ln in second.splitlines() if ln.startswith("q")]


def test_reference_unsupported_dimension(capsys):
    code = main(["reference", "--kind", "case_b_mc", "--d", "4",
                 "--n", "2000", "--seed", "7"])
    assert code == EXIT_UNSUPPORTED
    assert "unsupported" in capsys.readouterr().err


def test_experiment_schema_flag(capsys):
    assert main(["experiment", "--schema"]) == EXIT_PASS
    schema = json.loads(capsys.readouterr().out)
    assert schema["properties"]["case"]["enum"] == ["case_a", "case_b", "joint"]


def test_experiment_requires_config(capsys):
    assert main(["experiment"]) == EXIT_USAGE


def test_experiment_run_passes(tmp_path, capsys):
    cfg = {"case": "case_b", "d": 2, "Q": 300, "seed": 2, "n_reference": 20000,
           "output": str(tmp_path)}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    assert main(["experiment", str(path), "--no-plot"]) == EXIT_PASS
    out = capsys.readouterr().out
    assert "verdict       PASS" in out
    assert (tmp_path / "case_b_seed2_samples.csv").exists()
    assert not (tmp_path / "case_b_seed2.png").exists()


def test_experiment_renders_figure_by_default(tmp_path, capsys):
    cfg = {"case": "case_b", "d": 2, "Q": 50, "seed": 3, "n_reference": 2000,
           "output": str(tmp_path)}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    code = main(["experiment", str(path)])
    assert code in (EXIT_PASS, EXIT_FAIL)  # tiny Q is descriptive only
    assert (tmp_path / "case_b_seed3.png").exists()


def test_experiment_schema_violation(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"case": "case_b", "d": 2, "seed": 1, "nope": True}))
    assert main(["experiment", str(path)]) == EXIT_USAGE


def test_experiment_rational_shear_refused(tmp_path, capsys):
    cfg = {"case": "case_a", "d": 2, "Q": 100, "seed": 1, "shear": 1.0,
           "n_reference": 2000, "output": str(tmp_path)}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    assert main(["experiment", str(path)]) == EXIT_USAGE
    assert "irrational" in capsys.readouterr().err


def test_experiment_joint_unsupported_dimension(tmp_path):
    cfg = {"case": "joint", "d": 3, "seed": 1, "shear": [[1.0, 0.0], [0.0, 1.0]],
           "shear_is_irrational": True, "output": str(tmp_path)}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    assert main(["experiment", str(path)]) == EXIT_UNSUPPORTED


def test_experiment_flag_overrides(tmp_path, capsys):
    cfg = {"case": "case_b", "d": 2, "Q": 50, "seed": 3, "n_reference": 2000,
           "output": str(tmp_path)}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    main(["experiment", str(path), "--no-plot", "--seed", "99"])
    assert (tmp_path / "case_b_seed99.json").exists()


def test_proofscan_quick(capsys):
    assert main(["proofscan", "--trials", "200", "--seed", "1"]) == EXIT_PASS
    assert "ALL-PASS" in capsys.readouterr().out


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "horofarey.cli", "farey",
                           "--d", "2", "--Q", "3"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "exact count   4" in proc.stdout
