import io
import json
import math

import pytest

from lqanalysis.cli import main


def run(*argv):
    buf = io.StringIO()
    code = main(list(argv), out=buf)
    return code, buf.getvalue()


def test_thresholds_round_trip_values():
    code, text = run("thresholds")
    assert code == 0
    values = [float(line.split()[-1]) for line in text.strip().splitlines()[1:]]
    assert values[2] == math.sqrt(2 / 3) or values[2] == pytest.approx(math.sqrt(2 / 3), abs=1e-15)
    assert repr(values[0]) in text


def test_thresholds_csv(tmp_path):
    assert run("thresholds", "--out", str(tmp_path))[0] == 0
    lines = (tmp_path / "thresholds.csv").read_text().splitlines()
    assert lines[0] == "q,t,kappa,rho,rip_order,threshold" and len(lines) == 7


def test_recover_and_outputs(tmp_path):
    code, text = run("recover", "--m", "30", "--n", "50", "--d", "40", "--l", "30", "--out", str(tmp_path))
    assert code == 0 and "success True" in text
    assert (tmp_path / "recovery.csv").exists()


def test_infeasible_configuration_exit_code(capsys):
    assert run("recover", "--l", "500")[0] == 2
    assert run("certify", "--n", "40", "--d", "30", "--s", "20")[0] == 2


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"m": 30, "n": 50, "d": 40, "l": 30, "q": 1.0}))
    code, text = run("recover", "--config", str(cfg), "--q", "0.5")
    assert code == 0
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"nonsense": 1}))
    assert run("recover", "--config", str(bad))[0] == 2


def test_phase_deterministic(tmp_path):
    args = ["phase", "--values", "20,30", "--fixed", "20", "--n", "36", "--d", "30", "--reps", "2"]
    a = run(*args, "--out", str(tmp_path / "a"))
    b = run(*args, "--out", str(tmp_path / "b"))
    assert a == b and a[0] == 0
    assert (tmp_path / "a" / "phase.svg").read_bytes() == (tmp_path / "b" / "phase.svg").read_bytes()


def test_certify_and_phantom():
    code, text = run("certify", "--seed", "1")
    assert code == 0 and "verdict=" in text
    code, text = run("phantom", "--size", "16", "--lines", "8")
    assert code == 0 and "exact True" in text


def test_internal_error_exit_code(monkeypatch):
    import lqanalysis.cli as cli

    def boom(o, out):
        raise RuntimeError("boom")

    monkeypatch.setitem(cli.COMMANDS, "thresholds", boom)
    assert run("thresholds")[0] == 1
