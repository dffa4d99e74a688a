import csv
import io
import json
import subprocess
import sys

import pytest

from quditlab.cli import EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, ExperimentConfig, main, run
from quditlab.errors import InvalidInput

SUBCOMMANDS = [["bell"], ["witness"], ["steering"], ["randomness"], ["tomo"], ["qkd"], ["circuit", "compile"],
               ["reproduce"], ["run"]]


def call(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize("sub", SUBCOMMANDS)
def test_help(capsys, sub):
    code, out, _ = call(capsys, *sub, "--help")
    assert code == EXIT_OK and "usage" in out


def test_bell_golden(capsys):
    code, out, _ = call(capsys, "bell", "--d", "3", "--inequality", "satwap")
    obj = json.loads(out)
    assert code == 0 and obj["value"] == pytest.approx(4.0, abs=1e-8)
    assert obj["classical_bound"] == pytest.approx(3.098, abs=5e-4)


def test_bell_qutrit_alias(capsys):
    code, out, _ = call(capsys, "bell", "--inequality", "xi", "--xi", "1")
    assert code == 0 and json.loads(out)["value"] == pytest.approx(2.9149, abs=1e-4)


def test_bell_sampled_std(capsys):
    code, out, _ = call(capsys, "bell", "--d", "2", "--shots", "10000", "--seed", "1")
    assert code == 0 and json.loads(out)["std"] == pytest.approx(0.01, rel=0.3)


def test_witness_golden(capsys):
    code, out, _ = call(capsys, "witness", "--scenario", "II", "--d", "15")
    assert code == 0 and json.loads(out)["certified_dim"] == 15


def test_steering_randomness_qkd(capsys):
    assert json.loads(call(capsys, "steering", "--d", "4")[1])["beta"] == pytest.approx(2)
    assert json.loads(call(capsys, "randomness", "--d", "3")[1])["min_entropy_bits"] == pytest.approx(1.585, abs=0.02)
    assert json.loads(call(capsys, "qkd", "--d", "14", "--fidelity", "1")[1])["R_sk"] == pytest.approx(1.90368, abs=1e-5)


def test_tomo_and_circuit(capsys):
    code, out, _ = call(capsys, "tomo", "--d", "2", "--method", "linear")
    assert code == 0 and json.loads(out)["fidelity"] == pytest.approx(1, abs=1e-9)
    code, out, _ = call(capsys, "circuit", "compile", "--vector", "1,1")
    assert code == 0 and "mzi_phases" in out


def test_reproduce_csv(capsys):
    code, out, _ = call(capsys, "reproduce", "table1")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["d", "cglmp_bound", "cglmp_ideal", "satwap_bound", "satwap_ideal"]
    assert len(rows) == 8 and float(rows[2][4]) == pytest.approx(4.0)
    assert "\r\n" in out


def test_reproduce_compare(capsys):
    code, out, _ = call(capsys, "reproduce", "qkd", "--compare")
    assert code == 0 and all(r["passed"] for r in json.loads(out)["reports"])


def test_byte_identical_runs(capsys, tmp_path):
    argv = ["bell", "--d", "3", "--shots", "2000", "--seed", "7", "--noise", "werner:v=0.9,jitter:s=0.02"]
    a = call(capsys, *argv)[1]
    b = call(capsys, *argv)[1]
    assert a == b
    f1, f2 = tmp_path / "a.csv", tmp_path / "b.csv"
    main(argv + ["--format", "csv", "--out", str(f1)])
    main(argv + ["--format", "csv", "--out", str(f2)])
    assert f1.read_bytes() == f2.read_bytes()


def test_exit_codes(capsys):
    assert call(capsys, "bell", "--d", "1")[0] == EXIT_USAGE
    assert call(capsys, "nope")[0] == EXIT_USAGE
    assert call(capsys, "bell", "--d", "two")[0] == EXIT_USAGE
    assert call(capsys, "randomness", "--d", "2", "--beta", "2.5")[0] == EXIT_NUMERIC
    assert call(capsys, "run", "--config", "/nonexistent.json")[0] == EXIT_USAGE


def test_run_config(capsys, tmp_path):
    cfg = {"subcommand": "bell", "d": 3, "params": {"inequality": "satwap"}}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    code, out, _ = call(capsys, "run", "--config", str(path))
    assert code == 0 and json.loads(out)["value"] == pytest.approx(4.0)
    assert run(ExperimentConfig.from_dict({"subcommand": "reproduce", "params": {"table": "qkd"}})) == 0
    capsys.readouterr()


def test_config_rejects_unknown_keys(capsys, tmp_path):
    with pytest.raises(InvalidInput):
        ExperimentConfig.from_dict({"subcommand": "bell", "colour": "red"})
    with pytest.raises(InvalidInput):
        ExperimentConfig.from_dict({"subcommand": "run"})
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"subcommand": "bell", "shotz": 5}))
    assert call(capsys, "run", "--config", str(path))[0] == EXIT_USAGE


def test_console_entry_point():
    r = subprocess.run([sys.executable, "-m", "quditlab.cli", "qkd", "--d", "2", "--fidelity", "0.9978"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and json.loads(r.stdout)["I_AB"] == pytest.approx(0.9774, abs=1e-4)
