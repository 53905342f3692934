import json
import subprocess
import sys

import pytest

from dpodsim import cli

TINY = """\
subcarriers: {fft_size: 64, data_size: 48, lower_guard: 8, upper_guard: 8}
modulation: {order: 16}
algorithms:
  - {name: none, kind: none}
  - {name: k, kind: kernel, memory: [0], degree: 3}
training: {snr_db: 50, symbols: 4}
sweep: {snr_db: [15], trials: 2, symbols_per_trial: 1}
"""


@pytest.fixture
def tiny(tmp_path):
    path = tmp_path / "tiny.yaml"
    path.write_text(TINY)
    return path


def test_simulate_to_stdout(tiny, capsys):
    assert cli.main(["simulate", "--config", str(tiny), "--seed", "1"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith("snr_db,algorithm")
    assert len(out) == 3


def test_simulate_overrides_and_output(tiny, tmp_path):
    out = tmp_path / "ber.csv"
    cli.main(["simulate", "--config", str(tiny), "--snr", "10:5:20", "--algorithms", "none",
              "--trials", "1", "--output", str(out)])
    rows = out.read_text().splitlines()[1:]
    assert [r.split(",")[0] for r in rows] == ["10", "15", "20"]
    assert all(",none," in r and r.split(",")[7] == "1" for r in rows)
    cli.main(["simulate", "--config", str(tiny), "--algorithms", "none", "--output", str(out), "--append"])
    assert len(out.read_text().splitlines()) == 5


def test_unknown_algorithm_exits(tiny):
    with pytest.raises(SystemExit):
        cli.main(["simulate", "--config", str(tiny), "--algorithms", "nope"])


def test_train_then_simulate_with_models(tiny, tmp_path, capsys):
    models = tmp_path / "m.json"
    assert cli.main(["train", "--config", str(tiny), "--seed", "2", "--model-out", str(models)]) == 0
    assert set(json.loads(models.read_text())["models"]) == {"none", "k"}
    cli.main(["simulate", "--config", str(tiny), "--seed", "2"])
    fresh = capsys.readouterr().out
    cli.main(["simulate", "--config", str(tiny), "--seed", "2", "--models", str(models)])
    assert capsys.readouterr().out == fresh


def test_models_file_must_cover_algorithms(tiny, tmp_path):
    models = tmp_path / "m.json"
    cli.main(["train", "--config", str(tiny), "--algorithms", "none", "--model-out", str(models)])
    with pytest.raises(SystemExit):
        cli.main(["simulate", "--config", str(tiny), "--models", str(models)])


def test_selftest_exit_code(capsys):
    assert cli.main(["selftest"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and out.count("PASS") >= 7


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "dpodsim", "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    assert "simulate" in res.stdout and "selftest" in res.stdout


def test_parser_rejects_unknown_preset():
    with pytest.raises(SystemExit):
        cli.build_parser().parse_args(["simulate", "--preset", "huge"])
