import json
import subprocess
import sys
from fractions import Fraction

import pytest

from latlab import corpus
from latlab.cli import load_config, main


@pytest.fixture
def ball_file():
    return str(corpus.corpus_path("ball_d3"))


def test_volume_prints_value(ball_file, capsys):
    assert main(["volume", "--spec", ball_file]) == 0
    assert capsys.readouterr().out.strip() == "4.188790"


def test_count_prints_value(ball_file, capsys):
    assert main(["count", "--spec", ball_file, "--t", "2"]) == 0
    assert capsys.readouterr().out.strip() == "33"


def test_corpus_names_are_accepted(capsys):
    assert main(["count", "--spec", "kn_d3", "--t", "1"]) == 0
    assert capsys.readouterr().out.strip() == "7"


def test_load_config_single_scale():
    cfg = load_config(["count", "--spec", "kn_d3", "--t", "4"])
    assert cfg.command == "count" and cfg.t == 4


def test_load_config_grid():
    cfg = load_config(["sweep", "--spec", "ball_d3", "--t-min", "1", "--t-max", "100", "--t-steps", "50"])
    grid = cfg.grid()
    assert len(grid) == 50 and grid[0] == 1 and grid[-1] == 100


def test_decimal_scale_is_exact():
    assert load_config(["count", "--spec", "ball_d3", "--t", "2.5"]).t == Fraction(5, 2)


def test_missing_spec_exit_three(tmp_path, capsys):
    path = tmp_path / "nope.json"
    assert main(["volume", "--spec", str(path)]) == 3
    assert str(path) in capsys.readouterr().err


def test_malformed_spec_exit_three(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"d": 3, "blocks": [[3, 4, 4]], "ms": [1]}))
    assert main(["volume", "--spec", str(path)]) == 3
    err = capsys.readouterr().err
    assert "omegas" in err and "(0, 0)" in err
    path.write_text("{not json")
    assert main(["volume", "--spec", str(path)]) == 3


def test_conflicting_scales_exit_four():
    assert main(["count", "--spec", "ball_d3", "--t", "2", "--t-min", "1"]) == 4
    assert main(["sweep", "--spec", "ball_d3", "--t-min", "5", "--t-max", "2"]) == 4
    assert main(["count", "--spec", "ball_d3", "--t", "-1"]) == 4
    assert main(["count", "--spec", "ball_d3", "--t", "abc"]) == 4


def test_unknown_command_exit_two(capsys):
    assert main(["frobnicate", "--spec", "ball_d3"]) == 2


def test_axis_out_of_range_exit_two():
    assert main(["axis-asym", "--spec", "ball_d3", "--axis", "3"]) == 2


def test_config_file_is_merged_under_flags(tmp_path):
    conf = tmp_path / "run.json"
    conf.write_text(json.dumps({"spec": "ss4_d3", "t-min": 2, "t_max": 50, "t_steps": 30, "threads": 2}))
    cfg = load_config(["sweep", "--config", str(conf), "--t-steps", "40"])
    assert cfg.spec.name == "ss4_d3"
    assert cfg.t_min == 2 and cfg.t_max == 50
    assert cfg.t_steps == 40 and cfg.threads == 2


def test_sweep_writes_csv(tmp_path, capsys):
    out = tmp_path / "s.csv"
    assert main(["sweep", "--spec", "ball_d3", "--t-min", "1", "--t-max", "10", "--t-steps", "5", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "t,count,volume_term,remainder,normalized"
    assert len(lines) == 6


def test_fit_reports_json(tmp_path, capsys):
    out = tmp_path / "fit.json"
    assert main(["fit", "--spec", "ss4_d3", "--t-min", "2", "--t-max", "200", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["pass"] is True and doc["predicted"] == 1.5
    assert "PASS" in capsys.readouterr().out


def test_failing_check_exit_one(capsys):
    # a negative tolerance cannot be met by any fit
    assert main(["fit", "--spec", "ball_d3", "--t-min", "2", "--t-max", "40", "--t-steps", "30", "--tol", "-1"]) == 1


def test_validate_lists_terms(tmp_path):
    out = tmp_path / "v.json"
    assert main(["validate", "--spec", "kn_d3", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["overall"] == 1.75 and doc["m"][0][1] == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "latlab", "volume", "--spec", "ss4_d3"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.strip() == "6.481987"


def test_axis_asym_on_ball(capsys):
    assert main(["axis-asym", "--spec", "ball_d3"]) == 0
    assert "PASS" in capsys.readouterr().out
