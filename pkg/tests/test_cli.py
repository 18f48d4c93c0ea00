import subprocess
import sys

import pytest
import yaml

from critmetrics.cli import EXIT_DATA, EXIT_OK, EXIT_USAGE, main

from fixtures import linear_ttc_csv

LEFT_TURN_SUITABLE = "BTN, CI, CPI, LatJ, LongJ, P-MC, P-SMH, P-SRS, PET, PrET, STN, a_lat_req, a_long_req, a_req"


@pytest.fixture
def files(tmp_path):
    data = tmp_path / "data.csv"
    data.write_text(linear_ttc_csv(dt=0.5))
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text(
        yaml.safe_dump(
            {
                "distance_mode": "center",
                "metrics": ["TTC", {"id": "TET", "params": {"tau": 3}}],
                "filter": {"targets": [{"metric": "TTC", "value": 3}]},
            }
        )
    )
    return tmp_path, cfg, data


def test_no_arguments_is_a_usage_error(capsys):
    assert main([]) == EXIT_USAGE
    assert "usage" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [["frobnicate"], ["compute", "a.yaml"], ["suitability", "default", "left_turn", "--bogus"]])
def test_bad_usage(argv, capsys):
    assert main(argv) == EXIT_USAGE
    assert "usage" in capsys.readouterr().err


def test_suitability_default(tmp_path):
    out = tmp_path / "report.txt"
    assert main(["suitability", "default", "left_turn", "-o", str(out)]) == EXIT_OK
    assert out.read_text().splitlines()[-1] == f"Suitable metrics (14): {LEFT_TURN_SUITABLE}"


def test_suitability_with_shipped_files(tmp_path, capsys):
    from importlib import resources

    kb = resources.files("critmetrics").joinpath("data/default_kb.yaml")
    reqs = resources.files("critmetrics").joinpath("data/left_turn_requirements.yaml")
    assert main(["suitability", str(kb), str(reqs)]) == EXIT_OK
    assert capsys.readouterr().out.rstrip().endswith(LEFT_TURN_SUITABLE)


def test_suitability_empty_requirements_is_a_data_error(tmp_path):
    reqs = tmp_path / "r.yaml"
    reqs.write_text("requirements: []\n")
    assert main(["suitability", "default", str(reqs)]) == EXIT_DATA


def test_compute_writes_long_table(files):
    tmp, cfg, data = files
    out = tmp / "out.csv"
    assert main(["compute", str(cfg), str(data), "-o", str(out)]) == EXIT_OK
    lines = out.read_text().splitlines()
    assert lines[0] == "recording,t,metric,subjects,value,flags,error"
    rec, t, metric, subjects, value, _, error = lines[1].split(",")
    assert (rec, t, metric, subjects, error) == ("lin", "0.0", "TTC", "1|2", "")
    assert abs(float(value) - 10.0) < 1e-3
    assert any(line.startswith("lin,,TET,1|2,") for line in lines)


def test_filter_writes_intervals(files):
    tmp, cfg, data = files
    out = tmp / "iv.csv"
    assert main(["filter", str(cfg), str(data), "-o", str(out)]) == EXIT_OK
    lines = out.read_text().splitlines()
    assert lines[0] == "recording,t_start,t_end"
    rid, a, b = lines[1].split(",")
    assert rid == "lin" and abs(float(a) - 7.0) <= 0.5 and float(b) == 10.0


def test_malformed_csv_names_the_line(files, capsys):
    tmp, cfg, data = files
    text = data.read_text().split("\n")
    assert ",100," in text[4]
    text[4] = text[4].replace(",100,", ",1OO,")
    data.write_text("\n".join(text))
    assert main(["compute", str(cfg), str(data)]) == EXIT_DATA
    assert "line 5" in capsys.readouterr().err


def test_missing_files_are_data_errors(files):
    tmp, cfg, data = files
    assert main(["compute", str(cfg), str(tmp / "nope.csv")]) == EXIT_DATA
    assert main(["filter", str(tmp / "nope.yaml"), str(data)]) == EXIT_DATA


def test_jobs_must_be_positive(files):
    tmp, cfg, data = files
    assert main(["compute", str(cfg), str(data), "--jobs", "0"]) == EXIT_USAGE


def test_simulate_then_compute(tmp_path):
    model = tmp_path / "model.yaml"
    model.write_text(
        yaml.safe_dump(
            {
                "model": {"kind": "constant_velocity", "horizon": 1.0, "step": 0.5},
                "actors": [{"id": "a", "position": [0, 0], "velocity": [5, 0]}, {"id": "b", "position": [20, 0]}],
            }
        )
    )
    traj = tmp_path / "traj.csv"
    assert main(["simulate", str(model), "-o", str(traj)]) == EXIT_OK
    assert len(traj.read_text().splitlines()) == 1 + 3 * 2
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text("metrics: [HW]\n")
    out = tmp_path / "out.csv"
    assert main(["compute", str(cfg), str(traj), "-o", str(out)]) == EXIT_OK


def test_console_entry_point():
    r = subprocess.run([sys.executable, "-m", "critmetrics.cli"], capture_output=True, text=True)
    assert r.returncode == EXIT_USAGE
