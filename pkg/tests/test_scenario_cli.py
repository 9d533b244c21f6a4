import csv
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
import yaml

from fiberwave.cli import main
from fiberwave.runner import CSV_COLUMNS, run_pipeline
from fiberwave.scenario import BUILTINS, DEFAULT_TOLERANCES, ScenarioError, load_scenario, parse_scenario

GOLDEN = Path(__file__).parent / "golden"

MINIMAL = {
    "name": "mini",
    "path": {"kind": "helix", "radius": 1.0, "pitch": 2.0, "speed": 1.0, "turns": 0.5},
    "j": "1/2",
    "m": "1/2",
    "k_mag": 1.0,
    "steps": 4000,
}


def write_yaml(tmp_path, data, name="scenario.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(data))
    return path


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array([[float(x) if x else np.nan for x in row] for row in rows[1:]])


def test_list_shows_builtins(capsys):
    assert main(["list"]) == 0
    out = capsys.readouterr().out
    for name in ("straight", "circle", "cone", "helix", "luo_spiral"):
        assert name in out


def test_validate_ok(tmp_path, capsys):
    assert main(["validate", str(write_yaml(tmp_path, MINIMAL))]) == 0
    assert "ok" in capsys.readouterr().out


def test_missing_k_mag_and_steps_warn():
    data = {k: v for k, v in MINIMAL.items() if k not in ("k_mag", "steps")}
    scenario, warnings = parse_scenario(data)
    assert scenario.k_mag == 1.0 and scenario.steps == 1000
    assert any(w.startswith("k_mag") for w in warnings)
    assert any(w.startswith("steps") for w in warnings)


def test_unknown_key_warns():
    _, warnings = parse_scenario(dict(MINIMAL, colour="blue"))
    assert warnings == ["colour: unknown field ignored"]


@pytest.mark.parametrize("patch, field", [
    ({"j": -1}, "j"),
    ({"j": "1/3"}, "j"),
    ({"m": "3/2"}, "m"),
    ({"steps": 1}, "steps"),
    ({"k_mag": 0}, "k_mag"),
    ({"frame": "lab"}, "frame"),
    ({"name": ""}, "name"),
    ({"path": {"kind": "archimedean_spiral", "spacing": 1.0, "turns": 0, "inner_radius": 1.0}}, "path.turns"),
    ({"path": {"kind": "archimedean_spiral", "spacing": 1.0, "turns": -2.0}}, "path.turns"),
    ({"path": {"kind": "helix", "radius": 1.0, "pitch": 1.0, "cone_angle": 0.5, "turns": 1}}, "path"),
    ({"path": {"kind": "wiggle"}}, "path.kind"),
    ({"t_end": 1e9}, "t_end"),
    ({"tolerances": {"fidelity": -1.0}}, "tolerances.fidelity"),
    ({"tolerances": {"bogus": 1.0}}, "tolerances.bogus"),
    ({"expect": {"colour": 1}}, "expect.colour"),
])
def test_invalid_fields_named(patch, field):
    with pytest.raises(ScenarioError) as err:
        parse_scenario(dict(MINIMAL, **patch))
    assert any(f": {field}" in p for p in err.value.problems), err.value.problems


def test_several_problems_reported_together():
    with pytest.raises(ScenarioError) as err:
        parse_scenario(dict(MINIMAL, j=-1, steps=0, frame="x"))
    assert len(err.value.problems) >= 3


def test_superposition_and_json_file(tmp_path):
    data = dict(MINIMAL, m={"1/2": [0.6, 0.0], "-1/2": [0.0, 0.8]})
    path = tmp_path / "s.json"
    path.write_text(json.dumps(data))
    scenario, _ = load_scenario(str(path))
    assert not scenario.pure_m
    result = run_pipeline(scenario)
    assert result.passed, [c.name for c in result.checks if not c.passed]


def test_malformed_and_missing_files(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text("name: [unclosed\n")
    assert main(["validate", str(bad)]) == 2
    assert main(["validate", str(tmp_path / "absent.yaml")]) == 2
    assert "cannot read" in capsys.readouterr().err


def test_exit_code_validation_names_field(tmp_path, caplog):
    path = write_yaml(tmp_path, dict(MINIMAL, j=-1))
    assert main(["run", str(path), "--out", str(tmp_path)]) == 2
    assert "j:" in caplog.text


def test_exit_code_ok_and_outputs(tmp_path):
    assert main(["run", str(write_yaml(tmp_path, MINIMAL)), "--out", str(tmp_path / "o")]) == 0
    header, data = read_csv(tmp_path / "o" / "mini_timeseries.csv")
    assert tuple(header) == CSV_COLUMNS
    assert data.shape == (4001, len(CSV_COLUMNS))
    assert np.isnan(data[0, -1]) and np.isnan(data[-1, -2])


def test_exit_code_check_failed_still_writes_report(tmp_path):
    assert main(["run", "cone", "--steps", "20", "--out", str(tmp_path)]) == 3
    report = json.loads((tmp_path / "cone_report.json").read_text())
    assert report["summary"]["passed"] is False
    assert report["summary"]["exit_code"] == 3
    assert report["summary"]["failed"]


def test_exit_code_pole_passage(tmp_path, caplog):
    data = dict(MINIMAL, path={"kind": "circular_arc", "radius": 1.0, "turns": 1}, frame="working", steps=1001)
    assert main(["run", str(write_yaml(tmp_path, data)), "--out", str(tmp_path)]) == 4
    assert "pole" in caplog.text.lower()


def test_report_schema(tmp_path):
    assert main(["run", "circle", "--steps", "4000", "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "circle_report.json").read_text())
    assert set(report) == {"scenario", "summary", "metrics", "checks"}
    assert set(report["summary"]) == {"passed", "exit_code", "checks", "failed"}
    assert report["scenario"]["name"] == "circle"
    assert set(report["scenario"]["tolerances"]) == set(DEFAULT_TOLERANCES)
    for check in report["checks"]:
        assert set(check) == {"name", "measured", "threshold", "comparison", "passed"}
        assert check["comparison"] in ("<=", ">=")
    assert report["summary"]["checks"] == len(report["checks"])
    assert report["metrics"]["phase_final"] == pytest.approx(np.pi, abs=1e-9)


def test_emit_states(tmp_path):
    path = write_yaml(tmp_path, dict(MINIMAL, j=1, m=0, emit_states=True))
    assert main(["run", str(path), "--out", str(tmp_path)]) == 0
    header, data = read_csv(tmp_path / "mini_states.csv")
    assert header == ["t", "re_0", "im_0", "re_1", "im_1", "re_2", "im_2"]
    amps = data[:, 1::2] + 1j * data[:, 2::2]
    assert np.allclose(np.linalg.norm(amps, axis=1), 1.0, atol=1e-12)


def test_out_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("FIBERWAVE_OUT", str(tmp_path / "env"))
    assert main(["run", "straight"]) == 0
    assert (tmp_path / "env" / "straight_report.json").exists()


def test_steps_override_rejected(tmp_path):
    assert main(["run", "straight", "--steps", "1", "--out", str(tmp_path)]) == 2


def test_golden_straight_csv(tmp_path):
    assert main(["run", "straight", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "straight_timeseries.csv").read_bytes() == (GOLDEN / "straight_timeseries.csv").read_bytes()


def test_golden_cone_csv(tmp_path):
    assert main(["run", "cone", "--steps", "400", "--out", str(tmp_path)]) == 3
    header, data = read_csv(tmp_path / "cone_timeseries.csv")
    gold_header, gold = read_csv(GOLDEN / "cone_400_timeseries.csv")
    assert header == gold_header
    assert np.allclose(data, gold, rtol=1e-9, atol=1e-12, equal_nan=True)


def test_repeated_runs_are_byte_identical(tmp_path):
    for sub in ("a", "b"):
        assert main(["run", "helix", "--steps", "2000", "--out", str(tmp_path / sub)]) == 0
    for name in ("helix_timeseries.csv", "helix_report.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_parallel_jobs_match_serial(tmp_path):
    refs = ["straight", "circle"]
    assert main(["run", *refs, "--steps", "2000", "--out", str(tmp_path / "serial")]) == 0
    assert main(["run", *refs, "--steps", "2000", "--jobs", "2", "--out", str(tmp_path / "par")]) == 0
    for ref in refs:
        name = f"{ref}_timeseries.csv"
        assert (tmp_path / "serial" / name).read_bytes() == (tmp_path / "par" / name).read_bytes()


def test_worst_exit_code_wins(tmp_path):
    bad = write_yaml(tmp_path, dict(MINIMAL, j=-1))
    assert main(["run", "straight", str(bad), "--out", str(tmp_path)]) == 2


def test_console_script_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "fiberwave.cli", "run", "straight", "--out", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "straight: PASS" in proc.stdout


@pytest.mark.parametrize("name", ["straight", "circle", "cone", "helix"])
def test_builtins_pass(name):
    scenario, warnings = load_scenario(name)
    assert warnings == []
    result = run_pipeline(scenario)
    assert result.passed, [(c.name, c.measured) for c in result.checks if not c.passed]


def test_builtin_names_match_keys():
    for key, spec in BUILTINS.items():
        assert spec["name"] == key
