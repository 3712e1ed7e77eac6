import csv
import json

import numpy as np
import pytest

from reachavoid.cli import gen_helicopter_like, gen_vehicle, load_problem, main


def planar_spec(goal_half, T=6):
    return {
        "system": {
            "A": [[1.0, 0.0], [0.0, 1.0]],
            "B": [[0.05, 0.0], [0.0, 0.05]],
            "C": [[0.02, 0.0], [0.0, 0.02]],
            "T": T,
        },
        "theta": [1.0, 0.0],
        "delta": 0.5,
        "budget": 1.0,
        "safe": {"box": {"lo": [-2.0, -2.0], "hi": [2.0, 2.0]}},
        "goal": {"box": {"lo": [-goal_half, -goal_half], "hi": [goal_half, goal_half]}},
        "ctr": {"lo": [-1.0, -1.0], "hi": [1.0, 1.0]},
    }


def scalar_attack_spec():
    return {
        "system": {"A": [[1.0]], "B": [[0.1]], "C": [[1.0]], "T": 4},
        "theta": [0.0],
        "delta": 0.0,
        "budget": 0.01,
        "safe": {"box": {"lo": [-3.0], "hi": [3.0]}},
        "goal": {"box": {"lo": [-3.0], "hi": [3.0]}},
        "ctr": {"lo": [-1.0], "hi": [1.0]},
        "unsafe": {"A": [[-1.0]], "b": [-2.0]},
        "adv": {"lo": [-1.0], "hi": [1.0]},
        "ctr_budget": 0.01,
        "attack_grid": {"lo": [-0.5], "hi": [0.5], "eps": 0.25},
    }


def write_spec(tmp_path, spec, name="spec.json"):
    path = tmp_path / name
    path.write_text(json.dumps(spec))
    return str(path)


def test_gen_then_synth_round_trip(tmp_path):
    spec_path = tmp_path / "vehicle.json"
    assert main(["gen", "--kind", "vehicle", "--T", "12", "--obstacles", "2",
                 "--out", str(spec_path)]) == 0
    prob = load_problem(spec_path)
    assert prob.sys.n == 4 and prob.sys.T == 12

    out = tmp_path / "run"
    assert main(["synth", "--spec", str(spec_path), "--out", str(out)]) == 0
    control = json.loads((out / "control.json").read_text())
    assert control["status"] == "sat"
    assert len(control["control"]) == 12
    report = json.loads((out / "report.json").read_text())
    assert report["validation"]["ok"] is True
    assert report["wall_time_s"] >= 0
    assert report["stats"]["lp_calls"] >= 1


def test_gen_helicopter_spec_loads(tmp_path):
    spec_path = tmp_path / "heli.json"
    assert main(["gen", "--kind", "helicopter", "--seed", "7", "--out", str(spec_path)]) == 0
    prob = load_problem(spec_path)
    assert prob.sys.n == 16 and prob.sys.m == 4
    direct = gen_helicopter_like(seed=7)
    assert json.loads(spec_path.read_text())["budget"] == direct["budget"]


def test_control_json_is_deterministic(tmp_path):
    spec_path = write_spec(tmp_path, planar_spec(1.35))
    assert main(["synth", "--spec", spec_path, "--out", str(tmp_path / "a")]) == 0
    assert main(["synth", "--spec", spec_path, "--out", str(tmp_path / "b")]) == 0
    a = (tmp_path / "a" / "control.json").read_bytes()
    b = (tmp_path / "b" / "control.json").read_bytes()
    assert a == b


def test_synth_reports_unsolvable(tmp_path):
    spec = planar_spec(1.35)
    spec["budget"] = 100.0
    spec_path = write_spec(tmp_path, spec)
    out = tmp_path / "run"
    assert main(["synth", "--spec", spec_path, "--out", str(out)]) == 1
    control = json.loads((out / "control.json").read_text())
    assert control["status"] == "failed"
    assert control["control"] is None


def test_synth_emits_smtlib(tmp_path):
    spec_path = write_spec(tmp_path, planar_spec(1.35))
    out = tmp_path / "run"
    assert main(["synth", "--spec", spec_path, "--out", str(out), "--emit-smtlib"]) == 0
    smt = (out / "formula.smt2").read_text()
    assert smt.startswith("(set-logic QF_LRA)")
    assert smt.count("declare-const") == 12  # m * T stacked control variables
    assert smt.strip().endswith("(check-sat)")


def test_table_synth_exit_codes(tmp_path):
    ok_path = write_spec(tmp_path, planar_spec(1.35), "ok.json")
    bad_path = write_spec(tmp_path, planar_spec(1.2), "bad.json")

    out = tmp_path / "ok"
    assert main(["table-synth", "--spec", ok_path, "--out", str(out)]) == 0
    table = json.loads((out / "table.json").read_text())
    assert table["status"] == "success"
    assert len(table["entries"]) > 0
    assert table["unresolved"] == []

    out = tmp_path / "bad"
    assert main(["table-synth", "--spec", bad_path, "--out", str(out)]) == 1
    table = json.loads((out / "table.json").read_text())
    assert table["status"] == "failed"
    assert table["witness"] is not None

    out = tmp_path / "floor"
    assert main(["table-synth", "--spec", ok_path, "--out", str(out), "--eps", "0.5"]) == 2
    table = json.loads((out / "table.json").read_text())
    assert table["status"] == "inconclusive"
    assert len(table["unresolved"]) > 0


def test_vuln_grid_csv(tmp_path):
    spec = planar_spec(1.35)
    spec["vuln_grid"] = {"axes": [0], "lo": [0.8], "hi": [1.2], "counts": [3]}
    spec_path = write_spec(tmp_path, spec)
    out = tmp_path / "run"
    assert main(["vuln", "--spec", spec_path, "--out", str(out), "--tol", "1e-2"]) == 0
    with open(out / "vuln.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["theta0", "theta1", "max_budget"]
    assert len(rows) == 4
    values = [float(r[-1]) for r in rows[1:]]
    assert all(v >= 0 for v in values)
    report = json.loads((out / "report.json").read_text())
    assert report["points"] == 3


def test_vuln_single_point_without_grid(tmp_path):
    spec_path = write_spec(tmp_path, planar_spec(1.35))
    out = tmp_path / "run"
    assert main(["vuln", "--spec", spec_path, "--out", str(out), "--tol", "1e-2"]) == 0
    with open(out / "vuln.csv") as fh:
        rows = list(csv.reader(fh))
    assert len(rows) == 2
    assert float(rows[1][-1]) >= 1.0  # the default instance tolerates its own budget


def test_attack_point_and_grid(tmp_path):
    spec_path = write_spec(tmp_path, scalar_attack_spec())
    out = tmp_path / "point"
    assert main(["attack", "--spec", spec_path, "--out", str(out)]) == 0
    attack = json.loads((out / "attack.json").read_text())
    assert attack["status"] == "sat"
    assert attack["certified_step"] == 3
    assert len(attack["adversary"]) == 4

    out = tmp_path / "grid"
    assert main(["attack", "--spec", spec_path, "--out", str(out), "--grid"]) == 0
    attack = json.loads((out / "attack.json").read_text())
    assert attack["mode"] == "grid"
    assert len(attack["entries"]) == 2


def test_attack_fails_against_strong_controller(tmp_path):
    spec = scalar_attack_spec()
    spec["ctr_budget"] = 1e6
    spec_path = write_spec(tmp_path, spec)
    out = tmp_path / "run"
    assert main(["attack", "--spec", spec_path, "--out", str(out)]) == 1
    assert json.loads((out / "attack.json").read_text())["status"] == "failed"


def test_simulate_writes_trajectories(tmp_path):
    spec_path = write_spec(tmp_path, planar_spec(1.35))
    out = tmp_path / "synth"
    assert main(["synth", "--spec", spec_path, "--out", str(out)]) == 0
    sim = tmp_path / "sim"
    assert main([
        "simulate", "--spec", spec_path, "--out", str(sim),
        "--control", str(out / "control.json"), "--samples", "20",
    ]) == 0
    with open(sim / "trajectories.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["sample", "t", "x1", "x2"]
    assert len(rows) == 1 + 20 * 7  # header + samples * (T + 1)
    report = json.loads((sim / "report.json").read_text())
    assert report["all_safe"] is True
    assert report["all_goal"] is True


def test_simulate_rejects_empty_control(tmp_path):
    spec_path = write_spec(tmp_path, planar_spec(1.35))
    control_path = tmp_path / "control.json"
    control_path.write_text(json.dumps({"status": "failed", "control": None}))
    code = main([
        "simulate", "--spec", spec_path, "--out", str(tmp_path / "sim"),
        "--control", str(control_path),
    ])
    assert code == 3


def test_usage_errors_exit_3(tmp_path, capsys):
    assert main(["synth", "--spec", "/nope/missing.json", "--out", str(tmp_path)]) == 3

    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["synth", "--spec", str(bad), "--out", str(tmp_path)]) == 3
    assert "not valid JSON" in capsys.readouterr().err

    spec = planar_spec(1.35)
    del spec["theta"]
    path = write_spec(tmp_path, spec)
    assert main(["synth", "--spec", path, "--out", str(tmp_path / "x")]) == 3
    assert "$.theta" in capsys.readouterr().err

    spec = planar_spec(1.35)
    spec["ctr"]["lo"] = [-1.0, -1.0, -1.0]
    path = write_spec(tmp_path, spec, "ctr.json")
    assert main(["synth", "--spec", path, "--out", str(tmp_path / "y")]) == 3
    assert "ctr" in capsys.readouterr().err

    assert main(["no-such-command"]) == 3
    assert main([]) == 3


def test_help_exits_zero():
    with pytest.raises(SystemExit) as exc:
        main(["--help"])
    assert exc.value.code == 0


def test_resource_limits_exit_4(tmp_path):
    spec = planar_spec(1.35)
    spec["system"]["C"] = [[0.0, 0.0], [0.0, 0.0]]  # no leverage: budget doubles to the cap
    path = write_spec(tmp_path, spec)
    assert main(["vuln", "--spec", path, "--out", str(tmp_path / "v"), "--tol", "1e-2"]) == 4

    spec = scalar_attack_spec()
    spec["attack_grid"]["eps"] = 1e-7
    path = write_spec(tmp_path, spec, "tiny.json")
    assert main(["attack", "--spec", path, "--out", str(tmp_path / "a"), "--grid"]) == 4


def test_generator_rejects_short_horizon():
    with pytest.raises(ValueError):
        gen_vehicle(T=2)
