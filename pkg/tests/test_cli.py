import json

import pytest

from geomik.cli import main
from geomik.fk import fk
from geomik.model import FIXTURE, JointAngles

PARAMS = {"a2": 0.30, "a3": 0.25, "d4": 0.06, "d5": 0.08, "d6": 0.10}


@pytest.fixture
def params_file(tmp_path):
    path = tmp_path / "params.json"
    path.write_text(json.dumps(PARAMS))
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_fk_then_solve(capsys, params_file, tmp_path):
    code, out, _ = run(capsys, "fk", "--params", params_file, "--angles", "0.3", "-0.4", "1.1", "0.2", "0.9", "-2.0")
    assert code == 0
    pose = json.loads(out)
    assert pose["p"] == pytest.approx(list(fk(JointAngles(0.3, -0.4, 1.1, 0.2, 0.9, -2.0), FIXTURE).p))
    pose_file = tmp_path / "pose.json"
    pose_file.write_text(out)

    code, out, _ = run(capsys, "solve", "--params", params_file, "--pose", str(pose_file), "--all-branches", "--json")
    assert code == 0
    sols = json.loads(out)
    assert 1 <= len(sols) <= 8
    for s in sols:
        assert set(s) == {"theta", "branch", "pos_residual", "ori_residual"}
        assert len(s["theta"]) == 6 and len(s["branch"]) == 3 and set(s["branch"]) <= {"A", "B"}
        assert s["pos_residual"] < 1e-8
    assert any(max(abs(a - b) for a, b in zip(s["theta"], [0.3, -0.4, 1.1, 0.2, 0.9, -2.0])) < 1e-8 for s in sols)

    code, out, _ = run(capsys, "solve", "--params", params_file, "--pose", str(pose_file), "--json")
    assert len(json.loads(out)) == 1
    code, out, _ = run(capsys, "solve", "--params", params_file, "--pose", str(pose_file))
    assert code == 0 and out.split()[0] in {"AAA", "ABA"}


def test_solve_inline_rotation(capsys, params_file):
    pose = json.dumps({"p": [0.35, 0.05, 0.2], "rotation": [1, 0, 0, 0, 0, -1, 0, 1, 0]})
    code, out, _ = run(capsys, "solve", "--params", params_file, "--pose", pose, "--json")
    assert code == 0 and json.loads(out)


def test_exit_codes(capsys, params_file, tmp_path):
    far = json.dumps({"p": [10, 0, 0], "x_axis": [1, 0, 0], "z_axis": [0, 0, 1]})
    assert run(capsys, "solve", "--params", params_file, "--pose", far)[0] == 3
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({**PARAMS, "a2": -1}))
    code, _, err = run(capsys, "fk", "--params", str(bad), "--angles", *["0"] * 6)
    assert code == 2 and "a2" in err
    assert run(capsys, "fk", "--params", str(tmp_path / "missing.json"), "--angles", *["0"] * 6)[0] == 2
    assert run(capsys, "solve", "--params", params_file, "--pose", '{"p": [0,0,0]}')[0] == 2
    with pytest.raises(SystemExit) as info:
        main(["bench", "--params", params_file, "--n", "0", "--seed", "1"])
    assert info.value.code == 1
    with pytest.raises(SystemExit) as info:
        main(["nope"])
    assert info.value.code == 1
    out = tmp_path / "o.csv"
    assert run(capsys, "validate", "--params", params_file, "--n", "5", "--seed", "1", "--exclusion", "2", "--out", str(out))[0] == 1


def test_validate_and_traj(capsys, params_file, tmp_path):
    out = tmp_path / "v.csv"
    code, stdout, _ = run(capsys, "validate", "--params", params_file, "--n", "50", "--seed", "4", "--out", str(out))
    assert code == 0
    summary = json.loads(stdout)
    assert summary["n_solved"] + summary["n_singular_skipped"] == 50
    assert len(out.read_text().splitlines()) == summary["n_solved"] + 1

    wp = tmp_path / "wp.json"
    poses = [fk(JointAngles(0.3, 0.9, 1.6, 0.4, 1.0 + 0.05 * k, 0.2), FIXTURE) for k in range(4)]
    wp.write_text(json.dumps([{"p": list(p.p), "x_axis": list(p.x_axis), "z_axis": list(p.z_axis)} for p in poses]))
    traj_out = tmp_path / "t.csv"
    code, stdout, _ = run(capsys, "traj", "--params", params_file, "--waypoints", str(wp), "--out", str(traj_out))
    assert code == 0
    lines = traj_out.read_text().splitlines()
    assert lines[0].startswith("idx,theta1") and len(lines) == 5


def test_bench_cli(capsys, params_file):
    code, out, _ = run(capsys, "bench", "--params", params_file, "--n", "5", "--seed", "7", "--max-iters", "100")
    assert code == 0
    rep = json.loads(out)
    assert rep["n_targets"] == 5 and rep["speed_ratio"] > 0
