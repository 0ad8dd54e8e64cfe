import csv
import json
import math

import numpy as np
import pytest

from curvednbody import cli, scc, testing


def run(tmp_path, command, cfg, *extra, name="cfg.json"):
    cfg_path = tmp_path / name
    if isinstance(cfg, str):
        cfg_path.write_text(cfg)
    else:
        cfg_path.write_text(json.dumps(cfg))
    out = tmp_path / "out"
    return cli.main([*command, "--config", str(cfg_path), "--out", str(out), *extra]), out


def body_list(state):
    return [{"q": q.tolist(), "v": v.tolist(), "m": float(m)}
            for q, v, m in zip(state.q, state.v, state.masses)]


SIM = {"t_end": 0.5, "step": 0.01, "sample_every": 5, "sign": 1,
       "profile": {"kind": "sinusoidal", "params": [1.0, 0.1, 1.0]},
       "bodies": body_list(testing.three_body_sphere())}


def test_simulate_writes_artifacts(tmp_path):
    code, out = run(tmp_path, ["simulate"], SIM)
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["n_samples"] == 11 and not summary["halted"]
    assert summary["max_constraint_residual"] < 1e-12
    with open(out / "trajectory.csv") as fh:
        assert next(csv.reader(fh))[:3] == ["t", "body", "x"]


def test_simulate_is_byte_identical(tmp_path):
    cfg = dict(SIM)
    del cfg["bodies"]
    cfg["random_bodies"] = {"n": 4, "spread": 0.5, "speed": 0.2}
    outs = []
    for sub in ("a", "b"):
        (tmp_path / sub).mkdir()
        outs.append(run(tmp_path / sub, ["simulate"], cfg, "--seed", "7")[1])
    out1, out2 = outs
    for f in ("trajectory.csv", "diagnostics.csv", "summary.json"):
        assert (out1 / f).read_bytes() == (out2 / f).read_bytes()


def test_simulate_halts_on_collision(tmp_path):
    cfg = dict(SIM, t_end=5.0, bodies=[{"q": [1, 0, 0, 0], "m": 1.0},
                                       {"q": [math.cos(0.2), math.sin(0.2), 0, 0], "m": 1.0}])
    code, out = run(tmp_path, ["simulate"], cfg)
    assert code == 3
    assert json.loads((out / "summary.json").read_text())["halted"]


def test_simulate_extended_precision_ring(tmp_path):
    r = scc.solve_double_ring("triangle", [-0.4])[0]
    cfg = {"t_end": 0.5, "step": 0.05, "dps": 30, "profile": {"kind": "constant", "params": [1.0]},
           "double_ring": {"family": "triangle", "c1": r.c1, "c2": r.c2}}
    code, out = run(tmp_path, ["simulate"], cfg)
    assert code == 0
    assert json.loads((out / "summary.json").read_text())["max_position_drift"] < 1e-15


@pytest.mark.parametrize("cfg", [
    "{not json",
    "[1, 2]",
    json.dumps(dict(SIM, profile={"kind": "warp", "params": [1]})),
    json.dumps(dict(SIM, profile={"kind": "linear", "params": [1.0, -4.0]})),
    json.dumps({k: v for k, v in SIM.items() if k != "t_end"}),
    json.dumps(dict(SIM, bodies=[{"q": [2, 0, 0, 0], "m": 1.0}, {"q": [0, 1, 0, 0], "m": 1.0}])),
    json.dumps({k: v for k, v in SIM.items() if k != "bodies"}),
])
def test_bad_config_exits_2_and_writes_nothing(tmp_path, cfg):
    code, out = run(tmp_path, ["simulate"], cfg)
    assert code == 2
    assert not out.exists()


def test_unknown_tolerance_exits_2(tmp_path):
    code, out = run(tmp_path, ["simulate"], SIM, "--tol", "bogus=1")
    assert code == 2 and not out.exists()
    code, _ = run(tmp_path, ["simulate"], SIM, "--tol", "collision_sn")
    assert code == 2


def test_missing_config_exits_2(tmp_path):
    assert cli.main(["kepler", "--out", str(tmp_path)]) == 2


def test_kepler_circular(tmp_path):
    code, out = run(tmp_path, ["kepler"], {"t_end": 1.0, "circular": {"alpha": math.pi / 4}})
    assert code == 0
    s = json.loads((out / "summary.json").read_text())
    assert s["circular_curvature"] == pytest.approx(1.0) and s["alpha_range"] < 1e-10


def test_kepler_state_and_chart_singularity(tmp_path):
    cfg = {"t_end": 0.5, "profile": {"kind": "constant", "params": [1.0]},
           "state": {"alpha": 1.0, "theta": 1.2, "phi": 0.0, "p_alpha": 0.1, "p_theta": 0.3, "p_phi": 0.8},
           "report_circular_curvature": True}
    code, out = run(tmp_path, ["kepler"], cfg)
    assert code == 0 and (out / "kepler.csv").exists()
    cfg["state"]["theta"] = 0.0
    assert run(tmp_path, ["kepler"], cfg)[0] == 3
    cfg["state"] = {"alpha": 1.0, "bogus": 1.0}
    assert run(tmp_path, ["kepler"], cfg)[0] == 2


def test_kepler_sign_mismatch(tmp_path):
    cfg = {"t_end": 0.5, "sign": -1, "profile": {"kind": "constant", "params": [1.0]},
           "state": {"alpha": 1.0, "theta": 1.2, "phi": 0.0}}
    assert run(tmp_path, ["kepler"], cfg)[0] == 2


def test_homographic_orbit(tmp_path):
    r = scc.solve_double_ring("triangle", [-0.4])[0]
    cfg = {"profile": {"kind": "sinusoidal", "params": [1.0, 0.1, 1.0]},
           "configuration": {"double_ring": {"family": "triangle", "c1": r.c1, "c2": r.c2}},
           "spec": {"family": "S3", "params": [0.7, 1]}, "times": {"t0": 0, "t_end": 6, "n": 31}}
    code, out = run(tmp_path, ["homographic"], cfg)
    assert code == 0
    assert json.loads((out / "summary.json").read_text())["motion_residual"] < 1e-8
    cfg["spec"] = {"family": "H3_parabolic", "params": [1.0]}
    assert run(tmp_path, ["homographic"], cfg)[0] == 2


def test_homographic_probe(tmp_path):
    pair = testing.hyperbolic_configs()["pair"]
    cfg = {"mode": "probe", "profile": {"kind": "sinusoidal", "params": [-1.0, -0.1, 1.0]},
           "times": {"t_end": 2 * math.pi, "n": 11},
           "configurations": {"pair": {"bodies": body_list(pair)}}}
    code, out = run(tmp_path, ["homographic"], cfg)
    assert code == 0
    rep = json.loads((out / "probe.json").read_text())
    assert rep[0]["config_id"] == "pair" and rep[0]["min_residual"] > 1e-4
    cfg["profile"] = {"kind": "constant", "params": [-1.0]}
    assert run(tmp_path, ["homographic"], cfg)[0] == 2


def test_scc_solve(tmp_path):
    code, out = run(tmp_path, ["scc", "solve"], {"family": "tetrahedron",
                                                  "c2_grid": {"start": -0.9, "stop": -0.1, "num": 5}})
    assert code == 0
    rows = (out / "curve.csv").read_text().splitlines()
    assert rows[0] == ",".join(scc.CURVE_HEADER) and len(rows) >= 5
    assert run(tmp_path, ["scc", "solve"], {"family": "cube"})[0] == 2


def test_scc_check(tmp_path):
    cfg = {"checker": "pentatope", "points": testing.regular_pentatope().tolist(), "canonical": True,
           "anchor_mass": 2.0}
    code, out = run(tmp_path, ["scc", "check"], cfg)
    rep = json.loads((out / "report.json").read_text())
    assert code == 0 and rep["satisfied"] and rep["checker"] == "pentatope"
    np.testing.assert_allclose(rep["masses"], 2.0, rtol=1e-10)
    bad = {"checker": "tetrahedron", "canonical": True,
           "points": [[1, 0, 0], [0.6, 0.8, 0], [0, 0, 1], [-0.6, -0.5, -math.sqrt(0.39)]]}
    code, out = run(tmp_path, ["scc", "check"], bad)
    rep = json.loads((out / "report.json").read_text())
    assert code == 0 and not rep["satisfied"] and "sin_products_01_23_eq_02_13" in rep["failing"]
    reordered = dict(bad, canonical=False, points=bad["points"][::-1])
    assert run(tmp_path, ["scc", "check"], reordered)[0] == 2
    assert run(tmp_path, ["scc", "check"], dict(bad, checker="cube"))[0] == 2


def test_verify_commands(tmp_path):
    code, out = run(tmp_path, ["verify"], {"suites": ["group_law", "sign_endpoints"]})
    assert code == 0 and json.loads((out / "verify.json").read_text())["passed"]
    assert run(tmp_path, ["verify"], {"suites": ["group_law"]}, "--tol", "group_law=1e-30")[0] == 4
    assert run(tmp_path, ["verify"], {"suites": ["nope"]})[0] == 2
    with pytest.warns(UserWarning):
        code, out = run(tmp_path, ["verify"], {"suites": []})
    assert code == 0 and json.loads((out / "verify.json").read_text())["warnings"]
