import numpy as np
import pytest

from curvednbody import curvature as cv
from curvednbody import dynamics as dyn
from curvednbody import io, kepler, scc, testing


@pytest.fixture(scope="module")
def traj():
    return dyn.integrate(testing.three_body_sphere(), cv.sinusoidal(1, 0.1), 0.5, step=1e-2)


def test_trajectory_round_trip_is_exact(traj, tmp_path):
    io.write_trajectory_csv(traj, tmp_path / "t.csv")
    io.write_diagnostics_csv(traj, tmp_path / "d.csv")
    back = io.read_trajectory(tmp_path / "t.csv", traj.masses, 1, tmp_path / "d.csv")
    np.testing.assert_array_equal(back.times, traj.times)
    np.testing.assert_array_equal(back.q, traj.q)
    np.testing.assert_array_equal(back.v, traj.v)
    np.testing.assert_array_equal(back.momenta, traj.momenta)
    np.testing.assert_array_equal(back.min_sn, traj.min_sn)


def test_writes_are_deterministic(traj, tmp_path):
    io.write_trajectory_csv(traj, tmp_path / "a.csv")
    io.write_trajectory_csv(traj, tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_header_is_checked(tmp_path):
    (tmp_path / "x.csv").write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        io.read_trajectory_csv(tmp_path / "x.csv")


def test_kepler_round_trip(tmp_path):
    tr = kepler.integrate_kepler(kepler.KeplerState(1.0, 1.2, 0.0, 0.1, 0.3, 0.8),
                                 kepler.KeplerParams(), cv.constant(1.0), 0.2)
    io.write_kepler_csv(tr, tmp_path / "k.csv")
    np.testing.assert_array_equal(io.read_kepler_csv(tmp_path / "k.csv"), tr.rows())


def test_curve_round_trip_with_missing_residual(tmp_path):
    pts = scc.solve_double_ring("triangle", [-0.5, -0.3], with_scc_residual=False)
    io.write_curve_csv(pts, tmp_path / "c.csv")
    back = io.read_curve_csv(tmp_path / "c.csv")
    assert [b[:5] for b in back] == [p.row()[:5] for p in pts]
    assert all(b[5] is None for b in back)


def test_json_is_sorted_and_creates_dirs(tmp_path):
    path = io.write_json({"b": 1, "a": [0.1]}, tmp_path / "sub" / "x.json")
    assert path.read_text().index('"a"') < path.read_text().index('"b"')
