import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from curvednbody import dynamics as dyn
from curvednbody import geometry as geo
from curvednbody import scc, testing
from curvednbody.errors import FrameError, SingularConfigurationError


def balance_mass(family, c1, c2):
    """Ring-2 mass read off the tangential force balance of a ring-2 body.

    The tangential force per unit mass on a ring-2 body is ``T1 + m T2``; the
    least-squares ``m`` is exact whenever that body can balance at all.
    """
    n = 3 if family == "triangle" else 4
    q = scc.build_double_ring(scc.DoubleRingParams(family, c1, c2, 1.0)).q

    def tang(m):
        f = dyn.force_gradient_q(q, np.r_[np.ones(n), np.full(n, m)], 1)[n] / m
        return f - (f @ q[n]) * q[n]

    t1, t2 = tang(1.0), tang(2.0)
    slope = t2 - t1
    return -((t1 - slope) @ slope) / (slope @ slope)


@pytest.mark.parametrize("family", scc.FAMILIES)
@pytest.mark.parametrize("c1, c2", [(0.5, -0.3), (0.8, -0.6), (0.3, -0.2), (0.95, -0.9)])
def test_mass_formula_matches_force_balance(family, c1, c2):
    assert scc.double_ring_mass(c1, c2, family) == pytest.approx(balance_mass(family, c1, c2), rel=1e-10)


@pytest.mark.parametrize("family, low, high", [("triangle", -1438.6697413084291, 1.1762936600149945),
                                               ("tetrahedron", -1381.1, 1.370)])
def test_residual_sign_at_endpoints(family, low, high):
    assert scc.double_ring_residual(0.1, -0.1, family) == pytest.approx(low, rel=1e-4)
    assert scc.double_ring_residual(0.9, -0.5, family) == pytest.approx(high, rel=1e-3)


@pytest.mark.parametrize("c2", [0.0, -1.0])
def test_mass_singular_edges(c2):
    with pytest.raises(SingularConfigurationError):
        scc.double_ring_mass(0.5, c2, "triangle")


def test_unknown_family():
    with pytest.raises(ValueError):
        scc.double_ring_mass(0.5, -0.5, "cube")
    with pytest.raises(ValueError):
        scc.DoubleRingParams("triangle", 0.5, 0.3)


@pytest.mark.parametrize("family", scc.FAMILIES)
def test_roots_are_central_configurations(family):
    roots = scc.solve_double_ring(family, np.linspace(-0.98, -0.02, 50))
    assert len(roots) >= 40
    assert max(r.scc_residual for r in roots) < 1e-9
    assert all(r.m > 0 and r.c1 >= -r.c2 and abs(r.f_residual) < 1e-12 for r in roots)


@pytest.mark.parametrize("family", scc.FAMILIES)
def test_off_root_configurations_are_not_central(family):
    r = scc.solve_double_ring(family, [-0.5])[0]
    cfg = scc.build_double_ring(scc.DoubleRingParams(family, r.c1 + 0.02, r.c2))
    assert scc.scc_residual(cfg) > 1e-3


@pytest.mark.parametrize("family", scc.FAMILIES)
def test_mirror_reciprocity(family):
    roots = scc.solve_double_ring(family, np.linspace(-0.9, -0.1, 9), mirror=True)
    orig = [r for r in roots if not r.mirrored]
    mirrored = [r for r in roots if r.mirrored]
    assert len(orig) == len(mirrored)
    for a, b in zip(orig, mirrored):
        assert (b.c1, b.c2) == (-a.c2, -a.c1)
        assert a.m * b.m == pytest.approx(1.0, abs=1e-10)
        assert abs(b.f_residual) < 1e-9 and b.scc_residual < 1e-9


def test_root_rows():
    r = scc.solve_double_ring("triangle", [-0.4], with_scc_residual=False)[0]
    assert r.row()[0] == "triangle" and r.row()[-1] is None
    with pytest.raises(ValueError):
        scc.solve_double_ring("triangle", [0.2])


# -- great circle ---------------------------------------------------------------------

def test_great_circle_balance_examples():
    # a square has antipodal pairs, where the force blows up
    phi = np.array([0, math.pi / 2, math.pi, 3 * math.pi / 2]) + 0.3
    with pytest.raises(SingularConfigurationError):
        scc.great_circle_balance(phi, np.ones(4))
    bal, _ = scc.great_circle_balance(np.array([0, 1.0, 2.0, 4.0]), np.ones(4))
    assert bal.shape == (4,)


@given(st.floats(0.2, 1.3), st.floats(0.05, 0.9), st.floats(0.05, 0.9))
def test_balance_is_the_force_along_the_circle(p2, f3, f4):
    phi = np.array([0.0, p2, p2 + f3 * (math.pi - p2), math.pi + f4 * p2])
    masses = np.array([1.0, 1.3, 0.7, 2.0])
    q = np.column_stack([np.cos(phi), np.sin(phi), np.zeros(4), np.zeros(4)])
    f = dyn.force_gradient_q(q, masses, 1)
    tangent = np.column_stack([-np.sin(phi), np.cos(phi), np.zeros(4), np.zeros(4)])
    along = np.sum(f * tangent, axis=1) / masses
    bal, _ = scc.great_circle_balance(phi, masses)
    np.testing.assert_allclose(bal, along, rtol=1e-9, atol=1e-9)


def test_scan_keeps_condition_away_from_zero():
    phi, cond = scc.scan_great_circle(20_000, seed=1)
    assert phi.shape == (20_000, 4)
    assert np.all(scc.in_canonical_sector(phi)) and np.all(scc.singular_margin(phi) >= 0.1)
    assert np.all(np.abs(cond) > 1.0)


def test_singular_margin():
    assert scc.singular_margin(np.array([0, 0.5, 1.0, math.pi + 0.2])) == pytest.approx(0.2)


# -- checkers ---------------------------------------------------------------------------

@pytest.mark.parametrize("c", [1 / math.sqrt(3), 0.7])
def test_symmetric_tetrahedra_pass(c):
    found = testing.symmetric_tetrahedra(c)
    assert found
    for pts in found:
        rep = scc.tetrahedron_check(pts, canonical=True)
        assert rep.satisfied, rep.failing()
        assert rep.scc_residual < 1e-12


@pytest.mark.parametrize("c", [0.3, 0.5])
def test_symmetric_family_has_gaps(c):
    assert testing.symmetric_tetrahedra(c) == []


def test_regular_tetrahedron_equal_masses():
    rep = scc.tetrahedron_check(testing.regular_tetrahedron(), canonical=True)
    np.testing.assert_allclose(rep.masses, 1.0, rtol=1e-12)


def test_tetrahedron_violation_is_named():
    pts = [[1, 0, 0], [0.6, 0.8, 0], [0, 0, 1], [-0.6, -0.5, -math.sqrt(0.39)]]
    rep = scc.tetrahedron_check(pts, canonical=True)
    assert not rep.satisfied
    assert rep.failing() == ["sin_products_01_23_eq_02_13", "sin_products_01_23_eq_03_12"]
    assert rep.scc_residual > 1e-3


def test_hemisphere_configuration_fails():
    pts = [[1, 0, 0], [0.8, 0.6, 0], [0.8, 0, 0.6], [0.8, -0.3, -0.52]]
    pts = np.array(pts) / np.linalg.norm(pts, axis=1)[:, None]
    rep = scc.tetrahedron_check(pts, canonical=True)
    assert "not_in_hemisphere" in rep.failing()


@pytest.mark.parametrize("h", [1 / math.sqrt(6), 0.5])
def test_symmetric_pentatopes_pass(h):
    for pts in testing.symmetric_pentatopes(h):
        rep = scc.pentatope_check(pts, canonical=True)
        assert rep.satisfied, rep.failing()
        assert rep.scc_residual < 1e-12


def test_regular_pentatope_equal_masses():
    rep = scc.pentatope_check(testing.regular_pentatope(), canonical=True)
    np.testing.assert_allclose(rep.masses, 1.0, rtol=1e-10)


def test_determinant_sign_patterns():
    t = scc.tetrahedron_check(testing.regular_tetrahedron(), canonical=True)
    assert list(np.sign(t.determinants) * np.sign(t.determinants[-1])) == [-1, 1, -1, 1]
    p = scc.pentatope_check(testing.regular_pentatope(), canonical=True)
    assert list(np.sign(p.determinants) * np.sign(p.determinants[-1])) == [1, -1, 1, -1, 1]


def test_checker_rotation_invariance(rng):
    pts = testing.symmetric_tetrahedra(0.7)[0]
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    a = scc.tetrahedron_check(pts, canonical=True)
    b = scc.tetrahedron_check(pts @ q.T, canonical=True)
    np.testing.assert_allclose(b.masses, a.masses, rtol=1e-9)


def test_frame_errors():
    pts = testing.symmetric_tetrahedra(0.7)[0]
    with pytest.raises(FrameError):
        scc.tetrahedron_check(pts)  # not canonical and not rotated
    with pytest.raises(FrameError):
        scc.tetrahedron_check(np.c_[pts, np.full(4, 0.1)])
    with pytest.raises(FrameError):
        scc.pentatope_check(pts)
    with pytest.raises(ValueError):
        scc.tetrahedron_check(pts, m3=-1.0, canonical=True)


def test_masses_scale_with_anchor():
    rep = scc.pentatope_check(testing.symmetric_pentatopes(0.5)[0], m4=1.0, canonical=True)
    rep2 = scc.pentatope_check(testing.symmetric_pentatopes(0.5)[0], m4=2.5, canonical=True)
    np.testing.assert_allclose(scc.masses_from_anchor(rep, 2.5), rep2.masses, rtol=1e-14)


def test_report_json():
    rep = scc.tetrahedron_check(testing.regular_tetrahedron(), canonical=True)
    d = json.loads(rep.to_json())
    assert d["satisfied"] and d["failing"] == [] and len(d["positions"]) == 4


def test_canonicalize_puts_points_in_frame(rng):
    pts = geo.random_unit_points(rng, 5, 1)
    c, r = scc.canonicalize(pts)
    np.testing.assert_allclose(c[0], [1, 0, 0, 0], atol=1e-12)
    for k in range(3):
        np.testing.assert_allclose(c[k, k + 1:], 0, atol=1e-12)
    np.testing.assert_allclose(c, pts @ r.T)
