"""Special central configurations (SCCs): critical points of the force function on the sphere.

Contents:

* :func:`scc_residual`, the size of the largest force.
* Double-ring families (two parallel regular polygons or tetrahedra) with the
  closed-form mass :func:`double_ring_mass`, the residual :func:`double_ring_residual`
  and a scan-and-bisect solver for its zero set.
* The great-circle balance equations for four bodies and the necessary
  condition that rules them out.
* Iff-checkers for tetrahedral (4 bodies on a great 2-sphere) and pentatope
  (5 bodies in S^3) SCCs, with masses from signed determinants.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import geometry as geo
from .dynamics import SystemState, at_rest, force_gradient_q
from .errors import FrameError, SingularConfigurationError

SCC_TOL = 1e-9
CONDITION_TOL = 1e-9
EPS_MARGIN = 1e-4
ROOT_TOL = 1e-12
CURVE_HEADER = ("family", "c1", "c2", "m", "f_residual", "scc_residual")


def scc_residual(s):
    """``max_i |F_i|``; the configuration is an SCC iff this vanishes."""
    if s.n < 2:
        return 0.0
    f = force_gradient_q(s.q, s.masses, s.sign)
    return float(np.max(np.linalg.norm(f, axis=1)))


def per_body_residual(s):
    if s.n < 2:
        return np.zeros(s.n)
    return np.linalg.norm(force_gradient_q(s.q, s.masses, s.sign), axis=1)


# -- double rings ---------------------------------------------------------------

# unit directions of one ring and (k, n): k relates the in-ring cosine to the
# ring radius, n is the number of bodies per ring
_RING = {
    "triangle": (np.array([[1.0, 0.0, 0.0],
                           [-0.5, math.sqrt(3) / 2, 0.0],
                           [-0.5, -math.sqrt(3) / 2, 0.0]]), 2, 3),
    "tetrahedron": (np.array([[1.0, 0.0, 0.0],
                              [-1 / 3, 2 * math.sqrt(2) / 3, 0.0],
                              [-1 / 3, -math.sqrt(2) / 3, math.sqrt(6) / 3],
                              [-1 / 3, -math.sqrt(2) / 3, -math.sqrt(6) / 3]]), 3, 4),
}
FAMILIES = tuple(_RING)


def _family(family):
    if family not in _RING:
        raise ValueError(f"unknown double-ring family {family!r}; expected one of {FAMILIES}")
    return _RING[family]


@dataclass(frozen=True)
class DoubleRingParams:
    """Two parallel rings at heights ``c1 > 0 > c2``; ring 1 carries unit masses, ring 2 mass ``m``."""

    family: str
    c1: float
    c2: float
    m: float = None

    def __post_init__(self):
        _family(self.family)
        if not (0 < self.c1 < 1 and -1 < self.c2 < 0):
            raise ValueError("need c1 in (0, 1) and c2 in (-1, 0)")
        if self.m is not None and not self.m > 0:
            raise ValueError("ring-2 mass must be positive")

    @property
    def r1(self):
        return math.sqrt(1 - self.c1**2)

    @property
    def r2(self):
        return math.sqrt(1 - self.c2**2)


def build_double_ring(p):
    """Rest configuration of the two rings.

    The triangle family lives on the great 2-sphere ``w = 0`` with the z-axis
    as ring axis; the tetrahedron family uses w as the ring axis. If ``p.m``
    is ``None`` the mass from :func:`double_ring_mass` is used.
    """
    dirs, _, n = _family(p.family)
    m = double_ring_mass(p.c1, p.c2, p.family) if p.m is None else p.m
    rows = []
    for c, r in ((p.c1, p.r1), (p.c2, p.r2)):
        for d in dirs:
            if p.family == "triangle":
                rows.append([r * d[0], r * d[1], c, 0.0])
            else:
                rows.append([r * d[0], r * d[1], r * d[2], c])
    masses = np.r_[np.ones(n), np.full(n, m)]
    return at_rest(np.array(rows), masses, 1)


def _ring_formulas(c1, c2, k, n, sqrt):
    """``(m, f)``: ring-2 mass and ring-1 balance, in plain arithmetic.

    Written against a caller-supplied ``sqrt`` so the same expressions serve
    floats, numpy arrays and mpmath numbers. ``k`` relates the in-ring cosine
    to the ring radius and ``n`` is the number of bodies per ring.
    """
    r1 = sqrt(1 - c1**2)
    r2 = sqrt(1 - c2**2)
    a1 = c1**2 - r1**2 / k  # cosine within ring 1
    a2 = c2**2 - r2**2 / k  # cosine within ring 2
    b = c1 * c2 + r1 * r2  # cosine to the aligned body of the other ring
    e = c1 * c2 - r1 * r2 / k  # cosine to the other bodies of the other ring
    inner = ((c1 - b * c2) / (1 - b * b) ** 1.5
             + (k * c1 - (k * c1 * c2 - r1 * r2) * c2) / (1 - e * e) ** 1.5)
    m = -(1 - a2 * a2) ** 1.5 / (n * r2**2 * c2) * inner
    f = (n * r1**2 * c1 / (1 - a1 * a1) ** 1.5
         + m * (c2 - b * c1) / (1 - b * b) ** 1.5
         + m * (k * c2 - (k * c1 * c2 - r1 * r2) * c1) / (1 - e * e) ** 1.5)
    return m, f


def _ring_eval(c1, c2, family):
    _, k, n = _family(family)
    c1 = np.asarray(c1, dtype=float)
    c2 = np.asarray(c2, dtype=float)
    if np.any(c2 == 0) or np.any(np.abs(c2) == 1):
        raise SingularConfigurationError("singular denominator r2^2 c2 = 0")
    return _ring_formulas(c1, c2, k, n, np.sqrt)


def double_ring_mass(c1, c2, family):
    """Ring-2 mass that balances the ring-2 bodies (isolated from the ring-2 force equation)."""
    m = _ring_eval(c1, c2, family)[0]
    return float(m) if np.ndim(m) == 0 else m


def double_ring_residual(c1, c2, family):
    """Ring-1 force balance with the ring-2 mass substituted (``f`` or ``g`` in the literature)."""
    val = _ring_eval(c1, c2, family)[1]
    return float(val) if np.ndim(val) == 0 else val


@dataclass
class RootPoint:
    family: str
    c1: float
    c2: float
    m: float
    f_residual: float
    scc_residual: float = None
    mirrored: bool = False

    def row(self):
        return (self.family, self.c1, self.c2, self.m, self.f_residual, self.scc_residual)


def _bisect(f, a, b, fa, tol=ROOT_TOL, max_iter=200):
    """Plain bisection; returns the midpoint with the smallest ``|f|`` seen."""
    best_x, best_f = a, fa
    for _ in range(max_iter):
        mid = 0.5 * (a + b)
        if mid <= a or mid >= b:
            break
        fm = f(mid)
        if abs(fm) < abs(best_f):
            best_x, best_f = mid, fm
        if abs(fm) < tol:
            break
        if (fm < 0) == (fa < 0):
            a, fa = mid, fm
        else:
            b = mid
    return best_x, best_f


def solve_double_ring(family, c2_grid, n_scan=1000, eps=EPS_MARGIN, mirror=False,
                      with_scc_residual=True):
    """Roots of the double-ring residual along lines of constant ``c2``.

    For each ``c2`` the residual is scanned on ``n_scan`` points of
    ``c1 in (max(-c2, eps), 1 - eps)``; every sign change is bisected. A
    bracket is kept only if the bisection drives ``|f|`` below ``1e-12`` and
    the ring-2 mass is positive; brackets around poles fail the first test.
    With ``mirror=True`` the relabelled point ``(-c2, -c1, 1/m)`` is appended
    for every root.
    """
    _family(family)
    out = []
    for c2 in np.asarray(c2_grid, dtype=float):
        if not -1 < c2 < 0:
            raise ValueError(f"c2 grid values must lie in (-1, 0), got {c2}")
        lo, hi = max(-c2, eps), 1 - eps
        if lo >= hi:
            continue
        xs = np.linspace(lo, hi, n_scan)
        with np.errstate(all="ignore"):
            fs = double_ring_residual(xs, c2, family)
        func = lambda x: double_ring_residual(x, c2, family)
        for i in np.flatnonzero(np.isfinite(fs[:-1]) & np.isfinite(fs[1:])
                                & (np.sign(fs[:-1]) * np.sign(fs[1:]) < 0)):
            x, fx = _bisect(func, xs[i], xs[i + 1], fs[i])
            if not abs(fx) < ROOT_TOL:
                continue
            m = double_ring_mass(x, c2, family)
            if not m > 0:
                continue
            out.append(RootPoint(family, float(x), float(c2), float(m), float(fx)))
        # an exact zero on the scan grid is a root too
        for i in np.flatnonzero(fs == 0):
            m = double_ring_mass(xs[i], c2, family)
            if m > 0:
                out.append(RootPoint(family, float(xs[i]), float(c2), float(m), 0.0))
    if mirror:
        out += [RootPoint(r.family, -r.c2, -r.c1, 1.0 / r.m,
                          float(double_ring_residual(-r.c2, -r.c1, family)), mirrored=True)
                for r in out]
    if with_scc_residual:
        for r in out:
            r.scc_residual = scc_residual(build_double_ring(DoubleRingParams(family, r.c1, r.c2, r.m)))
    return out


# -- four bodies on a great circle ----------------------------------------------

def _r(phi_i, phi_j):
    return np.sin(phi_i - phi_j) ** 2


def great_circle_balance(phi, masses):
    """Balance residuals and the necessary condition for 4 bodies on a great circle.

    Returns ``(balance, condition)`` where ``balance[i]`` is ``(dU/dphi_i)/m_i``,
    ``sum_j m_j sign(sin(phi_j - phi_i)) / r_ij`` with ``r_ij = sin^2(phi_i - phi_j)``,
    and ``condition = 1/(r12 r34) - 1/(r23 r14) - 1/(r13 r24)``. In the sector
    ``phi3 < pi < phi4 < pi + phi2`` the balance terms carry the same signs as
    the written-out equations; the condition follows from them by elimination.
    Leading axes of ``phi`` broadcast (shape ``(..., 4)``).
    """
    phi = np.asarray(phi, dtype=float)
    m = np.asarray(masses, dtype=float)
    d = phi[..., None, :] - phi[..., :, None]  # d[i, j] = phi_j - phi_i
    s = np.sin(d)
    off = ~np.eye(4, dtype=bool)
    if np.any(np.abs(s[..., off]) < 1e-12):
        raise SingularConfigurationError("coincident or antipodal pair on the circle")
    with np.errstate(divide="ignore"):
        terms = np.where(off, np.sign(s) / np.where(off, s * s, 1.0), 0.0)
    balance = terms @ m
    p1, p2, p3, p4 = (phi[..., i] for i in range(4))
    cond = (1 / (_r(p1, p2) * _r(p3, p4)) - 1 / (_r(p2, p3) * _r(p1, p4))
            - 1 / (_r(p1, p3) * _r(p2, p4)))
    return balance, cond


def in_canonical_sector(phi):
    """``0 = phi1 < phi2 < phi3 < pi < phi4 < pi + phi2``."""
    p = np.asarray(phi, dtype=float)
    return (p[..., 0] == 0) & (0 < p[..., 1]) & (p[..., 1] < p[..., 2]) & (p[..., 2] < math.pi) \
        & (math.pi < p[..., 3]) & (p[..., 3] < math.pi + p[..., 1])


def singular_margin(phi):
    """Smallest angular distance of any pair from coincidence or antipodality."""
    p = np.asarray(phi, dtype=float)
    d = np.abs(p[..., :, None] - p[..., None, :]) % math.pi
    d = np.minimum(d, math.pi - d)
    iu = np.triu_indices(4, 1)
    return d[..., iu[0], iu[1]].min(axis=-1)


def scan_great_circle(n_points=100_000, margin=0.1, seed=0, batch=200_000):
    """Random admissible configurations in the canonical sector at least ``margin`` from singular.

    Returns ``(phi, condition)`` for exactly ``n_points`` samples.
    """
    rng = np.random.default_rng(seed)
    kept = []
    total = 0
    while total < n_points:
        p2 = rng.uniform(0, math.pi, batch)
        p3 = rng.uniform(0, math.pi, batch)
        p4 = math.pi + rng.uniform(0, 1, batch) * p2
        phi = np.column_stack([np.zeros(batch), p2, p3, p4])
        ok = in_canonical_sector(phi) & (singular_margin(phi) >= margin)
        kept.append(phi[ok])
        total += int(ok.sum())
    phi = np.vstack(kept)[:n_points]
    _, cond = great_circle_balance(phi, np.ones(4))
    return phi, cond


# -- iff checkers -----------------------------------------------------------------

@dataclass
class SccReport:
    """Outcome of a checker: conditions, masses, determinants and the assembled configuration."""

    configuration: SystemState
    conditions: list
    masses: np.ndarray
    determinants: np.ndarray
    per_body_residual: np.ndarray = None
    scc_residual: float = None
    frame: np.ndarray = field(default=None, repr=False)

    @property
    def satisfied(self):
        return all(ok for _, ok, _ in self.conditions)

    def failing(self):
        return [name for name, ok, _ in self.conditions if not ok]

    def to_dict(self):
        return {
            "satisfied": self.satisfied,
            "conditions": [{"name": n, "satisfied": bool(ok), "residual": float(r)}
                           for n, ok, r in self.conditions],
            "failing": self.failing(),
            "masses": [float(m) for m in self.masses],
            "determinants": [float(d) for d in self.determinants],
            "scc_residual": None if self.scc_residual is None else float(self.scc_residual),
            "per_body_residual": None if self.per_body_residual is None
            else [float(r) for r in self.per_body_residual],
            "positions": self.configuration.q.tolist(),
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)


def _rel(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def canonicalize(points):
    """Rotate the points into the checker frame: ``q0 = e1``, ``q1`` in the xy-plane, and so on."""
    pts = np.asarray(points, dtype=float)
    r = geo.canonical_frame(pts)
    return pts @ r.T, r


def _as_sphere_points(points, dim):
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if dim == 3 and pts.shape[1] == 4:
        if np.max(np.abs(pts[:, 3])) > 1e-12:
            raise FrameError("tetrahedron points must lie on the great 2-sphere w = 0")
        pts = pts[:, :3]
    if pts.shape[1] != dim:
        raise FrameError(f"expected points in R^{dim}")
    geo.check_unit_points(pts, 1, 1e-9)
    return pts


def _sin_matrix(pts):
    c = np.clip(pts @ pts.T, -1.0, 1.0)
    return np.sqrt(np.maximum(1 - c * c, 0.0))


def _check_frame(pts, tol=1e-10):
    dim = pts.shape[1]
    for k in range(dim - 1):
        # point k has zero components beyond index k
        if np.max(np.abs(pts[k, k + 1:]), initial=0.0) > tol:
            raise FrameError(f"point {k} is not in the canonical frame")
    if abs(pts[0, 0] - 1) > tol:
        raise FrameError("q0 must be e1")


def _assemble(pts, masses):
    q = np.zeros((len(pts), 4))
    q[:, :pts.shape[1]] = pts
    return at_rest(q, masses, 1)


def tetrahedron_check(points, m3=1.0, canonical=False, tol=CONDITION_TOL):
    """Iff-test for a 4-body SCC on a great 2-sphere.

    Conditions: (1) no closed hemisphere contains the points; (2) the products
    ``sin d01 sin d23``, ``sin d02 sin d13``, ``sin d03 sin d12`` agree; (3) the
    determinant masses are positive. With ``canonical=True`` the points are
    rotated into the frame first.
    """
    if not m3 > 0:
        raise ValueError("anchor mass m3 must be positive")
    pts = _as_sphere_points(points, 3)
    frame = None
    if canonical:
        pts, frame = canonicalize(pts)
    _check_frame(pts)
    if min(abs(pts[1, 1]), abs(pts[2, 2]), abs(pts[3, 2])) < 1e-12:
        raise FrameError("great-circle degeneracy: y1, z2 and z3 must be non-zero")
    s = _sin_matrix(pts)
    d = geo.signed_minors(pts)
    hemi = geo.hemisphere_test(pts)
    p1, p2, p3 = s[0, 1] * s[2, 3], s[0, 2] * s[1, 3], s[0, 3] * s[1, 2]
    if abs(d[3]) < 1e-14:
        if hemi is None:
            raise SingularConfigurationError("D3 = 0 although the points are in no hemisphere")
        masses = np.full(4, np.nan)
    else:
        masses = np.array([
            -m3 * d[0] * s[0, 1] ** 3 / (d[3] * s[1, 3] ** 3),
            m3 * d[1] * s[0, 1] ** 3 / (d[3] * s[0, 3] ** 3),
            -m3 * d[2] * s[0, 2] ** 3 / (d[3] * s[0, 3] ** 3),
            m3,
        ])
    r12, r13 = _rel(p1, p2), _rel(p1, p3)
    conditions = [
        ("not_in_hemisphere", hemi is None, 0.0 if hemi is None else float(np.min(pts @ hemi))),
        ("sin_products_01_23_eq_02_13", r12 < tol, r12),
        ("sin_products_01_23_eq_03_12", r13 < tol, r13),
        ("positive_masses", bool(np.all(masses > 0)), float(np.nanmin(masses)) if np.any(np.isfinite(masses)) else float("nan")),
    ]
    return _finish(pts, masses, d, conditions, frame)


def pentatope_check(points, m4=1.0, canonical=False, tol=CONDITION_TOL):
    """Iff-test for a 5-body SCC spanning S^3 (ratio conditions plus determinant masses)."""
    if not m4 > 0:
        raise ValueError("anchor mass m4 must be positive")
    pts = _as_sphere_points(points, 4)
    frame = None
    if canonical:
        pts, frame = canonicalize(pts)
    _check_frame(pts)
    if min(abs(pts[1, 1]), abs(pts[2, 2]), abs(pts[3, 3]), abs(pts[4, 3])) < 1e-12:
        raise FrameError("not a genuine pentatope: y1, z2, w3 and w4 must be non-zero")
    s = _sin_matrix(pts)
    d = geo.signed_minors(pts)
    hemi = geo.hemisphere_test(pts)
    chains = {
        "ratios_01": (s[0, 1] / s[0, 4], s[1, 2] / s[2, 4], s[1, 3] / s[3, 4]),
        "ratios_02": (s[0, 2] / s[0, 4], s[1, 2] / s[1, 4], s[2, 3] / s[3, 4]),
        "ratios_03": (s[0, 3] / s[0, 4], s[1, 3] / s[1, 4], s[2, 3] / s[2, 4]),
    }
    if abs(d[4]) < 1e-14:
        if hemi is None:
            raise SingularConfigurationError("D4 = 0 although the points are in no hemisphere")
        masses = np.full(5, np.nan)
    else:
        masses = np.array([
            m4 * d[0] * s[0, 1] ** 3 / (d[4] * s[1, 4] ** 3),
            -m4 * d[1] * s[0, 1] ** 3 / (d[4] * s[0, 4] ** 3),
            m4 * d[2] * s[0, 2] ** 3 / (d[4] * s[0, 4] ** 3),
            -m4 * d[3] * s[0, 3] ** 3 / (d[4] * s[0, 4] ** 3),
            m4,
        ])
    conditions = [("not_in_hemisphere", hemi is None,
                   0.0 if hemi is None else float(np.min(pts @ hemi)))]
    for name, (a, b, c) in chains.items():
        conditions.append((f"{name}_first_eq_second", _rel(a, b) < tol, _rel(a, b)))
        conditions.append((f"{name}_first_eq_third", _rel(a, c) < tol, _rel(a, c)))
    conditions.append(("positive_masses", bool(np.all(masses > 0)),
                       float(np.nanmin(masses)) if np.any(np.isfinite(masses)) else float("nan")))
    return _finish(pts, masses, d, conditions, frame)


def _finish(pts, masses, d, conditions, frame):
    if np.all(np.isfinite(masses)):
        # the assembled state is reported even for non-positive masses; only the
        # residual needs positive masses to be meaningful as an SCC certificate
        cfg = _assemble(pts, masses)
        res = per_body_residual(cfg)
        return SccReport(cfg, conditions, masses, d, res, float(res.max()), frame)
    cfg = _assemble(pts, np.ones(len(pts)))
    return SccReport(cfg, conditions, masses, d, None, None, frame)


def masses_from_anchor(report, anchor_mass):
    """Rescale a report's masses so the anchor (last body) has ``anchor_mass``; the formulas are linear."""
    return report.masses * (anchor_mass / report.masses[-1])
