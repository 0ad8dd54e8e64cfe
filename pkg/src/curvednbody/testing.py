"""Reference configurations shared by the test suite, the verify command and the demos.

These are constructions for exercising the library, not general solvers:
well-separated 3-body initial data for both signs, and symmetric
tetrahedral/pentatope families that satisfy the checker conditions.
"""

import math

import numpy as np
from scipy.optimize import brentq

from . import curvature as cv
from .dynamics import SystemState, at_rest, force_function_q, force_gradient_q
from .geometry import metric_tensor, random_unit_points


def builtin_profiles(sign, t_end=10.0):
    """One profile of every built-in kind, all keeping the given sign on ``[0, t_end]``."""
    tt = np.linspace(0.0, t_end + 0.5, 22)
    return [
        cv.constant(sign),
        cv.linear(sign, sign * 0.05),
        cv.exponential(sign, -0.05),
        cv.sinusoidal(sign, sign * 0.1),
        cv.tabulated(tt, sign * (1 + 0.2 * np.cos(tt / 3))),
    ]


def three_body_sphere():
    """Three bodies on mutually non-intersecting great circles of S^3, moving fast enough
    that their mutual attraction only perturbs the geodesics."""
    h = math.sqrt(0.5)
    q = np.array([[1.0, 0, 0, 0], [0, 0, 1.0, 0], [h, 0, h, 0]])
    v = 3.0 * np.array([[0, 1.0, 0, 0], [0, 0, 0, -1.0], [0, h, 0, h]])
    return SystemState(0.0, q, v, [1.0, 2.0, 1.5], 1)


def three_body_hyperbolic(r1=0.6, r2=1.0):
    """A heavy body at the origin of H^3 with two satellites started on circular speeds
    in perpendicular planes; the centre gets the velocity that zeroes the boost momenta."""
    m = np.array([2.0, 1.0, 1.5])
    q = np.array([[0, 0, 0, 1.0],
                  [r1, 0, 0, math.sqrt(1 + r1 * r1)],
                  [0, 0, r2, math.sqrt(1 + r2 * r2)]])
    v = np.zeros_like(q)
    f1 = force_gradient_q(q[:2], m[:2], -1)[1, 0] / m[1]
    f2 = force_gradient_q(q[[0, 2]], m[[0, 2]], -1)[1, 2] / m[2]
    v[1, 1] = math.sqrt(-f1 / (r1 * (1 + r1 * r1))) * r1
    v[2, 1] = -math.sqrt(-f2 / (r2 * (1 + r2 * r2))) * r2
    v[0, :3] = -(m[1:, None] * q[1:, 3:4] * v[1:]).sum(axis=0)[:3] / m[0]
    return SystemState(0.0, q, v, m, -1)


def lagrange_triangle(masses=(1.0, 1.0, 1.0)):
    """Three bodies evenly spaced on the great circle ``z = w = 0``."""
    a = 2 * math.pi / 3 * np.arange(3)
    q = np.column_stack([np.cos(a), np.sin(a), np.zeros(3), np.zeros(3)])
    return at_rest(q, masses, 1)


def hyperbolic_configs():
    """Three fixed H^3 configurations used by the non-existence probe."""
    r = 0.5
    w = math.sqrt(1 + r * r)
    pair = at_rest([[r, 0, 0, w], [-r, 0, 0, w]], [1.0, 1.0], -1)
    a = 2 * math.pi / 3 * np.arange(3)
    tri = at_rest(np.column_stack([r * np.cos(a), r * np.sin(a), np.zeros(3), np.full(3, w)]),
                  [1.0, 1.0, 1.0], -1)
    sc = np.array([[0.3, -0.2, 0.1], [-0.4, 0.5, 0.0], [0.1, 0.2, -0.6]])
    scalene = at_rest(np.column_stack([sc, np.sqrt(1 + (sc**2).sum(axis=1))]), [1.0, 2.0, 1.5], -1)
    return {"pair": pair, "triangle": tri, "scalene": scalene}


def _roots(fun, lo, hi, n=2000):
    xs = np.linspace(lo, hi, n)
    vals = np.array([fun(x) for x in xs])
    return [brentq(fun, xs[i], xs[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps)
            for i in np.flatnonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)]


def symmetric_tetrahedra(c):
    """Tetrahedra ``(+-s, 0, c), (0, +-t, -d)`` with two reflection symmetries meeting the
    sine-product condition ``sin d01 sin d23 = sin^2 d02`` (``s, t`` fixed by unit norm)."""
    s = math.sqrt(1 - c * c)

    def cond(d):
        return 4 * s * c * math.sqrt(1 - d * d) * d - (1 - c * c * d * d)

    out = []
    for d in _roots(cond, 1e-3, 1 - 1e-3):
        t = math.sqrt(1 - d * d)
        out.append(np.array([[s, 0, c], [-s, 0, c], [0, t, -d], [0, -t, -d]]))
    return out


def regular_tetrahedron():
    """The regular tetrahedron inscribed in the unit 2-sphere."""
    c = 1 / math.sqrt(3)
    s = math.sqrt(2 / 3)
    return np.array([[s, 0, c], [-s, 0, c], [0, s, -c], [0, -s, -c]])


def symmetric_pentatopes(h):
    """Pentatopes made of an equilateral triangle at height ``w = h`` and a pair
    ``(0, 0, +-rho, -g)``; the ratio conditions reduce to ``s_T s_QQ = s_X^2``."""
    r = math.sqrt(1 - h * h)
    a = 2 * math.pi / 3 * np.arange(3)
    tri = np.column_stack([r * np.cos(a), r * np.sin(a), np.zeros(3), np.full(3, h)])
    s_t = math.sqrt(1 - (h * h - r * r / 2) ** 2)

    def cond(g):
        rho2 = 1 - g * g
        return s_t * math.sqrt(1 - (g * g - rho2) ** 2) - (1 - (h * g) ** 2)

    out = []
    for g in _roots(cond, 1e-3, 1 - 1e-3):
        rho = math.sqrt(1 - g * g)
        out.append(np.vstack([tri, [[0, 0, rho, -g], [0, 0, -rho, -g]]]))
    return out


def regular_pentatope():
    """The regular pentatope in the triangle-plus-pair frame (first root at ``h = 1/sqrt(6)``)."""
    return symmetric_pentatopes(1 / math.sqrt(6))[0]


def fd_gradient(q, masses, sign, h=1e-6):
    """Central-difference gradient of the force function, index raised with the ambient metric."""
    q = np.asarray(q, dtype=float)
    out = np.zeros_like(q)
    for i in range(q.shape[0]):
        for a in range(q.shape[1]):
            qp, qm = q.copy(), q.copy()
            qp[i, a] += h
            qm[i, a] -= h
            out[i, a] = (force_function_q(qp, masses, sign) - force_function_q(qm, masses, sign)) / (2 * h)
    return out @ metric_tensor(sign)


def gradient_fd_error(rng, n_states, sign, h=1e-6):
    """Worst relative gap between the analytic and finite-difference gradients over random states."""
    worst = 0.0
    for _ in range(n_states):
        n = int(rng.integers(2, 7))
        q = random_unit_points(rng, n, sign, spread=0.8)
        m = rng.uniform(0.5, 2.0, n)
        f = force_gradient_q(q, m, sign)
        worst = max(worst, float(np.max(np.abs(fd_gradient(q, m, sign, h) - f)) / np.max(np.abs(f))))
    return worst
