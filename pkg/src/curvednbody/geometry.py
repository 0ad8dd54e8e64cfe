"""Signature-aware linear algebra on the unit 3-sphere and hyperbolic 3-sphere.

Points live in R^4. With ``sign = +1`` the ambient product is Euclidean and
points satisfy ``q . q = 1``; with ``sign = -1`` it is the Lorentz product
``x x' + y y' + z z' - w w'`` and points satisfy ``q . q = -1`` with ``w > 0``
(upper sheet of the hyperboloid).

All functions broadcast over leading axes: a configuration of ``N`` bodies is
an array of shape ``(N, 4)``.
"""

import numpy as np
from scipy.optimize import minimize

from .errors import ConstraintError, SingularConfigurationError

SPHERE = 1
HYPERBOLIC = -1

# inputs this far outside the arccsn domain are clamped instead of rejected
DOMAIN_CLAMP = 1e-9


def check_sign(sign):
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign!r}")
    return int(sign)


def metric_tensor(sign, dim=4):
    """Diagonal signature matrix ``diag(1, ..., 1, sign)``."""
    g = np.ones(dim)
    g[-1] = check_sign(sign)
    return np.diag(g)


def metric_dot(u, v, sign):
    """Euclidean (``sign=+1``) or Lorentz (``sign=-1``) product over the last axis."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    prod = u * v
    if check_sign(sign) == 1:
        return prod.sum(axis=-1)
    return prod[..., :-1].sum(axis=-1) - prod[..., -1]


def unified_trig(x, sign):
    """Return ``(sn, csn, ctn, csct)`` of ``x``.

    These are (sin, cos, cot, csc) on the sphere and (sinh, cosh, coth, csch)
    on the hyperbolic sphere. Raises ``ValueError`` where ``sn(x) = 0`` since
    ``ctn`` and ``csct`` are undefined there.
    """
    x = np.asarray(x, dtype=float)
    if check_sign(sign) == 1:
        sn, csn = np.sin(x), np.cos(x)
        # sin(k*pi) is not exactly zero in floating point
        k = np.round(x / np.pi)
        singular = np.abs(x - k * np.pi) <= 1e-12 * np.maximum(1.0, np.abs(x))
    else:
        sn, csn = np.sinh(x), np.cosh(x)
        singular = x == 0.0
    if np.any(singular):
        raise ValueError("ctn/csct undefined: sn(x) = 0")
    return sn, csn, csn / sn, 1.0 / sn


def sn(x, sign):
    return np.sin(x) if check_sign(sign) == 1 else np.sinh(x)


def csn(x, sign):
    return np.cos(x) if check_sign(sign) == 1 else np.cosh(x)


def arccsn(c, sign):
    """Inverse of ``csn`` with a small clamping band for round-off near the domain edge."""
    c = np.asarray(c, dtype=float)
    if check_sign(sign) == 1:
        if np.any(np.abs(c) > 1.0 + DOMAIN_CLAMP):
            raise ConstraintError(f"arccos argument outside [-1, 1]: {c}")
        return np.arccos(np.clip(c, -1.0, 1.0))
    if np.any(c < 1.0 - DOMAIN_CLAMP):
        raise ConstraintError(f"arccosh argument below 1: {c}")
    return np.arccosh(np.maximum(c, 1.0))


def pairwise_distance(a, b, sign):
    """Geodesic distance ``arccsn(sign * a . b)`` between unit points."""
    return arccsn(sign * metric_dot(a, b, sign), sign)


def distance_matrix(q, sign):
    """All pairwise distances of a configuration ``q`` of shape ``(N, 4)``."""
    q = np.asarray(q, dtype=float)
    g = metric_tensor(sign, q.shape[-1])
    return arccsn(sign * (q @ g @ q.T), sign)


def check_unit_points(q, sign, tol=1e-9):
    """Raise ``ConstraintError`` unless every row of ``q`` lies on the unit manifold."""
    q = np.atleast_2d(np.asarray(q, dtype=float))
    if not np.all(np.isfinite(q)):
        raise ConstraintError("non-finite coordinates")
    resid = np.abs(metric_dot(q, q, sign) - sign)
    if np.any(resid > tol):
        raise ConstraintError(f"points off the unit manifold (max residual {resid.max():.3e})")
    if sign == -1 and np.any(q[..., -1] <= 0):
        raise ConstraintError("hyperbolic points must lie on the upper sheet (w > 0)")
    return q


def project_state(q, v, sign):
    """Project a position onto the unit manifold and a velocity onto its tangent space.

    The position is rescaled by ``|q . q|^(-1/2)``; the velocity loses its
    metric-normal component, ``v - sign (q . v) q``. Both arrays may carry
    leading body axes.
    """
    sign = check_sign(sign)
    q = np.asarray(q, dtype=float)
    v = np.asarray(v, dtype=float)
    qq = metric_dot(q, q, sign)
    if np.any(qq * sign <= 0):
        raise ConstraintError("cannot normalize: q . q has the wrong sign or vanishes")
    qbar = q / np.sqrt(np.abs(qq))[..., None]
    if sign == -1 and np.any(qbar[..., -1] <= 0):
        raise ConstraintError("point lies on the lower sheet of the hyperboloid")
    vbar = v - (sign * metric_dot(qbar, v, sign))[..., None] * qbar
    return qbar, vbar


def tangent_speed_squared(q, v, sign):
    """Metric square of tangent velocities; non-negative for valid tangent vectors."""
    return metric_dot(v, v, sign)


def random_unit_points(rng, n, sign, dim=4, spread=1.0):
    """Random points on the unit manifold (Gaussian directions; hyperbolic radius ~ ``spread``)."""
    if sign == 1:
        p = rng.standard_normal((n, dim))
        return p / np.linalg.norm(p, axis=-1, keepdims=True)
    spatial = rng.standard_normal((n, dim - 1)) * spread
    w = np.sqrt(1.0 + np.sum(spatial**2, axis=-1))
    return np.column_stack([spatial, w])


def random_tangent(rng, q, sign, scale=1.0):
    """Random tangent vectors at each row of ``q``."""
    v = rng.standard_normal(q.shape) * scale
    return v - (sign * metric_dot(q, v, sign))[..., None] * q


# -- hemisphere containment ---------------------------------------------------

HEMISPHERE_TOL = 1e-8
HEMISPHERE_STARTS = 64


def max_min_direction(points, n_starts=HEMISPHERE_STARTS, seed=0):
    """Maximize ``min_i n . q_i`` over unit directions ``n``.

    Multi-start local ascent on the epigraph form (maximize ``t`` subject to
    ``q_i . n >= t`` and ``|n| = 1``). Starts are deterministic: the coordinate
    axes and their negatives, the normalized centroid, the points themselves,
    then seeded random directions up to ``n_starts``.

    Returns ``(n, value)`` for the best start.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    dim = pts.shape[1]
    starts = [np.eye(dim), -np.eye(dim)]
    centroid = pts.sum(axis=0)
    if np.linalg.norm(centroid) > 1e-12:
        starts.append((centroid / np.linalg.norm(centroid))[None, :])
    starts.append(pts / np.linalg.norm(pts, axis=1, keepdims=True))
    starts = np.vstack(starts)
    n_random = max(0, n_starts - len(starts))
    if n_random:
        r = np.random.default_rng(seed).standard_normal((n_random, dim))
        starts = np.vstack([starts, r / np.linalg.norm(r, axis=1, keepdims=True)])
    starts = starts[:max(n_starts, 1)]

    cons = (
        {"type": "ineq", "fun": lambda z: pts @ z[:-1] - z[-1],
         "jac": lambda z: np.column_stack([pts, -np.ones(len(pts))])},
        {"type": "eq", "fun": lambda z: z[:-1] @ z[:-1] - 1.0,
         "jac": lambda z: np.append(2.0 * z[:-1], 0.0)},
    )
    best_n, best_val = None, -np.inf
    for n0 in starts:
        z0 = np.append(n0, np.min(pts @ n0))
        res = minimize(lambda z: -z[-1], z0, jac=lambda z: np.append(np.zeros(dim), -1.0),
                       constraints=cons, method="SLSQP",
                       options={"ftol": 1e-14, "maxiter": 200})
        n = res.x[:-1]
        nrm = np.linalg.norm(n)
        if not np.isfinite(nrm) or nrm == 0:
            continue
        n = n / nrm
        val = np.min(pts @ n)
        if val > best_val:
            best_n, best_val = n, val
    return best_n, best_val


def hemisphere_test(points, tol=HEMISPHERE_TOL, n_starts=HEMISPHERE_STARTS, seed=0):
    """Return a unit direction ``n`` with ``min_i n . q_i >= -tol``, or ``None``.

    ``None`` means no closed hemisphere contains all the points. Works in any
    ambient dimension, so configurations on a great 2-sphere can be tested in
    R^3 directly.
    """
    n, val = max_min_direction(points, n_starts=n_starts, seed=seed)
    if n is None or val < -tol:
        return None
    return n


# -- determinants -------------------------------------------------------------

def signed_minors(vectors):
    """``D_k = det`` of the collection with ``v_k`` removed (vectors as columns)."""
    vs = np.asarray(vectors, dtype=float)
    n1, n = vs.shape
    if n1 != n + 1:
        raise ValueError(f"need n+1 vectors in R^n, got {n1} vectors in R^{n}")
    return np.array([np.linalg.det(np.delete(vs, k, axis=0).T) for k in range(n1)])


def signed_minor_identity(vectors):
    """Residual ``sum_k (-1)^k D_k v_k``, which vanishes for any rank-``n`` collection."""
    vs = np.asarray(vectors, dtype=float)
    d = signed_minors(vs)
    scale = np.max(np.linalg.norm(vs, axis=1)) ** vs.shape[1]
    if np.max(np.abs(d)) <= 1e-14 * max(scale, 1e-300):
        raise SingularConfigurationError("rank-deficient collection: all minors vanish")
    signs = (-1.0) ** np.arange(len(vs))
    return (signs * d) @ vs


def configuration_rank(q, tol=1e-9):
    """Numerical rank of the position vectors (rows of ``q``)."""
    s = np.linalg.svd(np.atleast_2d(q), compute_uv=False)
    return int(np.sum(s > tol * max(s[0], 1.0)))


# -- isometries ---------------------------------------------------------------

def preserves_metric(m, sign, tol=1e-12):
    """True when ``m^T G m = G`` for the signature matrix ``G``."""
    m = np.asarray(m, dtype=float)
    g = metric_tensor(sign, m.shape[0])
    return np.max(np.abs(m.T @ g @ m - g)) <= tol


def random_rotation(rng, dim=4):
    """Haar-random element of SO(dim)."""
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def canonical_frame(points):
    """Rotation ``R`` in SO(d) putting the points in the canonical frame.

    Row ``k`` of ``R`` is the Gram-Schmidt direction of point ``k``, so
    ``R q_0 = e_1``, ``R q_1`` lies in the span of ``e_1, e_2`` and so on. The
    last row is fixed by completing to a right-handed orthonormal basis.
    """
    pts = np.asarray(points, dtype=float)
    dim = pts.shape[1]
    basis = []
    for p in pts:
        v = p.copy()
        for b in basis:
            v = v - (v @ b) * b
        nrm = np.linalg.norm(v)
        if nrm > 1e-10:
            basis.append(v / nrm)
        if len(basis) == dim - 1:
            break
    if len(basis) < dim - 1:
        raise SingularConfigurationError("points do not span enough directions for a frame")
    # complete with the generalized cross product, which makes det(R) = +1
    m = np.array(basis)
    last = np.array([(-1) ** (dim - 1 + j) * np.linalg.det(np.delete(m, j, axis=1))
                     for j in range(dim)])
    r = np.vstack([m, last / np.linalg.norm(last)])
    if np.linalg.det(r) < 0:
        r[-1] = -r[-1]
    return r
