"""Extended-precision route for rest configurations that are unstable equilibria.

Double rings are linearly unstable fixed points: perturbations grow like
``exp(lambda t)`` with ``lambda`` of about 4 or more along the whole root
curve. In double precision the round-off in the force sum alone is
amplified past ``1e-8`` well before ``t = 10``, whatever the integrator. This
module repeats the same scheme (RK4 plus projection onto the manifold) in
mpmath arithmetic, with the root itself refined to the working precision,
so the fixed-point property can be witnessed rather than drowned in noise.
"""

import mpmath as mp
import numpy as np

from .dynamics import Trajectory
from .errors import ProfileError, SingularConfigurationError
from .geometry import check_sign
from .scc import DoubleRingParams, _family, _ring_formulas

DEFAULT_DPS = 40


def _kappa_mp(p, t):
    """``(kappa, kappa')`` of an analytic profile at an mpf time."""
    a = [mp.mpf(x) for x in p.params] if p.kind != "tabulated" else None
    if p.kind == "constant":
        return a[0], mp.mpf(0)
    if p.kind == "linear":
        return a[0] + a[1] * t, a[1]
    if p.kind == "exponential":
        e = mp.exp(a[1] * t)
        return a[0] * e, a[0] * a[1] * e
    if p.kind == "sinusoidal":
        return a[0] + a[1] * mp.sin(a[2] * t), a[1] * a[2] * mp.cos(a[2] * t)
    raise ProfileError("the extended-precision route supports analytic profiles only")


def _ring_dirs_mp(family):
    if family == "triangle":
        h = mp.sqrt(3) / 2
        return [[mp.mpf(1), mp.mpf(0), mp.mpf(0)], [mp.mpf(-0.5), h, mp.mpf(0)],
                [mp.mpf(-0.5), -h, mp.mpf(0)]]
    t = mp.mpf(1) / 3
    s2, s6 = mp.sqrt(2) / 3, mp.sqrt(6) / 3
    return [[mp.mpf(1), mp.mpf(0), mp.mpf(0)], [-t, 2 * s2, mp.mpf(0)],
            [-t, -s2, s6], [-t, -s2, -s6]]


def refine_double_ring(family, c1, c2, dps=DEFAULT_DPS):
    """Polish a double-ring root ``c1`` (at fixed ``c2``) to ``dps`` digits.

    Returns ``(c1, m, q, masses)`` as mpf values, with ``q`` a list of 4-lists.
    """
    _, k, n = _family(family)
    with mp.workdps(dps):
        c2m = mp.mpf(c2)
        f = lambda x: _ring_formulas(x, c2m, k, n, mp.sqrt)[1]
        # the double-precision root brackets the exact one closely; a bracketing
        # solver stays inside the real domain where the secant method may not
        lo, hi = mp.mpf(c1) - mp.mpf("1e-9"), mp.mpf(c1) + mp.mpf("1e-9")
        if f(lo) * f(hi) > 0:
            raise SingularConfigurationError("no sign change around the supplied root")
        c1m = mp.findroot(f, (lo, hi), solver="anderson", tol=mp.mpf(10) ** (-2 * dps + 10))
        m = _ring_formulas(c1m, c2m, k, n, mp.sqrt)[0]
        r1, r2 = mp.sqrt(1 - c1m**2), mp.sqrt(1 - c2m**2)
        q = []
        for c, r in ((c1m, r1), (c2m, r2)):
            for d in _ring_dirs_mp(family):
                if family == "triangle":
                    q.append([r * d[0], r * d[1], c, mp.mpf(0)])
                else:
                    q.append([r * d[0], r * d[1], r * d[2], c])
        masses = [mp.mpf(1)] * n + [m] * n
    DoubleRingParams(family, float(c1m), float(c2), float(m))  # range check
    return c1m, m, q, masses


def _dot(a, b, sign):
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + sign * a[3] * b[3]


def _rhs(q, v, masses, sign, k, kd):
    n = len(q)
    scale = abs(k) ** mp.mpf(1.5)
    acc = []
    for i in range(n):
        f = [mp.mpf(0)] * 4
        for j in range(n):
            if i == j:
                continue
            c = _dot(q[i], q[j], sign)
            sn2 = sign * (1 - c * c)
            if sn2 <= 0:
                raise SingularConfigurationError("singular pair")
            w = masses[i] * masses[j] / (sn2 * mp.sqrt(sn2))
            for a in range(4):
                f[a] += w * (q[j][a] - sign * c * q[i][a])
        vv = _dot(v[i], v[i], sign)
        acc.append([scale * f[a] / masses[i] - sign * vv * q[i][a] + kd / k * v[i][a]
                    for a in range(4)])
    return acc


def _axpy(x, h, y):
    return [[xa + h * ya for xa, ya in zip(xi, yi)] for xi, yi in zip(x, y)]


def _project(q, v, sign):
    qs, vs = [], []
    for qi, vi in zip(q, v):
        s = mp.sqrt(abs(_dot(qi, qi, sign)))
        qi = [x / s for x in qi]
        c = sign * _dot(qi, vi, sign)
        qs.append(qi)
        vs.append([x - c * y for x, y in zip(vi, qi)])
    return qs, vs


def integrate_mp(q, v, masses, sign, p, t_end, step=1e-2, sample_every=1, t0=0.0,
                 dps=DEFAULT_DPS):
    """RK4 with projection in ``dps``-digit arithmetic; samples are returned as float64.

    ``q``, ``v`` and ``masses`` may hold anything mpmath accepts (mpf, str,
    float). The profile must be one of the analytic kinds.
    """
    sign = check_sign(sign)
    with mp.workdps(dps):
        q = [[mp.mpf(x) for x in row] for row in q]
        v = [[mp.mpf(x) for x in row] for row in v]
        m = [mp.mpf(x) for x in masses]
        t0m, span = mp.mpf(t0), mp.mpf(t_end) - mp.mpf(t0)
        nsteps = max(1, int(round(abs(float(span)) / step)))
        h = span / nsteps

        def f(t, y):
            k, kd = _kappa_mp(p, t)
            return y[1], _rhs(y[0], y[1], m, sign, k, kd)

        def as_f64(x):
            return np.array([[float(a) for a in row] for row in x])

        times, qs, vs = [float(t0m)], [as_f64(q)], [as_f64(v)]
        for i in range(nsteps):
            t = t0m + i * h
            y = (q, v)
            k1 = f(t, y)
            k2 = f(t + h / 2, (_axpy(q, h / 2, k1[0]), _axpy(v, h / 2, k1[1])))
            k3 = f(t + h / 2, (_axpy(q, h / 2, k2[0]), _axpy(v, h / 2, k2[1])))
            k4 = f(t + h, (_axpy(q, h, k3[0]), _axpy(v, h, k3[1])))
            dq = [[(a + 2 * b + 2 * c + d) / 6 for a, b, c, d in zip(*rows)]
                  for rows in zip(k1[0], k2[0], k3[0], k4[0])]
            dv = [[(a + 2 * b + 2 * c + d) / 6 for a, b, c, d in zip(*rows)]
                  for rows in zip(k1[1], k2[1], k3[1], k4[1])]
            q, v = _project(_axpy(q, h, dq), _axpy(v, h, dv), sign)
            if (i + 1) % sample_every == 0 or i + 1 == nsteps:
                times.append(float(t + h))
                qs.append(as_f64(q))
                vs.append(as_f64(v))
        masses64 = np.array([float(x) for x in m])
    return Trajectory(np.array(times), np.array(qs), np.array(vs), masses64, sign)
