"""Homographic orbits ``q_i(t) = exp(K(t) X) q_i`` built from a rest configuration.

``X`` is a constant generator in so(4) (sphere) or so(3,1) (hyperbolic
sphere) and ``K(t)`` is the primitive of the curvature. Three families are
provided:

* ``S3``: equal-rate rotations in the xy and zw planes (relative orientation
  ``+1`` or ``-1``). Unequal rates are available only through
  :func:`s3_rates`, which exists as a negative control.
* ``H3_parabolic``: a nilpotent generator, so the exponential is the
  quadratic polynomial ``I + eta N + eta^2 N^2 / 2``.
* ``H3_elliptic_hyperbolic``: a rotation in xy together with a boost in zw.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import geometry as geo
from .dynamics import SystemState, Trajectory, force_gradient_q
from .errors import ProfileError

FAMILIES = ("S3", "S3_rates", "H3_parabolic", "H3_elliptic_hyperbolic")

# nilpotent parabolic generator: N^3 = 0 and N lies in so(3,1)
PARABOLIC_N = np.zeros((4, 4))
PARABOLIC_N[1, 2] = -1.0
PARABOLIC_N[1, 3] = 1.0
PARABOLIC_N[2, 1] = 1.0
PARABOLIC_N[3, 1] = 1.0


def _rot(i, j, rate):
    x = np.zeros((4, 4))
    x[j, i] = rate
    x[i, j] = -rate
    return x


def _boost(i, j, rate):
    x = np.zeros((4, 4))
    x[i, j] = x[j, i] = rate
    return x


@dataclass(frozen=True)
class XiSpec:
    """A one-parameter isometry family ``K -> exp(K X)``, optionally conjugated by ``base_change``."""

    family: str
    params: tuple
    base_change: np.ndarray = field(default=None, compare=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        object.__setattr__(self, "params", tuple(float(x) for x in self.params))
        need = {"S3": 2, "S3_rates": 2, "H3_parabolic": 1, "H3_elliptic_hyperbolic": 2}
        if len(self.params) != need[self.family]:
            raise ValueError(f"{self.family} takes {need[self.family]} parameters")
        if self.family == "S3" and self.params[1] not in (1.0, -1.0):
            raise ValueError("relative_sign must be +1 or -1")
        if self.base_change is not None:
            b = np.asarray(self.base_change, dtype=float)
            if b.shape != (4, 4) or not geo.preserves_metric(b, self.sign):
                raise ValueError("base_change must preserve the metric to 1e-12")
            object.__setattr__(self, "base_change", b)

    @property
    def sign(self):
        return 1 if self.family.startswith("S3") else -1

    def raw_generator(self):
        p = self.params
        if self.family == "S3":
            return _rot(0, 1, p[0]) + _rot(2, 3, p[1] * p[0])
        if self.family == "S3_rates":
            return _rot(0, 1, p[0]) + _rot(2, 3, p[1])
        if self.family == "H3_parabolic":
            return p[0] * PARABOLIC_N
        return _rot(0, 1, p[0]) + _boost(2, 3, p[1])

    def generator(self):
        """``X`` with the base change applied: ``B^-1 X B``."""
        x = self.raw_generator()
        if self.base_change is None:
            return x
        b = self.base_change
        return np.linalg.solve(b, x @ b)

    def to_dict(self):
        d = {"family": self.family, "params": list(self.params)}
        if self.base_change is not None:
            d["base_change"] = self.base_change.tolist()
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(d["family"], d["params"], d.get("base_change"))


def s3_spec(c, relative_sign=1, base_change=None):
    return XiSpec("S3", (c, relative_sign), base_change)


def s3_rates(a, b, base_change=None):
    """Rotation by ``a`` in xy and ``b`` in zw. Only ``a = +-b`` gives homographic orbits."""
    return XiSpec("S3_rates", (a, b), base_change)


def h3_parabolic(rate, base_change=None):
    return XiSpec("H3_parabolic", (rate,), base_change)


def h3_elliptic_hyperbolic(a, b, base_change=None):
    return XiSpec("H3_elliptic_hyperbolic", (a, b), base_change)


def _raw_exp(spec, k):
    p = spec.params
    if spec.family in ("S3", "S3_rates"):
        a, b = (p[0], p[1] * p[0]) if spec.family == "S3" else p
        ca, sa, cb, sb = math.cos(a * k), math.sin(a * k), math.cos(b * k), math.sin(b * k)
        return np.array([[ca, -sa, 0, 0], [sa, ca, 0, 0], [0, 0, cb, -sb], [0, 0, sb, cb]])
    if spec.family == "H3_parabolic":
        eta = p[0] * k
        n = PARABOLIC_N
        return np.eye(4) + eta * n + 0.5 * eta * eta * (n @ n)
    a, b = p
    ca, sa = math.cos(a * k), math.sin(a * k)
    ch, sh = math.cosh(b * k), math.sinh(b * k)
    return np.array([[ca, -sa, 0, 0], [sa, ca, 0, 0], [0, 0, ch, sh], [0, 0, sh, ch]])


def exp_xi(spec, K):
    """Closed-form ``exp(K X)`` for the spec's generator."""
    m = _raw_exp(spec, float(K))
    if spec.base_change is None:
        return m
    b = spec.base_change
    return np.linalg.solve(b, m @ b)


@dataclass
class HomographicOrbit(Trajectory):
    """A sampled homographic orbit; keeps its spec and profile for analytic derivatives."""

    spec: XiSpec = None
    profile: object = field(default=None, repr=False)
    base: np.ndarray = field(default=None, repr=False)


def build_orbit(scc, spec, p, times, diagnostics=True):
    """Sample ``exp(K(t) X) q_i`` and its velocity ``kappa X exp(K X) q_i``."""
    if np.any(scc.v != 0):
        raise ValueError("homographic orbits start from a configuration at rest")
    if spec.sign != scc.sign or p.sign != scc.sign:
        raise ValueError("spec, profile and configuration must share one sign")
    times = np.asarray(times, dtype=float)
    x = spec.generator()
    ks = np.asarray(p.kappa(times), dtype=float)
    big_k = np.atleast_1d(p.primitive(times))
    qs, vs = [], []
    for k, kk in zip(ks, big_k):
        q = scc.q @ exp_xi(spec, kk).T
        qs.append(q)
        vs.append(k * q @ x.T)
    orbit = HomographicOrbit(times, np.array(qs), np.array(vs), scc.masses.copy(), scc.sign,
                             spec=spec, profile=p, base=scc.q.copy())
    return orbit.compute_diagnostics(p) if diagnostics else orbit


def orbit_accelerations(orbit):
    """Analytic ``(kappa' X + kappa^2 X^2) exp(K X) q`` at each sample."""
    x = orbit.spec.generator()
    p = orbit.profile
    k = np.asarray(p.kappa(orbit.times), dtype=float)
    kd = np.asarray(p.kappa_dot(orbit.times), dtype=float)
    x2 = x @ x
    return np.array([q @ (kdi * x + ki * ki * x2).T for q, ki, kdi in zip(orbit.q, k, kd)])


def motion_residual(orbit, masses=None, p=None, direct=False):
    """Largest equation-of-motion defect along the orbit.

    ``max_i,t |m q'' - |kappa|^(3/2) F - (-sign m (v.v) q + m (kappa'/kappa) v)|``.

    By default the defect is evaluated in the co-moving frame and carried
    forward by ``exp(K X)``. Forces commute with isometries and ``X`` commutes
    with its exponential, so this equals the direct evaluation, but it stays
    accurate when large boosts push the sampled coordinates far out on the
    hyperboloid. ``direct=True`` evaluates on the sampled positions with the
    analytic acceleration ``(kappa' X + kappa^2 X^2) exp(K X) q``.
    """
    masses = orbit.masses if masses is None else np.asarray(masses, dtype=float)
    p = orbit.profile if p is None else p
    if direct:
        return _direct_residual(orbit, masses, p)
    sign = orbit.sign
    x = orbit.spec.generator()
    q0 = orbit.base
    m = masses[:, None]
    xq = q0 @ x.T
    xxq = xq @ x.T
    f0 = force_gradient_q(q0, masses, sign)
    speed = geo.metric_dot(xq, xq, sign)[:, None]
    k = np.asarray(p.kappa(orbit.times), dtype=float)
    kd = np.asarray(p.kappa_dot(orbit.times), dtype=float)
    big_k = np.atleast_1d(p.primitive(orbit.times))
    worst = 0.0
    for ki, kdi, kk in zip(k, kd, big_k):
        # the kappa' terms of acceleration and drag cancel identically
        r0 = (m * (kdi * xq + ki * ki * xxq) - abs(ki) ** 1.5 * f0
              + sign * m * ki * ki * speed * q0 - m * kdi * xq)
        r = r0 @ exp_xi(orbit.spec, kk).T
        worst = max(worst, float(np.max(np.linalg.norm(r, axis=1))))
    return worst


def _direct_residual(orbit, masses, p):
    sign = orbit.sign
    acc = orbit_accelerations(orbit)
    k = np.asarray(p.kappa(orbit.times), dtype=float)
    kd = np.asarray(p.kappa_dot(orbit.times), dtype=float)
    m = masses[:, None]
    worst = 0.0
    for q, v, a, ki, kdi in zip(orbit.q, orbit.v, acc, k, kd):
        f = force_gradient_q(q, masses, sign)
        vv = geo.metric_dot(v, v, sign)
        r = m * a - abs(ki) ** 1.5 * f - (-sign * m * vv[:, None] * q + m * (kdi / ki) * v)
        worst = max(worst, float(np.max(np.linalg.norm(r, axis=1))))
    return worst


# -- hyperbolic non-existence probe ----------------------------------------------

def default_h3_grid(n_parabolic=100, n_ab=30, rate_max=3.0):
    """100 parabolic rates and a 30 x 30 grid of (rotation, boost) rates: 1000 specs."""
    rates = np.linspace(-rate_max, rate_max, n_parabolic)
    ab = np.linspace(-rate_max, rate_max, n_ab)
    specs = [h3_parabolic(r) for r in rates]
    specs += [h3_elliptic_hyperbolic(a, b) for a in ab for b in ab]
    return specs


def probe_times(p, n=41, t_end=None):
    """Sample times covering one curvature period (or ``[0, 10]`` for aperiodic kinds)."""
    if t_end is None:
        if p.kind == "sinusoidal" and p.params[2] != 0:
            t_end = 2 * math.pi / abs(p.params[2])
        else:
            t_end = 10.0
    lo, hi = p.span
    t_end = min(t_end, hi)
    return np.linspace(max(lo, 0.0), t_end, n)


@dataclass
class ProbeReport:
    config_id: str
    min_residual: float
    argmin_spec: dict
    n_specs: int

    def to_json(self):
        return json.dumps({"config_id": self.config_id, "min_residual": self.min_residual,
                           "argmin_spec": self.argmin_spec, "n_specs": self.n_specs})


def h3_nonexistence_probe(config, p, specs=None, times=None, config_id="config"):
    """Minimum motion residual over a grid of hyperbolic specs.

    Hyperbolic configurations have no critical points of the force function,
    so no spec should make the residual vanish while the curvature varies.
    """
    if config.sign != -1 or p.sign != -1:
        raise ValueError("the non-existence probe is for the hyperbolic sphere (sign -1)")
    if p.is_constant:
        raise ProfileError("constant curvature is excluded: the probe needs non-constant kappa")
    specs = default_h3_grid() if specs is None else specs
    times = probe_times(p) if times is None else np.asarray(times, dtype=float)
    best, arg = math.inf, None
    for spec in specs:
        r = motion_residual(build_orbit(config, spec, p, times, diagnostics=False))
        if r < best:
            best, arg = r, spec
    return ProbeReport(config_id, float(best), arg.to_dict(), len(specs))


def perturb_along_sphere(s, body, delta, direction=None, seed=0):
    """Move one body a geodesic distance ``delta`` (sphere or hyperbolic sphere)."""
    q = s.q.copy()
    qi = q[body]
    if direction is None:
        direction = np.random.default_rng(seed).standard_normal(4)
    u = np.asarray(direction, dtype=float)
    u = u - s.sign * geo.metric_dot(qi, u, s.sign) * qi
    u = u / math.sqrt(geo.metric_dot(u, u, s.sign))
    q[body] = geo.csn(delta, s.sign) * qi + geo.sn(delta, s.sign) * u
    return SystemState(s.t, q, np.zeros_like(q), s.masses.copy(), s.sign)
