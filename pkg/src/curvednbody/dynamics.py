"""Equations of motion of the N-body problem with uniformly varying curvature.

Positions ``q`` are the projected coordinates on the unit sphere or unit
hyperbolic sphere; the physical positions are ``|kappa|^(-1/2) q``. The
projected system is

    m_i q_i'' = |kappa|^(3/2) F_i - sign m_i (q_i' . q_i') q_i + m_i (kappa'/kappa) q_i'

with ``F_i`` the gradient of the cotangent force function on the unit manifold.
"""

from dataclasses import dataclass, field

import numpy as np

from . import geometry as geo
from .curvature import validate_profile
from .errors import ConstraintError, ProfileError, SingularConfigurationError

# (a, b) coordinate index pairs of the six angular-momentum planes
PLANES = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))
PLANE_NAMES = ("xy", "xz", "xw", "yz", "yw", "zw")

COLLISION_SN = 1e-6
STATE_TOL = 1e-9


@dataclass
class SystemState:
    """Time, projected positions ``q`` (N, 4), tangent velocities ``v`` (N, 4), masses (N,)."""

    t: float
    q: np.ndarray
    v: np.ndarray
    masses: np.ndarray
    sign: int = 1

    def __post_init__(self):
        self.q = np.atleast_2d(np.asarray(self.q, dtype=float))
        self.v = np.atleast_2d(np.asarray(self.v, dtype=float)) if self.v is not None \
            else np.zeros_like(self.q)
        self.masses = np.atleast_1d(np.asarray(self.masses, dtype=float))
        self.sign = geo.check_sign(self.sign)
        self.t = float(self.t)
        if self.q.shape != self.v.shape or self.q.shape[1] != 4:
            raise ValueError("positions and velocities must both have shape (N, 4)")
        if len(self.masses) != len(self.q):
            raise ValueError("one mass per body required")

    @property
    def n(self):
        return len(self.q)

    def check(self, tol=STATE_TOL):
        """Raise unless the state satisfies the manifold, tangency and separation invariants."""
        if np.any(self.masses <= 0):
            raise ConstraintError("masses must be positive")
        geo.check_unit_points(self.q, self.sign, tol)
        tang = np.abs(geo.metric_dot(self.q, self.v, self.sign))
        if np.any(tang > tol):
            raise ConstraintError(f"velocity not tangent (residual {tang.max():.3e})")
        if self.n > 1 and min_sn(self.q, self.sign) < tol:
            raise SingularConfigurationError("collision or antipodal pair")
        return self

    def copy(self):
        return SystemState(self.t, self.q.copy(), self.v.copy(), self.masses.copy(), self.sign)


def at_rest(q, masses, sign=1, t=0.0):
    q = np.atleast_2d(np.asarray(q, dtype=float))
    return SystemState(t, q, np.zeros_like(q), masses, sign)


# -- pair geometry ------------------------------------------------------------

def _gram(q, sign):
    g = q @ q.T
    if sign == -1:
        g = g - 2.0 * np.outer(q[:, 3], q[:, 3])
    return g


def _pair_sn_csn(q, sign):
    """csn and sn of all pairwise distances (diagonal set to csn=1, sn=inf)."""
    c = _gram(q, sign)
    csn = sign * c
    sn2 = sign * (1.0 - c * c)
    np.fill_diagonal(sn2, np.inf)
    return csn, np.sqrt(np.maximum(sn2, 0.0))


def min_sn(q, sign):
    """Smallest ``sn(d_ij)`` over distinct pairs (inf for a single body)."""
    q = np.atleast_2d(q)
    if len(q) < 2:
        return np.inf
    _, s = _pair_sn_csn(q, sign)
    return float(np.min(s))


# -- force function and gradient ---------------------------------------------

def force_function_q(q, masses, sign):
    """Cotangent force function ``sum_{i<j} m_i m_j ctn(d_ij)``.

    Written in the degree-0 homogeneous form ``sign c / sqrt(sign (a_i a_j - c^2))``
    with ``c = q_i . q_j``, ``a_i = q_i . q_i``; it coincides with the unit-manifold
    value on the manifold and is well defined nearby, which finite-difference
    checks rely on.
    """
    q = np.atleast_2d(np.asarray(q, dtype=float))
    m = np.asarray(masses, dtype=float)
    c = _gram(q, sign)
    a = np.diag(c)
    iu = np.triu_indices(len(q), 1)
    cij = c[iu]
    rad = sign * (np.outer(a, a)[iu] - cij * cij)
    if np.any(rad <= 0):
        raise SingularConfigurationError("singular pair in force function")
    return float(np.sum(np.outer(m, m)[iu] * sign * cij / np.sqrt(rad)))


def force_gradient_q(q, masses, sign):
    """``F_i = sum_j m_i m_j (q_j - csn(d_ij) q_i) / sn^3(d_ij)``, shape (N, 4)."""
    q = np.atleast_2d(np.asarray(q, dtype=float))
    m = np.asarray(masses, dtype=float)
    if len(q) < 2:
        return np.zeros_like(q)
    csn, sn = _pair_sn_csn(q, sign)
    off = ~np.eye(len(q), dtype=bool)
    if np.any(sn[off] <= 1e-14):
        raise SingularConfigurationError("singular pair in force gradient")
    w = np.outer(m, m) / sn**3  # diagonal is m^2/inf = 0
    return w @ q - (w * csn).sum(axis=1)[:, None] * q


def force_function(s):
    return force_function_q(s.q, s.masses, s.sign)


def force_gradient(s):
    return force_gradient_q(s.q, s.masses, s.sign)


# -- equations of motion ------------------------------------------------------

def _accel(q, v, masses, sign, k, kd):
    f = force_gradient_q(q, masses, sign)
    vv = geo.metric_dot(v, v, sign)
    return abs(k) ** 1.5 * f / masses[:, None] - sign * vv[:, None] * q + (kd / k) * v


def _profile_at(p, t, sign):
    if p.sign != sign:
        raise ProfileError("profile sign does not match the state sign")
    return float(p.kappa(t)), float(p.kappa_dot(t))


def accel_projected(t, s, p):
    """Accelerations of the projected system at time ``t``."""
    k, kd = _profile_at(p, t, s.sign)
    return _accel(s.q, s.v, s.masses, s.sign, k, kd)


def accel_ambient(t, q, qdot, masses, p, tol=1e-8):
    """Accelerations in the original (curvature-scaled) coordinates.

    ``m q'' = grad U_kappa - m kappa (q'.q') q - m kappa''/(2 kappa) q + m kappa'^2/kappa^2 q``
    where ``grad U_kappa(q) = |kappa| F(|kappa|^(1/2) q)``.
    """
    q = np.atleast_2d(np.asarray(q, dtype=float))
    qdot = np.atleast_2d(np.asarray(qdot, dtype=float))
    masses = np.asarray(masses, dtype=float)
    sign = p.sign
    k = float(p.kappa(t))
    kd = float(p.kappa_dot(t))
    kdd = float(p.kappa_ddot(t))
    resid = np.abs(k * geo.metric_dot(q, q, sign) - 1.0)
    if np.any(resid > tol):
        raise ConstraintError(f"kappa q.q != 1 (residual {resid.max():.3e})")
    grad_u = abs(k) * force_gradient_q(np.sqrt(abs(k)) * q, masses, sign)
    vv = geo.metric_dot(qdot, qdot, sign)
    return (grad_u / masses[:, None] - k * vv[:, None] * q
            - kdd / (2.0 * k) * q + kd**2 / k**2 * q)


def projected_to_ambient(q, v, a, p, t):
    """Map projected position/velocity/acceleration to the original coordinates."""
    s = p.sign
    k = abs(float(p.kappa(t)))
    kd = float(p.kappa_dot(t))
    kdd = float(p.kappa_ddot(t))
    x = q / np.sqrt(k)
    xd = -s * kd * q / (2.0 * k**1.5) + v / np.sqrt(k)
    xdd = (-s * kdd * q / (2.0 * k**1.5) + 3.0 * kd**2 * q / (4.0 * k**2.5)
           - s * kd * v / k**1.5 + a / np.sqrt(k))
    return x, xd, xdd


# -- integrals and Lagrangian -------------------------------------------------

def angular_momenta_q(q, v, masses, kappa):
    w = np.asarray(masses, dtype=float) / abs(kappa)
    return np.array([np.sum(w * (q[..., a] * v[..., b] - q[..., b] * v[..., a]), axis=-1)
                     for a, b in PLANES]).T


def angular_momenta(s, kappa):
    """Six integrals ``sum_i m_i/|kappa| (a_i b_i' - b_i a_i')``, planes xy, xz, xw, yz, yw, zw."""
    if kappa == 0:
        raise ValueError("kappa must be non-zero")
    return angular_momenta_q(s.q, s.v, s.masses, kappa)


def lagrangian_value(s, kappa):
    """``sum m (v.v)/(2|kappa|) + |kappa|^(1/2) U`` on the unit manifold."""
    kin = np.sum(s.masses * geo.metric_dot(s.v, s.v, s.sign)) / (2.0 * abs(kappa))
    pot = force_function(s) if s.n > 1 else 0.0
    return float(kin + np.sqrt(abs(kappa)) * pot)


# -- integration --------------------------------------------------------------

@dataclass
class Trajectory:
    """Sampled solution with per-sample diagnostics."""

    times: np.ndarray
    q: np.ndarray
    v: np.ndarray
    masses: np.ndarray
    sign: int
    momenta: np.ndarray = None
    constraint: np.ndarray = None
    min_sn: np.ndarray = None
    halted: bool = False
    halt_reason: str = ""
    kappas: np.ndarray = field(default=None, repr=False)

    def __len__(self):
        return len(self.times)

    def state(self, k):
        return SystemState(self.times[k], self.q[k], self.v[k], self.masses, self.sign)

    def compute_diagnostics(self, p):
        k = np.asarray(p.kappa(self.times), dtype=float)
        self.kappas = k
        self.momenta = np.array([angular_momenta_q(q, v, self.masses, kk)
                                 for q, v, kk in zip(self.q, self.v, k)])
        self.constraint = np.array([constraint_residual(q, v, self.sign)
                                    for q, v in zip(self.q, self.v)])
        self.min_sn = np.array([min_sn(q, self.sign) for q in self.q])
        return self

    def momentum_drift(self, relative=True):
        """Largest deviation of any angular-momentum component from its initial value.

        The relative form divides by the largest initial component. A system
        with no angular momentum (bodies at rest) has no scale to divide by, so
        the absolute drift is returned instead.
        """
        d = float(np.max(np.abs(self.momenta - self.momenta[0])))
        scale = float(np.max(np.abs(self.momenta[0])))
        if relative and scale > 1e-12:
            return d / scale
        return d

    def position_drift(self):
        return float(np.max(np.abs(self.q - self.q[0])))


def constraint_residual(q, v, sign):
    """max(|q.q - sign|, |q.v|) over bodies."""
    return float(max(np.max(np.abs(geo.metric_dot(q, q, sign) - sign)),
                     np.max(np.abs(geo.metric_dot(q, v, sign)))))


def rk4_step(f, t, y, h):
    """One classical Runge-Kutta step for ``y' = f(t, y)``."""
    k1 = f(t, y)
    k2 = f(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = f(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = f(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate(s0, p, t_end, step=1e-3, sample_every=1, collision_sn=COLLISION_SN,
              validate=True):
    """Fixed-step RK4 with constraint projection after every step.

    The step is adjusted so an integer number of steps lands exactly on
    ``t_end`` (which may precede ``s0.t``). Integration stops early, keeping the
    partial trajectory, once the minimum ``sn(d_ij)`` drops below
    ``collision_sn``.
    """
    s0.check()
    if p.sign != s0.sign:
        raise ProfileError("profile sign does not match the state sign")
    if validate:
        lo, hi = sorted((s0.t, t_end))
        rep = validate_profile(p, (lo, hi))
        if not rep.ok:
            raise ProfileError(f"invalid curvature profile: {rep.message} at t={rep.t_violation}")
    n = len(s0.q)
    span = t_end - s0.t
    nsteps = max(1, int(round(abs(span) / step)))
    h = span / nsteps
    sign, masses = s0.sign, s0.masses

    g = np.ones(4)
    g[3] = sign
    mm = np.outer(masses, masses)
    off = ~np.eye(n, dtype=bool)
    inv_m = 1.0 / masses[:, None]

    # lean copy of _accel for the inner loop; the span was validated above,
    # so per-stage profile checks are skipped
    def rhs(t, y):
        q, v = y[:n], y[n:]
        k = float(p.kappa(t, check=not validate))
        kd = float(p.kappa_dot(t, check=not validate))
        c = (q * g) @ q.T
        sn2 = sign * (1.0 - c * c)
        if np.any(sn2[off] <= 1e-28):
            raise SingularConfigurationError("singular pair in force gradient")
        sn2[~off] = 1.0
        w = mm / (sn2 * np.sqrt(sn2))
        w[~off] = 0.0
        f = w @ q - (sign * (w * c).sum(axis=1))[:, None] * q
        vv = (v * v * g).sum(axis=1)
        a = abs(k) ** 1.5 * f * inv_m - sign * vv[:, None] * q + (kd / k) * v
        return np.concatenate([v, a])

    y = np.vstack([s0.q, s0.v])
    times, qs, vs = [s0.t], [s0.q.copy()], [s0.v.copy()]
    halted, reason = False, ""
    for i in range(1, nsteps + 1):
        t = s0.t + i * h
        try:
            y = rk4_step(rhs, s0.t + (i - 1) * h, y, h)
            if not np.all(np.isfinite(y)):
                raise SingularConfigurationError("non-finite state")
            q, v = geo.project_state(y[:n], y[n:], sign)
        except (SingularConfigurationError, ConstraintError):
            # a step straddling a close encounter can leave the manifold entirely
            halted, reason = True, f"singular step before t={t:.17g}"
            break
        y = np.vstack([q, v])
        collided = n > 1 and min_sn(q, sign) < collision_sn
        if i % sample_every == 0 or i == nsteps or collided:
            times.append(t)
            qs.append(q.copy())
            vs.append(v.copy())
        if collided:
            halted, reason = True, f"near collision at t={t:.17g}"
            break
    traj = Trajectory(np.array(times), np.array(qs), np.array(vs), masses.copy(), sign,
                      halted=halted, halt_reason=reason)
    return traj.compute_diagnostics(p)
