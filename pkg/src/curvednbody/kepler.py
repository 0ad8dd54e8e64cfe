"""Kepler problem about a fixed mass on the varying-curvature 3-sphere or hyperbolic 3-sphere.

A body of mass ``m`` moves in the chart

    q = (sn a sin t cos f, sn a sin t sin f, sn a cos t, csn a)

around a mass ``M`` pinned at ``(0, 0, 0, 1)``; here ``a, t, f`` are the
radial angle alpha and the polar/azimuthal angles theta, phi. The Hamiltonian is

    H = |kappa|/(2m) (p_a^2 + csct^2 a (p_t^2 + p_f^2 csc^2 t)) - |kappa|^(1/2) m M ctn a

so ``A = p_phi`` and ``L = p_theta^2 + p_phi^2 csc^2 theta`` are conserved.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import geometry as geo
from .curvature import validate_profile
from .dynamics import rk4_step
from .errors import ConstraintError, ProfileError, SingularConfigurationError

COLLISION_SN = 1e-6
CSV_HEADER = ("t", "alpha", "theta", "phi", "p_alpha", "p_theta", "p_phi", "A", "L")


@dataclass(frozen=True)
class KeplerParams:
    """Moving mass ``m`` and fixed central mass ``M``."""

    m: float = 1.0
    M: float = 1.0

    def __post_init__(self):
        if not (self.m > 0 and self.M > 0):
            raise ValueError("Kepler masses must be positive")


@dataclass
class KeplerState:
    alpha: float
    theta: float
    phi: float
    p_alpha: float = 0.0
    p_theta: float = 0.0
    p_phi: float = 0.0

    def as_array(self):
        return np.array([self.alpha, self.theta, self.phi,
                         self.p_alpha, self.p_theta, self.p_phi], dtype=float)

    @classmethod
    def from_array(cls, y):
        return cls(*map(float, y))


def _check_chart(alpha, theta, sign):
    if not (math.isfinite(alpha) and math.isfinite(theta)):
        raise SingularConfigurationError("non-finite coordinates: the orbit escaped the chart")
    if alpha <= 0 or (sign == 1 and alpha >= math.pi):
        # a step that jumps over the centre (or antipode) is a collision too
        raise SingularConfigurationError(f"alpha = {alpha:.6g} left the chart: collision crossed")
    if abs(float(geo.sn(alpha, sign))) < COLLISION_SN:
        raise SingularConfigurationError("sn(alpha) = 0: the body sits on the central mass or its antipode")
    if abs(math.sin(theta)) < 1e-12:
        raise SingularConfigurationError("sin(theta) = 0: polar chart singularity")


def _ctn_csct(alpha, sign):
    try:
        _, _, ctn, csct = geo.unified_trig(alpha, sign)
    except ValueError as exc:
        # only reachable from a runaway RK stage: treat like a collision
        raise SingularConfigurationError(str(exc)) from exc
    return ctn, csct


def kepler_rhs(t, y, prm, p):
    """Time derivatives of ``(alpha, theta, phi, p_alpha, p_theta, p_phi)``."""
    a, th, _, pa, pt, pf = (float(x) for x in y)
    sign = p.sign
    _check_chart(a, th, sign)
    k = abs(float(p.kappa(t)))
    m, M = prm.m, prm.M
    ctn, csct = _ctn_csct(a, sign)
    csct2 = csct * csct
    csc2 = 1.0 / math.sin(th) ** 2
    cot = math.cos(th) / math.sin(th)
    big_l = pt * pt + pf * pf * csc2
    return np.array([
        k * pa / m,
        k * pt * csct2 / m,
        k * pf * csct2 * csc2 / m,
        k * ctn * csct2 * big_l / m - math.sqrt(k) * m * M * csct2,
        k * csct2 * csc2 * cot * pf * pf / m,
        0.0,
    ])


def kepler_conserved(s):
    """``(A, L) = (p_phi, p_theta^2 + p_phi^2 csc^2 theta)``; accepts a state or a ``(..., 6)`` array."""
    y = s.as_array() if isinstance(s, KeplerState) else np.asarray(s, dtype=float)
    th, pt, pf = y[..., 1], y[..., 4], y[..., 5]
    sin_t = np.sin(th)
    if np.any(sin_t == 0):
        raise SingularConfigurationError("sin(theta) = 0")
    return pf, pt * pt + pf * pf / sin_t**2


def circular_curvature(alpha, prm, L, sign=1):
    """``|kappa| = (m^2 M / (L ctn alpha))^2``, the only curvature with a circular orbit at ``alpha``.

    A circular orbit needs the centrifugal term to balance the attraction, which
    requires ``ctn alpha > 0``; elsewhere no positive curvature works.
    """
    if L <= 0:
        raise ValueError("L must be positive for a circular orbit")
    _, _, ctn, _ = geo.unified_trig(alpha, sign)
    if abs(ctn) < 1e-15:
        raise SingularConfigurationError("ctn(alpha) = 0: no finite curvature gives a circular orbit")
    if ctn < 0:
        raise ValueError("ctn(alpha) < 0: the attraction cannot be balanced at this radius")
    return float((prm.m**2 * prm.M / (L * ctn)) ** 2)


def circular_state(alpha, prm, L=1.0, theta=math.pi / 2):
    """Equatorial initial data ``p_alpha = p_theta = 0`` with ``L`` carried by ``p_phi``."""
    return KeplerState(alpha, theta, 0.0, 0.0, 0.0, math.sqrt(L) * math.sin(theta))


def spherical_to_ambient(s, sign, prm=KeplerParams(), kappa=1.0):
    """Position and velocity of the moving body on the unit manifold.

    Angular rates are recovered from the momenta at curvature ``kappa``; the
    velocity is the chain-rule image of ``(alpha', theta', phi')``.
    """
    a, th, ph, pa, pt, pf = s.as_array() if isinstance(s, KeplerState) else s
    _check_chart(a, th, sign)
    k = abs(kappa)
    sa, ca = float(geo.sn(a, sign)), float(geo.csn(a, sign))
    st, ct, sp, cp = math.sin(th), math.cos(th), math.sin(ph), math.cos(ph)
    q = np.array([sa * st * cp, sa * st * sp, sa * ct, ca])
    ad = k * pa / prm.m
    td = k * pt / (prm.m * sa * sa)
    fd = k * pf / (prm.m * sa * sa * st * st)
    dq_da = np.array([ca * st * cp, ca * st * sp, ca * ct, -sign * sa])
    dq_dt = np.array([sa * ct * cp, sa * ct * sp, -sa * st, 0.0])
    dq_df = np.array([-sa * st * sp, sa * st * cp, 0.0, 0.0])
    return q, ad * dq_da + td * dq_dt + fd * dq_df


@dataclass
class KeplerTrajectory:
    times: np.ndarray
    states: np.ndarray  # (T, 6)
    halted: bool = False
    halt_reason: str = ""

    @property
    def alpha(self):
        return self.states[:, 0]

    def conserved(self):
        return kepler_conserved(self.states)

    def conserved_drift(self):
        """Largest deviations ``(|A - A0|, |L - L0|)`` along the trajectory."""
        a, big_l = self.conserved()
        return float(np.max(np.abs(a - a[0]))), float(np.max(np.abs(big_l - big_l[0])))

    def rows(self):
        a, big_l = self.conserved()
        return np.column_stack([self.times, self.states, a, big_l])


def integrate_kepler(s0, prm, p, t_end, step=1e-3, sample_every=1, t0=0.0, validate=True):
    """Fixed-step RK4 on the six Hamiltonian equations; halts when ``sn(alpha) < 1e-6``."""
    if validate:
        rep = validate_profile(p, sorted((t0, t_end)))
        if not rep.ok:
            raise ProfileError(f"invalid curvature profile: {rep.message} at t={rep.t_violation}")
    y = s0.as_array() if isinstance(s0, KeplerState) else np.asarray(s0, dtype=float)
    _check_chart(y[0], y[1], p.sign)
    nsteps = max(1, int(round(abs(t_end - t0) / step)))
    h = (t_end - t0) / nsteps
    rhs = lambda t, z: kepler_rhs(t, z, prm, p)
    times, ys = [t0], [y.copy()]
    halted, reason = False, ""
    for i in range(1, nsteps + 1):
        t = t0 + i * h
        try:
            y = rk4_step(rhs, t0 + (i - 1) * h, y, h)
            _check_chart(y[0], y[1], p.sign)
        except SingularConfigurationError as exc:
            halted, reason = True, f"{exc} before t={t:.17g}"
            break
        if i % sample_every == 0 or i == nsteps:
            times.append(t)
            ys.append(y.copy())
    return KeplerTrajectory(np.array(times), np.array(ys), halted, reason)


# -- reduced system -----------------------------------------------------------

def _radicand(theta, A, L):
    return L - A * A / math.sin(theta) ** 2


def reduced_rhs(t, y, A, L, prm, p, branch=1, tol=1e-10):
    """Derivatives of ``(alpha, theta, phi, p_alpha)`` with ``A, L`` eliminated.

    ``branch`` (+1 or -1) selects the sign of ``theta'``. A slightly negative
    radicand (within ``tol``) is read as a turning point.
    """
    a, th, _, pa = (float(x) for x in y)
    sign = p.sign
    _check_chart(a, th, sign)
    rad = _radicand(th, A, L)
    if rad < -tol:
        raise ConstraintError(f"L - A^2 csc^2 theta = {rad:.3e} < 0: inconsistent constants")
    k = abs(float(p.kappa(t)))
    m, M = prm.m, prm.M
    ctn, csct = _ctn_csct(a, sign)
    csct2 = csct * csct
    return np.array([
        k * pa / m,
        branch * k * math.sqrt(max(rad, 0.0)) * csct2 / m,
        k * A * csct2 / (m * math.sin(th) ** 2),
        k * L * ctn * csct2 / m - math.sqrt(k) * m * M * csct2,
    ])


def integrate_reduced(y0, A, L, prm, p, t_end, step=1e-3, branch=1, t0=0.0):
    """RK4 on the reduced system, flipping ``branch`` at turning points of theta.

    A step that would push the radicand negative is retried on the other
    branch; accuracy near turning points is therefore only first order.
    """
    y = np.asarray(y0, dtype=float).copy()
    nsteps = max(1, int(round(abs(t_end - t0) / step)))
    h = (t_end - t0) / nsteps
    times, ys, branches = [t0], [y.copy()], [branch]
    for i in range(1, nsteps + 1):
        t = t0 + (i - 1) * h
        try:
            y_new = rk4_step(lambda s, z: reduced_rhs(s, z, A, L, prm, p, branch, tol=np.inf), t, y, h)
            if _radicand(y_new[1], A, L) < 0:
                raise ConstraintError("turning point crossed")
        except ConstraintError:
            branch = -branch
            y_new = rk4_step(lambda s, z: reduced_rhs(s, z, A, L, prm, p, branch, tol=np.inf), t, y, h)
        y = y_new
        times.append(t + h)
        ys.append(y.copy())
        branches.append(branch)
    return np.array(times), np.array(ys), np.array(branches)


def reduced_from_full(s):
    """Reduced initial data, conserved constants and branch for a full state."""
    y = s.as_array() if isinstance(s, KeplerState) else np.asarray(s, dtype=float)
    A, L = kepler_conserved(y)
    return y[[0, 1, 2, 3]], float(A), float(L), 1 if y[4] >= 0 else -1


# -- diagnostics ----------------------------------------------------------------

def alpha_uncoupled_residual(times, alpha, L, prm, p):
    """Max residual of the uncoupled radial equation on a uniformly sampled ``alpha(t)``.

    ``alpha' `` and ``alpha''`` come from second-order central differences, so
    the residual of a true solution is ``O(h^2)`` in the sample spacing.
    """
    t = np.asarray(times, dtype=float)
    a = np.asarray(alpha, dtype=float)
    if len(t) < 3:
        raise ValueError("need at least three samples")
    h = t[1] - t[0]
    if not np.allclose(np.diff(t), h, rtol=1e-9, atol=1e-12):
        raise ValueError("samples must be uniformly spaced")
    ad = (a[2:] - a[:-2]) / (2 * h)
    add = (a[2:] - 2 * a[1:-1] + a[:-2]) / h**2
    tm, am = t[1:-1], a[1:-1]
    k = np.asarray(p.kappa(tm), dtype=float)
    kd = np.asarray(p.kappa_dot(tm), dtype=float)
    _, _, ctn, csct = geo.unified_trig(am, p.sign)
    rhs = (k**2 * L * ctn * csct**2 / prm.m**2 - np.abs(k) ** 1.5 * prm.M * csct**2
           + kd * ad / k)
    return float(np.max(np.abs(add - rhs)))


def alpha_uncoupled_rhs(t, alpha, alpha_dot, L, prm, p):
    """Right-hand side of the uncoupled equation for ``alpha''``."""
    k = float(p.kappa(t))
    kd = float(p.kappa_dot(t))
    _, _, ctn, csct = geo.unified_trig(alpha, p.sign)
    return k * k * L * ctn * csct**2 / prm.m**2 - abs(k) ** 1.5 * prm.M * csct**2 + kd * alpha_dot / k


@dataclass
class PeriodicityReport:
    periodic: bool
    state_gap: float
    kappa_periodic: bool
    kappa_gap: float

    @property
    def consistent(self):
        """Periodic orbits must come with periodic curvature; the converse is not claimed."""
        return (not self.periodic) or self.kappa_periodic


def periodicity_diagnostic(traj, T, p, tol=1e-6, n_grid=1000):
    """Test a trajectory for ``T``-periodicity and, if periodic, check ``kappa(t+T) = kappa(t)``.

    Only phase-space periodicity of the angles mod 2 pi and the momenta is
    considered. This is a diagnostic of the contrapositive statement: a
    periodic solution is inconsistent with non-periodic curvature.
    """
    t = traj.times
    h = t[1] - t[0]
    shift = int(round(T / h))
    if shift <= 0 or shift >= len(t) or abs(shift * h - T) > 1e-9 * max(1.0, T):
        raise ValueError("T must be a positive multiple of the sample spacing within the trajectory")
    ys = traj.states
    d = ys[shift:] - ys[:-shift]
    d[:, 2] = np.angle(np.exp(1j * d[:, 2]))  # phi is 2 pi periodic
    gap = float(np.max(np.abs(d)))
    grid = np.linspace(t[0], t[-1] - T, n_grid)
    kgap = float(np.max(np.abs(p.kappa(grid + T) - p.kappa(grid))))
    return PeriodicityReport(gap < tol, gap, kgap < tol, kgap)
