"""Time-dependent curvature profiles.

A profile supplies ``kappa(t)``, its first two derivatives and the primitive
``K(t) = integral_0^t kappa``. Curvature must never vanish or change sign on
the span where it is used.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq, minimize_scalar

from .errors import ProfileError
from .geometry import check_sign

KINDS = ("constant", "linear", "exponential", "sinusoidal", "tabulated")

_NPARAMS = {"constant": 1, "linear": 2, "exponential": 2, "sinusoidal": 3}


@dataclass(frozen=True)
class CurvatureProfile:
    """Curvature as a function of time.

    Parameters by kind:

    * ``constant``: ``[k0]``, kappa = k0
    * ``linear``: ``[k0, k1]``, kappa = k0 + k1 t
    * ``exponential``: ``[k0, lam]``, kappa = k0 exp(lam t)
    * ``sinusoidal``: ``[k0, eps, omega]``, kappa = k0 + eps sin(omega t)
    * ``tabulated``: ``[[t_0, k_0], [t_1, k_1], ...]``, natural cubic spline

    ``sign`` defaults to the sign of kappa at the start of the span (or at
    ``t = 0`` for unbounded spans).
    """

    kind: str
    params: tuple
    sign: int = None
    span: tuple = (0.0, math.inf)
    _spline: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ProfileError(f"unknown curvature kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "tabulated":
            table = np.asarray(self.params, dtype=float)
            if table.ndim == 1:
                table = table.reshape(-1, 2)
            if table.ndim != 2 or table.shape[1] != 2 or len(table) < 3:
                raise ProfileError("tabulated profile needs at least 3 (t, kappa) rows")
            if np.any(np.diff(table[:, 0]) <= 0):
                raise ProfileError("tabulated times must be strictly increasing")
            spline = CubicSpline(table[:, 0], table[:, 1], bc_type="natural")
            object.__setattr__(self, "params", tuple(map(tuple, table)))
            object.__setattr__(self, "_spline", (spline, spline.derivative(1),
                                                 spline.derivative(2), spline.antiderivative()))
            if self.span == (0.0, math.inf):
                object.__setattr__(self, "span", (float(table[0, 0]), float(table[-1, 0])))
            elif self.span[0] < table[0, 0] or self.span[1] > table[-1, 0]:
                raise ProfileError("span extends beyond the tabulated samples")
        else:
            params = tuple(float(p) for p in np.ravel(self.params))
            if len(params) != _NPARAMS[self.kind]:
                raise ProfileError(f"{self.kind} profile takes {_NPARAMS[self.kind]} parameters")
            object.__setattr__(self, "params", params)
        t0, t1 = (float(s) for s in self.span)
        if not t0 < t1:
            raise ProfileError(f"empty span {self.span}")
        object.__setattr__(self, "span", (t0, t1))
        if self.sign is None:
            ref = t0 if math.isfinite(t0) else 0.0
            k = float(self.kappa(ref, check=False))
            if k == 0:
                raise ProfileError("curvature vanishes at the start of the span")
            object.__setattr__(self, "sign", 1 if k > 0 else -1)
        else:
            object.__setattr__(self, "sign", check_sign(self.sign))

    # -- evaluation ---------------------------------------------------------

    def _check_t(self, t):
        t = np.asarray(t, dtype=float)
        lo, hi = self.span
        # tiny slack lets fixed-step integrators land on the endpoint
        slack = 1e-9 * max(1.0, abs(lo), abs(hi)) if math.isfinite(hi) else 0.0
        if np.any(t < lo - slack) or np.any(t > hi + slack):
            raise ProfileError(f"t outside the profile span {self.span}")
        return t

    def kappa(self, t, check=True):
        if check:
            t = self._check_t(t)
        t = np.asarray(t, dtype=float)
        p = self.params
        if self.kind == "constant":
            k = np.full_like(t, p[0])
        elif self.kind == "linear":
            k = p[0] + p[1] * t
        elif self.kind == "exponential":
            k = p[0] * np.exp(p[1] * t)
        elif self.kind == "sinusoidal":
            k = p[0] + p[1] * np.sin(p[2] * t)
        else:
            k = self._spline[0](t)
        if check and np.any(np.sign(k) != self.sign):
            raise ProfileError(f"curvature has the wrong sign or vanishes at t={t}")
        return k

    def kappa_dot(self, t, check=True):
        t = self._check_t(t) if check else np.asarray(t, dtype=float)
        p = self.params
        if self.kind == "constant":
            return np.zeros_like(t)
        if self.kind == "linear":
            return np.full_like(t, p[1])
        if self.kind == "exponential":
            return p[0] * p[1] * np.exp(p[1] * t)
        if self.kind == "sinusoidal":
            return p[1] * p[2] * np.cos(p[2] * t)
        return self._spline[1](t)

    def kappa_ddot(self, t, check=True):
        t = self._check_t(t) if check else np.asarray(t, dtype=float)
        p = self.params
        if self.kind in ("constant", "linear"):
            return np.zeros_like(t)
        if self.kind == "exponential":
            return p[0] * p[1] ** 2 * np.exp(p[1] * t)
        if self.kind == "sinusoidal":
            return -p[1] * p[2] ** 2 * np.sin(p[2] * t)
        return self._spline[2](t)

    def primitive(self, t):
        """``K(t) = integral_0^t kappa(tau) dtau`` in closed form."""
        t = self._check_t(t)
        p = self.params
        if self.kind == "constant":
            return p[0] * t
        if self.kind == "linear":
            return p[0] * t + 0.5 * p[1] * t**2
        if self.kind == "exponential":
            if p[1] == 0:
                return p[0] * t
            return p[0] * np.expm1(p[1] * t) / p[1]
        if self.kind == "sinusoidal":
            return p[0] * t + p[1] * (1.0 - np.cos(p[2] * t)) / p[2]
        anti = self._spline[3]
        # exact piecewise-cubic integral; the lower limit may use the polynomial extension
        return anti(t) - anti(0.0)

    @property
    def is_constant(self):
        if self.kind == "constant":
            return True
        p = self.params
        if self.kind == "linear":
            return p[1] == 0
        if self.kind == "exponential":
            return p[1] == 0
        if self.kind == "sinusoidal":
            return p[1] == 0 or p[2] == 0
        k = np.array([row[1] for row in self.params])
        return bool(np.all(k == k[0]))

    def to_dict(self):
        params = [list(r) for r in self.params] if self.kind == "tabulated" else list(self.params)
        return {"kind": self.kind, "params": params, "sign": self.sign,
                "span": [self.span[0], self.span[1] if math.isfinite(self.span[1]) else None]}

    @classmethod
    def from_dict(cls, d):
        """Build a profile from ``{"kind", "params", "sign", "span"}`` (sign, span optional)."""
        if not isinstance(d, dict) or "kind" not in d or "params" not in d:
            raise ProfileError("profile needs 'kind' and 'params'")
        span = d.get("span")
        if span is None:
            span = (0.0, math.inf)
        else:
            span = (float(span[0]), math.inf if span[1] is None else float(span[1]))
        return cls(d["kind"], d["params"], d.get("sign"), span)


def constant(k0, **kw):
    return CurvatureProfile("constant", (k0,), **kw)


def linear(k0, k1, **kw):
    return CurvatureProfile("linear", (k0, k1), **kw)


def exponential(k0, lam, **kw):
    return CurvatureProfile("exponential", (k0, lam), **kw)


def sinusoidal(k0, eps, omega=1.0, **kw):
    return CurvatureProfile("sinusoidal", (k0, eps, omega), **kw)


def tabulated(times, values, **kw):
    return CurvatureProfile("tabulated", tuple(zip(times, values)), **kw)


def kappa_eval(p, t):
    """Return ``(kappa, kappa_dot, K)`` at time ``t``."""
    return p.kappa(t), p.kappa_dot(t), p.primitive(t)


@dataclass
class ValidationReport:
    ok: bool
    t_violation: float = None
    message: str = ""

    def __bool__(self):
        return self.ok


def validate_profile(p, t_span, n_grid=10_000):
    """Check that ``kappa`` keeps the profile's sign with no zero on ``t_span``.

    The grid is scanned first; intervals where the curvature could dip to
    zero between samples (given the local derivative) are refined with a
    bounded minimization of ``sign * kappa``. On failure the report carries
    the first time where ``kappa`` reaches zero or the wrong sign.
    """
    t0, t1 = (float(s) for s in t_span)
    if not (math.isfinite(t0) and math.isfinite(t1)) or t1 < t0:
        raise ProfileError(f"validation needs a finite span, got {t_span}")
    lo, hi = p.span
    if t0 < lo or t1 > hi:
        return ValidationReport(False, t0 if t0 < lo else t1, "span exceeds the profile span")
    if t1 == t0:
        t1 = t0 + 1e-12
    ts = np.linspace(t0, t1, n_grid + 1)
    s = p.sign
    g = s * np.asarray(p.kappa(ts, check=False), dtype=float)

    def first_zero(a, b):
        # g(a) > 0 >= g(b)
        fa = s * float(p.kappa(a, check=False))
        fb = s * float(p.kappa(b, check=False))
        if fb == 0:
            return b
        if fa > 0 > fb:
            return brentq(lambda x: float(p.kappa(x, check=False)), a, b, xtol=1e-14)
        return b

    bad = np.flatnonzero(g <= 0)
    if bad.size:
        k = bad[0]
        tz = ts[0] if k == 0 else first_zero(ts[k - 1], ts[k])
        return ValidationReport(False, float(tz), "curvature reaches zero or changes sign")

    h = ts[1] - ts[0]
    gd = np.abs(np.asarray(p.kappa_dot(ts), dtype=float))
    # a zero between samples requires the curvature to fall faster than the slope bound
    slope = 2.0 * np.maximum(gd[:-1], gd[1:]) + 1e-300
    suspect = np.flatnonzero(np.minimum(g[:-1], g[1:]) <= slope * h)
    for k in suspect:
        res = minimize_scalar(lambda x: s * float(p.kappa(x, check=False)),
                              bounds=(ts[k], ts[k + 1]), method="bounded",
                              options={"xatol": 1e-14})
        if res.fun <= 0:
            return ValidationReport(False, float(first_zero(ts[k], res.x)),
                                    "curvature reaches zero between grid points")
    return ValidationReport(True, None, "ok")
