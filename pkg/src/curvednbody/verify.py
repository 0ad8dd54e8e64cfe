"""Invariant suites run by ``curvednbody verify``.

Each check measures one number and compares it with a named tolerance.
Upper-bound checks pass when ``measured <= tol``; floor checks (the
hyperbolic probe) pass when ``measured > tol``. A check that raises is
reported as failed with the exception text instead of aborting the suite.
"""

import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np

from . import curvature as cv
from . import homographic as hom
from . import kepler as kep
from . import scc
from . import testing
from .dynamics import integrate
from .geometry import random_rotation

DEFAULT_TOLERANCES = {
    "gradient": 1e-5,
    "drift": 1e-7,
    "constraint": 1e-9,
    "group_law": 1e-12,
    "metric": 1e-12,
    "homographic": 1e-8,
    "symmetry": 1e-10,
    "kepler": 1e-8,
    "probe_floor": 1e-4,
    "checker": 1e-8,
}


@dataclass
class CheckResult:
    name: str
    passed: bool
    measured: float
    tolerance: float
    comparison: str = "<="
    detail: str = ""

    def to_dict(self):
        d = asdict(self)
        d["measured"] = None if self.measured is None or not math.isfinite(self.measured) \
            else float(self.measured)
        return d


def _bound(name, measured, tol, detail=""):
    return CheckResult(name, bool(measured <= tol), float(measured), tol, "<=", detail)


def check_gradient(tol, rng):
    worst = max(testing.gradient_fd_error(rng, 20, s) for s in (1, -1))
    return [_bound("gradient_fd", worst, tol["gradient"], "relative, 20 states per sign")]


def check_conservation(tol, rng):
    out = []
    for s0, p in ((testing.three_body_sphere(), cv.sinusoidal(1, 0.1)),
                  (testing.three_body_hyperbolic(), cv.sinusoidal(-1, -0.1))):
        tr = integrate(s0, p, 2.0, step=1e-3, sample_every=100)
        label = "S3" if s0.sign == 1 else "H3"
        out.append(_bound(f"momentum_drift_{label}", tr.momentum_drift(), tol["drift"]))
        out.append(_bound(f"constraint_{label}", float(tr.constraint.max()), tol["constraint"]))
    return out


def check_group_law(tol, rng):
    specs = [hom.s3_spec(0.7), hom.s3_rates(0.3, -1.1), hom.h3_parabolic(0.8),
             hom.h3_elliptic_hyperbolic(0.5, -0.9),
             hom.s3_spec(1.3, -1, base_change=random_rotation(rng))]
    law, metric = 0.0, 0.0
    for spec in specs:
        a, b = rng.uniform(-2, 2, 2)
        ea, eb, eab = hom.exp_xi(spec, a), hom.exp_xi(spec, b), hom.exp_xi(spec, a + b)
        law = max(law, float(np.max(np.abs(ea @ eb - eab))))
        g = np.diag([1, 1, 1, spec.sign])
        metric = max(metric, float(np.max(np.abs(ea.T @ g @ ea - g))))
    return [_bound("group_law", law, tol["group_law"]),
            _bound("metric_preservation", metric, tol["metric"])]


def check_homographic(tol, rng):
    roots = scc.solve_double_ring("triangle", [-0.4])
    cfg = scc.build_double_ring(scc.DoubleRingParams("triangle", roots[0].c1, roots[0].c2))
    p = cv.sinusoidal(1, 0.1)
    orbit = hom.build_orbit(cfg, hom.s3_spec(0.7), p, np.linspace(0, 2 * math.pi, 41))
    return [_bound("homographic_residual", hom.motion_residual(orbit), tol["homographic"])]


def check_symmetry(tol, rng):
    worst = 0.0
    grid = np.linspace(-0.9, -0.1, 9)
    for fam in scc.FAMILIES:
        for r in scc.solve_double_ring(fam, grid, with_scc_residual=False):
            # the mirrored point must again be a root, with the reciprocal mass
            m2 = scc.double_ring_mass(-r.c2, -r.c1, fam)
            worst = max(worst, abs(m2 * r.m - 1.0))
    return [_bound("double_ring_reciprocity", worst, tol["symmetry"])]


def check_sign_endpoints(tol, rng):
    vals = [scc.double_ring_residual(0.1, -0.1, f) < 0 for f in scc.FAMILIES]
    vals += [scc.double_ring_residual(0.9, -0.5, f) > 0 for f in scc.FAMILIES]
    bad = sum(not v for v in vals)
    return [CheckResult("sign_endpoints", bad == 0, float(bad), 0.0, "==", "sign mismatches")]


def check_kepler(tol, rng):
    prm = kep.KeplerParams()
    s0 = kep.KeplerState(math.pi / 4, 1.2, 0.0, 0.05, 0.3, 0.9)
    worst = 0.0
    for p in (cv.constant(1), cv.sinusoidal(1, 0.1), cv.linear(-1, -0.05)):
        tr = kep.integrate_kepler(s0, prm, p, 2.0, step=1e-3)
        worst = max(worst, *tr.conserved_drift())
    return [_bound("kepler_conserved", worst, tol["kepler"])]


def check_probe(tol, rng):
    cfg = testing.hyperbolic_configs()["triangle"]
    rep = hom.h3_nonexistence_probe(cfg, cv.sinusoidal(-1, -0.1), config_id="triangle")
    floor = tol["probe_floor"]
    return [CheckResult("h3_probe_floor", bool(rep.min_residual > floor), rep.min_residual,
                        floor, ">", f"{rep.n_specs} specs")]


def check_checkers(tol, rng):
    worst = 0.0
    for pts in testing.symmetric_tetrahedra(0.7):
        worst = max(worst, scc.tetrahedron_check(pts, canonical=True).scc_residual)
    for pts in testing.symmetric_pentatopes(0.5):
        worst = max(worst, scc.pentatope_check(pts, canonical=True).scc_residual)
    return [_bound("checker_scc_residual", worst, tol["checker"])]


SUITES = {
    "gradient": check_gradient,
    "conservation": check_conservation,
    "group_law": check_group_law,
    "homographic": check_homographic,
    "symmetry": check_symmetry,
    "sign_endpoints": check_sign_endpoints,
    "kepler": check_kepler,
    "probe": check_probe,
    "checkers": check_checkers,
}


@dataclass
class VerifyReport:
    results: list
    warnings: list

    @property
    def passed(self):
        return all(r.passed for r in self.results)

    def to_dict(self):
        return {"passed": self.passed, "n_checks": len(self.results),
                "warnings": self.warnings, "checks": [r.to_dict() for r in self.results]}


def run_suites(names=None, tolerances=None, seed=0):
    """Run the named suites (all when ``names`` is None) and collect their results."""
    names = list(SUITES) if names is None else list(names)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise KeyError(f"unknown suite(s) {unknown}; available: {sorted(SUITES)}")
    tol = dict(DEFAULT_TOLERANCES)
    for k, v in (tolerances or {}).items():
        if k not in tol:
            raise KeyError(f"unknown tolerance {k!r}; available: {sorted(tol)}")
        tol[k] = float(v)
    notes = []
    if not names:
        notes.append("empty suite selection: no checks were run")
        warnings.warn(notes[-1], stacklevel=2)
    results = []
    for name in names:
        rng = np.random.default_rng(seed)
        try:
            results.extend(SUITES[name](tol, rng))
        except Exception as exc:  # a crashing check is a failed check
            results.append(CheckResult(name, False, float("nan"), float("nan"), "error",
                                       f"{type(exc).__name__}: {exc}"))
    return VerifyReport(results, notes)
