"""Command-line front end: JSON config in, CSV/JSON artifacts out.

Exit codes: 0 success, 2 configuration error, 3 singular halt,
4 verification failure. All configuration is parsed and validated before
any file is written, so a rejected config leaves the output directory
untouched.
"""

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import curvature as cv
from . import homographic as hom
from . import io
from . import kepler as kep
from . import scc
from . import verify as ver
from .dynamics import COLLISION_SN, SystemState, integrate
from .errors import ConstraintError, FrameError, ProfileError, SingularConfigurationError
from .geometry import random_tangent, random_unit_points

EXIT_OK, EXIT_CONFIG, EXIT_HALT, EXIT_VERIFY = 0, 2, 3, 4

log = logging.getLogger("curvednbody")


class ConfigError(Exception):
    """Raised for anything wrong with the user's configuration."""


# -- config helpers ---------------------------------------------------------------

def load_config(path):
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    return data


def parse_tol(items):
    out = {}
    for item in items or []:
        name, sep, value = item.partition("=")
        if not sep or not name:
            raise ConfigError(f"--tol expects NAME=VALUE, got {item!r}")
        try:
            out[name.strip()] = float(value)
        except ValueError as exc:
            raise ConfigError(f"--tol value for {name!r} is not a number") from exc
    return out


def _require(cfg, key, where="config"):
    if key not in cfg:
        raise ConfigError(f"{where} is missing {key!r}")
    return cfg[key]


def _float(cfg, key, default=None):
    val = cfg.get(key, default)
    if val is None:
        raise ConfigError(f"config is missing {key!r}")
    try:
        return float(val)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key!r} must be a number") from exc


def _profile(cfg, t_span=None):
    try:
        p = cv.CurvatureProfile.from_dict(_require(cfg, "profile"))
    except ProfileError as exc:
        raise ConfigError(str(exc)) from exc
    if t_span is not None:
        try:
            rep = cv.validate_profile(p, sorted(t_span))
        except ProfileError as exc:
            raise ConfigError(str(exc)) from exc
        if not rep.ok:
            raise ConfigError(f"invalid curvature profile: {rep.message} at t={rep.t_violation}")
    return p


def _bodies(spec, sign, rng):
    """Initial state from ``bodies``, ``double_ring`` or ``random_bodies``."""
    try:
        if "bodies" in spec:
            bodies = spec["bodies"]
            q = [b["q"] for b in bodies]
            v = [b.get("v", [0.0] * 4) for b in bodies]
            m = [b["m"] for b in bodies]
            return SystemState(0.0, q, v, m, sign)
        if "double_ring" in spec:
            d = spec["double_ring"]
            s = scc.build_double_ring(scc.DoubleRingParams(d["family"], d["c1"], d["c2"], d.get("m")))
            if s.sign != sign:
                raise ConfigError("double rings live on the sphere (sign +1)")
            return s
        if "random_bodies" in spec:
            d = spec["random_bodies"]
            n = int(d.get("n", 3))
            q = random_unit_points(rng, n, sign, spread=float(d.get("spread", 0.6)))
            v = random_tangent(rng, q, sign, float(d.get("speed", 0.3)))
            m = d.get("masses", [1.0] * n)
            return SystemState(0.0, q, v, m, sign)
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"bad body specification: {exc!r}") from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    raise ConfigError("initial state needs one of 'bodies', 'double_ring', 'random_bodies'")


def _known_tols(tols, allowed):
    bad = sorted(set(tols) - set(allowed))
    if bad:
        raise ConfigError(f"unknown tolerance(s) {bad}; this command accepts {sorted(allowed)}")


# -- commands ---------------------------------------------------------------------

def cmd_simulate(cfg, out, tols, seed):
    """Integrate an N-body state; writes trajectory, diagnostics and summary."""
    _known_tols(tols, {"collision_sn"})
    t0 = _float(cfg, "t0", 0.0)
    t_end = _float(cfg, "t_end")
    p = _profile(cfg, (t0, t_end))
    s0 = _bodies(cfg, int(cfg.get("sign", p.sign)), np.random.default_rng(seed))
    s0.t = t0
    step = _float(cfg, "step", 1e-3)
    every = int(cfg.get("sample_every", 1))
    if step <= 0 or every < 1:
        raise ConfigError("step must be positive and sample_every >= 1")
    collision = tols.get("collision_sn", _float(cfg, "collision_sn", COLLISION_SN))
    try:
        s0.check()
    except ConstraintError as exc:
        raise ConfigError(f"invalid initial state: {exc}") from exc
    except SingularConfigurationError as exc:
        log.error("singular initial state: %s", exc)
        return EXIT_HALT
    dps = cfg.get("dps")
    try:
        if dps is None:
            tr = integrate(s0, p, t_end, step, every, collision_sn=collision, validate=False)
        else:
            tr = _simulate_extended(cfg, s0, p, t0, t_end, step, every, int(dps))
    except ProfileError as exc:
        raise ConfigError(str(exc)) from exc
    tr.compute_diagnostics(p)
    io.write_trajectory_csv(tr, Path(out) / "trajectory.csv")
    io.write_diagnostics_csv(tr, Path(out) / "diagnostics.csv")
    io.write_json({
        "n_samples": len(tr),
        "t_final": float(tr.times[-1]),
        "max_constraint_residual": float(tr.constraint.max()),
        "max_angular_momentum_drift": float(tr.momentum_drift()),
        "max_angular_momentum_drift_abs": float(tr.momentum_drift(relative=False)),
        "max_position_drift": tr.position_drift(),
        "min_sn_dij": float(tr.min_sn.min()),
        "halted": tr.halted,
        "halt_reason": tr.halt_reason or None,
    }, Path(out) / "summary.json")
    if tr.halted:
        log.warning("integration halted: %s", tr.halt_reason)
        return EXIT_HALT
    return EXIT_OK


def _simulate_extended(cfg, s0, p, t0, t_end, step, every, dps):
    """Extended-precision run; a ``double_ring`` root is re-solved at ``dps`` digits first."""
    from . import precise

    if "double_ring" in cfg:
        d = cfg["double_ring"]
        _, _, q, masses = precise.refine_double_ring(d["family"], d["c1"], d["c2"], dps)
    else:
        q, masses = s0.q, s0.masses
    return precise.integrate_mp(q, s0.v, masses, s0.sign, p, t_end, step, every, t0, dps)


def cmd_kepler(cfg, out, tols, seed):
    """Integrate the curved Kepler problem in spherical coordinates."""
    _known_tols(tols, set())
    prm_d = cfg.get("params", {})
    try:
        prm = kep.KeplerParams(float(prm_d.get("m", 1.0)), float(prm_d.get("M", 1.0)))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    t0 = _float(cfg, "t0", 0.0)
    t_end = _float(cfg, "t_end")
    sign = int(cfg.get("sign", 1))
    kappa_circ = None
    if "circular" in cfg:
        c = cfg["circular"]
        alpha, big_l = float(_require(c, "alpha", "circular")), float(c.get("L", 1.0))
        try:
            kappa_circ = kep.circular_curvature(alpha, prm, big_l, sign)
        except (ValueError, SingularConfigurationError) as exc:
            raise ConfigError(str(exc)) from exc
        s0 = kep.circular_state(alpha, prm, big_l, float(c.get("theta", math.pi / 2)))
        if "profile" not in cfg:
            cfg = dict(cfg, profile={"kind": "constant", "params": [sign * kappa_circ]})
    else:
        st = _require(cfg, "state")
        try:
            s0 = kep.KeplerState(**{k: float(v) for k, v in st.items()})
        except TypeError as exc:
            raise ConfigError(f"bad Kepler state: {exc}") from exc
    p = _profile(cfg, (t0, t_end))
    if p.sign != sign:
        raise ConfigError("profile sign does not match 'sign'")
    if cfg.get("report_circular_curvature") and kappa_circ is None:
        try:
            kappa_circ = kep.circular_curvature(s0.alpha, prm, float(kep.kepler_conserved(s0)[1]), sign)
        except (ValueError, SingularConfigurationError) as exc:
            log.warning("no circular curvature at the initial alpha: %s", exc)
    step = _float(cfg, "step", 1e-3)
    every = int(cfg.get("sample_every", 1))
    try:
        tr = kep.integrate_kepler(s0, prm, p, t_end, step, every, t0=t0, validate=False)
    except SingularConfigurationError as exc:
        log.error("chart singularity in the initial data: %s", exc)
        return EXIT_HALT
    io.write_kepler_csv(tr, Path(out) / "kepler.csv")
    da, dl = tr.conserved_drift()
    summary = {"n_samples": len(tr.times), "A_drift": da, "L_drift": dl,
               "alpha_range": float(np.ptp(tr.alpha)), "halted": tr.halted,
               "halt_reason": tr.halt_reason or None}
    if cfg.get("report_circular_curvature") or "circular" in cfg:
        summary["circular_curvature"] = kappa_circ
    io.write_json(summary, Path(out) / "summary.json")
    return EXIT_HALT if tr.halted else EXIT_OK


def _times(cfg):
    t = cfg.get("times", {})
    n = int(t.get("n", 101))
    if n < 2:
        raise ConfigError("times.n must be at least 2")
    return np.linspace(float(t.get("t0", 0.0)), float(t.get("t_end", 10.0)), n)


def cmd_homographic(cfg, out, tols, seed):
    """Build a homographic orbit (mode 'orbit') or run the hyperbolic probe (mode 'probe')."""
    _known_tols(tols, set())
    mode = cfg.get("mode", "orbit")
    times = _times(cfg)
    p = _profile(cfg, (times[0], times[-1]))
    if mode == "orbit":
        s0 = _bodies(_require(cfg, "configuration"), p.sign, np.random.default_rng(seed))
        try:
            spec = hom.XiSpec.from_dict(_require(cfg, "spec"))
            orbit = hom.build_orbit(s0, spec, p, times)
        except (KeyError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        io.write_trajectory_csv(orbit, Path(out) / "trajectory.csv")
        io.write_diagnostics_csv(orbit, Path(out) / "diagnostics.csv")
        io.write_json({"motion_residual": hom.motion_residual(orbit), "spec": spec.to_dict(),
                       "n_samples": len(orbit)}, Path(out) / "summary.json")
        return EXIT_OK
    if mode == "probe":
        configs = _require(cfg, "configurations")
        states = {name: _bodies(c, -1, np.random.default_rng(seed)) for name, c in configs.items()}
        reports = []
        for name, s in states.items():
            try:
                reports.append(hom.h3_nonexistence_probe(s, p, times=times, config_id=name))
            except (ValueError, ProfileError) as exc:
                raise ConfigError(str(exc)) from exc
        io.write_json([json.loads(r.to_json()) for r in reports], Path(out) / "probe.json")
        return EXIT_OK
    raise ConfigError(f"unknown homographic mode {mode!r}")


def cmd_scc_solve(cfg, out, tols, seed):
    _known_tols(tols, set())
    fam = _require(cfg, "family")
    grid = cfg.get("c2_grid", {"start": -0.98, "stop": -0.02, "num": 50})
    if isinstance(grid, dict):
        grid = np.linspace(float(grid["start"]), float(grid["stop"]), int(grid["num"]))
    try:
        roots = scc.solve_double_ring(fam, grid, n_scan=int(cfg.get("n_scan", 1000)),
                                      mirror=bool(cfg.get("mirror", False)))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    io.write_curve_csv(roots, Path(out) / "curve.csv")
    return EXIT_OK


def cmd_scc_check(cfg, out, tols, seed):
    _known_tols(tols, {"condition"})
    checker = _require(cfg, "checker")
    funcs = {"tetrahedron": scc.tetrahedron_check, "pentatope": scc.pentatope_check}
    if checker not in funcs:
        raise ConfigError(f"checker must be one of {sorted(funcs)}")
    try:
        rep = funcs[checker](np.asarray(_require(cfg, "points"), dtype=float),
                             float(cfg.get("anchor_mass", 1.0)),
                             canonical=bool(cfg.get("canonical", False)),
                             tol=tols.get("condition", scc.CONDITION_TOL))
    except (FrameError, ConstraintError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    except SingularConfigurationError as exc:
        log.error("degenerate checker input: %s", exc)
        return EXIT_HALT
    d = rep.to_dict()
    d["checker"] = checker
    io.write_json(d, Path(out) / "report.json")
    return EXIT_OK


def cmd_verify(cfg, out, tols, seed):
    tolerances = dict(cfg.get("tolerances", {}))
    tolerances.update(tols)
    try:
        rep = ver.run_suites(cfg.get("suites"), tolerances, seed)
    except KeyError as exc:
        raise ConfigError(exc.args[0]) from exc
    for w in rep.warnings:
        log.warning(w)
    for r in rep.results:
        log.info("%s %s measured=%.3e %s %.3e %s", "PASS" if r.passed else "FAIL", r.name,
                 r.measured, r.comparison, r.tolerance, r.detail)
    io.write_json(rep.to_dict(), Path(out) / "verify.json")
    return EXIT_OK if rep.passed else EXIT_VERIFY


# -- argument parsing -------------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON configuration file")
    common.add_argument("--out", default=".", help="output directory (default: current)")
    common.add_argument("--tol", action="append", default=[], metavar="NAME=VALUE",
                        help="tolerance override, repeatable")
    common.add_argument("--seed", type=int, default=0, help="random seed (default 0)")

    parser = argparse.ArgumentParser(prog="curvednbody",
                                     description="N-body dynamics in spaces of varying curvature")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="integrate an N-body state"
                   ).set_defaults(func=cmd_simulate, needs_config=True)
    sub.add_parser("kepler", parents=[common], help="curved Kepler problem"
                   ).set_defaults(func=cmd_kepler, needs_config=True)
    sub.add_parser("homographic", parents=[common], help="homographic orbits and probe"
                   ).set_defaults(func=cmd_homographic, needs_config=True)
    s = sub.add_parser("scc", help="special central configurations")
    ssub = s.add_subparsers(dest="scc_command", required=True)
    ssub.add_parser("solve", parents=[common], help="trace double-ring root curves"
                    ).set_defaults(func=cmd_scc_solve, needs_config=True)
    ssub.add_parser("check", parents=[common], help="tetrahedron/pentatope checkers"
                    ).set_defaults(func=cmd_scc_check, needs_config=True)
    sub.add_parser("verify", parents=[common], help="run the invariant suites"
                   ).set_defaults(func=cmd_verify, needs_config=False)
    return parser


def main(argv=None):
    logging.basicConfig(level=logging.INFO, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        if args.needs_config and args.config is None:
            raise ConfigError("--config is required for this command")
        cfg = load_config(args.config)
        tols = parse_tol(args.tol)
        return args.func(cfg, args.out, tols, args.seed)
    except ConfigError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
