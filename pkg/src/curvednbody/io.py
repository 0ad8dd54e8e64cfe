"""CSV and JSON readers/writers. Floats are written with 17 significant digits so they round-trip."""

import csv
import json
from pathlib import Path

import numpy as np

from .dynamics import PLANE_NAMES, Trajectory
from .kepler import CSV_HEADER as KEPLER_HEADER
from .scc import CURVE_HEADER

FLOAT_FMT = "%.17g"
TRAJECTORY_HEADER = ("t", "body", "x", "y", "z", "w", "vx", "vy", "vz", "vw")
DIAGNOSTICS_HEADER = ("t",) + tuple("L" + p for p in PLANE_NAMES) + (
    "max_constraint_residual", "min_sn_dij")


def fmt(x):
    return FLOAT_FMT % x


def _write(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    return path


def _read(path, header):
    with Path(path).open(newline="") as fh:
        r = csv.reader(fh)
        got = tuple(next(r))
        if got != tuple(header):
            raise ValueError(f"unexpected CSV header {got}")
        return [row for row in r]


def write_trajectory_csv(traj, path):
    rows = []
    for t, q, v in zip(traj.times, traj.q, traj.v):
        for i in range(q.shape[0]):
            rows.append([fmt(t), i, *map(fmt, q[i]), *map(fmt, v[i])])
    return _write(path, TRAJECTORY_HEADER, rows)


def read_trajectory_csv(path):
    """Return ``(times, q, v)`` with ``q, v`` of shape ``(T, N, 4)``."""
    rows = _read(path, TRAJECTORY_HEADER)
    if not rows:
        return np.zeros(0), np.zeros((0, 0, 4)), np.zeros((0, 0, 4))
    data = np.array([[float(x) for x in r] for r in rows])
    n = int(data[:, 1].max()) + 1
    data = data.reshape(-1, n, 10)
    return data[:, 0, 0], data[:, :, 2:6], data[:, :, 6:10]


def write_diagnostics_csv(traj, path):
    rows = [[fmt(t), *map(fmt, mom), fmt(c), fmt(s)]
            for t, mom, c, s in zip(traj.times, traj.momenta, traj.constraint, traj.min_sn)]
    return _write(path, DIAGNOSTICS_HEADER, rows)


def read_diagnostics_csv(path):
    rows = _read(path, DIAGNOSTICS_HEADER)
    return np.array([[float(x) for x in r] for r in rows]).reshape(-1, len(DIAGNOSTICS_HEADER))


def read_trajectory(path, masses, sign, diagnostics=None):
    """Rebuild a :class:`Trajectory` from its CSV (and optionally the diagnostics CSV)."""
    times, q, v = read_trajectory_csv(path)
    traj = Trajectory(times, q, v, np.asarray(masses, dtype=float), sign)
    if diagnostics is not None:
        d = read_diagnostics_csv(diagnostics)
        traj.momenta, traj.constraint, traj.min_sn = d[:, 1:7], d[:, 7], d[:, 8]
    return traj


def write_kepler_csv(ktraj, path):
    return _write(path, KEPLER_HEADER, [[fmt(x) for x in row] for row in ktraj.rows()])


def read_kepler_csv(path):
    rows = _read(path, KEPLER_HEADER)
    return np.array([[float(x) for x in r] for r in rows]).reshape(-1, len(KEPLER_HEADER))


def write_curve_csv(points, path):
    rows = []
    for p in points:
        fam, *vals = p.row()
        rows.append([fam] + ["" if x is None else fmt(x) for x in vals])
    return _write(path, CURVE_HEADER, rows)


def read_curve_csv(path):
    rows = _read(path, CURVE_HEADER)
    return [(r[0], *[float(x) if x else None for x in r[1:]]) for r in rows]


def write_json(obj, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
    return path
