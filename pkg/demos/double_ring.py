"""Double rings on the 3-sphere: root curve, fixed-point behaviour and homographic motion.

Run with ``python3 demos/double_ring.py``.
"""

import numpy as np

from curvednbody import curvature as cv
from curvednbody import dynamics as dyn
from curvednbody import homographic as hom
from curvednbody import precise, scc

kappa = cv.sinusoidal(1.0, 0.1)

# A few points of the triangle-family root curve.
roots = scc.solve_double_ring("triangle", np.linspace(-0.8, -0.2, 4))
print("c2       c1       ring-2 mass   SCC residual")
for r in roots:
    print(f"{r.c2:+.3f}   {r.c1:.5f}  {r.m:10.6f}    {r.scc_residual:.1e}")

root = roots[2]
ring = scc.build_double_ring(scc.DoubleRingParams("triangle", root.c1, root.c2))

# At rest the ring is an equilibrium, but an unstable one: in double precision
# round-off is enough to dislodge it before t = 10.
f64 = dyn.integrate(ring, kappa, 10.0, step=1e-3, sample_every=100)
print(f"\nfloat64 run:  drift {f64.position_drift():.2e}, halted={f64.halted} at t={f64.times[-1]:.2f}")

# The same scheme in 40-digit arithmetic, starting from a root polished to that precision.
_, _, q, masses = precise.refine_double_ring("triangle", root.c1, root.c2, dps=40)
mp_run = precise.integrate_mp(q, [[0] * 4] * 6, masses, 1, kappa, 10.0, step=0.05, dps=40)
print(f"40-digit run: drift {mp_run.position_drift():.2e}")

# Rotating the whole ring in two orthogonal planes at the rate kappa(t) gives a homographic orbit.
times = np.linspace(0, 10, 101)
orbit = hom.build_orbit(ring, hom.s3_spec(0.7), kappa, times)
print(f"\nhomographic residual, SCC:           {hom.motion_residual(orbit):.1e}")
moved = hom.perturb_along_sphere(ring, 0, 1e-2)
print(f"homographic residual, nudged by 1e-2: "
      f"{hom.motion_residual(hom.build_orbit(moved, hom.s3_spec(0.7), kappa, times)):.1e}")
