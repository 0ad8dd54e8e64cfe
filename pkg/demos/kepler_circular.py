"""A circular Kepler orbit exists only for one constant curvature.

Run with ``python3 demos/kepler_circular.py``.
"""

import math

import numpy as np

from curvednbody import curvature as cv
from curvednbody import kepler as kp

prm = kp.KeplerParams(m=1.0, M=1.0)
alpha0 = math.pi / 4
k = kp.circular_curvature(alpha0, prm, L=1.0, sign=1)
s0 = kp.circular_state(alpha0, prm, L=1.0)
print(f"curvature balancing a circular orbit at alpha = pi/4: {k:.12g}")

for label, p in [("constant", cv.constant(k)), ("1 + 0.1 sin t", cv.sinusoidal(1.0, 0.1)),
                 ("1 + 0.02 t", cv.linear(1.0, 0.02))]:
    tr = kp.integrate_kepler(s0, prm, p, 20.0)
    da, dl = tr.conserved_drift()
    print(f"{label:>14}: alpha in [{tr.alpha.min():.5f}, {tr.alpha.max():.5f}],"
          f" A drift {da:.1e}, L drift {dl:.1e}")

# The same check on the hyperbolic sphere, where ctn is coth and every radius works.
for a in (0.5, 1.0, 2.0):
    kh = kp.circular_curvature(a, prm, 1.0, -1)
    tr = kp.integrate_kepler(kp.circular_state(a, prm), prm, cv.constant(-kh), 10.0)
    print(f"H3, alpha0 = {a}: kappa = -{kh:.6f}, alpha drift {np.ptp(tr.alpha):.1e}")
