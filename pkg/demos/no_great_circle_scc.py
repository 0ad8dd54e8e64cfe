"""Four bodies on one great circle never balance, and hyperbolic space has no homographic orbits
driven by varying curvature. Both are checked here by sampling.

Run with ``python3 demos/no_great_circle_scc.py``.
"""

import numpy as np

from curvednbody import curvature as cv
from curvednbody import homographic as hom
from curvednbody import scc, testing

phi, cond = scc.scan_great_circle(100_000, margin=0.1, seed=0)
i = int(np.argmin(np.abs(cond)))
print(f"great-circle scan: {len(phi)} configurations, min |condition| = {abs(cond[i]):.4f}")
print(f"  attained at angles {np.round(phi[i], 4)}")

p = cv.sinusoidal(-1.0, -0.1)
specs = hom.default_h3_grid(n_parabolic=20, n_ab=10)
for name, cfg in testing.hyperbolic_configs().items():
    rep = hom.h3_nonexistence_probe(cfg, p, specs=specs, config_id=name)
    print(f"H3 probe {name:>8}: min residual {rep.min_residual:.3f} at {rep.argmin_spec}")
