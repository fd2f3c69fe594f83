"""
A Lipschitz function whose half derivative is unbounded
=======================================================

``f(x) = min(||x||, 3)`` is 1-Lipschitz for the Koranyi distance, yet its
half derivative in ``t`` blows up logarithmically near the centre.  All of
this runs on closed forms and adaptive quadrature: no grid reaches
``t = 1e-14``.
"""

import math

import numpy as np

from hfrac.experiments import example61_bound
from hfrac.testfunctions import OmegaSampler, lipschitz_cap
from hfrac.vertical import TruncationSchedule, pv_tderiv, truncated_tderiv_point

f = lipschitz_cap(3.0)

# At the origin the truncations never settle: each halving of eps adds 4 ln 2.
vals = [truncated_tderiv_point(f, [0, 0, 0], 0.5, 2.0 ** -k).value for k in range(1, 12)]
print("increments / (4 ln 2):", np.round(np.diff(vals) / (4 * math.log(2)), 8))

res = pv_tderiv(f, 0.5, TruncationSchedule(max_refinements=20), point=[0, 0, 0])
print("converged at the origin?", res.converged)

# Just above the origin the limit exists but grows like ln(1/t).
sched = TruncationSchedule(atol=1e-8)
for t in (1e-8, 1e-10, 1e-12, 1e-14):
    r = pv_tderiv(f, 0.5, sched, point=[0, 0, t])
    print(f"t={t:.0e}: T^1/2 f(0,t) = {r.value:9.4f}   lower bound {example61_bound(t):.4f}")

# The bound holds throughout the region where |z|^4 < 16 t^2.
pts = OmegaSampler(per_t=6, seed=1).points([1e-12, 1e-13, 1e-14])
margin = min(abs(pv_tderiv(f, 0.5, sched, point=p).value) - example61_bound(p[-1]) for p in pts)
print(f"{len(pts)} sampled points, smallest margin above the bound: {margin:.3f}")
