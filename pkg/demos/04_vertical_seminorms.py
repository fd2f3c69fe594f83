"""
Two orders of integration
=========================

The vertical Besov seminorm integrates over ``s`` inside each vertical line
and then over ``z``; the mixed seminorm does the ``z`` integral first.
Minkowski's inequality orders them, and dilations rescale both by the
same power of ``r``.
"""

import numpy as np

from hfrac.experiments import homogeneity_factor
from hfrac.fields import CallableField, GridSpec, sample
from hfrac.seminorms import SShiftGrid, besov_I, vhp_seminorm
from hfrac.testfunctions import breathing_gaussian, gaussian, sheared_gaussian

spec = GridSpec.box(1, (3.0, 4.0), (12, 12, 96))
sg = SShiftGrid.for_grid(spec)

# Profiles that are shifted or rescaled copies of one shape give equality;
# a width that changes with z makes the inequality strict.
for f in (gaussian(), sheared_gaussian(), breathing_gaussian()):
    g = sample(f, spec)
    v, b = vhp_seminorm(g, 2, 4, 0.5, sg), besov_I(g, 2, 4, 0.5, sg)
    print(f"{f.name:32s} vhp={v:.6f} besov_I={b:.6f} gap={1 - v / b:.2e}")

# Dilation: sampling phi o delta_r on the grid shrunk by r reuses the same values.
phi = breathing_gaussian()
base = vhp_seminorm(sample(phi, spec), 3, 4, 0.25, sg)
for r in (0.5, 2.0, 4.0):
    dil = CallableField(lambda c, r=r: phi.func(np.concatenate([r * c[..., :2], r * r * c[..., 2:]], -1)))
    v = vhp_seminorm(sample(dil, spec.dilated(1 / r)), 3, 4, 0.25, sg.scaled(1 / r ** 2))
    print(f"r={r}: ratio {v / base:.12f}, predicted r^(2a - Q/p) = {homogeneity_factor(r, 3, 0.25, 1):.12f}")
