"""The genus-two octagon group, its area, and two orbit experiments.

A generic geodesic spreads evenly over the fundamental domain.  Random words
acting on a pair of boundary points do not: long words squeeze the whole
circle towards one point, so both images land in the same bin.

    python demos/octagon_and_flow.py
"""

import math

import numpy as np

from levitube import ergodic, fuchsian

group = fuchsian.octagon_group()
print(f"circumradius {group.circumradius:.6f}  inradius {group.inradius():.6f}")
print(f"angle sum {np.sum(fuchsian.interior_angles(group)):.12f} (2pi = {2 * math.pi:.12f})")
area = fuchsian.domain_area(group, 1_000_000, 1)
print(f"area {area.value:.4f} +- {area.stderr:.4f}  (2pi = {2 * math.pi:.4f})")

print("\nT        TV distance")
for T in (1e3, 1e4, 5e4):
    res = ergodic.equidistribution_experiment(group, T, rng=1)
    print(f"{T:7.0e}  {res.tv_distance:.4f}")
closed = ergodic.closed_geodesic_contrast(group)
print(f"closed geodesic through 0: TV {closed.tv_distance:.3f}")

print("\nL    empty bins of 16x16   diagonal share")
for L in (1, 2, 4, 8, 30):
    h = ergodic.boundary_orbit_experiment(group, 100_000, L, 16, rng=2)
    print(f"{L:<4d} {int((h.counts == 0).sum()):>18d}   {ergodic.diagonal_fraction(h, 0):.3f}")
