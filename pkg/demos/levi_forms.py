"""Levi forms of the tube functions, closed form against finite differences.

Prints the Monge-Ampere ratio of rho, the smallest eigenvalue of -sqrt(delta)
down to tiny delta, and a Diederich-Fornaess sweep around eta = 1/2.

    python demos/levi_forms.py
"""

import numpy as np

from levitube import calculus, tube
from levitube.checks import tube_points

rng = np.random.default_rng(0)
z, w = tube_points(rng, 500, 0.05, 0.95)

print("tag            relative gap to numeric   min eigenvalue")
for tag in tube.TAGS:
    closed = tube.levi_closed_batch(tag, z, w)
    numeric = tube.levi_numeric_batch(tag, z, w)
    gap = np.max(tube.relative_gaps(closed, numeric))
    print(f"{tag:14s} {gap:23.2e} {np.min(calculus.min_eigenvalue(closed)):16.3e}")

H = tube.levi_closed_batch(tube.RHO, z, w)
ratio = np.abs(calculus.ma_det(H)) / np.sum(np.abs(H) ** 2, axis=(-1, -2))
print(f"\nrho is maximal: max det/|H|^2 = {ratio.max():.1e}")

# -sqrt(delta) stays strictly plurisubharmonic as delta -> 0, but only just
for d in (1e-1, 1e-2, 1e-3, 1e-4):
    zz, ww = tube.level_point(np.full(64, 0.3 + 0.2j), np.linspace(0, 2 * np.pi, 64), d)
    lam = calculus.min_eigenvalue(tube.levi_closed_batch(tube.NEG_SQRT_DELTA, zz, ww))
    print(f"delta={d:7.0e}  min eigenvalue {lam.min():.3e}   ratio to delta^1.5 {lam.min() / d**1.5:.3f}")

print("\neta    min eigenvalue of Levi(-delta^eta) on the grid")
for eta, lam in tube.df_sweep([0.4, 0.45, 0.5, 0.55, 0.6]):
    print(f"{eta:4.2f}  {lam: .3e}")
print(f"largest admissible eta: {tube.df_exponent_estimate():.4f}")
