"""Numerical companion for the tube X = (D x D)/Gamma over a compact genus-2 surface.

Gamma acts on the bidisk by (z, w) -> (gamma z, conj gamma(conj w)).  The
function delta = 1 - |(w - conj z)/(1 - z w)|^2 is invariant, rho = arccos
sqrt(delta) measures the distance to the totally real diagonal {w = conj z},
and the modules here check the pluripotential facts built on them.

Modules
-------
moebius     disk automorphisms and hyperbolic distance
fuchsian    the regular-octagon surface group, fundamental domain, reduction
calculus    finite-difference Wirtinger calculus and differential forms on C^2
tube        delta, rho and their Levi forms, Diederich-Fornaess sweep
hardy       level sets of delta, charts, level integrals, Stokes balance
ergodic     geodesic flow and boundary-orbit experiments
checks      named verification suites
cli         command-line driver
"""

from .moebius import BidiskPoint, DiskMoebius, hyperbolic_distance
from .fuchsian import FuchsianGroup, GroupWord, octagon_group, reduce
from .tube import delta, rho

__all__ = [
    "BidiskPoint",
    "DiskMoebius",
    "FuchsianGroup",
    "GroupWord",
    "delta",
    "hyperbolic_distance",
    "octagon_group",
    "reduce",
    "rho",
]
