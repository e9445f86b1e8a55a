"""Unit-disk automorphisms and the conjugated diagonal action on the bidisk.

An automorphism is stored as the pair (a, b) of the SU(1,1) matrix

    [[a,       b      ],
     [conj(b), conj(a)]]      with |a|^2 - |b|^2 = 1,

acting by z -> (a z + b) / (conj(b) z + conj(a)).  The pair (-a, -b) gives the
same map; equality is tested up to that sign.

All functions accept Python complex scalars or numpy arrays for the point
arguments.  ``apply`` is also valid on the unit circle (the denominator never
vanishes there), which is the boundary extension used by the ergodic
experiments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

NORMALIZATION_TOL = 1e-12


class BidiskPoint(NamedTuple):
    """A point (z, w) of the bidisk."""

    z: complex
    w: complex


@dataclass(frozen=True)
class DiskMoebius:
    a: complex
    b: complex

    def __post_init__(self):
        a, b = complex(self.a), complex(self.b)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        norm = abs(a) ** 2 - abs(b) ** 2
        if not math.isfinite(norm) or abs(norm - 1.0) > NORMALIZATION_TOL * max(1.0, abs(a) ** 2):
            raise ValueError(f"not a normalized disk automorphism: |a|^2-|b|^2 = {norm!r}")

    @classmethod
    def normalized(cls, a: complex, b: complex) -> "DiskMoebius":
        """Scale (a, b) so that |a|^2 - |b|^2 = 1."""
        norm = abs(a) ** 2 - abs(b) ** 2
        if not norm > 0:
            raise ValueError("|a| must exceed |b| for a disk automorphism")
        s = math.sqrt(norm)
        return cls(a / s, b / s)

    @classmethod
    def translation(cls, angle: float, length: float) -> "DiskMoebius":
        """Hyperbolic translation by ``length`` along the diameter at ``angle``.

        Its fixed points on the circle are exp(i*angle) (attracting) and
        -exp(i*angle), and it maps 0 to tanh(length/2) exp(i*angle).
        """
        return cls(math.cosh(length / 2), math.sinh(length / 2) * complex(math.cos(angle), math.sin(angle)))

    @classmethod
    def moving_origin_to(cls, c: complex) -> "DiskMoebius":
        """The transvection z -> (z + c)/(1 + conj(c) z) taking 0 to c."""
        s = math.sqrt(1.0 - abs(c) ** 2)
        return cls(1.0 / s, c / s)

    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.b.conjugate(), self.a.conjugate()]])

    def apply(self, z):
        return (self.a * z + self.b) / (self.b.conjugate() * z + self.a.conjugate())

    def conj_apply(self, w):
        # conj(apply(conj(w)))
        return (self.a.conjugate() * w + self.b.conjugate()) / (self.b * w + self.a)

    def derivative(self, z):
        """Complex derivative of ``apply`` at z."""
        return 1.0 / (self.b.conjugate() * z + self.a.conjugate()) ** 2

    def act(self, p: BidiskPoint) -> BidiskPoint:
        return BidiskPoint(self.apply(p.z), self.conj_apply(p.w))

    def compose(self, other: "DiskMoebius") -> "DiskMoebius":
        """self o other, renormalized."""
        a = self.a * other.a + self.b * other.b.conjugate()
        b = self.a * other.b + self.b * other.a.conjugate()
        return DiskMoebius.normalized(a, b)

    __matmul__ = compose

    def inverse(self) -> "DiskMoebius":
        return DiskMoebius(self.a.conjugate(), -self.b)

    def trace(self) -> float:
        return 2.0 * self.a.real

    def translation_length(self) -> float:
        """Displacement along the axis; 0 for elliptic or parabolic maps."""
        t = abs(self.trace())
        return 2.0 * math.acosh(t / 2.0) if t > 2.0 else 0.0

    def fixed_points(self) -> tuple[complex, complex]:
        """Roots of conj(b) z^2 + (conj(a) - a) z - b = 0."""
        c = self.b.conjugate()
        if c == 0:
            raise ValueError("rotation about the origin: fixed points are 0 and infinity")
        p = self.a.conjugate() - self.a
        disc = np.sqrt(complex(p * p + 4.0 * c * self.b))
        return (-p + disc) / (2 * c), (-p - disc) / (2 * c)

    def isclose(self, other: "DiskMoebius", tol: float = 1e-12) -> bool:
        """Entrywise equality up to the global sign (a, b) ~ (-a, -b)."""
        plus = max(abs(self.a - other.a), abs(self.b - other.b))
        minus = max(abs(self.a + other.a), abs(self.b + other.b))
        return min(plus, minus) <= tol


IDENTITY = DiskMoebius(1.0, 0.0)


def identity() -> DiskMoebius:
    return IDENTITY


def apply(m: DiskMoebius, z):
    return m.apply(z)


def conj_apply(m: DiskMoebius, w):
    return m.conj_apply(w)


def act_bidisk(m: DiskMoebius, p: BidiskPoint) -> BidiskPoint:
    """The action (z, w) -> (m z, conj(m conj(w)))."""
    return m.act(p)


def compose(m1: DiskMoebius, m2: DiskMoebius) -> DiskMoebius:
    return m1.compose(m2)


def inverse(m: DiskMoebius) -> DiskMoebius:
    return m.inverse()


def pseudo_distance(z1, z2):
    """|z1 - z2| / |1 - conj(z1) z2|, the tanh of half the hyperbolic distance."""
    return np.abs(z1 - z2) / np.abs(1 - np.conj(z1) * z2)


def hyperbolic_distance(z1, z2):
    """Distance in the curvature -1 metric 4|dz|^2/(1-|z|^2)^2."""
    r = pseudo_distance(z1, z2)
    d = 2.0 * np.arctanh(np.minimum(r, 1.0))
    return float(d) if np.ndim(d) == 0 else d
