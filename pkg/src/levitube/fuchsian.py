"""The genus-2 surface group of the regular hyperbolic octagon.

The octagon is centred at 0 with vertices at angles pi/8 + j*pi/4 and all
interior angles pi/4.  Side j has its midpoint on the ray at angle j*pi/4.
Generator g_k (k = 0..3) is the hyperbolic translation along the diameter at
angle k*pi/4 that carries side k+4 onto side k; opposite-side pairings of a
regular 4g-gon with angle sum 2*pi give a closed surface of genus g.

The closed octagon is the Dirichlet domain of the group at the origin, so
membership and reduction only need the eight generator images of 0.

Everything depending on the genus (area 4*pi, the constant 2g - 2 = 2) is
specific to this choice of group.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .moebius import IDENTITY, DiskMoebius, hyperbolic_distance
from .montecarlo import MCEstimate, sharded_mean

GENUS = 2
N_SIDES = 8
TARGET_ANGLE = 2 * math.pi / N_SIDES
DOMAIN_TOL = 1e-12
REDUCE_IMPROVEMENT = 1e-13
MAX_REDUCE_STEPS = 10_000


class ReductionStall(RuntimeError):
    """Greedy reduction did not reach the fundamental domain."""


Letter = tuple[int, int]


@dataclass(frozen=True)
class GroupWord:
    """A word in the generators; letters are (generator index, +1 or -1).

    The word evaluates to letters[0] o letters[1] o ... (empty = identity).
    """

    letters: tuple[Letter, ...] = ()

    def __post_init__(self):
        letters = tuple((int(k), int(e)) for k, e in self.letters)
        for k, e in letters:
            if not 0 <= k < 4 or e not in (1, -1):
                raise ValueError(f"bad letter {(k, e)}")
        object.__setattr__(self, "letters", letters)

    def __len__(self):
        return len(self.letters)

    def __bool__(self):
        return bool(self.letters)

    def inverse(self) -> "GroupWord":
        return GroupWord(tuple((k, -e) for k, e in reversed(self.letters)))

    def __mul__(self, other: "GroupWord") -> "GroupWord":
        out = list(self.letters)
        for k, e in other.letters:
            if out and out[-1] == (k, -e):
                out.pop()
            else:
                out.append((k, e))
        return GroupWord(tuple(out))

    def evaluate(self, group: "FuchsianGroup") -> DiskMoebius:
        m = IDENTITY
        for letter in self.letters:
            m = m.compose(group.letter(letter))
        return m


def letter_index(letter: Letter) -> int:
    k, e = letter
    return 2 * k + (0 if e == 1 else 1)


def index_letter(i: int) -> Letter:
    return (i // 2, 1 if i % 2 == 0 else -1)


def vertex_angle(circumradius: float, n: int = N_SIDES) -> float:
    """Interior angle of the regular hyperbolic n-gon with Euclidean circumradius r.

    From the right triangle (centre, side midpoint, vertex):
    cosh(R) = cot(pi/n) cot(angle/2), with R the hyperbolic circumradius.
    """
    big_r = 2.0 * math.atanh(circumradius)
    return 2.0 * math.atan(1.0 / (math.cosh(big_r) * math.tan(math.pi / n)))


def solve_circumradius(target: float = TARGET_ANGLE, n: int = N_SIDES, tol: float = 1e-15) -> float:
    """Bisect on the Euclidean circumradius until the vertex angle hits ``target``."""
    lo, hi = 1e-9, 1.0 - 1e-15
    if not vertex_angle(hi, n) < target < vertex_angle(lo, n):
        raise ValueError("vertex angle target not attainable")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if vertex_angle(mid, n) > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class FuchsianGroup:
    generators: tuple[DiskMoebius, ...]
    vertex_angle: float
    circumradius: float
    side_count: int = N_SIDES
    _letters: tuple[DiskMoebius, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        letters = []
        for g in self.generators:
            letters += [g, g.inverse()]
        object.__setattr__(self, "_letters", tuple(letters))

    @property
    def genus(self) -> int:
        return GENUS

    def letter(self, letter: Letter) -> DiskMoebius:
        return self._letters[letter_index(letter)]

    @property
    def letters(self) -> tuple[DiskMoebius, ...]:
        """The eight generators and inverses, in letter-index order."""
        return self._letters

    @cached_property
    def _letter_coeffs(self) -> tuple[np.ndarray, np.ndarray]:
        return (np.array([m.a for m in self._letters]), np.array([m.b for m in self._letters]))

    def vertices(self) -> np.ndarray:
        j = np.arange(self.side_count)
        return self.circumradius * np.exp(1j * (np.pi / self.side_count + 2 * np.pi * j / self.side_count))

    def side_endpoints(self, j: int) -> tuple[complex, complex]:
        v = self.vertices()
        return complex(v[(j - 1) % self.side_count]), complex(v[j % self.side_count])

    def side_circle(self, j: int) -> tuple[complex, float]:
        """Centre and radius of the circle (orthogonal to the unit circle) carrying side j."""
        p, q = self.side_endpoints(j)
        # centre c on the bisecting ray: |c - p|^2 = |c|^2 - 1
        u = np.exp(1j * 2 * np.pi * j / self.side_count)
        t = (1 + abs(p) ** 2) / (2 * (p.conjugate() * u).real)
        c = complex(t * u)
        return c, math.sqrt(abs(c) ** 2 - 1)

    def side_pairing(self, j: int) -> DiskMoebius:
        """The letter mapping side j onto the opposite side j + 4."""
        half = self.side_count // 2
        return self.generators[j].inverse() if j < half else self.generators[j - half]

    def inradius(self) -> float:
        """Hyperbolic distance from 0 to each side."""
        return 0.5 * self.generators[0].translation_length()

    @cached_property
    def inradius_euclidean(self) -> float:
        return math.tanh(self.inradius() / 2)


def octagon_group() -> FuchsianGroup:
    """Side-pairing group of the regular octagon with vertex angles pi/4."""
    r = solve_circumradius()
    big_r = 2.0 * math.atanh(r)
    # right triangle: tanh(inradius) = tanh(R) cos(pi/n)
    inradius = math.atanh(math.tanh(big_r) * math.cos(math.pi / N_SIDES))
    gens = tuple(DiskMoebius.translation(k * math.pi / 4, 2 * inradius) for k in range(4))
    group = FuchsianGroup(gens, vertex_angle(r), r)
    if abs(group.vertex_angle * N_SIDES - 2 * math.pi) > 1e-9:
        raise RuntimeError("octagon angle condition not met")
    return group


def interior_angles(group: FuchsianGroup) -> np.ndarray:
    """Interior angles measured from the side circles themselves.

    At each vertex, take the tangent of each incident side pointing towards
    that side's other endpoint and measure the angle between them.
    """
    n = group.side_count
    verts = group.vertices()
    angles = np.empty(n)
    for j in range(n):
        v = complex(verts[j])
        tangents = []
        for side in (j, j + 1):
            c, _ = group.side_circle(side)
            p, q = group.side_endpoints(side)
            other = p if abs(q - v) < abs(p - v) else q
            t = 1j * (v - c)
            if (t.conjugate() * (other - v)).real < 0:
                t = -t
            tangents.append(t)
        angles[j] = abs(np.angle(tangents[1] / tangents[0]))
    return angles


def side_pairing_error(group: FuchsianGroup) -> float:
    """Worst mismatch when each pairing carries its side onto the opposite side."""
    n = group.side_count
    worst = 0.0
    for j in range(n):
        g = group.side_pairing(j)
        p, q = group.side_endpoints(j)
        target = group.side_endpoints(j + n // 2)
        imgs = [g.apply(p), g.apply(q)]
        err = min(
            max(abs(imgs[0] - target[0]), abs(imgs[1] - target[1])),
            max(abs(imgs[0] - target[1]), abs(imgs[1] - target[0])),
        )
        # an interior point of the side must also land on the partner circle
        c, rad = group.side_circle(j)
        mid = c - rad * c / abs(c)
        c2, rad2 = group.side_circle(j + n // 2)
        err = max(err, abs(abs(g.apply(mid) - c2) - rad2))
        worst = max(worst, err)
    return worst


def vertex_cycle(group: FuchsianGroup, start_vertex: int = 0) -> tuple[DiskMoebius, int]:
    """Product of side pairings around the vertex cycle of ``start_vertex``.

    Vertex j is shared by sides j and j + 1.  Starting from side j, repeatedly
    apply the pairing of the current side, locate the image vertex and move to
    its other incident side.  Returns the accumulated product and the cycle
    length.
    """
    n = group.side_count
    verts = group.vertices()
    vertex, side = start_vertex % n, start_vertex % n
    product = IDENTITY
    for steps in range(1, 4 * n + 1):
        g = group.side_pairing(side)
        product = g.compose(product)
        image = g.apply(verts[vertex])
        vertex = int(np.argmin(np.abs(verts - image)))
        partner = (side + n // 2) % n
        side = vertex if partner == (vertex + 1) % n else (vertex + 1) % n
        if vertex == start_vertex % n and side == start_vertex % n:
            return product, steps
    raise RuntimeError("vertex cycle did not close")


def in_fundamental_domain(group: FuchsianGroup, z: complex) -> bool:
    """Dirichlet-domain test at 0: no generator image of 0 is strictly closer to z."""
    d0 = hyperbolic_distance(z, 0)
    return all(d0 <= hyperbolic_distance(z, g.apply(0)) + DOMAIN_TOL for g in group.letters)


def in_domain_mask(group: FuchsianGroup, z: np.ndarray) -> np.ndarray:
    """Vectorised membership; compares |z| with |h(z)| over the eight letters."""
    z = np.asarray(z, dtype=complex)
    a, b = group._letter_coeffs
    r0 = np.abs(z)
    mask = np.ones(z.shape, dtype=bool)
    for ak, bk in zip(a, b):
        rk = np.abs((ak * z + bk) / (np.conj(bk) * z + np.conj(ak)))
        mask &= r0 <= rk + 1e-15
    return mask


def reduce(group: FuchsianGroup, z: complex) -> tuple[complex, GroupWord]:
    """Greedy Dirichlet reduction: returns (z', w) with z = w(z') and z' in R."""
    z = complex(z)
    letters: list[Letter] = []
    dist = hyperbolic_distance(z, 0)
    for _ in range(MAX_REDUCE_STEPS):
        best, best_i, best_d = None, -1, dist
        for i, h in enumerate(group.letters):
            cand = h.apply(z)
            d = hyperbolic_distance(cand, 0)
            if d < best_d:
                best, best_i, best_d = cand, i, d
        if best is None or best_d >= dist - REDUCE_IMPROVEMENT:
            return z, GroupWord(tuple(letters))
        k, e = index_letter(best_i)
        if letters and letters[-1] == (k, e):
            letters.pop()
        else:
            letters.append((k, -e))
        z, dist = best, best_d
    raise ReductionStall(f"no convergence after {MAX_REDUCE_STEPS} steps near z={z!r}")


def random_word(group: FuchsianGroup, length: int, rng: np.random.Generator) -> GroupWord:
    """I.i.d. letters over the eight generators/inverses, without immediate backtracking."""
    if length < 0:
        raise ValueError("length must be non-negative")
    idx = random_letter_indices(1, length, rng)[0]
    return GroupWord(tuple(index_letter(int(i)) for i in idx))


def random_letter_indices(count: int, length: int, rng: np.random.Generator) -> np.ndarray:
    """(count, length) array of non-backtracking letter indices in 0..7."""
    out = np.empty((count, length), dtype=np.int8)
    if length == 0:
        return out
    out[:, 0] = rng.integers(0, 8, size=count)
    for j in range(1, length):
        r = rng.integers(0, 7, size=count)
        inv = out[:, j - 1] ^ 1
        r += r >= inv
        out[:, j] = r
    return out


def sample_disk(rng: np.random.Generator, n: int, radius: float) -> np.ndarray:
    """Uniform points in the disk |z| < radius."""
    r = radius * np.sqrt(rng.random(n))
    return r * np.exp(2j * np.pi * rng.random(n))


def area_density(z):
    """Coefficient of i dz^dzbar/(1-|z|^2)^2 against dx dy."""
    return 2.0 / (1.0 - np.abs(z) ** 2) ** 2


def domain_area(group: FuchsianGroup, samples: int, rng, shards: int = 1) -> MCEstimate:
    """Monte Carlo value of the integral over R of i dz^dzbar/(1-|z|^2)^2.

    By Gauss-Bonnet this is half the hyperbolic area, i.e. 2*pi for genus 2.
    Rejection sampling from the octagon's circumscribed disk.
    """
    radius = group.circumradius

    def draw(gen, n):
        z = sample_disk(gen, n, radius)
        return np.where(in_domain_mask(group, z), area_density(z), 0.0)

    return sharded_mean(draw, samples, rng, shards, scale=math.pi * radius**2)


def euclidean_area(group: FuchsianGroup) -> float:
    """Exact Euclidean area of the octagon: straight polygon minus circular segments."""
    v = group.vertices()
    polygon = 0.5 * abs(np.sum((np.conj(v) * np.roll(v, -1)).imag))
    segments = 0.0
    for j in range(group.side_count):
        _, rad = group.side_circle(j)
        p, q = group.side_endpoints(j)
        phi = 2 * math.asin(abs(p - q) / (2 * rad))
        segments += 0.5 * rad**2 * (phi - math.sin(phi))
    return polygon - segments
