"""Geodesic flow on the octagon surface and diagonal orbits on the torus of boundary pairs.

Both experiments are statistical illustrations with fixed seeds.  The
geodesic flow preserves the normalised hyperbolic area of R, so the fraction
of time spent in a cell should approach the cell's area fraction.  The
boundary experiment pushes one pair of boundary points through many random
words and records where the images land.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .fuchsian import FuchsianGroup, GroupWord, MAX_REDUCE_STEPS, ReductionStall, random_letter_indices, reduce
from .montecarlo import shard_generators, split_counts

RING_SPLIT = 0.5
DIR_TOL = 1e-12
WORD_CHUNK = 100_000


@dataclass(frozen=True)
class GeodesicState:
    z: complex
    dir: complex
    word: GroupWord = field(default_factory=GroupWord)

    def __post_init__(self):
        if abs(abs(self.dir) - 1) > DIR_TOL:
            raise ValueError("direction must be a unit complex number")


def flow(z: complex, direction: complex, length: float) -> tuple[complex, complex]:
    """Move hyperbolic arclength ``length`` along the geodesic through z with unit tangent direction.

    No reduction.  The isometry u -> (u + z)/(1 + conj(z) u) sends 0 to z with
    positive real derivative, so the geodesic is the image of a diameter.
    """
    u = math.tanh(length / 2) * direction
    den = 1 + z.conjugate() * u
    z_new = (u + z) / den
    d = (1 - abs(z) ** 2) / den**2 * direction
    return z_new, d / abs(d)


def _reduce_fast(group: FuchsianGroup, z: complex, d: complex) -> tuple[complex, complex]:
    """Greedy reduction of (z, dir) without recording the word."""
    coeffs = [(m.a, m.b) for m in group.letters]
    r = abs(z)
    for _ in range(MAX_REDUCE_STEPS):
        best = None
        for a, b in coeffs:
            den = b.conjugate() * z + a.conjugate()
            cand = (a * z + b) / den
            rc = abs(cand)
            if rc < r - 1e-15:
                best, r, best_den = cand, rc, den
        if best is None:
            return z, d
        d = d / best_den**2
        d = d / abs(d)
        z = best
    raise ReductionStall(f"no convergence near z={z!r}")


def geodesic_step(state: GeodesicState, dt: float, group: FuchsianGroup) -> GeodesicState:
    """Advance by arclength dt, then pull the point back into R along with its direction."""
    if not 0 < dt <= 0.5:
        raise ValueError("dt must lie in (0, 0.5]")
    z_new, d_new = flow(state.z, state.dir, dt)
    z_red, w = reduce(group, z_new)
    if w.letters:
        back = w.inverse().evaluate(group)
        d_new = back.derivative(z_new) * d_new
        d_new /= abs(d_new)
    return GeodesicState(z_red, d_new, state.word * w)


def hyperbolic_area_fraction_inner(split: float, group: FuchsianGroup) -> float:
    """Fraction of the area of R inside |z| < split (requires the disk to lie inside R)."""
    if split >= group.inradius_euclidean:
        raise ValueError("ring split must lie inside the inscribed disk")
    # curvature -1 metric 4|dz|^2/(1-|z|^2)^2; total area 4 pi (g - 1)
    inner = 4 * math.pi * (1 / (1 - split**2) - 1)
    return inner / (4 * math.pi * (group.genus - 1))


@dataclass
class Histogram2D:
    """Counts on a product of two partitions; edges0 are rows, edges1 columns."""

    edges0: np.ndarray
    edges1: np.ndarray
    counts: np.ndarray = None
    labels: tuple[str, str] = ("x", "y")

    def __post_init__(self):
        shape = (len(self.edges0) - 1, len(self.edges1) - 1)
        if self.counts is None:
            self.counts = np.zeros(shape, dtype=np.int64)
        if self.counts.shape != shape:
            raise ValueError("counts shape does not match the edges")

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def add(self, a, b) -> None:
        i = np.clip(np.searchsorted(self.edges0, a, side="right") - 1, 0, len(self.edges0) - 2)
        j = np.clip(np.searchsorted(self.edges1, b, side="right") - 1, 0, len(self.edges1) - 2)
        np.add.at(self.counts, (i, j), 1)

    def merge(self, other: "Histogram2D") -> "Histogram2D":
        if not (np.array_equal(self.edges0, other.edges0) and np.array_equal(self.edges1, other.edges1)):
            raise ValueError("histograms have different bins")
        return Histogram2D(self.edges0, self.edges1, self.counts + other.counts, self.labels)

    def frequencies(self) -> np.ndarray:
        return self.counts / max(self.total, 1)

    def rows(self) -> list[dict]:
        out = []
        for i in range(self.counts.shape[0]):
            for j in range(self.counts.shape[1]):
                out.append({
                    "i": i, "j": j,
                    f"{self.labels[0]}_lo": float(self.edges0[i]), f"{self.labels[0]}_hi": float(self.edges0[i + 1]),
                    f"{self.labels[1]}_lo": float(self.edges1[j]), f"{self.labels[1]}_hi": float(self.edges1[j + 1]),
                    "count": int(self.counts[i, j]),
                })
        return out

    def to_csv(self) -> str:
        rows = self.rows()
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        return buf.getvalue()


@dataclass(frozen=True)
class EquidistributionResult:
    histogram: Histogram2D
    expected: np.ndarray
    tv_distance: float
    steps: int


def cell_histogram(group: FuchsianGroup, cells: int = 8) -> tuple[Histogram2D, np.ndarray]:
    """Ring x sector partition of R and the exact area fraction of each cell.

    Rings split at |z| = 0.5; sectors are quarter turns, etc.  Sector counts
    must divide 8 so that the octagon's rotations permute them.
    """
    sectors = cells // 2
    if cells % 2 or sectors not in (1, 2, 4, 8):
        raise ValueError("cells must be 2, 4, 8 or 16")
    rings = np.array([0.0, RING_SPLIT, 1.0])
    angles = np.linspace(0.0, 2 * math.pi, sectors + 1)
    inner = hyperbolic_area_fraction_inner(RING_SPLIT, group)
    expected = np.vstack([np.full(sectors, inner / sectors), np.full(sectors, (1 - inner) / sectors)])
    return Histogram2D(rings, angles, labels=("r", "angle")), expected


def run_geodesic(group: FuchsianGroup, z0: complex, dir0: complex, steps: int, dt: float) -> tuple[np.ndarray, np.ndarray]:
    """Reduced positions after each of ``steps`` steps, as (radius, angle) arrays."""
    r_in = group.inradius_euclidean
    z, d = complex(z0), complex(dir0)
    th = math.tanh(dt / 2)
    zs = np.empty(steps, dtype=complex)
    for k in range(steps):
        u = th * d
        den = 1 + z.conjugate() * u
        d = (1 - abs(z) ** 2) / (den * den) * d
        z = (u + z) / den
        d /= abs(d)
        if abs(z) > r_in:
            z, d = _reduce_fast(group, z, d)
        zs[k] = z
    return np.abs(zs), np.mod(np.angle(zs), 2 * math.pi)


def equidistribution_experiment(group: FuchsianGroup, T: float, dt: float = 0.1, cells: int = 8, rng=0) -> EquidistributionResult:
    """Time fractions of one geodesic in the cells of R against their area fractions."""
    steps = int(round(T / dt))
    if steps < 10_000:
        raise ValueError("T/dt must be at least 1e4")
    gen = shard_generators(rng, 1)[0]
    hist, expected = cell_histogram(group, cells)
    # start from a random point of the inscribed disk in a random direction
    z0 = group.inradius_euclidean * 0.9 * math.sqrt(gen.random()) * np.exp(2j * math.pi * gen.random())
    d0 = np.exp(2j * math.pi * gen.random())
    r, a = run_geodesic(group, complex(z0), complex(d0), steps, dt)
    hist.add(r, a)
    tv = 0.5 * float(np.abs(hist.frequencies() - expected).sum())
    return EquidistributionResult(hist, expected, tv, steps)


# -- boundary orbits ----------------------------------------------------------


def apply_words_boundary(group: FuchsianGroup, idx: np.ndarray, xi: complex, eta: complex) -> tuple[np.ndarray, np.ndarray]:
    """Images of (xi, eta) under each row of letter indices, the word read left to right as a composition."""
    a, b = group._letter_coeffs
    n, length = idx.shape
    x = np.full(n, xi, dtype=complex)
    y = np.full(n, eta, dtype=complex)
    for j in range(length - 1, -1, -1):
        aj, bj = a[idx[:, j]], b[idx[:, j]]
        x = (aj * x + bj) / (np.conj(bj) * x + np.conj(aj))
        y = (aj * y + bj) / (np.conj(bj) * y + np.conj(aj))
        x /= np.abs(x)
        y /= np.abs(y)
    return x, y


def boundary_orbit_experiment(
    group: FuchsianGroup,
    N: int,
    L: int = 30,
    m: int = 16,
    rng=0,
    shards: int = 1,
    base: tuple[complex, complex] = (np.exp(0.3j), np.exp(2.1j)),
) -> Histogram2D:
    """Angle pairs of gamma(xi0), gamma(eta0) over N random words, binned on an m x m grid.

    A long random word contracts almost all of the circle towards its
    attracting end, so both images land next to each other: for L beyond a
    handful of letters the counts sit on the diagonal bins only.
    """
    if N < 1 or L < 0 or not 1 <= m <= 32:
        raise ValueError("need N >= 1, L >= 0 and 1 <= m <= 32")
    edges = np.linspace(0.0, 2 * math.pi, m + 1)
    total = Histogram2D(edges, edges, labels=("xi", "eta"))
    for gen, count in zip(shard_generators(rng, shards), split_counts(N, shards)):
        part = Histogram2D(edges, edges, labels=("xi", "eta"))
        while count > 0:
            n = min(count, WORD_CHUNK)
            x, y = apply_words_boundary(group, random_letter_indices(n, L, gen), *base)
            part.add(np.mod(np.angle(x), 2 * math.pi), np.mod(np.angle(y), 2 * math.pi))
            count -= n
        total = total.merge(part)
    return total


def diagonal_fraction(hist: Histogram2D, width: int = 1) -> float:
    """Share of counts within ``width`` bins of the diagonal (cyclically)."""
    m = hist.counts.shape[0]
    i, j = np.indices(hist.counts.shape)
    gap = np.minimum((i - j) % m, (j - i) % m)
    return float(hist.counts[gap <= width].sum() / max(hist.total, 1))


def closed_geodesic_contrast(group: FuchsianGroup, T: float = 1000.0, dt: float = 0.1, cells: int = 8) -> EquidistributionResult:
    """The axis of the first generator through 0: a closed geodesic, so visits pile up in few cells."""
    steps = int(round(T / dt))
    hist, expected = cell_histogram(group, cells)
    r, a = run_geodesic(group, 0j, 1 + 0j, steps, dt)
    hist.add(r, a)
    tv = 0.5 * float(np.abs(hist.frequencies() - expected).sum())
    return EquidistributionResult(hist, expected, tv, steps)
