"""The tube functions on the bidisk and their closed-form Levi matrices.

delta(z, w) = 1 - |(w - conj z)/(1 - z w)|^2 is invariant under the conjugated
diagonal action; rho = arccos(sqrt(delta)) is the Grauert-tube length function
and -sqrt(delta) the bounded strictly plurisubharmonic exhaustion.

Closed forms are built from the blocks

    L  = diag(A, B),               A = (1-|z|^2)^-2,  B = (1-|w|^2)^-2,
    E  = [[0, eps C], [conj(eps) C, 0]],  C = ((1-|z|^2)(1-|w|^2))^-1,
    eps = -(w - conj z)/(conj w - z),

so that i del delbar(-log delta) = L and
i del(-log delta) ^ delbar(-log delta) = (1 - delta)(L + E).
The product (1 - delta) E is smooth across the totally real diagonal
S = {w = conj z}; it is evaluated directly as -(w - conj z)^2 C/|1 - z w|^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import calculus
from .calculus import HermitianForm2, ma_det, min_eigenvalue
from .moebius import BidiskPoint, hyperbolic_distance

NEG_LOG_DELTA = "-log delta"
RHO = "rho"
RHO_SQUARED = "rho^2"
NEG_SQRT_DELTA = "-sqrt delta"
TAGS = (NEG_LOG_DELTA, RHO, RHO_SQUARED, NEG_SQRT_DELTA)

NEAR_S = 1.0 - 1e-6
DF_THRESHOLD = -1e-9
DF_RESOLUTION = 1e-3


class NearDiagonalError(ValueError):
    """Closed form requested where sqrt(delta/(1-delta)) blows up."""


# -- scalar functions ---------------------------------------------------------


def quotient(z, w):
    """(w - conj z)/(1 - z w); its modulus is sin(rho)."""
    return (w - np.conj(z)) / (1 - z * w)


def delta(z, w):
    """(1-|z|^2)(1-|w|^2)/|1-zw|^2, equal to 1 - |quotient|^2 without cancellation."""
    return (1 - np.abs(z) ** 2) * (1 - np.abs(w) ** 2) / np.abs(1 - z * w) ** 2


def delta_direct(z, w):
    return 1 - np.abs(quotient(z, w)) ** 2


def rho(z, w):
    return np.arcsin(np.minimum(np.abs(quotient(z, w)), 1.0))


def rho_arccos(z, w):
    return np.arccos(np.sqrt(delta(z, w)))


def rho_squared(z, w):
    return rho(z, w) ** 2


def neg_log_delta(z, w):
    return -np.log(delta(z, w))


def neg_sqrt_delta(z, w):
    return -np.sqrt(delta(z, w))


def neg_delta_power(eta: float):
    return lambda z, w: -delta(z, w) ** eta


SCALARS = {NEG_LOG_DELTA: neg_log_delta, RHO: rho, RHO_SQUARED: rho_squared, NEG_SQRT_DELTA: neg_sqrt_delta}


@dataclass(frozen=True)
class TubePoint:
    p: BidiskPoint
    delta: float
    rho: float

    @classmethod
    def at(cls, z: complex, w: complex) -> "TubePoint":
        return cls(BidiskPoint(complex(z), complex(w)), float(delta(z, w)), float(rho(z, w)))


def level_point(z, theta, delta_value):
    """The point (z, w) with delta = delta_value, w = (s e^{i theta} + conj z)/(1 + z s e^{i theta})."""
    s = np.sqrt(1.0 - np.asarray(delta_value, dtype=float))
    u = s * np.exp(1j * np.asarray(theta))
    return z, (u + np.conj(z)) / (1 + z * u)


def balanced_representative(z, w):
    """An equivalent point under (z, w) -> (m z, conj m(conj w)) with the midpoint of z, conj w at 0.

    delta is unchanged and Levi forms change by a congruence, so signs of
    eigenvalues are preserved; both coordinates end up equally far from the
    unit circle, which keeps finite-difference stencils well-conditioned.
    """
    z = np.asarray(z, dtype=complex)
    wb = np.conj(np.asarray(w, dtype=complex))
    u = (wb - z) / (1 - np.conj(z) * wb)
    r = np.abs(u)
    half = np.tanh(np.arctanh(np.minimum(r, 1 - 1e-16)) / 2)
    mid_u = np.where(r > 0, half * u / np.where(r > 0, r, 1), 0)
    mid = (mid_u + z) / (1 + np.conj(z) * mid_u)
    z2 = (z - mid) / (1 - np.conj(mid) * z)
    wb2 = (wb - mid) / (1 - np.conj(mid) * wb)
    return z2, np.conj(wb2)


# -- closed-form Levi matrices --------------------------------------------------


def _blocks(z, w):
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    az = 1 - np.abs(z) ** 2
    aw = 1 - np.abs(w) ** 2
    L = np.zeros(np.broadcast(z, w).shape + (2, 2), dtype=complex)
    L[..., 0, 0] = 1 / az**2
    L[..., 1, 1] = 1 / aw**2
    c = 1 / (az * aw)
    # (1 - delta) * eps * C
    off = -((w - np.conj(z)) ** 2) / np.abs(1 - z * w) ** 2 * c
    E1 = np.zeros_like(L)
    E1[..., 0, 1] = off
    E1[..., 1, 0] = np.conj(off)
    return L, E1, delta(z, w)


def epsilon(z, w):
    return -(w - np.conj(z)) / (np.conj(w) - z)


def levi_closed_batch(tag: str, z, w) -> np.ndarray:
    L, E1, dl = _blocks(z, w)
    dl_ = dl[..., None, None]
    if tag == NEG_LOG_DELTA:
        return L
    if tag == NEG_SQRT_DELTA:
        return np.sqrt(dl_) / 2 * ((1 + dl_) / 2 * L - 0.5 * E1)
    if tag in (RHO, RHO_SQUARED):
        if np.any(dl > NEAR_S):
            raise NearDiagonalError("closed form of rho, rho^2 is refused within 1e-6 of S")
        E = E1 / (1 - dl_)
        k = np.sqrt(dl_ / (1 - dl_))
        if tag == RHO:
            return 0.25 * k * (L - E)
        r = rho(z, w)[..., None, None]
        return 0.5 * (r * k + dl_) * L + 0.5 * (-r * k + dl_) * E
    raise ValueError(f"unknown tag {tag!r}; expected one of {TAGS}")


def levi_closed(tag: str, p) -> HermitianForm2:
    return HermitianForm2(levi_closed_batch(tag, p[0], p[1]))


def df_levi_batch(eta: float, z, w) -> np.ndarray:
    """Levi matrix of -delta^eta:  eta delta^eta [(1 - eta(1-delta)) L - eta (1-delta) E]."""
    if not 0 < eta <= 1:
        raise ValueError("eta must lie in (0, 1]")
    L, E1, dl = _blocks(z, w)
    dl_ = dl[..., None, None]
    return eta * dl_**eta * ((1 - eta * (1 - dl_)) * L - eta * E1)


def df_levi(eta: float, p) -> HermitianForm2:
    return HermitianForm2(df_levi_batch(eta, p[0], p[1]))


# -- numeric cross-check --------------------------------------------------------


@dataclass(frozen=True)
class LeviReport:
    tag: str
    point: BidiskPoint
    closed_form: HermitianForm2 | None
    numeric: HermitianForm2

    @property
    def max_gap(self) -> float:
        if self.closed_form is None:
            return float("nan")
        return float(np.max(np.abs(self.closed_form.h - self.numeric.h)))

    @property
    def relative_gap(self) -> float:
        """Entry gap divided by max(1, largest closed-form entry)."""
        if self.closed_form is None:
            return float("nan")
        return self.max_gap / max(1.0, float(np.max(np.abs(self.closed_form.h))))

    @property
    def min_eigenvalue(self) -> float:
        return (self.closed_form or self.numeric).min_eigenvalue()

    @property
    def ma_det(self) -> float:
        return (self.closed_form or self.numeric).ma_det()


def levi_numeric_batch(tag: str, z, w, step=None) -> np.ndarray:
    return calculus.complex_hessian_batch(SCALARS[tag], calculus.to_real(z, w), step)


def levi_numeric_crosscheck(tag: str, p) -> LeviReport:
    z, w = complex(p[0]), complex(p[1])
    numeric = HermitianForm2(levi_numeric_batch(tag, z, w))
    closed = None
    if not (tag in (RHO, RHO_SQUARED) and delta(z, w) > NEAR_S):
        closed = levi_closed(tag, (z, w))
    return LeviReport(tag, BidiskPoint(z, w), closed, numeric)


def relative_gaps(closed: np.ndarray, numeric: np.ndarray) -> np.ndarray:
    scale = np.maximum(1.0, np.max(np.abs(closed), axis=(-1, -2)))
    return np.max(np.abs(closed - numeric), axis=(-1, -2)) / scale


def diagonal_metric(z) -> np.ndarray:
    """Levi matrix that i del delbar(rho^2) takes on S: diag(1, 1)/(1-|z|^2)^2."""
    z = np.asarray(z, dtype=complex)
    out = np.zeros(z.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = out[..., 1, 1] = 1 / (1 - np.abs(z) ** 2) ** 2
    return out


def s_tangent_metric(h: np.ndarray, v) -> np.ndarray:
    """sum h_jk V_j conj(V_k) for the tangent vector V = (v, conj v) of S."""
    v = np.asarray(v, dtype=complex)
    V = np.stack([v, np.conj(v)], axis=-1)
    return np.einsum("...j,...jk,...k->...", V, h, np.conj(V)).real


# -- Diederich-Fornaess sweep -----------------------------------------------------


@dataclass(frozen=True)
class DFGrid:
    """Sample points at prescribed delta levels, spread over base points and angles."""

    deltas: tuple
    base_points: tuple = (0.0, 0.3 + 0.2j, -0.5 + 0.1j, 0.1 - 0.6j)
    n_theta: int = 16

    @classmethod
    def logspace(cls, lo: float = 1e-4, hi: float = 0.2, n: int = 40, **kw) -> "DFGrid":
        return cls(tuple(np.geomspace(lo, hi, n)), **kw)

    def points(self) -> tuple[np.ndarray, np.ndarray]:
        d = np.asarray(self.deltas)[:, None, None]
        z = np.asarray(self.base_points, dtype=complex)[None, :, None]
        theta = (2 * np.pi * (np.arange(self.n_theta) + 0.5) / self.n_theta)[None, None, :]
        zz, ww = level_point(z, theta, d)
        zz = np.broadcast_to(zz, ww.shape)
        return zz.ravel(), ww.ravel()


def df_grid_min_eigenvalue(eta: float, grid: DFGrid) -> float:
    z, w = grid.points()
    return float(np.min(min_eigenvalue(df_levi_batch(eta, z, w))))


def df_exponent_estimate(grid: DFGrid | None = None, resolution: float = DF_RESOLUTION, threshold: float = DF_THRESHOLD) -> float:
    """Largest eta in (0, 1] (to ``resolution``) with grid-min eigenvalue >= threshold."""
    grid = grid or DFGrid.logspace()
    z, w = grid.points()

    def ok(eta):
        return np.min(min_eigenvalue(df_levi_batch(eta, z, w))) >= threshold

    if ok(1.0):
        return 1.0
    lo, hi = 0.0, 1.0
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo


def df_sweep(etas, grid: DFGrid | None = None) -> list[tuple[float, float]]:
    grid = grid or DFGrid.logspace()
    return [(float(eta), df_grid_min_eigenvalue(float(eta), grid)) for eta in etas]


# -- exhaustion ---------------------------------------------------------------


def exhaustion_radius(c: float) -> float:
    """Hyperbolic radius log((1+s)/(1-s)), s = sqrt(1-c), of {delta >= c} around conj z."""
    s = math.sqrt(max(1.0 - c, 0.0))
    return math.log((1 + s) / (1 - s))


@dataclass(frozen=True)
class ExhaustionReport:
    c: float
    bound: float
    max_distance: float
    samples: int
    exhaustion_range: tuple[float, float]

    @property
    def passed(self) -> bool:
        return self.samples > 0 and self.max_distance <= self.bound + 1e-9


def exhaustion_check(c: float, group, samples: int = 10_000, rng=None) -> ExhaustionReport:
    """Sample points of {delta >= c} with z reduced to the fundamental domain.

    Points are drawn near the diagonal at random scales, pushed around by random
    group words (which preserve delta), reduced so that z lies in R, and
    filtered by delta >= c.  For each survivor the distance from w to conj z is
    compared with ``exhaustion_radius(c)``.
    """
    from .fuchsian import random_word, reduce

    if not 0 < c <= 1:
        raise ValueError("c must lie in (0, 1]")
    rng = np.random.default_rng(rng)
    bound = exhaustion_radius(c)
    dmax, count = 0.0, 0
    lo, hi = 0.0, -1.0
    while count < samples:
        z = 0.9 * math.sqrt(rng.random()) * complex(np.exp(2j * np.pi * rng.random()))
        w = complex(np.conj(z))
        if rng.random() > 0.05:
            scale = (1 - abs(z)) * 10 ** rng.uniform(-4, 0)
            w += scale * complex(np.exp(2j * np.pi * rng.random()))
            if abs(w) >= 1:
                continue
        g = random_word(group, int(rng.integers(0, 4)), rng).evaluate(group)
        z, w = g.apply(z), g.conj_apply(w)
        zr, word = reduce(group, z)
        h = word.evaluate(group).inverse()
        w = h.conj_apply(w)
        dl = float(delta(zr, w))
        if dl < c:
            continue
        count += 1
        dmax = max(dmax, hyperbolic_distance(w, np.conj(zr)))
        val = -math.sqrt(dl)
        lo, hi = min(lo, val), max(hi, val)
    return ExhaustionReport(c, bound, dmax, count, (lo, hi))
