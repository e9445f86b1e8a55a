"""Level sets M_t = {delta = cos^2 t}, their trivialisations, and the Hardy-type integrals.

Chart iota_t(z, theta) = (z, (s e^{i theta} + conj z)/(1 + z s e^{i theta})), s = sin t,
parametrises M_t over R x (circle); kappa_t is the mirror chart with the roles
of z and w exchanged.  Pulled back by iota_t,

    d^c(-delta) ^ i del delbar(-log delta) = 2 sin^2 t * i dz^dzbar ^ dtheta / (1-|z|^2)^2,

so the normalised level integral
    I(t) = (1/sin^2 t) * int_{M_t} |f|^2 d^c(-delta) ^ i del delbar(-log delta)
equals int_{R x circle} |f o iota_t|^2 * 2 i dz^dzbar dtheta/(1-|z|^2)^2.
For constant f this is 8 pi^2 |f|^2 on the genus-2 octagon surface.

Test functions live on the cover: a bounded holomorphic function invariant
under the group is constant, so nothing else is available on the quotient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import calculus
from .calculus import Box4, FormField, relative_gap
from .fuchsian import FuchsianGroup, in_domain_mask, sample_disk
from .montecarlo import MCEstimate, sharded_mean
from .tube import delta, level_point, neg_log_delta, rho

PREFACTOR = "4*pi^2*(2g-2)"
STOKES_STEP = 1e-3
S_CLEARANCE = 0.95


# -- charts -------------------------------------------------------------------


def iota(t: float, z, theta):
    """iota_t(z, e^{i theta}); lands on M_t for t < pi/2 and on |w| = 1 at t = pi/2."""
    s = math.sin(t)
    u = s * np.exp(1j * np.asarray(theta))
    return z, (u + np.conj(z)) / (1 + z * u)


def kappa(t: float, theta_prime, w):
    """kappa_t(e^{i theta'}, w) = ((s e^{i theta'} + conj w)/(1 + w s e^{i theta'}), w)."""
    s = math.sin(t)
    u = s * np.exp(1j * np.asarray(theta_prime))
    return (u + np.conj(w)) / (1 + w * u), w


@dataclass(frozen=True)
class LevelChart:
    t: float
    kind: str = "iota"

    def __post_init__(self):
        if not 0 < self.t <= math.pi / 2:
            raise ValueError("t must lie in (0, pi/2]")
        if self.kind not in ("iota", "kappa"):
            raise ValueError("kind is 'iota' or 'kappa'")

    def __call__(self, a, b):
        return iota(self.t, a, b) if self.kind == "iota" else kappa(self.t, a, b)

    def real_map(self, Q: np.ndarray) -> np.ndarray:
        """R^3 -> R^4 form of the chart; iota uses (x, y, theta), kappa uses (theta', x, y)."""
        Q = np.asarray(Q, dtype=float)
        if self.kind == "iota":
            z, w = iota(self.t, Q[..., 0] + 1j * Q[..., 1], Q[..., 2])
        else:
            z, w = kappa(self.t, Q[..., 0], Q[..., 1] + 1j * Q[..., 2])
        return calculus.to_real(z, w)


# -- test functions -------------------------------------------------------------


@dataclass(frozen=True)
class BoundedHoloFn:
    """A bounded holomorphic function on the bidisk with a known bound on its modulus."""

    name: str
    fn: Callable = field(repr=False, compare=False)
    bound: float = 1.0

    def __call__(self, z, w):
        z = np.asarray(z, dtype=complex)
        w = np.asarray(w, dtype=complex)
        return np.broadcast_to(np.asarray(self.fn(z, w), dtype=complex), np.broadcast(z, w).shape)

    def abs2(self, z, w):
        return np.abs(self(z, w)) ** 2

    def sampled_sup(self, samples: int = 10_000, rng=0) -> float:
        rng = np.random.default_rng(rng)
        z = sample_disk(rng, samples, 1.0)
        w = sample_disk(rng, samples, 1.0)
        return float(np.max(np.abs(self(z, w))))

    def dbar_defect(self, samples: int = 100, rng=0, radius: float = 0.9) -> float:
        """max |df/dzbar|, |df/dwbar| over random points: zero for holomorphic f."""
        rng = np.random.default_rng(rng)
        X = calculus.to_real(sample_disk(rng, samples, radius), sample_disk(rng, samples, radius))
        g = calculus.wirtinger_gradient_batch(self, X)
        return float(np.max(np.abs(g[..., 2:])))

    def __mul__(self, other: "BoundedHoloFn") -> "BoundedHoloFn":
        return BoundedHoloFn(f"({self.name})*({other.name})", lambda z, w: self(z, w) * other(z, w), self.bound * other.bound)


def constant(c: complex = 1.0) -> BoundedHoloFn:
    return BoundedHoloFn(f"{c}", lambda z, w: np.full(np.broadcast(z, w).shape, c, dtype=complex), abs(c))


def coordinate(which: str) -> BoundedHoloFn:
    if which == "z":
        return BoundedHoloFn("z", lambda z, w: z + 0 * w, 1.0)
    if which == "w":
        return BoundedHoloFn("w", lambda z, w: w + 0 * z, 1.0)
    raise ValueError("coordinate is 'z' or 'w'")


def linear(a: complex, b: complex, name: str | None = None) -> BoundedHoloFn:
    return BoundedHoloFn(name or f"{a}*z+{b}*w", lambda z, w: a * z + b * w, abs(a) + abs(b))


def moebius_in(m, which: str = "z") -> BoundedHoloFn:
    """A disk automorphism applied to one coordinate."""
    if which == "z":
        return BoundedHoloFn(f"m(z)", lambda z, w: m.apply(z) + 0 * w, 1.0)
    return BoundedHoloFn(f"m(w)", lambda z, w: m.apply(w) + 0 * z, 1.0)


def blaschke(zeros_z: Sequence[complex] = (), zeros_w: Sequence[complex] = ()) -> BoundedHoloFn:
    """Finite Blaschke product in z times one in w (modulus < 1 on the bidisk)."""

    def fn(z, w):
        out = np.ones(np.broadcast(z, w).shape, dtype=complex)
        for a in zeros_z:
            out = out * (z - a) / (1 - np.conj(a) * z)
        for b in zeros_w:
            out = out * (w - b) / (1 - np.conj(b) * w)
        return out

    return BoundedHoloFn(f"B[{list(zeros_z)};{list(zeros_w)}]", fn, 1.0)


def named_function(name: str) -> BoundedHoloFn:
    """Lookup used by the CLI: const, z, w, zw, (z+w)/4, blaschke."""
    table = {
        "const": constant(1.0),
        "1": constant(1.0),
        "z": coordinate("z"),
        "w": coordinate("w"),
        "zw": coordinate("z") * coordinate("w"),
        "(z+w)/4": linear(0.25, 0.25, "(z+w)/4"),
        "blaschke": blaschke((0.3 + 0.2j,), (-0.5j,)),
    }
    if name not in table:
        raise KeyError(f"unknown function {name!r}; choose from {sorted(table)}")
    return table[name]


# -- pullback identity -----------------------------------------------------------


def level_three_form(f: BoundedHoloFn, beta: float) -> FormField:
    """beta * |f|^2 d^c(-log delta) ^ i del delbar(-log delta), all derivatives numeric."""
    dc = calculus.dc(neg_log_delta)
    levi = calculus.i_ddbar(neg_log_delta)
    return beta * calculus.wedge(dc, levi).times(f.abs2)


def pullback_identity_gaps(f: BoundedHoloFn, t: float, z, theta, step=None) -> np.ndarray:
    """Relative gaps between the numeric pullback and 2|f o iota|^2 i dz^dzbar^dtheta/(1-|z|^2)^2.

    Both sides are divided by sin^2 t; the right side's dx^dy^dtheta
    coefficient is 4|f o iota|^2/(1-|z|^2)^2.
    """
    if not 0.3 <= t <= 1.5:
        raise ValueError("t must lie in [0.3, 1.5]")
    z = np.asarray(z, dtype=complex)
    Q = np.stack([z.real, z.imag, np.asarray(theta, dtype=float)], axis=-1)
    chart = LevelChart(t)
    form = calculus.pullback(level_three_form(f, math.cos(t) ** 2), chart.real_map, 3, step)
    lhs = form.component(Q, (0, 1, 2)) / math.sin(t) ** 2
    rhs = 4 * f.abs2(*iota(t, z, theta)) / (1 - np.abs(z) ** 2) ** 2
    return np.abs(lhs - rhs) / np.maximum(np.abs(rhs), 1e-12)


def pullback_identity_check(f: BoundedHoloFn, t: float, samples: int = 100, rng=0, group: FuchsianGroup | None = None) -> float:
    """Worst relative gap of the pullback identity over random (z, theta), z in R."""
    rng = np.random.default_rng(rng)
    z = _sample_domain_points(group, samples, rng)
    theta = 2 * np.pi * rng.random(samples)
    return float(np.max(pullback_identity_gaps(f, t, z, theta)))


def _sample_domain_points(group, n, rng):
    if group is None:
        return sample_disk(rng, n, 0.8)
    out = []
    while sum(len(o) for o in out) < n:
        z = sample_disk(rng, 2 * n, group.circumradius)
        out.append(z[in_domain_mask(group, z)])
    return np.concatenate(out)[:n]


# -- level integrals ------------------------------------------------------------


def _stratified_theta(gen, n):
    return 2 * np.pi * (np.arange(n) + gen.random(n)) / n


def level_integral(f: BoundedHoloFn, t: float, samples: int, rng, group: FuchsianGroup, shards: int = 1) -> MCEstimate:
    """Monte Carlo I(t) = int_{R x circle} |f o iota_t|^2 2 i dz^dzbar dtheta/(1-|z|^2)^2.

    z is drawn uniformly from the octagon's circumscribed disk and rejected
    outside R; theta is stratified into equal arcs per chunk.
    """
    if not 0.3 <= t <= 1.5:
        raise ValueError("t must lie in [0.3, 1.5]")
    radius = group.circumradius

    def draw(gen, n):
        z = sample_disk(gen, n, radius)
        theta = _stratified_theta(gen, n)
        inside = in_domain_mask(group, z)
        vals = 4 * f.abs2(*iota(t, z, theta)) / (1 - np.abs(z) ** 2) ** 2
        return np.where(inside, vals, 0.0)

    return sharded_mean(draw, samples, rng, shards, scale=math.pi * radius**2 * 2 * math.pi)


def level_integral_numeric(f: BoundedHoloFn, t: float, samples: int, rng, group: FuchsianGroup) -> MCEstimate:
    """Same integral, with the integrand taken from the numeric pullback of the 3-form."""
    radius = group.circumradius
    form = calculus.pullback(level_three_form(f, math.cos(t) ** 2), LevelChart(t).real_map, 3)

    def draw(gen, n):
        z = sample_disk(gen, n, radius)
        theta = _stratified_theta(gen, n)
        inside = in_domain_mask(group, z)
        vals = np.zeros(n)
        if inside.any():
            Q = np.stack([z[inside].real, z[inside].imag, theta[inside]], axis=-1)
            vals[inside] = form.component(Q, (0, 1, 2)).real / math.sin(t) ** 2
        return vals

    return sharded_mean(draw, samples, rng, 1, scale=math.pi * radius**2 * 2 * math.pi)


@dataclass(frozen=True)
class HardyConstantReport:
    estimates: tuple[tuple[float, MCEstimate], ...]
    sup_abs2: float
    genus: int

    @property
    def prefactor_bound(self) -> float:
        """4 pi^2 sup|f|^2 (2g - 2)."""
        return 4 * math.pi**2 * self.sup_abs2 * (2 * self.genus - 2)

    @property
    def measured_constants(self) -> list[float]:
        return [est.value / self.sup_abs2 for _, est in self.estimates]

    def mismatch(self, nsigma: float = 3.0) -> list[float]:
        """t values whose estimate differs from the prefactor bound by more than nsigma stderr."""
        return [t for t, est in self.estimates if not est.within(self.prefactor_bound, nsigma)]


def hardy_constant(f: BoundedHoloFn, ts: Sequence[float], samples: int, rng, group: FuchsianGroup) -> HardyConstantReport:
    from .montecarlo import shard_generators

    gens = shard_generators(rng, len(ts))
    ests = tuple((float(t), level_integral(f, t, samples, g, group)) for t, g in zip(ts, gens))
    return HardyConstantReport(ests, f.bound**2, group.genus)


# -- Stokes balance for the integration formula -----------------------------------


def _rho_and_u(f: BoundedHoloFn, X):
    grad_rho = calculus.wirtinger_gradient_batch(rho, X)
    levi_rho = calculus.complex_hessian_batch(rho, X)
    grad_u = calculus.wirtinger_gradient_batch(f.abs2, X)
    u = f.abs2(*calculus.to_complex(X))
    return grad_rho, levi_rho, grad_u, u


def balance_three_form(f: BoundedHoloFn) -> FormField:
    """d^c|f|^2 ^ i del rho ^ delbar rho + |f|^2 d^c rho ^ i del delbar rho."""
    W = calculus.wedge_values

    def coeffs(X):
        grad_rho, levi_rho, grad_u, u = _rho_and_u(f, X)
        del_rho, delbar_rho = calculus.wirtinger_one_forms(grad_rho)
        first = W(calculus.dc_values(grad_u), W(calculus.scale_values(1j, del_rho), delbar_rho))
        second = calculus.scale_values(u, W(calculus.dc_values(grad_rho), calculus.hermitian_to_values(levi_rho)))
        return calculus.add_values(first, second)

    return FormField(3, coeffs)


def balance_four_form(f: BoundedHoloFn) -> FormField:
    """i del delbar|f|^2 ^ d rho ^ d^c rho + |f|^2 (i del delbar rho)^2."""
    W = calculus.wedge_values

    def coeffs(X):
        grad_rho, levi_rho, _, u = _rho_and_u(f, X)
        levi_u = calculus.complex_hessian_batch(f.abs2, X)
        first = W(calculus.hermitian_to_values(levi_u), W(calculus.d_values(grad_rho), calculus.dc_values(grad_rho)))
        ddr = calculus.hermitian_to_values(levi_rho)
        second = calculus.scale_values(u, W(ddr, ddr))
        return calculus.add_values(first, second)

    return FormField(4, coeffs)


def check_box_clear_of_s(box: Box4, clearance: float = S_CLEARANCE, lattice: int = 5) -> float:
    """Largest delta on a lattice covering the box; raises if it reaches ``clearance``."""
    pts = calculus.midpoint_grid(box.lo, box.hi, lattice)
    pts = np.concatenate([pts, box.corners()])
    dmax = float(np.max(delta(*calculus.to_complex(pts))))
    if dmax >= clearance:
        raise ValueError(f"box comes too close to the diagonal S (delta up to {dmax:.4f})")
    return dmax


@dataclass(frozen=True)
class BalanceReport:
    function: str
    box: Box4
    grid: int
    interior_direct: complex
    interior_d_omega: complex
    boundary: complex
    scale: float

    @property
    def gaps(self) -> dict[str, float]:
        a, b, c = self.interior_direct, self.interior_d_omega, self.boundary
        return {
            "direct_vs_d_omega": relative_gap(a, b, self.scale),
            "direct_vs_boundary": relative_gap(a, c, self.scale),
            "d_omega_vs_boundary": relative_gap(b, c, self.scale),
        }

    @property
    def max_gap(self) -> float:
        return max(self.gaps.values())

    @property
    def max_abs_gap(self) -> float:
        a, b, c = self.interior_direct, self.interior_d_omega, self.boundary
        return max(abs(a - b), abs(a - c), abs(b - c))


DEFAULT_BOXES = (
    Box4.around(0.5 + 0j, 0.3j, 0.05),
    Box4.around(-0.2 + 0.4j, 0.5 - 0.1j, 0.05),
    Box4.around(0.1 - 0.3j, -0.6 + 0.2j, 0.05),
)


def stokes_balance_box(f: BoundedHoloFn, box: Box4, grid: int = 8, mass_floor: float = 1e-3) -> BalanceReport:
    check_box_clear_of_s(box)
    omega = balance_three_form(f)
    direct, _ = calculus.integrate_top_form_with_mass(balance_four_form(f), box, grid)
    via_d, _ = calculus.integrate_top_form_with_mass(calculus.exterior_derivative(omega, STOKES_STEP), box, grid)
    boundary, mass = calculus.boundary_integral(omega, box, grid)
    return BalanceReport(f.name, box, grid, direct, via_d, boundary, mass_floor * mass)


def stokes_balance_suite(f: BoundedHoloFn, boxes: Sequence[Box4] = DEFAULT_BOXES, grid: int = 8) -> list[BalanceReport]:
    return [stokes_balance_box(f, box, grid) for box in boxes]


# -- gradient term near the Levi-flat boundary -------------------------------------


def _wirtinger_unchecked(f, X):
    return calculus.wirtinger_from_real(calculus.real_gradient(f, X, check_domain=False))


def gradient_three_form(f: BoundedHoloFn) -> FormField:
    """i del f ^ delbar(conj f) ^ d^c(-delta)."""
    W = calculus.wedge_values

    def coeffs(X):
        # f and delta extend smoothly across |w| = 1 for |z| < 1, and near
        # t = pi/2 the stencils reach past it
        gf = _wirtinger_unchecked(f, X)
        del_f = calculus.wirtinger_one_forms(gf)[0]
        # delbar(conj f) = conj(del f) coefficientwise in the dzeta-bar basis
        delbar_fbar = {k: np.conj(v) for k, v in del_f.items()}
        gd = _wirtinger_unchecked(lambda z, w: -delta(z, w), X)
        return W(W(calculus.scale_values(1j, del_f), delbar_fbar), calculus.dc_values(gd))

    return FormField(3, coeffs)


def gradient_level_integral(f: BoundedHoloFn, t: float, samples: int, rng, group: FuchsianGroup) -> MCEstimate:
    """J(t) = int_{M_t} i del f ^ delbar(conj f) ^ d^c(-delta), through the iota_t pullback."""
    if not 0.5 <= t <= 1.55:
        raise ValueError("t must lie in [0.5, 1.55]")
    radius = group.circumradius
    form = calculus.pullback(gradient_three_form(f), LevelChart(t).real_map, 3)

    def draw(gen, n):
        z = sample_disk(gen, n, radius)
        theta = _stratified_theta(gen, n)
        inside = in_domain_mask(group, z)
        vals = np.zeros(n)
        if inside.any():
            Q = np.stack([z[inside].real, z[inside].imag, theta[inside]], axis=-1)
            vals[inside] = form.component(Q, (0, 1, 2)).real
        return vals

    return sharded_mean(draw, samples, rng, 1, scale=math.pi * radius**2 * 2 * math.pi)


def boundary_gradient_integral(f: BoundedHoloFn, samples: int, rng, group: FuchsianGroup) -> MCEstimate:
    """The t = pi/2 value: int_R int |df/dz(z, e^{i phi})|^2 i dz^dzbar (1-|z|^2)/|1 - z e^{i phi}|^2 dphi."""
    radius = group.circumradius
    h = 1e-6

    def draw(gen, n):
        z = sample_disk(gen, n, radius)
        phi = _stratified_theta(gen, n)
        inside = in_domain_mask(group, z)
        e = np.exp(1j * phi)
        fz = (f(z + h, e) - f(z - h, e)) / (2 * h)
        poisson = (1 - np.abs(z) ** 2) / np.abs(1 - z * e) ** 2
        return np.where(inside, 2 * np.abs(fz) ** 2 * poisson, 0.0)

    return sharded_mean(draw, samples, rng, 1, scale=math.pi * radius**2 * 2 * math.pi)


def gradient_boundary_trend(f: BoundedHoloFn, ts: Sequence[float], samples: int, rng, group: FuchsianGroup) -> list[tuple[float, MCEstimate]]:
    from .montecarlo import shard_generators

    gens = shard_generators(rng, len(ts))
    return [(float(t), gradient_level_integral(f, t, samples, g, group)) for t, g in zip(ts, gens)]
