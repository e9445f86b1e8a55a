"""Named verification suites producing CheckReport records.

Every check derives its own seed from the root seed and its name, so suites
can run in any order or in parallel and still produce the same numbers.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable

import mpmath
import numpy as np

from . import calculus, ergodic, fuchsian, hardy, tube
from .montecarlo import task_seed

SUITES = ("ma", "hyperconvex", "df", "gamma", "group", "metric", "stokes", "charts", "hardy", "ergodic")


@dataclass
class CheckReport:
    name: str
    status: str
    value: object
    expected: object
    tolerance: float | None
    samples: int
    seed: int
    runtime_ms: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


def judge(value, expected, tolerance=None) -> str:
    """pass iff |value - expected| <= tolerance, or lo <= value <= hi for an interval."""
    if expected is None:
        return "info"
    if not np.all(np.isfinite(np.asarray(value, dtype=float))):
        return "fail"
    if isinstance(expected, (list, tuple)):
        lo, hi = expected
        ok = (lo is None or value >= lo) and (hi is None or value <= hi)
    else:
        ok = abs(value - expected) <= tolerance
    return "pass" if ok else "fail"


def report(name, value, expected=None, tolerance=None, samples=0, seed=0) -> CheckReport:
    value = _plain(value)
    expected = _plain(expected)
    return CheckReport(name, judge(value, expected, tolerance), value, expected, tolerance, int(samples), int(seed))


def _plain(x):
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if x is None:
        return None
    if isinstance(x, (np.integer, int)) and not isinstance(x, bool):
        return int(x)
    return float(x)


@dataclass
class RunConfig:
    suite: str = "all"
    seed: int = 7
    samples: int | None = None
    stokes_grids: tuple[int, int] = (6, 12)
    eta_min: float = 0.3
    eta_max: float = 0.7
    eta_step: float = 0.01
    workers: int = 4
    timings: bool = False
    extra: dict = field(default_factory=dict)

    def n(self, default: int) -> int:
        return int(self.samples) if self.samples else default

    def seed_for(self, name: str) -> int:
        return task_seed(self.seed, name)


# -- random point sets ----------------------------------------------------------


def tube_points(rng, n, dlo, dhi, log=False, radius=0.9):
    """n points with z uniform in |z| < radius and delta in [dlo, dhi]."""
    z = fuchsian.sample_disk(rng, n, radius)
    d = np.exp(rng.uniform(math.log(dlo), math.log(dhi), n)) if log else rng.uniform(dlo, dhi, n)
    return tube.level_point(z, 2 * np.pi * rng.random(n), d)


# -- suites -------------------------------------------------------------------


def suite_ma(cfg: RunConfig) -> list[CheckReport]:
    seed = cfg.seed_for("ma")
    n = cfg.n(1000)
    z, w = tube_points(np.random.default_rng(seed), n, 0.05, 0.95)
    closed = tube.levi_closed_batch(tube.RHO, z, w)
    numeric = tube.levi_numeric_batch(tube.RHO, z, w)

    def ratio(H):
        return np.abs(calculus.ma_det(H)) / np.sum(np.abs(H) ** 2, axis=(-1, -2))

    return [
        report("ma.closed_form_ratio", np.max(ratio(closed)), 0.0, 1e-10, n, seed),
        report("ma.finite_difference_ratio", np.max(ratio(numeric)), 0.0, 1e-6, n, seed),
        report("ma.closed_vs_numeric_gap", np.max(tube.relative_gaps(closed, numeric)), 0.0, 1e-5, n, seed),
    ]


def suite_hyperconvex(cfg: RunConfig) -> list[CheckReport]:
    seed = cfg.seed_for("hyperconvex")
    rng = np.random.default_rng(seed)
    n = cfg.n(1000)
    n_small = max(n // 10, 1)
    z1, w1 = tube_points(rng, n - n_small, 0.01, 0.95)
    z2, w2 = tube_points(rng, n_small, 1e-4, 1e-2, log=True)
    z, w = np.concatenate([z1, z2]), np.concatenate([w1, w2])
    closed = tube.levi_closed_batch(tube.NEG_SQRT_DELTA, z, w)
    numeric = tube.levi_numeric_batch(tube.NEG_SQRT_DELTA, z, w)
    gaps = tube.relative_gaps(closed, numeric)
    lam_c = calculus.min_eigenvalue(closed)
    # sign certificate from finite differences at an equivalent, well-conditioned point
    lam_n = calculus.min_eigenvalue(tube.levi_numeric_batch(tube.NEG_SQRT_DELTA, *tube.balanced_representative(z, w)))
    group = fuchsian.octagon_group()
    ex_seed = cfg.seed_for("hyperconvex.exhaustion")
    ex = tube.exhaustion_check(0.5, group, samples=2000, rng=ex_seed)
    return [
        report("hyperconvex.min_eigenvalue_closed", np.min(lam_c), [0.0, None], None, n, seed),
        report("hyperconvex.min_eigenvalue_numeric_balanced", np.min(lam_n), [0.0, None], None, n, seed),
        report("hyperconvex.min_eigenvalue_small_delta", np.min(lam_n[n - n_small:]), [0.0, None], None, n_small, seed),
        report("hyperconvex.closed_vs_numeric_gap", np.max(gaps), 0.0, 1e-5, n, seed),
        report("hyperconvex.exhaustion_distance", ex.max_distance, [0.0, ex.bound], None, ex.samples, ex_seed),
    ]


def suite_df(cfg: RunConfig) -> list[CheckReport]:
    grid = tube.DFGrid.logspace()
    z, w = grid.points()
    est = tube.df_exponent_estimate(grid)
    eta = 0.55
    lam = calculus.min_eigenvalue(tube.df_levi_batch(eta, z, w))
    d = tube.delta(z, w)
    small = d < 0.05
    k = int(np.argmin(np.where(small, lam, np.inf)))
    # confirm the witness with finite differences of -delta^eta itself
    num = calculus.complex_hessian(tube.neg_delta_power(eta), (z[k], w[k])).min_eigenvalue()
    out = [
        report("df.exponent_estimate", est, [0.495, 0.505], None, len(z), 0),
        report("df.witness_eta_0.55_closed", lam[k], [None, 0.0], None, int(small.sum()), 0),
        report("df.witness_eta_0.55_numeric", num, [None, 0.0], None, 1, 0),
        report("df.witness_delta", d[k], [0.0, 0.05], None, 1, 0),
    ]
    sweep = tube.df_sweep(np.round(np.arange(0.3, 0.7001, 0.05), 10), grid)
    out.append(report("df.sweep_min_eigenvalues", [v for _, v in sweep], samples=len(z)))
    return out


def suite_gamma(cfg: RunConfig) -> list[CheckReport]:
    """delta along orbits; the comparison is done at 40 digits, the float64 figure is informational."""
    seed = cfg.seed_for("gamma")
    rng = np.random.default_rng(seed)
    group = fuchsian.octagon_group()
    n_words, n_pts = 100, 100
    z = fuchsian.sample_disk(rng, n_pts, 0.9)
    w = fuchsian.sample_disk(rng, n_pts, 0.9)
    words = [fuchsian.random_word(group, int(rng.integers(1, 6)), rng).evaluate(group) for _ in range(n_words)]
    worst64 = 0.0
    for m in words:
        worst64 = max(worst64, float(np.max(np.abs(tube.delta(m.apply(z), m.conj_apply(w)) - tube.delta(z, w)))))
    with mpmath.workdps(40):
        zm = [mpmath.mpc(v) for v in z]
        wm = [mpmath.mpc(v) for v in w]
        base = [tube.delta(a, b) for a, b in zip(zm, wm)]
        worst = mpmath.mpf(0)
        for m in words:
            for a, b, d0 in zip(zm, wm, base):
                worst = max(worst, abs(tube.delta(m.apply(a), m.conj_apply(b)) - d0))
    diag = max(float(np.max(np.abs(m.conj_apply(np.conj(z)) - np.conj(m.apply(z))))) for m in words)
    return [
        report("gamma.delta_invariance", float(worst), 0.0, 1e-12, n_words * n_pts, seed),
        report("gamma.delta_invariance_float64", worst64, samples=n_words * n_pts, seed=seed),
        report("gamma.diagonal_preserved", diag, 0.0, 1e-9, n_words * n_pts, seed),
    ]


def suite_group(cfg: RunConfig) -> list[CheckReport]:
    group = fuchsian.octagon_group()
    angles = fuchsian.interior_angles(group)
    prod, length = fuchsian.vertex_cycle(group)
    cycle_err = min(abs(prod.a - 1) + abs(prod.b), abs(prod.a + 1) + abs(prod.b))
    seed = cfg.seed_for("group.area")
    n = cfg.n(10_000_000)
    area = fuchsian.domain_area(group, n, seed)
    return [
        report("group.angle_sum", float(np.sum(angles)), 2 * math.pi, 1e-9),
        report("group.side_pairing_error", fuchsian.side_pairing_error(group), 0.0, 1e-9),
        report("group.vertex_cycle_length", length, 8, 0),
        report("group.vertex_cycle_product", cycle_err, 0.0, 1e-8),
        report("group.area_monte_carlo", area.value, 2 * math.pi, 3 * area.stderr, n, seed),
        report("group.area_exact_euclidean", fuchsian.euclidean_area(group)),
    ]


def suite_metric(cfg: RunConfig) -> list[CheckReport]:
    seed = cfg.seed_for("metric")
    rng = np.random.default_rng(seed)
    n = cfg.n(50)
    z = fuchsian.sample_disk(rng, n, 0.9)
    w = np.conj(z)
    h = calculus.complex_hessian_batch(tube.rho_squared, calculus.to_real(z, w))
    target = tube.diagonal_metric(z)
    v = np.exp(2j * np.pi * rng.random(n))
    g = tube.s_tangent_metric(h, v)
    g_expected = 2 / (1 - np.abs(z) ** 2) ** 2
    return [
        report("metric.levi_rho_squared_on_S", np.max(np.abs(h - target)), 0.0, 1e-4, n, seed),
        report("metric.s_tangent_metric", np.max(np.abs(g - g_expected)), 0.0, 1e-4, n, seed),
    ]


STOKES_FUNCTIONS = ("1", "(z+w)/4", "zw")


def suite_stokes(cfg: RunConfig) -> list[CheckReport]:
    coarse, fine = cfg.stokes_grids
    out = []
    for name in STOKES_FUNCTIONS:
        f = hardy.named_function(name)
        for b, box in enumerate(hardy.DEFAULT_BOXES):
            r1 = hardy.stokes_balance_box(f, box, coarse)
            r2 = hardy.stokes_balance_box(f, box, fine)
            tag = f"stokes.f={name}.box{b}"
            out.append(report(f"{tag}.three_way_gap", r2.max_gap, 0.0, 1e-2, fine**4))
            # refinement must not make things worse unless already at the noise floor
            converged = r2.max_abs_gap <= max(r1.max_abs_gap, r2.scale)
            out.append(report(f"{tag}.refinement", [r1.max_abs_gap, r2.max_abs_gap], None, samples=fine**4))
            out.append(report(f"{tag}.converges", float(converged), 1.0, 0.0))
    return out


def suite_charts(cfg: RunConfig) -> list[CheckReport]:
    seed = cfg.seed_for("charts")
    rng = np.random.default_rng(seed)
    n = cfg.n(1000)
    out = []
    for t in (0.5, 0.9, 1.3):
        z = fuchsian.sample_disk(rng, n, 0.95)
        th = 2 * np.pi * rng.random(n)
        c2 = math.cos(t) ** 2
        gi = np.max(np.abs(tube.delta(*hardy.iota(t, z, th)) - c2))
        gk = np.max(np.abs(tube.delta(*hardy.kappa(t, th, z)) - c2))
        out.append(report(f"charts.iota_level_t={t}", gi, 0.0, 1e-10, n, seed))
        out.append(report(f"charts.kappa_level_t={t}", gk, 0.0, 1e-10, n, seed))
    group = fuchsian.octagon_group()
    cases = [("1", 0.7), ("zw", 1.2), ("1", 0.5), ("1", 0.9), ("1", 1.3)]
    for name, t in cases:
        s = cfg.seed_for(f"charts.pullback.{name}.{t}")
        gap = hardy.pullback_identity_check(hardy.named_function(name), t, 100, s, group)
        out.append(report(f"charts.pullback_f={name}_t={t}", gap, 0.0, 1e-4, 100, s))
    return out


def suite_hardy(cfg: RunConfig) -> list[CheckReport]:
    group = fuchsian.octagon_group()
    f = hardy.constant(1.0)
    n = cfg.n(1_000_000)
    target = 8 * math.pi**2
    out, ests = [], []
    for t in (0.5, 1.0, 1.4):
        s = cfg.seed_for(f"hardy.level_integral.t={t}")
        e = hardy.level_integral(f, t, n, s, group)
        ests.append(e)
        out.append(report(f"hardy.level_integral_t={t}", e.value, target, 3 * e.stderr, n, s))
    zmax = max(abs(a.value - b.value) / math.hypot(a.stderr, b.stderr) for i, a in enumerate(ests) for b in ests[i + 1:])
    out.append(report("hardy.t_independence_zscore", zmax, 0.0, 3.0, n))
    pooled = sum(e.value / e.stderr**2 for e in ests) / sum(1 / e.stderr**2 for e in ests)
    pooled_err = 1 / math.sqrt(sum(1 / e.stderr**2 for e in ests))
    prefactor = 4 * math.pi**2 * (2 * group.genus - 2)
    out.append(report("hardy.constant_vs_prefactor", pooled / abs(f.bound) ** 2, prefactor, 3 * pooled_err, 3 * n))
    return out


def suite_ergodic(cfg: RunConfig) -> list[CheckReport]:
    group = fuchsian.octagon_group()
    out = []
    for k in range(3):
        s = cfg.seed_for(f"ergodic.geodesic.{k}")
        res = ergodic.equidistribution_experiment(group, 1e5, 0.1, 8, s)
        out.append(report(f"ergodic.geodesic_tv_run{k}", res.tv_distance, 0.0, 0.05, res.steps, s))
    s = cfg.seed_for("ergodic.boundary")
    n = cfg.n(1_000_000)
    hist = ergodic.boundary_orbit_experiment(group, n, 30, 16, s)
    out.append(report("ergodic.boundary_min_bin_count", int(hist.counts.min()), [1, None], None, n, s))
    out.append(report("ergodic.boundary_empty_bins", int((hist.counts == 0).sum()), samples=n, seed=s))
    out.append(report("ergodic.boundary_diagonal_fraction", ergodic.diagonal_fraction(hist, 0), samples=n, seed=s))
    return out


SUITE_FUNCS: dict[str, Callable[[RunConfig], list[CheckReport]]] = {
    "ma": suite_ma,
    "hyperconvex": suite_hyperconvex,
    "df": suite_df,
    "gamma": suite_gamma,
    "group": suite_group,
    "metric": suite_metric,
    "stokes": suite_stokes,
    "charts": suite_charts,
    "hardy": suite_hardy,
    "ergodic": suite_ergodic,
}


def _timed(name: str, cfg: RunConfig) -> list[CheckReport]:
    t0 = time.perf_counter()
    try:
        reports = SUITE_FUNCS[name](cfg)
    except (fuchsian.ReductionStall, calculus.StencilError, FloatingPointError, ValueError) as exc:
        reports = [CheckReport(f"{name}.error", "fail", None, None, None, 0, cfg.seed)]
        reports[0].value = f"{type(exc).__name__}: {exc}"
    ms = int(round(1000 * (time.perf_counter() - t0)))
    for r in reports:
        r.runtime_ms = ms if cfg.timings else 0
    return reports


def run_suites(names, cfg: RunConfig) -> list[CheckReport]:
    """Run suites (threaded when workers > 1) and return reports sorted by name."""
    names = list(SUITES) if names in ("all", ["all"]) else list(names)
    unknown = [n for n in names if n not in SUITE_FUNCS]
    if unknown:
        raise KeyError(f"unknown suite(s) {unknown}; choose from {list(SUITES)} or 'all'")
    if cfg.workers > 1 and len(names) > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            parts = list(pool.map(lambda n: _timed(n, cfg), names))
    else:
        parts = [_timed(n, cfg) for n in names]
    return sorted((r for part in parts for r in part), key=lambda r: r.name)


def all_passed(reports) -> bool:
    return all(r.status != "fail" for r in reports)
