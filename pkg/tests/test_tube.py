import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_disk, random_moebius
from levitube import calculus as C
from levitube import tube as T
from levitube.moebius import BidiskPoint, act_bidisk


def off_diagonal(rng, n, radius=0.6, dmax=0.98):
    z, w = random_disk(rng, n, radius), random_disk(rng, n, radius)
    keep = T.delta(z, w) < dmax
    return z[keep], w[keep]


def test_delta_examples():
    assert T.delta(0, 0) == 1
    assert abs(T.delta(0.5, -0.5) - 0.36) < 1e-15
    assert abs(T.delta(0.5, 0.0) - 0.75) < 1e-15
    z = 0.3 - 0.4j
    assert abs(T.delta(z, np.conj(z)) - 1) < 1e-15


def test_delta_two_formulas(rng):
    z, w = random_disk(rng, 1000), random_disk(rng, 1000)
    assert np.max(np.abs(T.delta(z, w) - T.delta_direct(z, w))) < 1e-13


def test_delta_in_unit_interval(rng):
    d = T.delta(random_disk(rng, 10_000, 0.999), random_disk(rng, 10_000, 0.999))
    assert np.all((d > 0) & (d <= 1))


def test_rho_formulas_agree(rng):
    z, w = random_disk(rng, 1000), random_disk(rng, 1000)
    assert np.max(np.abs(T.rho(z, w) - T.rho_arccos(z, w))) < 1e-7
    assert np.all(T.rho(z, w) < math.pi / 2)
    assert abs(T.rho(0, 0.5) - math.asin(0.5)) < 1e-15


def test_delta_invariance(rng):
    z, w = random_disk(rng, 500), random_disk(rng, 500)
    for _ in range(10):
        m = random_moebius(rng)
        zi, wi = act_bidisk(m, BidiskPoint(z, w))
        assert np.max(np.abs(T.delta(zi, wi) - T.delta(z, w))) < 1e-12


def test_level_point(rng):
    z = random_disk(rng, 100, 0.8)
    theta = 2 * np.pi * rng.random(100)
    _, w = T.level_point(z, theta, 0.3)
    assert np.max(np.abs(T.delta(z, w) - 0.3)) < 1e-12


def test_closed_forms_at_origin():
    assert np.allclose(T.levi_closed(T.NEG_LOG_DELTA, (0, 0)).h, np.eye(2))
    assert np.allclose(T.levi_closed(T.NEG_SQRT_DELTA, (0, 0)).h, 0.5 * np.eye(2))
    with pytest.raises(T.NearDiagonalError):
        T.levi_closed(T.RHO, (0, 0))
    # on S the rho^2 Levi matrix is the Poincare metric diag(1, 1)
    h = T.levi_closed(T.RHO_SQUARED, (0, 0.003)).h
    assert np.allclose(h, np.eye(2), atol=1e-2)


@pytest.mark.parametrize("tag", T.TAGS)
def test_closed_matches_numeric(tag, rng):
    z, w = off_diagonal(rng, 260)
    z, w = z[:200], w[:200]
    closed = T.levi_closed_batch(tag, z, w)
    numeric = T.levi_numeric_batch(tag, z, w)
    assert np.max(np.abs(closed - numeric)) < 1e-5


def test_hermitian_symmetry(rng):
    z, w = off_diagonal(rng, 100)
    for tag in T.TAGS:
        h = T.levi_closed_batch(tag, z, w)
        assert np.max(np.abs(h - np.conj(np.swapaxes(h, -1, -2)))) < 1e-12


def test_dbar_rho_identity(rng):
    z, w = off_diagonal(rng, 300, dmax=0.9)
    X = C.to_real(z, w)
    grho = C.wirtinger_gradient_batch(T.rho, X)[:, 2:]
    glog = C.wirtinger_gradient_batch(T.neg_log_delta, X)[:, 2:]
    d = T.delta(z, w)[:, None]
    assert np.max(np.abs(grho - 0.5 * np.sqrt(d / (1 - d)) * glog)) < 1e-6


def test_ma_of_neg_log_delta(rng):
    z, w = random_disk(rng, 100), random_disk(rng, 100)
    h = T.levi_closed_batch(T.NEG_LOG_DELTA, z, w)
    expected = 1 / ((1 - abs(z) ** 2) * (1 - abs(w) ** 2)) ** 2
    assert np.max(np.abs(C.ma_det(h) / expected - 1)) < 1e-12


def test_rho_is_maximal(rng):
    z, w = off_diagonal(rng, 300, dmax=0.99)
    dets = C.ma_det(T.levi_closed_batch(T.RHO, z, w))
    scale = np.max(np.abs(T.levi_closed_batch(T.RHO, z, w)), axis=(-1, -2)) ** 2
    assert np.max(np.abs(dets) / scale) < 1e-10
    assert np.all(C.min_eigenvalue(T.levi_closed_batch(T.RHO, z, w)) > -1e-12 * np.sqrt(scale))


def test_rho_squared_positive(rng):
    z, w = off_diagonal(rng, 500, radius=0.9, dmax=0.999)
    assert np.all(C.min_eigenvalue(T.levi_closed_batch(T.RHO_SQUARED, z, w)) > 0)


def test_neg_sqrt_delta_positive_closed(rng):
    z, w = random_disk(rng, 2000, 0.99), random_disk(rng, 2000, 0.99)
    assert np.all(C.min_eigenvalue(T.levi_closed_batch(T.NEG_SQRT_DELTA, z, w)) > 0)


def test_balanced_representative(rng):
    z, w = random_disk(rng, 500, 0.99), random_disk(rng, 500, 0.99)
    z2, w2 = T.balanced_representative(z, w)
    assert np.max(np.abs(T.delta(z2, w2) / T.delta(z, w) - 1)) < 1e-9
    assert np.max(np.abs(np.abs(z2) - np.abs(w2))) < 1e-9
    assert np.max(np.abs(z2 + np.conj(w2))) < 1e-9


def test_neg_sqrt_delta_positive_numeric_small_delta(rng):
    z = random_disk(rng, 30, 0.7)
    theta = 2 * np.pi * rng.random(30)
    z, w = T.level_point(z, theta, 1e-3)
    zb, wb = T.balanced_representative(z, w)
    numeric = T.levi_numeric_batch(T.NEG_SQRT_DELTA, zb, wb)
    assert np.all(C.min_eigenvalue(numeric) > 0)


def test_df_levi_at_half_matches():
    rng = np.random.default_rng(3)
    z, w = random_disk(rng, 200, 0.95), random_disk(rng, 200, 0.95)
    a = T.df_levi_batch(0.5, z, w)
    b = T.levi_closed_batch(T.NEG_SQRT_DELTA, z, w)
    assert np.max(np.abs(a - b)) < 1e-10


def test_df_levi_matches_numeric(rng):
    z, w = off_diagonal(rng, 50)
    f = T.neg_delta_power(0.3)
    numeric = C.complex_hessian_batch(f, C.to_real(z, w))
    assert np.max(np.abs(T.df_levi_batch(0.3, z, w) - numeric)) < 1e-5


def test_df_witness_above_half():
    # frozen witness: eta = 0.55 fails at some delta < 0.05
    grid = T.DFGrid.logspace()
    z, w = grid.points()
    eig = C.min_eigenvalue(T.df_levi_batch(0.55, z, w))
    i = int(np.argmin(eig))
    assert eig[i] < 0 and T.delta(z[i], w[i]) < 0.05
    # the numeric Hessian, taken at a balanced representative, agrees in sign
    zb, wb = T.balanced_representative(z[i], w[i])
    num = C.complex_hessian(T.neg_delta_power(0.55), (complex(zb), complex(wb)))
    assert num.min_eigenvalue() < 0


def test_df_exponent_estimate():
    assert 0.495 <= T.df_exponent_estimate() <= 0.505


def test_df_sweep_monotone():
    sweep = T.df_sweep(np.arange(0.05, 1.0001, 0.05))
    ok = [m >= T.DF_THRESHOLD for _, m in sweep]
    # once it fails it keeps failing
    first_bad = ok.index(False)
    assert all(ok[:first_bad]) and not any(ok[first_bad:])
    assert abs(sweep[first_bad][0] - 0.55) < 1e-9


def test_df_far_from_boundary():
    grid = T.DFGrid(tuple(np.linspace(0.5, 1.0, 11)))
    assert T.df_exponent_estimate(grid) > 0.5


def test_df_eta_range():
    with pytest.raises(ValueError):
        T.df_levi_batch(1.5, 0.1, 0.2)


def test_exhaustion_radius_values():
    assert T.exhaustion_radius(1.0) == 0
    assert abs(T.exhaustion_radius(0.75) - math.log(3)) < 1e-14
    assert abs(T.exhaustion_radius(0.99) - 0.2007) < 1e-4


@pytest.mark.parametrize("c", [0.99, 0.75, 0.5])
def test_exhaustion_sublevel_compact(c, group):
    rep = T.exhaustion_check(c, group, samples=2000, rng=5)
    assert rep.passed
    assert rep.max_distance > 0.5 * rep.bound


def test_diagonal_metric(rng):
    z = random_disk(rng, 100, 0.9)
    w = np.conj(z) + 1e-2 * random_disk(rng, 100, 1.0) * (1 - abs(z) ** 2)
    h = T.levi_closed_batch(T.RHO_SQUARED, z, w)
    g = T.diagonal_metric(z)
    assert np.max(np.abs(h - g) / g[:, :1, :1]) < 5e-2


def test_s_tangent_metric(rng):
    z = random_disk(rng, 100, 0.9)
    v = random_disk(rng, 100, 1.0)
    got = T.s_tangent_metric(T.diagonal_metric(z), v)
    assert np.max(np.abs(got - 2 * abs(v) ** 2 / (1 - abs(z) ** 2) ** 2)) < 1e-12


@settings(max_examples=100, deadline=None)
@given(st.floats(0.0, 0.95), st.floats(0, 2 * math.pi), st.floats(1e-6, 1.0), st.floats(0, 2 * math.pi))
def test_neg_log_delta_levi_is_product_metric(r, a, d, th):
    z = r * complex(math.cos(a), math.sin(a))
    _, w = T.level_point(z, th, d)
    h = T.levi_closed(T.NEG_LOG_DELTA, (z, complex(w))).h
    assert abs(h[0, 0] * (1 - abs(z) ** 2) ** 2 - 1) < 1e-9
    assert h[0, 1] == 0
