import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_disk
from levitube import calculus as C
from levitube.tube import neg_log_delta


def pts(rng, n, radius=0.7):
    return C.to_real(random_disk(rng, n, radius), random_disk(rng, n, radius))


def test_wirtinger_simple():
    g = C.wirtinger_gradient(lambda z, w: z.real, (0.2 + 0.1j, -0.3j))
    assert np.allclose(g, [0.5, 0, 0.5, 0], atol=1e-10)
    g = C.wirtinger_gradient(lambda z, w: np.abs(z) ** 2, (0.3, 0))
    assert abs(g[0] - 0.3) < 1e-9


def test_wirtinger_holomorphic(rng):
    X = pts(rng, 50)
    g = C.wirtinger_gradient_batch(lambda z, w: z**2 * w, X)
    z, w = C.to_complex(X)
    assert np.max(np.abs(g[:, 0] - 2 * z * w)) < 1e-7
    assert np.max(np.abs(g[:, 1] - z**2)) < 1e-7
    assert np.max(np.abs(g[:, 2:])) < 1e-9


def test_hessian_examples(rng):
    p = (0.3 - 0.2j, 0.1 + 0.5j)
    assert np.allclose(C.complex_hessian(lambda z, w: np.abs(z) ** 2 + np.abs(w) ** 2, p).h, np.eye(2), atol=1e-8)
    assert np.allclose(C.complex_hessian(lambda z, w: (z * w).real, p).h, 0, atol=1e-8)
    assert np.allclose(C.complex_hessian(neg_log_delta, (0, 0)).h, np.eye(2), atol=1e-8)


def test_hessian_hermitian(rng):
    H = C.complex_hessian_batch(neg_log_delta, pts(rng, 100))
    assert np.max(np.abs(H - np.conj(np.swapaxes(H, -1, -2)))) < 1e-10


def test_hessian_requires_real_function():
    with pytest.raises(ValueError):
        C.complex_hessian(lambda z, w: z * w, (0.1, 0.2))


def test_spectral_helpers():
    eye = np.eye(2, dtype=complex)
    assert C.ma_det(eye) == 1
    v = np.array([1 + 2j, 0.5 - 1j])
    assert abs(C.ma_det(np.outer(v, v.conj()))) < 1e-14
    assert C.min_eigenvalue(eye) == 1
    assert C.min_eigenvalue(np.diag([2.0, -3.0]).astype(complex)) == -3
    eps = np.exp(0.7j)
    assert abs(C.min_eigenvalue(np.array([[1, np.conj(eps)], [eps, 1]]))) < 1e-15
    assert C.HermitianForm2(eye).min_eigenvalue() == 1


def test_stencil_guard():
    with pytest.raises(C.StencilError):
        C.wirtinger_gradient(neg_log_delta, (0.999999, 0))


def test_d_of_constant_is_zero(rng):
    omega = C.constant_form(1, {(0,): 1.0, (3,): 2j})
    vals = C.d(omega)(pts(rng, 10))
    assert all(np.max(np.abs(v)) < 1e-12 for v in vals.values())


def test_d_squared_vanishes(rng):
    X = pts(rng, 30)
    ddf = C.d(C.df(neg_log_delta), step=1e-3)(X)
    assert max(np.max(np.abs(v)) for v in ddf.values()) < 1e-5


def test_ddc_is_i_ddbar(rng):
    X = pts(rng, 30)
    a = C.i_ddbar(neg_log_delta)(X)
    b = C.d(C.dc(neg_log_delta), step=1e-3)(X)
    keys = set(a) | set(b)
    gap = max(np.max(np.abs(a.get(k, 0) - b.get(k, 0))) for k in keys)
    assert gap < 1e-6


def test_wedge_anticommutes(rng):
    X = pts(rng, 5)
    a = C.dc(neg_log_delta)
    b = C.df(lambda z, w: (z * np.conj(w)).real)
    c = C.i_ddbar(neg_log_delta)
    ab, ba = C.wedge(a, b)(X), C.wedge(b, a)(X)
    for k in ab:
        assert np.array_equal(ab[k], -ba[k])
    ac, ca = C.wedge(a, c)(X), C.wedge(c, a)(X)
    for k in ac:
        # same products summed in another order
        assert np.allclose(ac[k], ca[k], rtol=1e-13, atol=1e-13)


def test_wedge_degree_guard():
    with pytest.raises(ValueError):
        C.wedge(C.i_ddbar(neg_log_delta), C.constant_form(3, {(0, 1, 2): 1.0}))


def test_pullback_identity(rng):
    X = pts(rng, 10)
    omega = C.i_ddbar(neg_log_delta)
    pulled = C.pullback(omega, lambda Q: Q, 4)(X)
    direct = omega(X)
    for k in direct:
        assert np.max(np.abs(pulled[k] - direct[k])) < 1e-8


def test_pullback_chain_rule():
    dz = C.constant_form(1, {(0,): 1.0, (1,): 1j})

    def square(Q):
        z = Q[..., 0] + 1j * Q[..., 1]
        s = z * z
        return np.stack([s.real, s.imag, np.full(z.shape, 0.1), np.full(z.shape, 0.2)], axis=-1)

    vals = C.pullback(dz, square, 2)(np.array([[0.5, 0.0]]))
    # 2z dz at z = 0.5 is dx + i dy
    assert abs(vals[(0,)][0] - 1) < 1e-9 and abs(vals[(1,)][0] - 1j) < 1e-9


def test_pullback_functorial(rng):
    def phi(Q):
        return Q + 0.1 * np.stack([Q[..., 1] * Q[..., 2], Q[..., 0] ** 2, -Q[..., 3], Q[..., 0] * Q[..., 1]], axis=-1)

    def psi(Q):
        return 0.8 * Q + 0.05 * np.roll(Q, 1, axis=-1) ** 2

    omega = C.wedge(C.dc(neg_log_delta), C.i_ddbar(neg_log_delta))
    X = pts(rng, 10, 0.4)
    a = C.pullback(omega, lambda Q: phi(psi(Q)), 4)(X)
    b = C.pullback(C.pullback(omega, phi, 4), psi, 4)(X)
    scale = max(np.max(np.abs(v)) for v in a.values())
    assert max(np.max(np.abs(a[k] - b[k])) for k in a) < 1e-5 * max(1.0, scale)


def _poly_three_form():
    def coeffs(X):
        x1, y1, x2, y2 = (X[..., i] for i in range(4))
        return {
            (0, 1, 2): x1**2 * y2 + 0.3,
            (0, 1, 3): x2 * y1 - x1 * y2**2,
            (0, 2, 3): 1j * y1**3 + x2,
            (1, 2, 3): x1 * x2 * y2,
        }

    return C.FormField(3, coeffs)


def test_stokes_polynomial():
    box = C.Box4.around(0.2 + 0.1j, -0.3 + 0.2j, 0.1)
    res = C.stokes_check(_poly_three_form(), box, 16)
    assert abs(res.lhs) > 1e-6
    assert res.gap < 1e-3


def test_stokes_exact_form():
    def eta(X):
        x1, y1, x2, y2 = (X[..., i] for i in range(4))
        return {(0, 1): x2 * y2**2, (1, 3): x1**3 - y1 * x2, (2, 3): y1 * x1}

    omega = C.d(C.FormField(2, eta), step=1e-3)
    res = C.stokes_check(omega, C.Box4.around(0.1, 0.2j, 0.15), 16, step=1e-3)
    assert res.gap < 1e-3


def test_stokes_degenerate_box():
    res = C.stokes_check(_poly_three_form(), C.Box4.around(0.1, 0.1, 1e-6), 4)
    assert abs(res.lhs) < 1e-15 and abs(res.rhs) < 1e-15


def test_stokes_grid_guard():
    with pytest.raises(ValueError):
        C.stokes_check(_poly_three_form(), C.Box4.around(0.1, 0.1, 0.1), 3)


def test_box_must_fit_bidisk():
    with pytest.raises(ValueError):
        C.Box4.around(0.95, 0, 0.1)


@settings(max_examples=60, deadline=None)
@given(st.complex_numbers(max_magnitude=0.7), st.complex_numbers(max_magnitude=0.7))
def test_levi_of_plurisubharmonic_log_is_positive(z, w):
    h = C.complex_hessian(lambda a, b: np.log1p(np.abs(a) ** 2 + np.abs(b) ** 2), (z, w))
    assert h.min_eigenvalue() > 0
    assert np.max(np.abs(h.h - h.h.conj().T)) < 1e-10
