"""Finite-difference Wirtinger calculus and differential forms on C^2 = R^4.

Real coordinates are ordered (x1, y1, x2, y2) with z = x1 + i y1 and
w = x2 + i y2.  Points are float arrays of shape (..., 4).  Scalar fields are
callables ``f(z, w)`` that broadcast over numpy arrays.

Step policy
-----------
* first derivatives: central differences with h = max(1e-5, 1e-5 |x_i|) and
  one Richardson level (h, h/2);
* second derivatives: central differences with h = min(1e-3, margin/32),
  where margin is the distance of the point to the boundary of the bidisk,
  and one Richardson level;
* every stencil must stay inside the bidisk with room 2h, otherwise
  ``StencilError``.

Forms are stored extrinsically: a k-form is a dict mapping strictly increasing
index tuples over the real coordinates to complex coefficient arrays.
The volume form dx1^dy1^dx2^dy2 is positive; d^c = (del - delbar)/2i so that
d d^c = i del delbar.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

GRAD_STEP = 1e-5
HESS_STEP = 1e-3
HESS_MARGIN_FRACTION = 1.0 / 32.0
HERMITIAN_TOL = 1e-10

Coeffs = dict  # tuple[int, ...] -> ndarray


class StencilError(ValueError):
    """A finite-difference stencil leaves the domain."""


# -- points ------------------------------------------------------------------


def to_real(z, w) -> np.ndarray:
    z, w = np.broadcast_arrays(np.asarray(z, dtype=complex), np.asarray(w, dtype=complex))
    return np.stack([z.real, z.imag, w.real, w.imag], axis=-1)


def to_complex(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=float)
    return X[..., 0] + 1j * X[..., 1], X[..., 2] + 1j * X[..., 3]


def bidisk_margin(X: np.ndarray) -> np.ndarray:
    z, w = to_complex(X)
    return 1.0 - np.maximum(np.abs(z), np.abs(w))


def _check_stencil(X, hmax, reach=2.0):
    if np.any(bidisk_margin(X) <= reach * np.asarray(hmax)):
        raise StencilError("finite-difference stencil leaves the bidisk")


def _eval(f, X):
    return np.asarray(f(*to_complex(X)))


def gradient_step(X: np.ndarray) -> np.ndarray:
    return np.maximum(GRAD_STEP, GRAD_STEP * np.abs(X))


def hessian_step(X: np.ndarray) -> np.ndarray:
    return np.minimum(HESS_STEP, HESS_MARGIN_FRACTION * bidisk_margin(X))


# -- raw differences on arbitrary R^n maps -------------------------------------


def central_jacobian(F: Callable[[np.ndarray], np.ndarray], X: np.ndarray, step=None) -> np.ndarray:
    """d F / d x_i with Richardson; F maps (..., n) -> (..., *out).  Returns (..., *out, n)."""
    X = np.asarray(X, dtype=float)
    n = X.shape[-1]
    h = gradient_step(X) if step is None else np.broadcast_to(np.asarray(step, dtype=float), X.shape)
    cols = []
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        hi = h[..., i]
        shift = hi[..., None] * e

        def diff(s, hs):
            fp = np.asarray(F(X + s))
            fm = np.asarray(F(X - s))
            hs = hs.reshape(hs.shape + (1,) * (fp.ndim - hs.ndim))
            return (fp - fm) / (2 * hs)

        d1 = diff(shift, hi)
        d2 = diff(shift / 2, hi / 2)
        cols.append((4 * d2 - d1) / 3)
    return np.stack(cols, axis=-1)


def real_gradient(f, X: np.ndarray, step=None, check_domain: bool = True) -> np.ndarray:
    """Gradient of the scalar field f in the four real coordinates, shape (..., 4)."""
    X = np.asarray(X, dtype=float)
    h = gradient_step(X) if step is None else np.broadcast_to(np.asarray(step, dtype=float), X.shape)
    if check_domain:
        _check_stencil(X, h.max(axis=-1))
    return central_jacobian(lambda Y: _eval(f, Y), X, h)


def real_hessian(f, X: np.ndarray, step=None, check_domain: bool = True) -> np.ndarray:
    """Real 4x4 Hessian by nested central differences with one Richardson level."""
    X = np.asarray(X, dtype=float)
    h = hessian_step(X) if step is None else np.broadcast_to(np.asarray(step, dtype=float), X.shape[:-1])
    h = np.asarray(h, dtype=float)
    if check_domain:
        _check_stencil(X, h)
    return (4 * _hessian_once(f, X, h / 2) - _hessian_once(f, X, h)) / 3


def _hessian_once(f, X, h):
    hh = h[..., None]
    eye = np.eye(4)
    f0 = _eval(f, X)
    H = np.empty(X.shape[:-1] + (4, 4), dtype=f0.dtype)
    h2 = h * h
    for i in range(4):
        ei = hh * eye[i]
        H[..., i, i] = (_eval(f, X + ei) - 2 * f0 + _eval(f, X - ei)) / h2
        for j in range(i + 1, 4):
            ej = hh * eye[j]
            v = (_eval(f, X + ei + ej) - _eval(f, X + ei - ej) - _eval(f, X - ei + ej) + _eval(f, X - ei - ej)) / (4 * h2)
            H[..., i, j] = v
            H[..., j, i] = v
    return H


# -- Wirtinger derivatives ----------------------------------------------------


def wirtinger_from_real(g: np.ndarray) -> np.ndarray:
    """Map a real-coordinate gradient (..., 4) to (f_z, f_w, f_zbar, f_wbar)."""
    fz = (g[..., 0] - 1j * g[..., 1]) / 2
    fw = (g[..., 2] - 1j * g[..., 3]) / 2
    fzb = (g[..., 0] + 1j * g[..., 1]) / 2
    fwb = (g[..., 2] + 1j * g[..., 3]) / 2
    return np.stack([fz, fw, fzb, fwb], axis=-1)


def wirtinger_gradient_batch(f, X: np.ndarray, step=None) -> np.ndarray:
    return wirtinger_from_real(real_gradient(f, X, step))


def wirtinger_gradient(f, p) -> tuple[complex, complex, complex, complex]:
    """(df/dz, df/dw, df/dzbar, df/dwbar) at the bidisk point p = (z, w)."""
    g = wirtinger_gradient_batch(f, to_real(p[0], p[1]))
    return tuple(complex(v) for v in g)


def levi_from_real_hessian(H: np.ndarray) -> np.ndarray:
    """Mixed Wirtinger second derivatives d^2 f / dzeta_j dzetabar_k from a real Hessian."""
    out = np.empty(H.shape[:-2] + (2, 2), dtype=complex)
    for j in range(2):
        for k in range(2):
            xj, yj, xk, yk = 2 * j, 2 * j + 1, 2 * k, 2 * k + 1
            out[..., j, k] = 0.25 * (H[..., xj, xk] + H[..., yj, yk] + 1j * (H[..., xj, yk] - H[..., yj, xk]))
    return hermitize(out)


def hermitize(h: np.ndarray) -> np.ndarray:
    return 0.5 * (h + np.conj(np.swapaxes(h, -1, -2)))


def complex_hessian_batch(f, X: np.ndarray, step=None) -> np.ndarray:
    """Levi matrices (..., 2, 2) of the real-valued field f at the points X."""
    H = real_hessian(f, X, step)
    if np.iscomplexobj(H):
        if np.max(np.abs(H.imag), initial=0.0) > 1e-8 * max(1.0, np.max(np.abs(H.real), initial=0.0)):
            raise ValueError("complex_hessian needs a real-valued field")
        H = H.real
    return levi_from_real_hessian(H)


# -- Hermitian (1,1)-forms ----------------------------------------------------


@dataclass(frozen=True)
class HermitianForm2:
    """Coefficients h[j, k] of i * sum h_jk dzeta_j ^ dzetabar_k, indices (z, w)."""

    h: np.ndarray

    def __post_init__(self):
        h = np.array(self.h, dtype=complex).reshape(2, 2)
        scale = max(1.0, float(np.max(np.abs(h))))
        if np.max(np.abs(h - h.conj().T)) > HERMITIAN_TOL * scale:
            raise ValueError("matrix is not Hermitian")
        h.setflags(write=False)
        object.__setattr__(self, "h", h)

    def __getitem__(self, idx):
        return self.h[idx]

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.h))

    def ma_det(self) -> float:
        return float(ma_det(self.h))

    def min_eigenvalue(self) -> float:
        return float(min_eigenvalue(self.h))

    def max_gap(self, other: "HermitianForm2") -> float:
        return float(np.max(np.abs(self.h - np.asarray(other.h if isinstance(other, HermitianForm2) else other))))


def complex_hessian(f, p) -> HermitianForm2:
    """i del delbar f at the bidisk point p = (z, w), as a HermitianForm2."""
    return HermitianForm2(complex_hessian_batch(f, to_real(p[0], p[1])))


def _mat(H):
    return H.h if isinstance(H, HermitianForm2) else np.asarray(H)


def ma_det(H):
    """Determinant of the Levi matrix; (i del delbar u)^2 vanishes iff this does."""
    h = _mat(H)
    return (h[..., 0, 0] * h[..., 1, 1]).real - np.abs(h[..., 0, 1]) ** 2


def min_eigenvalue(H):
    """Smaller eigenvalue of a 2x2 Hermitian matrix from its symmetric functions."""
    h = _mat(H)
    a, d = h[..., 0, 0].real, h[..., 1, 1].real
    return 0.5 * (a + d) - np.sqrt(0.25 * (a - d) ** 2 + np.abs(h[..., 0, 1]) ** 2)


# -- exterior algebra on coefficient dicts -------------------------------------


def _perm_sign(seq) -> int:
    sign = 1
    seq = list(seq)
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


def wedge_values(a: Coeffs, b: Coeffs) -> Coeffs:
    """Shuffle product of two evaluated forms."""
    out: Coeffs = {}
    for I, ca in a.items():
        for J, cb in b.items():
            if set(I) & set(J):
                continue
            K = I + J
            key = tuple(sorted(K))
            term = _perm_sign(K) * (ca * cb)
            out[key] = out[key] + term if key in out else term
    return out


def add_values(*forms: Coeffs) -> Coeffs:
    out: Coeffs = {}
    for form in forms:
        for k, v in form.items():
            out[k] = out[k] + v if k in out else v
    return out


def scale_values(c, a: Coeffs) -> Coeffs:
    return {k: c * v for k, v in a.items()}


def one_form_values(coeffs) -> Coeffs:
    """1-form from a (..., n) coefficient array."""
    coeffs = np.asarray(coeffs)
    return {(i,): coeffs[..., i] for i in range(coeffs.shape[-1])}


def wirtinger_one_forms(grad_w: np.ndarray) -> tuple[Coeffs, Coeffs]:
    """(del f, delbar f) as real-basis 1-forms from (f_z, f_w, f_zbar, f_wbar)."""
    fz, fw, fzb, fwb = (grad_w[..., k] for k in range(4))
    delf = {(0,): fz, (1,): 1j * fz, (2,): fw, (3,): 1j * fw}
    delbarf = {(0,): fzb, (1,): -1j * fzb, (2,): fwb, (3,): -1j * fwb}
    return delf, delbarf


def dc_values(grad_w: np.ndarray) -> Coeffs:
    """d^c f = (del f - delbar f) / 2i."""
    delf, delbarf = wirtinger_one_forms(grad_w)
    return {k: (delf[k] - delbarf[k]) / 2j for k in delf}


def d_values(grad_w: np.ndarray) -> Coeffs:
    delf, delbarf = wirtinger_one_forms(grad_w)
    return {k: delf[k] + delbarf[k] for k in delf}


_DZ = ({(0,): 1.0, (1,): 1j}, {(2,): 1.0, (3,): 1j})
_DZBAR = ({(0,): 1.0, (1,): -1j}, {(2,): 1.0, (3,): -1j})
_BASIS_11 = {(j, k): wedge_values(_DZ[j], _DZBAR[k]) for j in range(2) for k in range(2)}


def hermitian_to_values(h: np.ndarray) -> Coeffs:
    """Real-basis 2-form of i * sum h_jk dzeta_j ^ dzetabar_k, for h of shape (..., 2, 2)."""
    out: Coeffs = {}
    for (j, k), basis in _BASIS_11.items():
        coeff = 1j * h[..., j, k]
        for key, c in basis.items():
            out[key] = out[key] + c * coeff if key in out else c * coeff
    return out


# -- form fields --------------------------------------------------------------


class FormField:
    """A k-form on R^n whose coefficients are computed on demand at points X."""

    def __init__(self, degree: int, coefficients: Callable[[np.ndarray], Coeffs], dim: int = 4):
        if not 0 <= degree <= dim:
            raise ValueError("degree out of range")
        self.degree = degree
        self.dim = dim
        self._coefficients = coefficients

    def __call__(self, X) -> Coeffs:
        X = np.asarray(X, dtype=float)
        vals = self._coefficients(X)
        out = {}
        for key, v in vals.items():
            key = tuple(key)
            if len(key) != self.degree or list(key) != sorted(set(key)):
                raise ValueError(f"bad multi-index {key} for a {self.degree}-form")
            out[key] = np.broadcast_to(np.asarray(v, dtype=complex), X.shape[:-1])
        return out

    def component(self, X, key) -> np.ndarray:
        vals = self(X)
        X = np.asarray(X)
        return vals.get(tuple(key), np.zeros(X.shape[:-1], dtype=complex))

    def __add__(self, other: "FormField") -> "FormField":
        if other.degree != self.degree or other.dim != self.dim:
            raise ValueError("degree mismatch")
        return FormField(self.degree, lambda X: add_values(self(X), other(X)), self.dim)

    def __rmul__(self, c) -> "FormField":
        return FormField(self.degree, lambda X: scale_values(c, self(X)), self.dim)

    def times(self, f) -> "FormField":
        """Multiply by the scalar field f(z, w)."""
        return FormField(self.degree, lambda X: scale_values(_eval(f, X), self(X)), self.dim)


def constant_form(degree: int, coeffs: dict, dim: int = 4) -> FormField:
    return FormField(degree, lambda X: {k: np.full(X.shape[:-1], v, dtype=complex) for k, v in coeffs.items()}, dim)


def scalar_field(f) -> FormField:
    return FormField(0, lambda X: {(): _eval(f, X)})


def wedge(a: FormField, b: FormField) -> FormField:
    if a.dim != b.dim:
        raise ValueError("dimension mismatch")
    if a.degree + b.degree > a.dim:
        raise ValueError("wedge degree exceeds dimension")
    return FormField(a.degree + b.degree, lambda X: wedge_values(a(X), b(X)), a.dim)


def exterior_derivative(omega: FormField, step=None) -> FormField:
    """d omega by central differences of the coefficients (Richardson, see step policy)."""
    if omega.degree >= omega.dim:
        raise ValueError("d of a top form")
    n = omega.dim
    keys = list(itertools.combinations(range(n), omega.degree))

    def coeffs(X):
        def F(Y):
            vals = omega(Y)
            zero = np.zeros(Y.shape[:-1], dtype=complex)
            return np.stack([vals.get(k, zero) for k in keys], axis=-1)

        J = central_jacobian(F, X, step)  # (..., len(keys), n)
        out: Coeffs = {}
        for ki, key in enumerate(keys):
            for i in range(n):
                if i in key:
                    continue
                full = (i,) + key
                target = tuple(sorted(full))
                term = _perm_sign(full) * J[..., ki, i]
                out[target] = out[target] + term if target in out else term
        return out

    return FormField(omega.degree + 1, coeffs, n)


d = exterior_derivative


def df(f, step=None) -> FormField:
    return FormField(1, lambda X: d_values(wirtinger_gradient_batch(f, X, step)))


def dc(f, step=None) -> FormField:
    """d^c f = (del f - delbar f)/2i as a 1-form."""
    return FormField(1, lambda X: dc_values(wirtinger_gradient_batch(f, X, step)))


def del_form(f) -> FormField:
    return FormField(1, lambda X: wirtinger_one_forms(wirtinger_gradient_batch(f, X))[0])


def delbar_form(f) -> FormField:
    return FormField(1, lambda X: wirtinger_one_forms(wirtinger_gradient_batch(f, X))[1])


def i_ddbar(f, step=None) -> FormField:
    """i del delbar f as a real-basis 2-form, from the finite-difference Levi matrix."""
    return FormField(2, lambda X: hermitian_to_values(complex_hessian_batch(f, X, step)))


def pullback(omega: FormField, phi: Callable[[np.ndarray], np.ndarray], source_dim: int, step=None) -> FormField:
    """phi^* omega for phi: R^m -> R^n given on arrays (..., m) -> (..., n).

    The Jacobian of phi comes from central differences; the coefficient of
    dq_K is sum_I omega_I(phi(q)) det(dphi_I / dq_K).
    """
    k = omega.degree
    if k > source_dim:
        raise ValueError("degree exceeds source dimension")
    src_keys = list(itertools.combinations(range(source_dim), k))

    def coeffs(Q):
        Q = np.asarray(Q, dtype=float)
        jac = central_jacobian(lambda Y: np.asarray(phi(Y), dtype=float), Q, step)  # (..., n, m)
        vals = omega(np.asarray(phi(Q), dtype=float))
        out: Coeffs = {}
        for K in src_keys:
            total = 0
            for I, c in vals.items():
                if k == 0:
                    minor = 1.0
                else:
                    sub = jac[..., list(I), :][..., :, list(K)]
                    minor = np.linalg.det(sub)
                total = total + c * minor
            out[K] = total if not np.isscalar(total) else np.full(Q.shape[:-1], total, dtype=complex)
        return out

    return FormField(k, coeffs, source_dim)


# -- box quadrature and Stokes ------------------------------------------------


@dataclass(frozen=True)
class Box4:
    """Axis-aligned box in (Re z, Im z, Re w, Im w) with closure inside the bidisk."""

    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        if len(lo) != 4 or len(hi) != 4 or any(a >= b for a, b in zip(lo, hi)):
            raise ValueError("need lo < hi on all four axes")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        for axes in ((0, 1), (2, 3)):
            corners = [complex(x, y) for x in (lo[axes[0]], hi[axes[0]]) for y in (lo[axes[1]], hi[axes[1]])]
            if max(abs(c) for c in corners) >= 1:
                raise ValueError("box closure must lie in the bidisk")

    @classmethod
    def around(cls, z: complex, w: complex, half: float) -> "Box4":
        c = np.array([z.real, z.imag, w.real, w.imag])
        return cls(tuple(c - half), tuple(c + half))

    @property
    def widths(self) -> np.ndarray:
        return np.array(self.hi) - np.array(self.lo)

    @property
    def volume(self) -> float:
        return float(np.prod(self.widths))

    def shrink(self, factor: float) -> "Box4":
        c = 0.5 * (np.array(self.lo) + np.array(self.hi))
        half = 0.5 * self.widths * factor
        return Box4(tuple(c - half), tuple(c + half))

    def corners(self) -> np.ndarray:
        return np.array(list(itertools.product(*zip(self.lo, self.hi))))


def midpoint_grid(lo, hi, grid: int) -> np.ndarray:
    """Cell centres of a tensor grid, shape (grid**m, m)."""
    axes = [lo_i + (np.arange(grid) + 0.5) * (hi_i - lo_i) / grid for lo_i, hi_i in zip(lo, hi)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def _quadrature(fn, points, cell_volume, chunk=4096):
    parts_re, parts_im, parts_abs = [], [], []
    for start in range(0, len(points), chunk):
        vals = np.asarray(fn(points[start:start + chunk]), dtype=complex)
        parts_re.append(math.fsum(vals.real))
        parts_im.append(math.fsum(vals.imag))
        parts_abs.append(math.fsum(np.abs(vals)))
    return (complex(math.fsum(parts_re), math.fsum(parts_im)) * cell_volume, math.fsum(parts_abs) * cell_volume)


def integrate_top_form(form: FormField, box: Box4, grid: int) -> complex:
    """Midpoint-rule integral of a 4-form over the box (positive orientation)."""
    return integrate_top_form_with_mass(form, box, grid)[0]


def integrate_top_form_with_mass(form: FormField, box: Box4, grid: int) -> tuple[complex, float]:
    if form.degree != 4:
        raise ValueError("need a 4-form")
    pts = midpoint_grid(box.lo, box.hi, grid)
    cell = box.volume / grid**4
    return _quadrature(lambda P: form.component(P, (0, 1, 2, 3)), pts, cell)


def boundary_integral(omega: FormField, box: Box4, grid: int) -> tuple[complex, float]:
    """Integral of a 3-form over the boundary of the box, outward orientation.

    Uses omega = sum_i omega_(i-hat) dx_(i-hat) and dx_i ^ dx_(i-hat) = (-1)^i vol,
    so the face x_i = hi contributes (-1)^i * int omega_(i-hat) and x_i = lo
    the opposite sign.  Also returns the total absolute mass, used as a scale.
    """
    if omega.degree != 3:
        raise ValueError("need a 3-form")
    lo, hi = np.array(box.lo), np.array(box.hi)
    total, mass = [], []
    for i in range(4):
        others = [j for j in range(4) if j != i]
        key = tuple(others)
        face = midpoint_grid(lo[others], hi[others], grid)
        cell = float(np.prod(hi[others] - lo[others])) / grid**3
        for value, sign in ((hi[i], 1.0), (lo[i], -1.0)):
            pts = np.insert(face, i, value, axis=1)
            val, m = _quadrature(lambda P: omega.component(P, key), pts, cell)
            total.append(sign * (-1) ** i * val)
            mass.append(m)
    return complex(math.fsum(t.real for t in total), math.fsum(t.imag for t in total)), math.fsum(mass)


@dataclass(frozen=True)
class StokesResult:
    lhs: complex
    rhs: complex
    gap: float
    scale: float


def relative_gap(a: complex, b: complex, scale: float = 0.0) -> float:
    denom = max(abs(a), abs(b), scale, 1e-300)
    return abs(a - b) / denom


def stokes_check(omega: FormField, box: Box4, grid: int, step=None, mass_floor: float = 1e-3) -> StokesResult:
    """Compare the box integral of d omega with the boundary integral of omega.

    The gap is |lhs - rhs| / max(|lhs|, |rhs|, mass_floor * boundary mass), so that
    forms with vanishing integrals are judged against their own size.
    """
    if grid < 4:
        raise ValueError("grid must have at least 4 cells per axis")
    lhs, _ = integrate_top_form_with_mass(exterior_derivative(omega, step), box, grid)
    rhs, mass = boundary_integral(omega, box, grid)
    scale = mass_floor * mass
    return StokesResult(lhs, rhs, relative_gap(lhs, rhs, scale), scale)
