"""Lie/exterior calculus, the Courant bracket and Nijenhuis tensors.

Two layers live here.  The symbolic layer manipulates components stored as
expressions (``lie_bracket``, ``exterior_derivative``, ``courant_bracket``
...).  The pointwise layer works on 1-jets (values plus first partials)
evaluated at a batch of points; every Nijenhuis computation goes through it
since N only needs first derivatives of its inputs.

Conventions: generalized vectors on a d-chart have 2d components ordered
(vector part, covector part).  A k-form is stored as a fully antisymmetric
component array with ``w[i, j, ...] = w(d_i, d_j, ...)``, and the exterior
derivative is the unnormalized one, ``dw(X, Y, Z) = X w(Y, Z) - ...``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import linalg
from .chart import Chart
from .expr import FieldExpr, diff, evaluate_many
from .jet import Jet

__all__ = [
    "StructureError", "Section", "StructureField", "Form",
    "neutral_gram", "evaluate_array",
    "lie_bracket", "exterior_derivative", "interior_product", "lie_derivative_form",
    "courant_bracket", "courant_pointwise", "lie_bracket_pointwise",
    "nijenhuis_from_jets", "nijenhuis_tensor", "nijenhuis_field",
    "almost_complex_nijenhuis", "tensoriality_check", "check_structure",
    "complex_structure_field", "symplectic_structure_field", "b_transform_field",
]


class StructureError(ValueError):
    """A matrix field fails J^2 = -Id or neutral skewness beyond tolerance."""


def neutral_gram(d: int) -> np.ndarray:
    """Gram matrix of <X+xi, Y+eta> = (xi(Y) + eta(X))/2 in the frame (d_i, dx^i)."""
    g = np.zeros((2 * d, 2 * d))
    g[:d, d:] = 0.5 * np.eye(d)
    g[d:, :d] = 0.5 * np.eye(d)
    return g


def evaluate_array(chart: Chart, arr, points):
    """Values and first partials of an array of expressions at points.

    Returns ``(val, grad)`` with shapes ``(N,) + arr.shape`` and
    ``(N,) + arr.shape + (dim,)``.
    """
    pts = chart.check(points)
    arr = np.asarray(arr, dtype=object)
    env = dict(zip(chart.names, Jet.seed(pts)))
    flat = evaluate_many(arr.ravel().tolist(), env)
    n, d = pts.shape
    val = np.empty((n, arr.size))
    grad = np.zeros((n, arr.size, d))
    for k, x in enumerate(flat):
        if isinstance(x, Jet):
            val[:, k] = x.val
            grad[:, k] = x.grad
        else:
            val[:, k] = x
    return val.reshape((n,) + arr.shape), grad.reshape((n,) + arr.shape + (d,))


@dataclass(frozen=True)
class Section:
    """Section X + xi of T ⊕ T* over a chart, components as expressions."""

    chart: Chart
    vector: tuple
    covector: tuple

    def __post_init__(self):
        d = self.chart.dim
        if len(self.vector) != d or len(self.covector) != d:
            raise ValueError(f"a section on a {d}-chart needs {d}+{d} components")
        object.__setattr__(self, "vector", tuple(self.vector))
        object.__setattr__(self, "covector", tuple(self.covector))

    @classmethod
    def frame(cls, chart: Chart, index: int) -> "Section":
        """Coordinate frame section: d_i for index < dim, else dx^(index-dim)."""
        comps = [0.0] * (2 * chart.dim)
        comps[index] = 1.0
        return cls.from_components(chart, comps)

    @classmethod
    def from_components(cls, chart: Chart, comps) -> "Section":
        d = chart.dim
        comps = list(comps)
        return cls(chart, tuple(comps[:d]), tuple(comps[d:]))

    @property
    def components(self) -> tuple:
        return self.vector + self.covector

    def scaled(self, f) -> "Section":
        return Section.from_components(self.chart, [f * c for c in self.components])

    def __add__(self, other: "Section") -> "Section":
        self.chart.same_as(other.chart)
        return Section.from_components(
            self.chart, [a + b for a, b in zip(self.components, other.components)])

    def jets(self, points):
        return evaluate_array(self.chart, np.array(self.components, dtype=object), points)


@dataclass(frozen=True)
class StructureField:
    """Endomorphism field of T ⊕ T* given as a (2d, 2d) matrix of expressions."""

    chart: Chart
    matrix: np.ndarray

    def __post_init__(self):
        m = linalg.obj(self.matrix)
        n = 2 * self.chart.dim
        if m.shape != (n, n):
            raise ValueError(f"expected a {n}x{n} matrix, got {m.shape}")
        object.__setattr__(self, "matrix", m)

    def jets(self, points):
        return evaluate_array(self.chart, self.matrix, points)

    def apply(self, section: Section) -> Section:
        self.chart.same_as(section.chart)
        return Section.from_components(
            self.chart, linalg.matmul(self.matrix, np.array(section.components, dtype=object)))


@dataclass(frozen=True)
class Form:
    """Differential k-form (k <= 3) with full antisymmetric component storage."""

    chart: Chart
    degree: int
    comps: object

    def __post_init__(self):
        if not 0 <= self.degree <= 3:
            raise ValueError("only forms of degree 0..3 are supported")
        if self.degree > 0:
            c = linalg.obj(self.comps)
            if c.shape != (self.chart.dim,) * self.degree:
                raise ValueError(f"component array shape {c.shape} does not match degree/chart")
            object.__setattr__(self, "comps", c)

    @classmethod
    def one_form(cls, chart: Chart, comps) -> "Form":
        return cls(chart, 1, np.array(list(comps), dtype=object))

    @classmethod
    def two_form(cls, chart: Chart, pairs: dict) -> "Form":
        """Build from ``{(i, j): coeff}`` meaning coeff * dx^i ∧ dx^j."""
        c = linalg.zeros((chart.dim, chart.dim))
        for (i, j), v in pairs.items():
            c[i, j] = c[i, j] + v
            c[j, i] = c[j, i] - v
        return cls(chart, 2, c)

    def jets(self, points):
        if self.degree == 0:
            return evaluate_array(self.chart, np.array([self.comps], dtype=object), points)
        return evaluate_array(self.chart, self.comps, points)


# ------------------------------------------------------------ symbolic

def _grad(f, names):
    return [diff(f, n) if isinstance(f, FieldExpr) else 0.0 for n in names]


def lie_bracket(chart: Chart, x, y) -> tuple:
    """Components of [X, Y] = X(Y) - Y(X) for vector fields given as component lists."""
    names = chart.names
    dx = [_grad(c, names) for c in x]
    dy = [_grad(c, names) for c in y]
    d = chart.dim
    out = []
    for k in range(d):
        acc = 0.0
        for i in range(d):
            acc = acc + x[i] * dy[k][i] - y[i] * dx[k][i]
        out.append(acc)
    return tuple(out)


def exterior_derivative(form: Form) -> Form:
    """Exterior derivative of a k-form, k <= 2."""
    chart = form.chart
    names, d, k = chart.names, chart.dim, form.degree
    if k >= 3:
        raise ValueError("d of a 3-form is not supported")
    if k == 0:
        return Form.one_form(chart, _grad(form.comps, names))
    out = linalg.zeros((d,) * (k + 1))
    for idx in itertools.product(range(d), repeat=k + 1):
        if len(set(idx)) < k + 1:
            continue
        acc = 0.0
        for a in range(k + 1):
            rest = idx[:a] + idx[a + 1:]
            term = diff(form.comps[rest], names[idx[a]]) if isinstance(form.comps[rest], FieldExpr) else 0.0
            acc = acc + term if a % 2 == 0 else acc - term
        out[idx] = acc
    return Form(chart, k + 1, out)


def interior_product(chart: Chart, x, form: Form) -> Form:
    """i_X of a k-form, k >= 1, contracting the first slot."""
    k = form.degree
    if k == 0:
        raise ValueError("interior product of a function is zero; not representable as a form")
    d = chart.dim
    if k == 1:
        acc = 0.0
        for i in range(d):
            acc = acc + x[i] * form.comps[i]
        return Form(chart, 0, acc)
    out = linalg.zeros((d,) * (k - 1))
    for rest in itertools.product(range(d), repeat=k - 1):
        acc = 0.0
        for i in range(d):
            acc = acc + x[i] * form.comps[(i,) + rest]
        out[rest] = acc
    return Form(chart, k - 1, out)


def lie_derivative_form(chart: Chart, x, form: Form) -> Form:
    """Lie derivative of a 0- or 1-form along X by the coordinate formula."""
    names, d = chart.names, chart.dim
    if form.degree == 0:
        g = _grad(form.comps, names)
        acc = 0.0
        for i in range(d):
            acc = acc + x[i] * g[i]
        return Form(chart, 0, acc)
    if form.degree != 1:
        raise ValueError("lie_derivative_form supports degree 0 and 1")
    dw = [_grad(c, names) for c in form.comps]
    dx = [_grad(c, names) for c in x]
    out = []
    for j in range(d):
        acc = 0.0
        for i in range(d):
            acc = acc + x[i] * dw[j][i] + form.comps[i] * dx[i][j]
        out.append(acc)
    return Form.one_form(chart, out)


def courant_bracket(a: Section, b: Section) -> Section:
    """[X+xi, Y+eta] = [X,Y] + L_X eta - L_Y xi - d(i_X eta - i_Y xi)/2."""
    a.chart.same_as(b.chart)
    chart = a.chart
    vec = lie_bracket(chart, a.vector, b.vector)
    eta, xi = Form.one_form(chart, b.covector), Form.one_form(chart, a.covector)
    lx_eta = lie_derivative_form(chart, a.vector, eta).comps
    ly_xi = lie_derivative_form(chart, b.vector, xi).comps
    pairing = interior_product(chart, a.vector, eta).comps - interior_product(chart, b.vector, xi).comps
    dpair = exterior_derivative(Form(chart, 0, pairing)).comps
    cov = [lx_eta[j] - ly_xi[j] - 0.5 * dpair[j] for j in range(chart.dim)]
    return Section(chart, vec, tuple(cov))


# ------------------------------------------------------------ pointwise

def lie_bracket_pointwise(x_val, x_grad, y_val, y_grad):
    """[X, Y] from 1-jets; vals (..., d), grads (..., d, d) with grad[..., k, i] = d_i X^k."""
    return (np.einsum("...i,...ki->...k", x_val, y_grad)
            - np.einsum("...i,...ki->...k", y_val, x_grad))


def courant_pointwise(a_val, a_grad, b_val, b_grad):
    """Courant bracket at points from 1-jets of two sections.

    ``*_val`` has shape (..., 2d) and ``*_grad`` shape (..., 2d, d).
    """
    d = a_grad.shape[-1]
    x, xi, dx, dxi = a_val[..., :d], a_val[..., d:], a_grad[..., :d, :], a_grad[..., d:, :]
    y, eta, dy, deta = b_val[..., :d], b_val[..., d:], b_grad[..., :d, :], b_grad[..., d:, :]
    vec = lie_bracket_pointwise(x, dx, y, dy)
    lx_eta = np.einsum("...i,...ji->...j", x, deta) + np.einsum("...i,...ij->...j", eta, dx)
    ly_xi = np.einsum("...i,...ji->...j", y, dxi) + np.einsum("...i,...ij->...j", xi, dy)
    d_ix_eta = np.einsum("...ij,...i->...j", dx, eta) + np.einsum("...i,...ij->...j", x, deta)
    d_iy_xi = np.einsum("...ij,...i->...j", dy, xi) + np.einsum("...i,...ij->...j", y, dxi)
    cov = lx_eta - ly_xi - 0.5 * (d_ix_eta - d_iy_xi)
    return np.concatenate([vec, cov], axis=-1)


def _apply_jet(j_val, j_grad, s_val, s_grad):
    """1-jet of J·s from 1-jets of J (..., m, m) and s (..., m)."""
    val = np.einsum("...ab,...b->...a", j_val, s_val)
    grad = (np.einsum("...abk,...b->...ak", j_grad, s_val)
            + np.einsum("...ab,...bk->...ak", j_val, s_grad))
    return val, grad


def nijenhuis_from_jets(j_val, j_grad, a_val, a_grad, b_val, b_grad, bracket=courant_pointwise):
    """N(A,B) = -[A,B] - J[A,JB] - J[JA,B] + [JA,JB] from 1-jets (broadcasting)."""
    ja = _apply_jet(j_val, j_grad, a_val, a_grad)
    jb = _apply_jet(j_val, j_grad, b_val, b_grad)
    inner = bracket(a_val, a_grad, *jb) + bracket(*ja, b_val, b_grad)
    return (-bracket(a_val, a_grad, b_val, b_grad)
            - np.einsum("...ab,...b->...a", j_val, inner)
            + bracket(*ja, *jb))


def _frame_tensor(j_val, j_grad, bracket):
    n, m = j_val.shape[0], j_val.shape[-1]
    d = j_grad.shape[-1]
    e_val = np.broadcast_to(np.eye(m), (n, m, m))
    e_grad = np.zeros((n, m, m, d))
    a_val, a_grad = e_val[:, :, None, :], e_grad[:, :, None, :, :]
    b_val, b_grad = e_val[:, None, :, :], e_grad[:, None, :, :, :]
    jv, jg = j_val[:, None, None], j_grad[:, None, None]
    return nijenhuis_from_jets(jv, jg, a_val, a_grad, b_val, b_grad, bracket=bracket)


def check_structure(j_val, tol: float = 1e-9) -> float:
    """Max residual of J^2 + Id and of neutral skewness; raises above ``tol``."""
    m = j_val.shape[-1]
    g = neutral_gram(m // 2)
    sq = np.einsum("...ab,...bc->...ac", j_val, j_val) + np.eye(m)
    skew = np.einsum("...ba,bc->...ac", j_val, g) + np.einsum("ab,...bc->...ac", g, j_val)
    res = max(float(np.max(np.abs(sq), initial=0.0)), float(np.max(np.abs(skew), initial=0.0)))
    if res > tol:
        raise StructureError(f"not a generalized almost complex structure (residual {res:.3e})")
    return res


def nijenhuis_tensor(field: StructureField, points, tol: float = 1e-9) -> np.ndarray:
    """N on all coordinate frame pairs: array (N, 2d, 2d, 2d) with [n, i, j] = N(E_i, E_j)."""
    j_val, j_grad = field.jets(points)
    check_structure(j_val, tol)
    return _frame_tensor(j_val, j_grad, courant_pointwise)


def almost_complex_nijenhuis(chart: Chart, matrix, points) -> np.ndarray:
    """Classical Nijenhuis tensor of an almost complex structure on the tangent bundle.

    Returns (N, d, d, d) with [n, i, j] = N(d_i, d_j).
    """
    j_val, j_grad = evaluate_array(chart, matrix, points)
    return _frame_tensor(j_val, j_grad, lie_bracket_pointwise)


def nijenhuis_field(field: StructureField, a: Section, b: Section, points, tol: float = 1e-9):
    """N(A, B) at the given points; shape (N, 2d)."""
    field.chart.same_as(a.chart)
    field.chart.same_as(b.chart)
    j_val, j_grad = field.jets(points)
    check_structure(j_val, tol)
    return nijenhuis_from_jets(j_val, j_grad, *a.jets(points), *b.jets(points))


def tensoriality_check(field: StructureField, point, f=None, tol: float = 1e-9) -> float:
    """Max over frame pairs (A, B) of |N(fA, B) - N(A, B)| at ``point``.

    ``f`` defaults to 1 + sum_i (x_i - p_i), which equals 1 at the point
    but has nonzero derivatives there.
    """
    chart = field.chart
    p = chart.check(point)[0]
    if f is None:
        f = 1.0
        for v, c in zip(chart.coords(), p):
            f = f + (v - float(c))
    worst = 0.0
    m = 2 * chart.dim
    frames = [Section.frame(chart, i) for i in range(m)]
    for a in frames:
        fa = a.scaled(f)
        for b in frames:
            diff_ = nijenhuis_field(field, fa, b, p, tol) - nijenhuis_field(field, a, b, p, tol)
            worst = max(worst, float(np.max(np.abs(diff_))))
    return worst


# ------------------------------------------------- structure constructors

def complex_structure_field(chart: Chart, k) -> StructureField:
    """Generalized structure K ⊕ (-K^*) induced by an almost complex structure K."""
    k = linalg.obj(k)
    return StructureField(chart, linalg.block([[k, linalg.zeros(k.shape)],
                                               [linalg.zeros(k.shape), linalg.neg(k.T)]]))


def symplectic_structure_field(chart: Chart, omega: Form) -> StructureField:
    """Generalized structure from a nondegenerate 2-form: w on T, -w^{-1} on T*.

    The map X -> i_X w has matrix w^T in the coordinate frame.
    """
    if omega.degree != 2:
        raise ValueError("a 2-form is required")
    w = linalg.transpose(omega.comps)
    winv = linalg.inv(w)
    d = chart.dim
    return StructureField(chart, linalg.block([[linalg.zeros((d, d)), linalg.neg(winv)],
                                               [w, linalg.zeros((d, d))]]))


def b_transform_field(field: StructureField, b: Form) -> StructureField:
    """e^B J e^{-B} with e^B(X + xi) = X + xi + i_X B."""
    if b.degree != 2:
        raise ValueError("B must be a 2-form")
    d = field.chart.dim
    bt = linalg.transpose(b.comps)
    eb = linalg.block([[linalg.eye(d), linalg.zeros((d, d))], [bt, linalg.eye(d)]])
    ebinv = linalg.block([[linalg.eye(d), linalg.zeros((d, d))], [linalg.neg(bt), linalg.eye(d)]])
    return StructureField(field.chart, linalg.matmul(linalg.matmul(eb, field.matrix), ebinv))
