"""Generalized complex linear algebra on a 2-dimensional vector space V.

Everything is expressed in the frame (e1, e2, eta1, eta2) of V ⊕ V*: a
generalized vector is a length-4 array ``(x1, x2, xi1, xi2)`` and an
endomorphism is a 4x4 array acting on such columns.

The two families of generalized complex structures are parametrized by
points of the hyperboloid x1^2 - x2^2 - x3^2 = 1:

    I = x1*I1 + x2*I2 + x3*I3   (induces the canonical orientation, G+)
    J = y1*J1 + y2*J2 + y3*J3   (induces the opposite orientation, G-)

where I_r, J_s are built from the skew endomorphisms S_ij of the
orthonormal basis Q = (e1+eta1, e2+eta2, e1-eta1, e2-eta2).

Several helpers below (``plus_matrix``, ``sheet_tangent_basis``,
``kahler_data``, ``gks_blocks``) accept symbolic field expressions as well
as floats; the twistor construction reuses them to materialize its fields.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import linalg
from .fields.expr import FieldExpr, sqrt

__all__ = [
    "NEUTRAL", "Q_BASIS", "Q_SIGNS", "PLUS_BASIS", "MINUS_BASIS",
    "HyperboloidError", "OrientationError", "Hyper3",
    "neutral_pairing", "is_skew", "is_structure",
    "plus_matrix", "minus_matrix", "structure_plus", "structure_minus",
    "plus_coordinates", "minus_coordinates",
    "from_complex", "from_symplectic", "b_transform", "beta_transform",
    "orientation_class", "sheet_tangent_basis", "FiberGeometry", "fiber_geometry",
    "kahler_data", "positivity", "positivity_gram", "gks_blocks", "FiberPair",
    "gks_fiber_pair",
]

NEUTRAL = 0.5 * np.array([[0.0, 0.0, 1.0, 0.0],
                          [0.0, 0.0, 0.0, 1.0],
                          [1.0, 0.0, 0.0, 0.0],
                          [0.0, 1.0, 0.0, 0.0]])

# columns are Q1..Q4 in the (e, eta) frame
Q_BASIS = np.array([[1.0, 0.0, 1.0, 0.0],
                    [0.0, 1.0, 0.0, 1.0],
                    [1.0, 0.0, -1.0, 0.0],
                    [0.0, 1.0, 0.0, -1.0]]).T
Q_SIGNS = np.array([1.0, 1.0, -1.0, -1.0])


def _s(i: int, j: int) -> np.ndarray:
    """S_ij Q_k = eps_k (delta_ik Q_j - delta_kj Q_i), in the (e, eta) frame."""
    m = np.zeros((4, 4))
    for k in range(4):
        if k == i:
            m[j, k] += Q_SIGNS[k]
        if k == j:
            m[i, k] -= Q_SIGNS[k]
    return Q_BASIS @ m @ np.linalg.inv(Q_BASIS)


PLUS_BASIS = (_s(0, 1) - _s(2, 3), _s(0, 2) - _s(1, 3), _s(0, 3) + _s(1, 2))
MINUS_BASIS = (_s(0, 1) + _s(2, 3), _s(0, 2) + _s(1, 3), _s(0, 3) - _s(1, 2))
# tr(B_r B_r); each family is trace-orthogonal
_NORMS = np.array([np.trace(b @ b) for b in PLUS_BASIS])


class HyperboloidError(ValueError):
    pass


class OrientationError(ValueError):
    pass


@dataclass(frozen=True)
class Hyper3:
    """Point (x1, x2, x3) of the two-sheeted hyperboloid x1^2 - x2^2 - x3^2 = 1."""

    x1: float
    x2: float
    x3: float

    @classmethod
    def from_chart(cls, c2: float, c3: float, sheet: int = 1) -> "Hyper3":
        if sheet not in (1, -1):
            raise ValueError("sheet must be +1 or -1")
        return cls(sheet * float(np.sqrt(1.0 + c2 * c2 + c3 * c3)), float(c2), float(c3))

    @property
    def sheet(self) -> int:
        return 1 if self.x1 > 0 else -1

    @property
    def residual(self) -> float:
        return abs(self.x1 ** 2 - self.x2 ** 2 - self.x3 ** 2 - 1.0)

    def as_array(self) -> np.ndarray:
        return np.array([self.x1, self.x2, self.x3])


def _hyper(x, tol: float = 1e-9) -> np.ndarray:
    arr = x.as_array() if isinstance(x, Hyper3) else np.asarray(x, dtype=float)
    if arr.shape != (3,):
        raise HyperboloidError("hyperboloid point needs three coordinates")
    res = abs(arr[0] ** 2 - arr[1] ** 2 - arr[2] ** 2 - 1.0)
    if res > tol:
        raise HyperboloidError(f"{arr.tolist()} is off the hyperboloid (residual {res:.3e})")
    return arr


def neutral_pairing(a, b) -> float:
    """<X+xi, Y+eta> = (xi(Y) + eta(X)) / 2."""
    return float(np.asarray(a, dtype=float) @ NEUTRAL @ np.asarray(b, dtype=float))


def is_skew(m, tol: float = 1e-12) -> bool:
    m = np.asarray(m, dtype=float)
    return bool(np.max(np.abs(m.T @ NEUTRAL + NEUTRAL @ m)) <= tol)


def is_structure(m, tol: float = 1e-12) -> bool:
    m = np.asarray(m, dtype=float)
    return is_skew(m, tol) and bool(np.max(np.abs(m @ m + np.eye(4))) <= tol)


def _require_structure(m, tol: float = 1e-9) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.shape != (4, 4) or not is_structure(m, tol):
        raise ValueError("not a generalized complex structure on V ⊕ V*")
    return m


def _combine(coeffs, basis):
    if all(not isinstance(c, FieldExpr) for c in coeffs):
        return sum(float(c) * b for c, b in zip(coeffs, basis))
    out = linalg.zeros((4, 4))
    for c, b in zip(coeffs, basis):
        for i in range(4):
            for j in range(4):
                if b[i, j] != 0.0:
                    out[i, j] = out[i, j] + c * float(b[i, j])
    return out


def plus_matrix(x1, x2, x3):
    """sum_r x_r I_r without the hyperboloid check (accepts expressions)."""
    return _combine((x1, x2, x3), PLUS_BASIS)


def minus_matrix(y1, y2, y3):
    return _combine((y1, y2, y3), MINUS_BASIS)


def structure_plus(x) -> np.ndarray:
    """The structure in G+(V) with hyperboloid coordinates ``x``."""
    return plus_matrix(*_hyper(x))


def structure_minus(y) -> np.ndarray:
    """The structure in G-(V) with hyperboloid coordinates ``y``."""
    return minus_matrix(*_hyper(y))


def _coordinates(m, basis):
    return np.array([np.trace(np.asarray(m, dtype=float) @ b) for b in basis]) / _NORMS


def plus_coordinates(m) -> np.ndarray:
    """Coefficients of ``m`` along I1, I2, I3 (trace projection)."""
    return _coordinates(m, PLUS_BASIS)


def minus_coordinates(m) -> np.ndarray:
    return _coordinates(m, MINUS_BASIS)


def from_complex(k) -> np.ndarray:
    """K on V and -K^* on V*; requires K^2 = -Id."""
    k = np.asarray(k, dtype=float)
    if k.shape != (2, 2) or np.max(np.abs(k @ k + np.eye(2))) > 1e-9:
        raise ValueError("invalid complex structure: K^2 != -Id")
    out = np.zeros((4, 4))
    out[:2, :2] = k
    out[2:, 2:] = -k.T
    return out


def from_symplectic(w: float) -> np.ndarray:
    """Structure of the 2-form w * eta1∧eta2: omega on V, -omega^{-1} on V*."""
    if w == 0:
        raise ValueError("degenerate 2-form")
    om = np.array([[0.0, -w], [w, 0.0]])  # X -> i_X omega
    out = np.zeros((4, 4))
    out[2:, :2] = om
    out[:2, 2:] = -np.linalg.inv(om)
    return out


def b_transform(j, b: float) -> np.ndarray:
    """e^B J e^{-B} for B = b * eta1∧eta2, where e^B(X+xi) = X + xi + i_X B."""
    j = _require_structure(j)
    eb = np.eye(4)
    eb[2:, :2] = [[0.0, -b], [b, 0.0]]
    return eb @ j @ np.linalg.inv(eb)


def beta_transform(j, beta: float) -> np.ndarray:
    """e^beta J e^{-beta} for beta = beta * e1∧e2, where e^beta(X+xi) = X + i_xi beta + xi."""
    j = _require_structure(j)
    eb = np.eye(4)
    eb[:2, 2:] = [[0.0, -beta], [beta, 0.0]]
    return eb @ j @ np.linalg.inv(eb)


def orientation_class(j) -> int:
    """+1 if ``j`` induces the canonical orientation of V ⊕ V* (j in G+), else -1.

    Builds an orthonormal basis {a, ja, b, jb} and compares the sign of its
    determinant with that of the frame (e1, e2, eta1, eta2).
    """
    j = _require_structure(j)
    cols = [Q_BASIS[:, k] for k in range(4)]
    a = next(q for q in cols if neutral_pairing(q, q) > 0)
    a = a / np.sqrt(neutral_pairing(a, a))
    ja = j @ a

    def residual(q):
        return q - neutral_pairing(q, a) * a - neutral_pairing(q, ja) * ja

    b = max((residual(q) for q in cols), key=lambda r: abs(neutral_pairing(r, r)))
    b = b / np.sqrt(abs(neutral_pairing(b, b)))
    d = np.linalg.det(np.column_stack([a, ja, b, j @ b]))
    return 1 if d > 0 else -1


def sheet_tangent_basis(x1, x2, x3, basis):
    """d/dc2 and d/dc3 of sum_r x_r B_r along the sheet chart x2 = c2, x3 = c3."""
    return (_combine((x2 / x1, 1.0, 0.0), basis), _combine((x3 / x1, 0.0, 1.0), basis))


def kahler_data(j, tangent):
    """Gram matrix h and matrix of K: U -> j∘U in a tangent basis of the orbit at ``j``.

    h(a, b) = tr(a b) / 2, and K U_c = sum_r kappa[r, c] U_r.  Works on
    floats or expressions.
    """
    n = len(tangent)
    h = linalg.zeros((n, n))
    g = linalg.zeros((n, n))
    for r in range(n):
        for c in range(n):
            h[r, c] = 0.5 * linalg.trace_of_product(tangent[r], tangent[c])
            g[r, c] = 0.5 * linalg.trace_of_product(tangent[r], linalg.matmul(j, tangent[c]))
    kappa = linalg.matmul(linalg.inv(h), g)
    return h, kappa


@dataclass(frozen=True)
class FiberGeometry:
    """Kähler geometry of the orbit of structures at a point J.

    ``basis`` spans T_J (tangent matrices anticommuting with J), ``h`` is
    its Gram matrix, ``kappa`` the matrix of K U = J∘U in that basis.
    Covectors are stored by their values on the basis.
    """

    j: np.ndarray
    basis: np.ndarray
    h: np.ndarray
    kappa: np.ndarray

    def vector(self, coeffs) -> np.ndarray:
        return np.tensordot(np.asarray(coeffs, dtype=float), self.basis, axes=1)

    def coords(self, q) -> np.ndarray:
        """Coefficients of a tangent matrix q in the basis."""
        rhs = np.array([0.5 * np.trace(b @ q) for b in self.basis])
        return np.linalg.solve(self.h, rhs)

    def K(self, coeffs) -> np.ndarray:
        return self.kappa @ np.asarray(coeffs, dtype=float)

    def flat(self, coeffs) -> np.ndarray:
        return self.h @ np.asarray(coeffs, dtype=float)

    def sharp(self, form) -> np.ndarray:
        return np.linalg.solve(self.h, np.asarray(form, dtype=float))


def _projected_basis(j):
    cands = [0.5 * (q + j @ q @ j) for q in PLUS_BASIS + MINUS_BASIS]
    out = []
    for q in sorted(cands, key=lambda q: -np.abs(q).max()):
        for b in out:
            q = q - (0.5 * np.trace(b @ q)) / (0.5 * np.trace(b @ b)) * b
        if np.abs(q).max() > 1e-8:
            out.append(q)
        if len(out) == 2:
            break
    return np.array(out)


def fiber_geometry(j, basis=None) -> FiberGeometry:
    """Tangent space, metric h, complex structure K and musical maps at ``j``."""
    j = _require_structure(j)
    basis = _projected_basis(j) if basis is None else np.asarray(basis, dtype=float)
    h, kappa = kahler_data(j, basis)
    return FiberGeometry(j, basis, np.asarray(h, dtype=float), np.asarray(kappa, dtype=float))


def positivity_gram(i, j) -> np.ndarray:
    """Symmetrized Gram matrix of the quadratic form A -> <iA, jA>."""
    m = np.asarray(i, dtype=float).T @ NEUTRAL @ np.asarray(j, dtype=float)
    return 0.5 * (m + m.T)


def positivity(i, j, tol: float = 1e-9) -> bool:
    """True iff <iA, jA> is positive definite; i must lie in G+ and j in G-."""
    if orientation_class(i) != 1 or orientation_class(j) != -1:
        raise OrientationError("positivity expects a G+ structure and a G- structure")
    return bool(np.linalg.eigvalsh(positivity_gram(i, j)).min() > tol)


def gks_blocks(h_i, k_i, h_j, k_j):
    """8x8 matrices of the fiber pair on (T_I ⊕ T_J) ⊕ (T_I* ⊕ T_J*).

    Ordering is (U1, U2, V1, V2, phi1, phi2, psi1, psi2), covectors by their
    values on the tangent bases:

        calI(U, V) = I∘U - V^flat∘J      calJ(U, V) = J∘V - U^flat∘I
        calI(phi, psi) = -phi∘I + J∘psi^sharp
        calJ(phi, psi) = -psi∘J + I∘phi^sharp
    """
    hi_inv, hj_inv = linalg.inv(h_i), linalg.inv(h_j)
    cal_i = linalg.zeros((8, 8))
    cal_j = linalg.zeros((8, 8))
    # (row offset, column offset, block)
    blocks_i = [
        (0, 0, k_i),                                  # U -> K U
        (4, 4, linalg.neg(linalg.transpose(k_i))),    # phi -> -phi∘K
        (6, 2, linalg.matmul(h_j, k_j)),              # V -> (K V)^flat
        (2, 6, linalg.matmul(k_j, hj_inv)),           # psi -> K psi^sharp
    ]
    blocks_j = [
        (2, 2, k_j),
        (6, 6, linalg.neg(linalg.transpose(k_j))),
        (4, 0, linalg.matmul(h_i, k_i)),
        (0, 4, linalg.matmul(k_i, hi_inv)),
    ]
    for target, blocks in ((cal_i, blocks_i), (cal_j, blocks_j)):
        for r, c, b in blocks:
            target[r:r + 2, c:c + 2] = b
    return cal_i, cal_j


@dataclass(frozen=True)
class FiberPair:
    """The fiber pair (calI, calJ) at (I, J) with the phase-space pairing."""

    plus: FiberGeometry
    minus: FiberGeometry
    cal_i: np.ndarray
    cal_j: np.ndarray
    pairing: np.ndarray


def gks_fiber_pair(i, j, basis_i=None, basis_j=None) -> FiberPair:
    if not positivity(i, j):
        raise ValueError("(I, J) fails the positivity condition")
    gi, gj = fiber_geometry(i, basis_i), fiber_geometry(j, basis_j)
    cal_i, cal_j = gks_blocks(gi.h, gi.kappa, gj.h, gj.kappa)
    pairing = np.zeros((8, 8))
    pairing[:4, 4:] = 0.5 * np.eye(4)
    pairing[4:, :4] = 0.5 * np.eye(4)
    return FiberPair(gi, gj, np.asarray(cal_i, dtype=float), np.asarray(cal_j, dtype=float), pairing)


def chart_point(c2: float, c3: float, sheet: int = 1) -> Hyper3:
    return Hyper3.from_chart(c2, c3, sheet)


def chart_x1(c2, c3, sheet: int = 1):
    """x1 on the sheet chart; works on expressions too."""
    return sheet * sqrt(1.0 + c2 * c2 + c3 * c3)
