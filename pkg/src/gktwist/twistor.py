"""Twistor space of pairs (I, J) over a 2-chart and its two structures.

Coordinates on the twistor chart are (u, v, a2, a3, b2, b3): the base chart
followed by sheet charts of the two fiber hyperboloids,

    I = a1 I1 + a2 I2 + a3 I3,   a1 = s sqrt(1 + a2^2 + a3^2)
    J = b1 J1 + b2 J2 + b3 J3,   b1 = s sqrt(1 + b2^2 + b3^2)

with the basis endomorphisms built on the coordinate frame (d_u, d_v, du, dv)
and a common sheet sign s (positivity forces a1 b1 > 0).

Two frames are used on T ⊕ T* of the 6-chart.  The coordinate frame is the
one the Courant bracket is computed in.  The adapted frame is

    vectors    H_u, H_v (horizontal lifts), d_a2, d_a3, d_b2, d_b3
    covectors  du, dv, da2 - L du.., (dual coframe)

and is related to the coordinate frame by T = blockdiag(P, P^-T) where the
columns of P are the adapted vectors.  Both structures are block diagonal
in the adapted frame: I (resp. J) on the horizontal part and the fiber pair
on the vertical part.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import connection as conn
from . import gcalg
from .fields import linalg
from .fields.calculus import (
    StructureField, almost_complex_nijenhuis, evaluate_array,
    lie_bracket_pointwise, neutral_gram, nijenhuis_tensor,
)
from .fields.chart import Chart
from .fields.expr import evaluate_many, sqrt

__all__ = [
    "FIBER_NAMES", "H_IDX", "V_IDX", "VEC_V", "COV_V", "TwistorChart", "TwistorPoint",
    "FiberState", "Twistor", "BigStructure", "BiHermitianData",
]

FIBER_NAMES = ("a2", "a3", "b2", "b3")
# adapted-frame index groups of T ⊕ T* on the 6-chart
H_IDX = (0, 1, 6, 7)
V_IDX = (2, 3, 4, 5, 8, 9, 10, 11)
VEC_V = (2, 3, 4, 5)
COV_V = (8, 9, 10, 11)


@dataclass(frozen=True)
class TwistorChart:
    base: Chart
    fiber_bounds: tuple = ((-2.0, 2.0),) * 4
    sheet: int = 1

    def __post_init__(self):
        if self.base.dim != 2:
            raise ValueError("the base chart must be 2-dimensional")
        if self.sheet not in (1, -1):
            raise ValueError("sheet must be +1 or -1")
        clash = set(self.base.names) & set(FIBER_NAMES)
        if clash:
            raise ValueError(f"base coordinate names clash with fiber names: {sorted(clash)}")
        object.__setattr__(self, "fiber_bounds", tuple(tuple(map(float, b)) for b in self.fiber_bounds))
        if len(self.fiber_bounds) != 4:
            raise ValueError("four fiber bounds (a2, a3, b2, b3) are required")

    @property
    def chart(self) -> Chart:
        return Chart(self.base.names + FIBER_NAMES, self.base.bounds + self.fiber_bounds)

    def sample(self, rng: np.random.Generator, n: int, margin: float = 0.05) -> np.ndarray:
        return self.chart.sample(rng, n, margin)

    def hyper(self, point):
        """Hyperboloid points (x, y) of the fiber coordinates of one point."""
        p = np.asarray(point, dtype=float)
        return (gcalg.Hyper3.from_chart(p[2], p[3], self.sheet),
                gcalg.Hyper3.from_chart(p[4], p[5], self.sheet))


@dataclass(frozen=True)
class TwistorPoint:
    """A point of the twistor chart: base point and the two fiber structures."""

    base: tuple
    x: gcalg.Hyper3
    y: gcalg.Hyper3

    def __post_init__(self):
        if self.x.x1 * self.y.x1 <= 0:
            raise ValueError("positivity fails: the fiber points lie on opposite sheets")
        for h in (self.x, self.y):
            if h.residual > 1e-9:
                raise gcalg.HyperboloidError(f"{h} is off the hyperboloid")

    @property
    def sheet(self) -> int:
        return self.x.sheet

    @property
    def coords(self) -> np.ndarray:
        return np.array([*self.base, self.x.x2, self.x.x3, self.y.x2, self.y.x3], dtype=float)


@dataclass(frozen=True)
class FiberState:
    """Numeric data of the construction at one point of the twistor chart."""

    point: np.ndarray
    I: np.ndarray
    J: np.ndarray
    tan_i: np.ndarray      # (2, 4, 4) images of d_a2, d_a3
    tan_j: np.ndarray
    h_i: np.ndarray
    k_i: np.ndarray
    h_j: np.ndarray
    k_j: np.ndarray
    lift: np.ndarray       # (4, 2): fiber components of H_u, H_v
    rho: np.ndarray        # rho(d_u, d_v) on T_pM

    def rho_hat(self, x, y) -> np.ndarray:
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        return conn.extend(self.rho * (x[0] * y[1] - x[1] * y[0]))

    def act(self, x, y, s) -> np.ndarray:
        """R(X, Y) s = [rho_hat(X, Y), s]."""
        r = self.rho_hat(x, y)
        return r @ s - s @ r

    def coords_i(self, m) -> np.ndarray:
        """Coefficients of a tangent matrix at I along tan_i."""
        return np.linalg.solve(self.h_i, [0.5 * np.trace(t @ m) for t in self.tan_i])

    def coords_j(self, m) -> np.ndarray:
        return np.linalg.solve(self.h_j, [0.5 * np.trace(t @ m) for t in self.tan_j])

    def matrix_i(self, c) -> np.ndarray:
        return np.tensordot(np.asarray(c, dtype=float), self.tan_i, axes=1)

    def matrix_j(self, c) -> np.ndarray:
        return np.tensordot(np.asarray(c, dtype=float), self.tan_j, axes=1)

    @property
    def P(self) -> np.ndarray:
        p = np.eye(6)
        p[2:, :2] = self.lift
        return p

    @property
    def T(self) -> np.ndarray:
        p = self.P
        t = np.zeros((12, 12))
        t[:6, :6] = p
        t[6:, 6:] = np.linalg.inv(p).T
        return t


@dataclass(frozen=True)
class BigStructure:
    """The two structures as 12x12 expression matrices in coordinate and adapted frames."""

    cal_i: StructureField
    cal_j: StructureField
    adapted_i: np.ndarray
    adapted_j: np.ndarray


@dataclass(frozen=True)
class BiHermitianData:
    """Bi-Hermitian data at a point; coordinate-frame 6x6 matrices.

    Forms are stored as matrices w[i, j] = w(d_i, d_j) and endomorphisms act
    on columns.  ``adapted`` holds the same data in the adapted frame.
    """

    g: np.ndarray
    j_plus: np.ndarray
    j_minus: np.ndarray
    b: np.ndarray
    omega_plus: np.ndarray
    omega_minus: np.ndarray
    adapted: dict


def _values(chart: Chart, arr, points) -> np.ndarray:
    """Values only; shape (N,) + arr.shape."""
    pts = chart.check(points)
    arr = np.asarray(arr, dtype=object)
    env = {n: pts[:, k] for k, n in enumerate(chart.names)}
    flat = evaluate_many(arr.ravel().tolist(), env)
    out = np.empty((pts.shape[0], arr.size))
    for k, x in enumerate(flat):
        out[:, k] = x
    return out.reshape((pts.shape[0],) + arr.shape)


def _place(target, rows, cols, block):
    for r, i in enumerate(rows):
        for c, j in enumerate(cols):
            target[i, j] = block[r, c]


def _blockdiag(*blocks):
    n = sum(b.shape[0] for b in blocks)
    out = linalg.zeros((n, n))
    k = 0
    for b in blocks:
        m = b.shape[0]
        out[k:k + m, k:k + m] = b
        k += m
    return out


def _commutator(a, b):
    return linalg.matmul(a, b) - linalg.matmul(b, a)


def _chart_velocity(m, basis):
    """Sheet-chart velocity (c2, c3) of a tangent matrix m: trace projections on B2, B3."""
    return [linalg.trace_of_product(m, linalg.obj(basis[r])) * 0.25 for r in (1, 2)]


class Twistor:
    """The construction for one torsion-free connection on one twistor chart.

    Expression matrices are built lazily and cached; numeric entry points
    take points of the 6-chart as (N, 6) arrays or single 6-vectors.
    """

    def __init__(self, spec: conn.ConnectionSpec, tchart: TwistorChart):
        if spec.chart != tchart.base:
            raise ValueError("connection and twistor chart use different base charts")
        conn.require_torsion_free(spec)
        self.spec = spec
        self.tchart = tchart
        self.chart = tchart.chart
        self._cache: dict = {}
        self._build_fiber()

    # ------------------------------------------------------------ symbolic

    def _build_fiber(self):
        u, v, a2, a3, b2, b3 = self.chart.coords()
        s = float(self.tchart.sheet)
        a1 = s * sqrt(1.0 + a2 * a2 + a3 * a3)
        b1 = s * sqrt(1.0 + b2 * b2 + b3 * b3)
        self.a, self.b = (a1, a2, a3), (b1, b2, b3)
        self.I = gcalg.plus_matrix(a1, a2, a3)
        self.J = gcalg.minus_matrix(b1, b2, b3)
        self.tan_i = gcalg.sheet_tangent_basis(a1, a2, a3, gcalg.PLUS_BASIS)
        self.tan_j = gcalg.sheet_tangent_basis(b1, b2, b3, gcalg.MINUS_BASIS)
        self.h_i, self.k_i = gcalg.kahler_data(self.I, self.tan_i)
        self.h_j, self.k_j = gcalg.kahler_data(self.J, self.tan_j)
        # fiber velocity of the parallel transport along d_i: -[G(d_i), I]
        lift = linalg.zeros((4, 2))
        for i in range(2):
            e = [1.0 if k == i else 0.0 for k in range(2)]
            g_hat = conn.extend(conn.connection_matrix(self.spec, e))
            di = _chart_velocity(linalg.neg(_commutator(g_hat, self.I)), gcalg.PLUS_BASIS)
            dj = _chart_velocity(linalg.neg(_commutator(g_hat, self.J)), gcalg.MINUS_BASIS)
            for f, val in enumerate(di + dj):
                lift[f, i] = val
        self.lift = lift

    @property
    def P(self):
        p = linalg.eye(6)
        p[2:, :2] = self.lift
        return p

    def _frames(self):
        if "T" not in self._cache:
            p = self.P
            pinv = linalg.eye(6)
            pinv[2:, :2] = linalg.neg(self.lift)
            self._cache["T"] = _blockdiag(p, linalg.transpose(pinv))
            self._cache["Tinv"] = _blockdiag(pinv, linalg.transpose(p))
            self._cache["Pinv"] = pinv
        return self._cache["T"], self._cache["Tinv"]

    def big_structures(self) -> BigStructure:
        if "big" in self._cache:
            return self._cache["big"]
        cal_i_v, cal_j_v = gcalg.gks_blocks(self.h_i, self.k_i, self.h_j, self.k_j)
        ad_i, ad_j = linalg.zeros((12, 12)), linalg.zeros((12, 12))
        _place(ad_i, H_IDX, H_IDX, self.I)
        _place(ad_j, H_IDX, H_IDX, self.J)
        _place(ad_i, V_IDX, V_IDX, cal_i_v)
        _place(ad_j, V_IDX, V_IDX, cal_j_v)
        t, tinv = self._frames()
        ci = linalg.matmul(linalg.matmul(t, ad_i), tinv)
        cj = linalg.matmul(linalg.matmul(t, ad_j), tinv)
        big = BigStructure(StructureField(self.chart, ci), StructureField(self.chart, cj), ad_i, ad_j)
        self._cache["big"] = big
        return big

    def structure(self, which: str) -> StructureField:
        big = self.big_structures()
        if which in ("I", "i"):
            return big.cal_i
        if which in ("J", "j"):
            return big.cal_j
        raise ValueError(f"unknown structure {which!r}; expected 'I' or 'J'")

    def bihermitian_adapted(self):
        """Adapted-frame expression matrices (g, J+, J-, b) as a dict."""
        if "bh" in self._cache:
            return self._cache["bh"]
        x1, x2, x3 = self.a
        y1, y2, y3 = self.b
        d = y1 + y3
        g_h = linalg.obj([[(x1 + x3) / d, -x2 / d], [-x2 / d, (x1 - x3) / d]])
        b_h = linalg.obj([[0.0, y2 / d], [-y2 / d, 0.0]])
        k = linalg.obj(self.I[:2, :2])
        z = linalg.zeros((2, 2))
        data = {
            "g": _blockdiag(g_h, linalg.obj(self.h_i), linalg.obj(self.h_j)),
            "j_plus": _blockdiag(k, linalg.obj(self.k_i), linalg.obj(self.k_j)),
            "j_minus": _blockdiag(k, linalg.obj(self.k_i), linalg.neg(self.k_j)),
            "b": _blockdiag(b_h, z, z),
        }
        for sign in ("plus", "minus"):
            data[f"omega_{sign}"] = linalg.matmul(linalg.transpose(data[f"j_{sign}"]), data["g"])
        self._cache["bh"] = data
        return data

    def bihermitian_coordinate(self):
        """Coordinate-frame expression matrices: forms by P^-T . P^-1, endomorphisms by P . P^-1."""
        if "bhc" in self._cache:
            return self._cache["bhc"]
        self._frames()
        p, pinv = self.P, self._cache["Pinv"]
        pinv_t = linalg.transpose(pinv)
        out = {}
        for name, m in self.bihermitian_adapted().items():
            if name.startswith("j_"):
                out[name] = linalg.matmul(linalg.matmul(p, m), pinv)
            else:
                out[name] = linalg.matmul(linalg.matmul(pinv_t, m), pinv)
        self._cache["bhc"] = out
        return out

    # ------------------------------------------------------------- numeric

    def state(self, point) -> FiberState:
        """Numeric fiber data at one point, computed from the hyperboloid values directly."""
        p = self.chart.check(point)[0]
        x, y = self.tchart.hyper(p)
        i_m, j_m = gcalg.structure_plus(x), gcalg.structure_minus(y)
        tan_i = np.array(gcalg.sheet_tangent_basis(x.x1, x.x2, x.x3, gcalg.PLUS_BASIS))
        tan_j = np.array(gcalg.sheet_tangent_basis(y.x1, y.x2, y.x3, gcalg.MINUS_BASIS))
        hi, ki = (np.asarray(a, dtype=float) for a in gcalg.kahler_data(i_m, tan_i))
        hj, kj = (np.asarray(a, dtype=float) for a in gcalg.kahler_data(j_m, tan_j))
        gam, _ = evaluate_array(self.spec.chart, self.spec.gamma, p[:2])
        lift = np.zeros((4, 2))
        for i in range(2):
            g_hat = conn.extend(gam[0][:, i, :])
            vi = -(g_hat @ i_m - i_m @ g_hat)
            vj = -(g_hat @ j_m - j_m @ g_hat)
            lift[:2, i] = gcalg.plus_coordinates(vi)[1:]
            lift[2:, i] = gcalg.minus_coordinates(vj)[1:]
        rho = conn.curvature_uv(self.spec, p[:2])[0]
        return FiberState(p, i_m, j_m, tan_i, tan_j, hi, ki, hj, kj, lift, rho)

    def horizontal_lift(self, x, point) -> np.ndarray:
        """Coordinate components of X^h at one point for a constant base vector X."""
        st = self.state(point)
        x = np.asarray(x, dtype=float)
        return st.P[:, :2] @ x

    def lift_bracket_residual(self, x, y, points) -> float:
        """Max |vertical part of [X^h, Y^h] - chart image of (R(X,Y)I, R(X,Y)J)|.

        X and Y are constant base vectors, so [X, Y] = 0 and the bracket of
        the lifts is purely vertical.
        """
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        p_val, p_grad = evaluate_array(self.chart, self.P[:, :2], pts)
        xh_val, xh_grad = p_val @ x, np.einsum("nkjm,j->nkm", p_grad, x)
        yh_val, yh_grad = p_val @ y, np.einsum("nkjm,j->nkm", p_grad, y)
        br = lie_bracket_pointwise(xh_val, xh_grad, yh_val, yh_grad)
        worst = 0.0
        for n, p in enumerate(pts):
            st = self.state(p)
            expect = np.zeros(6)
            expect[2:4] = gcalg.plus_coordinates(st.act(x, y, st.I))[1:]
            expect[4:6] = gcalg.minus_coordinates(st.act(x, y, st.J))[1:]
            worst = max(worst, float(np.abs(br[n] - expect).max()))
        return worst

    def structure_values(self, which: str, points) -> np.ndarray:
        return _values(self.chart, self.structure(which).matrix, points)

    def invariant_residuals(self, points) -> dict:
        """Square, skewness, commutation and positivity residuals over the points."""
        ci, cj = self.structure_values("I", points), self.structure_values("J", points)
        g = neutral_gram(6)
        eye = np.eye(12)
        sq = max(np.abs(ci @ ci + eye).max(), np.abs(cj @ cj + eye).max())
        skew = max(np.abs(np.swapaxes(m, 1, 2) @ g + g @ m).max() for m in (ci, cj))
        comm = np.abs(ci @ cj - cj @ ci).max()
        quad = np.swapaxes(ci, 1, 2) @ g @ cj
        min_eig = np.linalg.eigvalsh(0.5 * (quad + np.swapaxes(quad, 1, 2))).min()
        return {"square": float(sq), "skew": float(skew), "commute": float(comm),
                "positivity_min_eig": float(min_eig)}

    def positivity_split(self, point, a, w, theta) -> tuple:
        """Terms of <calI E, calJ E> for E = A^h + W + Theta at one point.

        ``w`` holds vertical chart velocities and ``theta`` a vertical covector
        by its values on d_a2, d_a3, d_b2, d_b3.  Returns (lhs, <IA, JA>,
        |U|^2 + |V|^2 + |phi|^2 + |psi|^2) with the norms taken in h.
        """
        st = self.state(point)
        a, w, theta = (np.asarray(t, dtype=float) for t in (a, w, theta))
        e = self.horizontal(a)
        e[list(VEC_V)] = w
        e[list(COV_V)] = theta
        big = self.big_structures()
        ci = _values(self.chart, big.adapted_i, st.point)[0]
        cj = _values(self.chart, big.adapted_j, st.point)[0]
        g = neutral_gram(6)
        lhs = float((ci @ e) @ g @ (cj @ e))
        hor = float((st.I @ a) @ gcalg.NEUTRAL @ (st.J @ a))
        ver = (w[:2] @ st.h_i @ w[:2] + w[2:] @ st.h_j @ w[2:]
               + theta[:2] @ np.linalg.solve(st.h_i, theta[:2])
               + theta[2:] @ np.linalg.solve(st.h_j, theta[2:]))
        return lhs, hor, float(ver)

    def nijenhuis_frames(self, which: str, points) -> np.ndarray:
        """Brute-force N on coordinate frame pairs: (N, 12, 12, 12), [n, i, j] = N(E_i, E_j)."""
        return nijenhuis_tensor(self.structure(which), points)

    def nijenhuis_twistor(self, which: str, a: int, b: int, point) -> np.ndarray:
        """N(E_a, E_b) at one point; a, b are coordinate frame indices 1..12."""
        if not (1 <= a <= 12 and 1 <= b <= 12):
            raise ValueError("frame indices run from 1 to 12")
        return self.nijenhuis_frames(which, point)[0, a - 1, b - 1]

    def nijenhuis_adapted(self, which: str, points) -> np.ndarray:
        """N in the adapted frame: [n, a, b] = adapted components of N(F_a, F_b)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        t, tinv = self._frames()
        tv = _values(self.chart, t, pts)
        tiv = _values(self.chart, tinv, pts)
        nc = self.nijenhuis_frames(which, pts)
        return np.einsum("nia,njb,nijk,nck->nabc", tv, tv, nc, tiv, optimize=True)

    def nijenhuis_blocks(self, which: str, points) -> dict:
        """Largest adapted-frame Nijenhuis components per pair of blocks.

        HH: horizontal vectors/covectors on both slots; HV: horizontal with a
        vertical vector; HVs: horizontal with a vertical covector; VV: both
        slots in the vertical part.
        """
        n = np.abs(self.nijenhuis_adapted(which, points))
        h, vv, vc = list(H_IDX), list(VEC_V), list(COV_V)
        vall = list(V_IDX)
        return {
            "HH": float(n[:, h][:, :, h].max()),
            "HV": float(n[:, h][:, :, vv].max()),
            "HVs": float(n[:, h][:, :, vc].max()),
            "VV": float(n[:, vall][:, :, vall].max()),
            "all": float(n.max()),
        }

    def nij_horizontal_closed_form(self, which: str, a, b, point) -> np.ndarray:
        """Closed form of N(A^h, B^h) in the adapted frame for A, B in T_pM ⊕ T_p*M.

        For the first structure (``which='I'``) with X = pi1(A), Y = pi1(B)
        and R the curvature action:

            T_I part   -R(X,Y)I - I R(X,IB)I - I R(IA,Y)I + R(IA,IB)I
            T_J part   -R(X,Y)J + R(IA,IB)J
            T_J* part  K_J*(R(X,IB)J)^flat + K_J*(R(IA,Y)J)^flat

        and the horizontal part vanishes.  ``which='J'`` swaps the roles.
        """
        st = self.state(point)
        a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
        first, second = (st.I, st.J) if which in ("I", "i") else (st.J, st.I)
        ia, ib = first @ a, first @ b
        x, y, xi, yi = a[:2], b[:2], ia[:2], ib[:2]
        own = (-st.act(x, y, first) - first @ st.act(x, yi, first)
               - first @ st.act(xi, y, first) + st.act(xi, yi, first))
        other = -st.act(x, y, second) + st.act(xi, yi, second)
        cov_src = st.act(x, yi, second) + st.act(xi, y, second)
        out = np.zeros(12)
        if which in ("I", "i"):
            out[2:4] = st.coords_i(own)
            out[4:6] = st.coords_j(other)
            out[10:12] = [0.5 * np.trace(cov_src @ st.J @ t) for t in st.tan_j]
        else:
            out[4:6] = st.coords_j(own)
            out[2:4] = st.coords_i(other)
            out[8:10] = [0.5 * np.trace(cov_src @ st.I @ t) for t in st.tan_i]
        return out

    def nij_adapted_pair(self, which: str, a_ad, b_ad, point) -> np.ndarray:
        """Brute-force N(A, B) for adapted-frame 12-vectors A, B at one point."""
        n = self.nijenhuis_adapted(which, point)[0]
        return np.einsum("a,b,abc->c", np.asarray(a_ad, float), np.asarray(b_ad, float), n)

    @staticmethod
    def horizontal(a) -> np.ndarray:
        """Adapted components of A^h for A in T_pM ⊕ T_p*M."""
        out = np.zeros(12)
        out[list(H_IDX)] = np.asarray(a, dtype=float)
        return out

    def gamma_form(self, a, w, point, which: str = "I") -> np.ndarray:
        """gamma_A(Z) = <S W_S, R(pi1(A), Z) S> on the frame (d_u, d_v).

        For ``which='I'`` the structure S is J and W_S the J-part V of the
        vertical vector ``w`` (chart velocities da2, da3, db2, db3); for
        ``which='J'`` it is I with the I-part U.  <.,.> is -tr(. .)/2.
        """
        st = self.state(point)
        w = np.asarray(w, dtype=float)
        if which in ("I", "i"):
            s, m = st.J, st.matrix_j(w[2:])
        else:
            s, m = st.I, st.matrix_i(w[:2])
        x = np.asarray(a, dtype=float)[:2]
        sm = s @ m
        return np.array([-0.5 * np.trace(sm @ st.act(x, z, s)) for z in np.eye(2)])

    def gamma_identity(self, a, w, point, which: str = "I", outer: str | None = None) -> tuple:
        """(brute force N(A^h, W), -S gamma_A^h + gamma_{S'A}^h) in adapted components.

        N is the Nijenhuis tensor of ``which``; S' is the fiber structure of
        ``which`` (I for 'I') and S the horizontal action of ``outer``, which
        defaults to ``which`` itself.
        """
        st = self.state(point)
        a = np.asarray(a, dtype=float)
        own = st.I if which in ("I", "i") else st.J
        s = own if outer is None else (st.I if outer in ("I", "i") else st.J)
        w_ad = np.zeros(12)
        w_ad[2:6] = w
        brute = self.nij_adapted_pair(which, self.horizontal(a), w_ad, point)
        g_a = np.concatenate([np.zeros(2), self.gamma_form(a, w, point, which)])
        g_sa = np.concatenate([np.zeros(2), self.gamma_form(own @ a, w, point, which)])
        closed = self.horizontal(-s @ g_a + g_sa)
        return brute, closed

    def closed_form_check(self, which: str, points) -> dict:
        """Closed form against brute force on horizontal pairs of a basis of T_pM ⊕ T_p*M."""
        worst = mag = 0.0
        h = list(H_IDX)
        for p in np.atleast_2d(points):
            n = self.nijenhuis_adapted(which, p)[0][np.ix_(h, h)]
            for i, a in enumerate(np.eye(4)):
                for j, b in enumerate(np.eye(4)):
                    cf = self.nij_horizontal_closed_form(which, a, b, p)
                    worst = max(worst, float(np.abs(cf - n[i, j]).max()))
                    mag = max(mag, float(np.abs(n[i, j]).max()))
        return {"max_diff": worst, "max_brute": mag}

    def gamma_check(self, which: str, points, outer: str | None = None) -> dict:
        """gamma identity against brute force for basis A and basis vertical W."""
        worst = mag = cmag = 0.0
        for p in np.atleast_2d(points):
            for a in np.eye(4):
                for w in np.eye(4):
                    brute, closed = self.gamma_identity(a, w, p, which, outer)
                    worst = max(worst, float(np.abs(brute - closed).max()))
                    mag = max(mag, float(np.abs(brute).max()))
                    cmag = max(cmag, float(np.abs(closed).max()))
        return {"max_diff": worst, "max_brute": mag, "max_closed": cmag}

    def bihermitian_data(self, point) -> BiHermitianData:
        p = self.chart.check(point)
        ad = {k: _values(self.chart, m, p)[0] for k, m in self.bihermitian_adapted().items()}
        co = {k: _values(self.chart, m, p)[0] for k, m in self.bihermitian_coordinate().items()}
        if np.linalg.eigvalsh(ad["g"]).min() <= 0:
            raise ValueError("metric is not positive definite at this point")
        return BiHermitianData(co["g"], co["j_plus"], co["j_minus"], co["b"],
                               co["omega_plus"], co["omega_minus"], ad)

    def j_pm_nijenhuis(self, points) -> dict:
        """Largest classical Nijenhuis component of J+ and J- over the points."""
        bh = self.bihermitian_coordinate()
        return {k: float(np.abs(almost_complex_nijenhuis(self.chart, bh[f"j_{k}"], points)).max())
                for k in ("plus", "minus")}

    def exterior_derivative_at(self, name: str, points) -> np.ndarray:
        """Unnormalized d of a coordinate 2-form field: [n, i, j, k] = dw(d_i, d_j, d_k)."""
        _, grad = evaluate_array(self.chart, self.bihermitian_coordinate()[name], points)
        # grad[n, i, j, k] = d_k w_ij; dw_ijk = d_i w_jk + d_j w_ki + d_k w_ij
        return (np.einsum("njki->nijk", grad) + np.einsum("nkij->nijk", grad) + grad)

    def domega_numeric(self, sign: str, x, y, w, point) -> float:
        """Unnormalized dw±(X^h, Y^h, W) from exact derivatives of the coordinate form."""
        st = self.state(point)
        d = self.exterior_derivative_at(f"omega_{sign}", st.point)[0]
        xh, yh = st.P[:, :2] @ np.asarray(x, float), st.P[:, :2] @ np.asarray(y, float)
        wv = np.concatenate([np.zeros(2), np.asarray(w, dtype=float)])
        return float(np.einsum("ijk,i,j,k->", d, xh, yh, wv))

    def domega_closed_form(self, sign: str, x, y, w, point) -> float:
        """-(v1+v3)(y1+y3)^-2 (X1Y2-X2Y1) + h(R(X,Y)I, I U) ± h(R(X,Y)J, J V).

        h(a, b) = tr(a b)/2; V = sum_s v_s J_s is the J-part of W.
        """
        st = self.state(point)
        x, y, w = (np.asarray(t, dtype=float) for t in (x, y, w))
        u_m, v_m = st.matrix_i(w[:2]), st.matrix_j(w[2:])
        v1, _, v3 = gcalg.minus_coordinates(v_m)
        y1, _, y3 = gcalg.minus_coordinates(st.J)
        area = x[0] * y[1] - x[1] * y[0]
        s = 1.0 if sign == "plus" else -1.0
        hor = -(v1 + v3) / (y1 + y3) ** 2 * area
        ti = 0.5 * np.trace(st.act(x, y, st.I) @ st.I @ u_m)
        tj = 0.5 * np.trace(st.act(x, y, st.J) @ st.J @ v_m)
        return float(hor + ti + s * tj)

    def db_max(self, points) -> float:
        """Largest component of db over the points (b is reported, not asserted)."""
        return float(np.abs(self.exterior_derivative_at("b", points)).max())
