"""Affine connections on a 2-dimensional chart.

Christoffel symbols are stored as ``gamma[k, i, j]`` with
nabla_{d_i} d_j = gamma[k, i, j] d_k.

Curvature follows the sign convention R(X, Y) = nabla_[X,Y] - [nabla_X, nabla_Y],
the negative of the usual one.  In coordinates

    rho(d_i, d_j)^k_l = -(d_i G^k_jl - d_j G^k_il + G^k_im G^m_jl - G^k_jm G^m_il).

The extension of an endomorphism r of TM to TM ⊕ T*M acts on covectors by
(r xi)(Z) = -xi(r Z), i.e. ``extend(r) = blockdiag(r, -r^T)``; structures
are acted on by commutators.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import gcalg
from .fields import linalg
from .fields.calculus import evaluate_array
from .fields.chart import Chart
from .fields.expr import FieldExpr, as_expr, diff, free_variables, parse, substitute

__all__ = [
    "TorsionError", "ConnectionSpec", "CurvatureValue", "FlatnessReport",
    "flat", "from_gamma", "levi_civita", "pullback", "connection_matrix", "extend",
    "torsion", "is_torsion_free", "require_torsion_free", "curvature_components",
    "curvature", "curvature_uv", "trace_condition", "sheet_annihilation",
    "flatness_scan",
]


class TorsionError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ConnectionSpec:
    chart: Chart
    gamma: np.ndarray
    label: str = ""
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.chart.dim != 2:
            raise ValueError("connections are supported on 2-dimensional charts only")
        g = linalg.obj(self.gamma)
        if g.shape != (2, 2, 2):
            raise ValueError(f"gamma must have shape (2, 2, 2), got {g.shape}")
        unknown = free_variables(*g.ravel().tolist()) - set(self.chart.names)
        if unknown:
            raise ValueError(f"gamma uses names outside the chart: {sorted(unknown)}")
        object.__setattr__(self, "gamma", g)

    @property
    def names(self):
        return self.chart.names


def flat(chart: Chart) -> ConnectionSpec:
    return ConnectionSpec(chart, linalg.zeros((2, 2, 2)), "flat")


def from_gamma(chart: Chart, gamma, label: str = "gamma") -> ConnectionSpec:
    """From a nested (2, 2, 2) array of expressions, numbers or expression strings."""
    arr = np.asarray(gamma, dtype=object)
    if arr.shape != (2, 2, 2):
        raise ValueError(f"gamma must have shape (2, 2, 2), got {arr.shape}")
    out = linalg.zeros((2, 2, 2))
    for idx in np.ndindex(2, 2, 2):
        x = arr[idx]
        out[idx] = parse(x, chart.names) if isinstance(x, str) else x
    return ConnectionSpec(chart, out, label)


def levi_civita(chart: Chart, e, f, g, label: str = "levi-civita") -> ConnectionSpec:
    """Levi-Civita connection of E du^2 + 2F du dv + G dv^2."""
    comps = [parse(x, chart.names) if isinstance(x, str) else x for x in (e, f, g)]
    metric = linalg.obj([[comps[0], comps[1]], [comps[1], comps[2]]])
    inv = linalg.inv(metric)
    names = chart.names
    dm = [[[diff(metric[a, b], n) for n in names] for b in range(2)] for a in range(2)]
    gamma = linalg.zeros((2, 2, 2))
    for k in range(2):
        for i in range(2):
            for j in range(2):
                acc = 0.0
                for l in range(2):
                    s = dm[j][l][i] + dm[i][l][j] - dm[i][j][l]
                    if isinstance(s, FieldExpr) or s != 0.0:
                        acc = acc + inv[k, l] * s
                gamma[k, i, j] = 0.5 * acc
    return ConnectionSpec(chart, gamma, label)


def pullback(spec: ConnectionSpec, chart: Chart, mapping, label: str | None = None) -> ConnectionSpec:
    """Pull ``spec`` back along phi: chart -> spec.chart, given by two expressions.

    G'^k_ij = (Dphi^-1)^k_a (d_i d_j phi^a + G^a_bc(phi) d_i phi^b d_j phi^c).
    The image of the new chart's corner grid must lie in the old chart.
    """
    phi = [parse(x, chart.names) if isinstance(x, str) else as_expr(x) for x in mapping]
    names = chart.names
    jac = linalg.obj([[diff(phi[a], n) for n in names] for a in range(2)])
    jinv = linalg.inv(jac)
    sub = dict(zip(spec.names, phi))
    old = np.empty((2, 2, 2), dtype=object)
    for idx in np.ndindex(2, 2, 2):
        old[idx] = substitute(spec.gamma[idx], sub)
    pts = chart.grid(5)
    img, _ = evaluate_array(chart, np.array(phi, dtype=object), pts)
    spec.chart.check(img)
    gamma = linalg.zeros((2, 2, 2))
    for k in range(2):
        for i in range(2):
            for j in range(2):
                acc = 0.0
                for a in range(2):
                    t = diff(jac[a, j], names[i])
                    for b in range(2):
                        for c in range(2):
                            t = t + old[a, b, c] * jac[b, i] * jac[c, j]
                    acc = acc + jinv[k, a] * t
                gamma[k, i, j] = acc
    return ConnectionSpec(chart, gamma, label or f"pullback({spec.label})")


def connection_matrix(spec: ConnectionSpec, x) -> np.ndarray:
    """2x2 matrix of Z -> nabla_X Z on coordinate frames: [k, j] = X^i G^k_ij."""
    out = linalg.zeros((2, 2))
    for k in range(2):
        for j in range(2):
            acc = 0.0
            for i in range(2):
                acc = acc + x[i] * spec.gamma[k, i, j]
            out[k, j] = acc
    return out


def extend(r):
    """blockdiag(r, -r^T): the action of r on TM ⊕ T*M.  Works on object arrays."""
    r = np.asarray(r)
    if r.dtype != object:
        out = np.zeros((4, 4))
        out[:2, :2] = r
        out[2:, 2:] = -r.T
        return out
    z = linalg.zeros((2, 2))
    return linalg.block([[r, z], [z, linalg.neg(linalg.transpose(r))]])


def torsion(spec: ConnectionSpec, points) -> np.ndarray:
    """T^k_ij = G^k_ij - G^k_ji; array (N, 2, 2, 2)."""
    val, _ = evaluate_array(spec.chart, spec.gamma, points)
    return val - np.swapaxes(val, -1, -2)


def is_torsion_free(spec: ConnectionSpec, tol: float = 1e-12) -> bool:
    """Symbolic check first, then a dense grid check."""
    g = spec.gamma
    if all(g[k, 0, 1] is g[k, 1, 0] or (not isinstance(g[k, 0, 1], FieldExpr)
                                         and not isinstance(g[k, 1, 0], FieldExpr)
                                         and g[k, 0, 1] == g[k, 1, 0]) for k in range(2)):
        return True
    return float(np.abs(torsion(spec, spec.chart.grid(9))).max()) <= tol


def require_torsion_free(spec: ConnectionSpec) -> None:
    if not is_torsion_free(spec):
        raise TorsionError(f"connection {spec.label!r} has torsion")


def curvature_components(spec: ConnectionSpec) -> np.ndarray:
    """Expressions rho[k, l, i, j] = rho(d_i, d_j)^k_l (module sign convention), cached per spec."""
    if "rho" in spec._cache:
        return spec._cache["rho"]
    g, names = spec.gamma, spec.names
    rho = linalg.zeros((2, 2, 2, 2))
    for i in range(2):
        for j in range(i + 1, 2):
            for k in range(2):
                for l in range(2):
                    r = diff(g[k, j, l], names[i]) - diff(g[k, i, l], names[j])
                    for m in range(2):
                        r = r + g[k, i, m] * g[m, j, l] - g[k, j, m] * g[m, i, l]
                    rho[k, l, i, j] = -r
                    rho[k, l, j, i] = r
    spec._cache["rho"] = rho
    return rho


@dataclass(frozen=True)
class CurvatureValue:
    point: np.ndarray
    rho: np.ndarray
    rho_hat: np.ndarray

    def act(self, s) -> np.ndarray:
        """Action on an endomorphism of TM ⊕ T*M: s -> [rho_hat, s]."""
        return self.rho_hat @ s - s @ self.rho_hat


def curvature_uv(spec: ConnectionSpec, points) -> np.ndarray:
    """rho(d_u, d_v) at points, shape (N, 2, 2)."""
    val, _ = evaluate_array(spec.chart, curvature_components(spec)[:, :, 0, 1], points)
    return val


def curvature(spec: ConnectionSpec, x, y, point) -> CurvatureValue:
    """rho(X, Y) at one point for constant-coefficient X, Y."""
    pt = spec.chart.check(point)[0]
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    r = curvature_uv(spec, pt)[0] * (x[0] * y[1] - x[1] * y[0])
    return CurvatureValue(pt, r, extend(r))


def trace_condition(spec: ConnectionSpec, point, tol: float = 1e-9) -> bool:
    """True iff the curvature endomorphism is trace-free at ``point``."""
    return bool(abs(np.trace(curvature_uv(spec, point)[0])) <= tol)


def sheet_annihilation(spec: ConnectionSpec, point, rng: np.random.Generator,
                       samples: int = 50, spread: float = 2.0) -> dict:
    """Largest |[rho_hat, S]| over sampled structures S of each family at ``point``.

    A family is annihilated by the curvature when its value is at round-off
    level.  Both sheets of each family are sampled.
    """
    cv = curvature(spec, (1.0, 0.0), (0.0, 1.0), point)
    out = {}
    for name, build in (("plus", gcalg.structure_plus), ("minus", gcalg.structure_minus)):
        worst = 0.0
        for s in range(samples):
            x = gcalg.Hyper3.from_chart(*rng.uniform(-spread, spread, 2), sheet=1 - 2 * (s % 2))
            worst = max(worst, float(np.abs(cv.act(build(x))).max()))
        out[name] = worst
    r = cv.rho
    out["trace"] = float(np.trace(r))
    out["traceless_norm"] = float(np.abs(r - 0.5 * np.trace(r) * np.eye(2)).max())
    return out


@dataclass(frozen=True)
class FlatnessReport:
    max_norm: float
    argmax: tuple
    flat: bool
    tol: float


def flatness_scan(spec: ConnectionSpec, grid, tol: float = 1e-9) -> FlatnessReport:
    """max over the grid of the largest entry of |rho(d_u, d_v)|."""
    pts = np.atleast_2d(np.asarray(grid, dtype=float))
    if pts.size == 0:
        raise ValueError("empty grid")
    norms = np.abs(curvature_uv(spec, pts)).max(axis=(1, 2))
    k = int(np.argmax(norms))
    return FlatnessReport(float(norms[k]), tuple(float(c) for c in pts[k]), bool(norms[k] < tol), tol)
