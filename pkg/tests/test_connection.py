import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from gktwist import connection as conn
from gktwist import gcalg
from gktwist.fields import Chart, DomainError, evaluate_array

from conftest import pullback_spec, sphere_spec, square_chart, traceful_spec


def gamma_at(spec, p):
    return evaluate_array(spec.chart, spec.gamma, p)[0][0]


def transport_loop(spec, p, eps):
    """Parallel transport matrix around the counterclockwise square with corner p and side eps."""
    legs = [np.array([1.0, 0.0]), np.array([0.0, 1.0]), np.array([-1.0, 0.0]), np.array([0.0, -1.0])]
    start = np.array(p, dtype=float)
    mat = np.eye(2)
    for leg in legs:
        def rhs(t, z, s=start, d=leg):
            g = gamma_at(spec, s + t * d)
            zm = z.reshape(2, 2)
            return (-np.einsum("kij,i,jm->km", g, d, zm)).ravel()
        sol = solve_ivp(rhs, (0.0, eps), mat.ravel(), rtol=1e-12, atol=1e-14, method="DOP853")
        mat = sol.y[:, -1].reshape(2, 2)
        start = start + eps * leg
    return mat


@pytest.mark.parametrize("make, p", [(sphere_spec, (math.pi / 2, 0.0)), (sphere_spec, (1.0, 0.3)),
                                     (traceful_spec, (0.2, -0.4))])
def test_holonomy_fixes_the_curvature_sign(make, p):
    spec = make()
    eps = 2e-3
    hol = (transport_loop(spec, p, eps) - np.eye(2)) / eps ** 2
    # the loop's corner is p; curvature at the loop center
    center = np.asarray(p) + eps / 2
    rho = conn.curvature_uv(spec, center)[0]
    np.testing.assert_allclose(hol, rho, atol=5e-3)


def test_sphere_curvature_value():
    spec = sphere_spec()
    u = 1.1
    rho = conn.curvature_uv(spec, [u, 0.2])[0]
    # rho(d_u, d_v) d_v = -sin^2 u d_u, the negative of the usual convention
    np.testing.assert_allclose(rho @ [0.0, 1.0], [-math.sin(u) ** 2, 0.0], atol=1e-14)
    np.testing.assert_allclose(rho @ [1.0, 0.0], [0.0, 1.0], atol=1e-14)


def test_flat_curvature_and_torsion():
    spec = conn.flat(square_chart())
    pts = square_chart().grid(5)
    assert np.all(conn.curvature_uv(spec, pts) == 0.0)
    assert np.all(conn.torsion(spec, pts) == 0.0)
    assert conn.trace_condition(spec, [0.0, 0.0])


def test_torsion_example():
    chart = square_chart()
    spec = conn.from_gamma(chart, [[[0, "u"], [0, 0]], [[0, 0], [0, 0]]])
    t = conn.torsion(spec, [[0.5, 0.1]])[0]
    assert t[0, 0, 1] == 0.5 and t[0, 1, 0] == -0.5
    assert not conn.is_torsion_free(spec)
    with pytest.raises(conn.TorsionError):
        conn.require_torsion_free(spec)
    assert conn.is_torsion_free(traceful_spec())


def test_curvature_is_bilinear_and_antisymmetric(rng):
    spec = traceful_spec()
    for _ in range(10):
        x, y, p = rng.normal(size=2), rng.normal(size=2), rng.uniform(-0.9, 0.9, 2)
        a = conn.curvature(spec, x, y, p).rho
        b = conn.curvature(spec, y, x, p).rho
        np.testing.assert_allclose(a, -b, atol=1e-12)
        twice = conn.curvature(spec, 2 * x, y, p).rho
        np.testing.assert_allclose(twice, 2 * a, atol=1e-12)


@pytest.mark.parametrize("make", [sphere_spec, traceful_spec, pullback_spec])
def test_first_bianchi(make, rng):
    spec = make()
    pts = spec.chart.sample(rng, 10, 0.05)
    vals = evaluate_array(spec.chart, conn.curvature_components(spec), pts)[0]
    for i in range(2):
        for j in range(2):
            for k in range(2):
                cyc = vals[:, :, k, i, j] + vals[:, :, i, j, k] + vals[:, :, j, k, i]
                assert np.abs(cyc).max() < 1e-9


def test_extension_is_neutral_skew(rng):
    spec = traceful_spec()
    for p in rng.uniform(-0.9, 0.9, (10, 2)):
        cv = conn.curvature(spec, (1.0, 0.0), (0.0, 1.0), p)
        r = cv.rho_hat
        np.testing.assert_array_equal(r[2:, 2:], -cv.rho.T)
        assert np.abs(r.T @ gcalg.NEUTRAL + gcalg.NEUTRAL @ r).max() < 1e-14


@pytest.mark.parametrize("e, f, g", [("1", "0", "sin(u)^2"), ("1 + u^2", "u*v", "2 + v^2"), ("exp(u)", "0", "exp(v)")])
def test_levi_civita_is_trace_free(e, f, g, rng):
    chart = Chart(("u", "v"), ((0.6, 2.0), (-1.0, 1.0)))
    spec = conn.levi_civita(chart, e, f, g)
    traces = np.trace(conn.curvature_uv(spec, chart.sample(rng, 20)), axis1=1, axis2=2)
    assert np.abs(traces).max() < 1e-12


def test_levi_civita_commutes_with_pullback():
    chart = Chart(("u", "v"), ((0.6, 2.0), (-1.0, 1.0)))
    wide = Chart(("u", "v"), ((0.5, 2.2), (-1.0, 1.0)))
    pulled = conn.pullback(conn.levi_civita(wide, "1", "0", "sin(u)^2"), chart, ["u + 0.1*v^2", "v"])
    direct = conn.levi_civita(chart, "1", "0.2*v", "0.04*v^2 + sin(u + 0.1*v^2)^2")
    pts = chart.grid(6)
    a = evaluate_array(chart, pulled.gamma, pts)[0]
    b = evaluate_array(chart, direct.gamma, pts)[0]
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_pullback_image_must_fit():
    with pytest.raises(DomainError):
        conn.pullback(conn.flat(square_chart()), square_chart(), ["u + v^2", "v"])


def test_trace_condition_examples():
    assert conn.trace_condition(sphere_spec(), [1.0, 0.0])
    spec = traceful_spec()
    # rho(d_u, d_v) = [[1, 0], [0, 0]] for Gamma^1_11 = v
    np.testing.assert_allclose(conn.curvature_uv(spec, [0.3, 0.2])[0], [[1.0, 0.0], [0.0, 0.0]], atol=1e-15)
    assert not conn.trace_condition(spec, [0.3, 0.2])


def test_flatness_scan():
    assert conn.flatness_scan(conn.flat(square_chart()), square_chart().grid(5)).max_norm == 0.0
    rep = conn.flatness_scan(pullback_spec(), square_chart().grid(9))
    assert rep.flat and rep.max_norm < 1e-9
    sph = conn.levi_civita(Chart(("u", "v"), ((0.3, math.pi - 0.3), (0.0, 1.0))), "1", "0", "sin(u)^2")
    rep = conn.flatness_scan(sph, sph.chart.grid(9))
    assert not rep.flat and rep.max_norm > 0.01
    with pytest.raises(ValueError):
        conn.flatness_scan(sph, np.empty((0, 2)))


def test_minus_family_is_annihilated_exactly_by_trace_free_curvature(rng):
    sph = conn.sheet_annihilation(sphere_spec(), [1.0, 0.0], rng)
    assert sph["minus"] < 1e-12 and sph["plus"] > 0.1
    tf = conn.sheet_annihilation(traceful_spec(), [0.2, 0.3], rng)
    assert tf["minus"] > 0.1 and tf["plus"] > 0.1


def test_plus_family_sees_only_the_trace_free_part(rng):
    # vanishing on every plus structure does not force the curvature to vanish
    pure_trace = conn.extend(np.eye(2))
    for _ in range(50):
        i = gcalg.structure_plus(gcalg.Hyper3.from_chart(*rng.uniform(-2, 2, 2), sheet=int(rng.choice([-1, 1]))))
        assert np.abs(pure_trace @ i - i @ pure_trace).max() < 1e-12
    traceless = conn.extend(np.array([[1.0, 2.0], [0.5, -1.0]]))
    worst = max(np.abs(traceless @ i - i @ traceless).max()
                for i in (gcalg.structure_plus(gcalg.Hyper3.from_chart(*rng.uniform(-2, 2, 2))) for _ in range(50)))
    assert worst > 0.1


def test_spec_validation():
    chart = square_chart()
    with pytest.raises(ValueError):
        conn.from_gamma(chart, [[0, 0], [0, 0]])
    with pytest.raises(ValueError):
        conn.from_gamma(chart, [[["w", 0], [0, 0]], [[0, 0], [0, 0]]])
    with pytest.raises(ValueError):
        conn.flat(Chart(("x",), ((0.0, 1.0),)))
