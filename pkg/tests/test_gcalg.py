import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gktwist import gcalg
from gktwist.gcalg import Hyper3

E1, E2, N1, N2 = np.eye(4)
coord = st.floats(-3, 3, allow_nan=False)
sheet = st.sampled_from([1, -1])


def table_plus(x1, x2, x3):
    """Columns are the images of e1, e2, eta1, eta2."""
    return np.column_stack([x2 * E1 + (x1 + x3) * E2,
                            -(x1 - x3) * E1 - x2 * E2,
                            -x2 * N1 + (x1 - x3) * N2,
                            -(x1 + x3) * N1 + x2 * N2])


def table_minus(y1, y2, y3):
    return np.column_stack([y2 * E1 + (y1 - y3) * N2,
                            y2 * E2 - (y1 - y3) * N1,
                            (y1 + y3) * E2 - y2 * N1,
                            -(y1 + y3) * E1 - y2 * N2])


def test_pairing_examples():
    q = gcalg.Q_BASIS
    assert gcalg.neutral_pairing(E1 + N1, E1 + N1) == 1.0
    assert gcalg.neutral_pairing(E1, E2) == 0.0
    assert gcalg.neutral_pairing(q[:, 2], q[:, 2]) == -1.0


def test_q_basis_is_orthonormal_and_positive():
    q = gcalg.Q_BASIS
    np.testing.assert_array_equal(q.T @ gcalg.NEUTRAL @ q, np.diag(gcalg.Q_SIGNS))
    assert np.linalg.det(q) > 0
    assert sorted(np.linalg.eigvalsh(q.T @ gcalg.NEUTRAL @ q)) == [-1, -1, 1, 1]


def test_basis_traces():
    for fam in (gcalg.PLUS_BASIS, gcalg.MINUS_BASIS):
        assert [np.trace(b @ b) for b in fam] == [-4.0, 4.0, 4.0]


@pytest.mark.parametrize("x", [(1.0, 0.0, 0.0), (2.0, 0.0, math.sqrt(3)), (-math.sqrt(3), 1.0, 1.0)])
def test_structures_match_tables(x):
    np.testing.assert_allclose(gcalg.structure_plus(x), table_plus(*x), atol=1e-15)
    np.testing.assert_allclose(gcalg.structure_minus(x), table_minus(*x), atol=1e-15)


def test_unit_point_actions():
    i = gcalg.structure_plus((1, 0, 0))
    np.testing.assert_array_equal(i @ E1, E2)
    np.testing.assert_array_equal(i @ N1, N2)
    j = gcalg.structure_minus((1, 0, 0))
    np.testing.assert_array_equal(j @ E1, N2)
    np.testing.assert_array_equal(j @ E2, -N1)
    np.testing.assert_array_equal(j @ N1, E2)
    np.testing.assert_array_equal(j @ N2, -E1)


def test_off_hyperboloid_rejected():
    with pytest.raises(gcalg.HyperboloidError):
        gcalg.structure_plus((1, 1, 0))
    with pytest.raises(gcalg.HyperboloidError):
        gcalg.structure_minus((2, 1, math.sqrt(3)))


@settings(max_examples=200, deadline=None)
@given(c2=coord, c3=coord, s=sheet)
def test_structure_invariants(c2, c3, s):
    x = Hyper3.from_chart(c2, c3, s)
    assert x.residual < 1e-12 * max(1.0, x.x1 ** 2)
    for m in (gcalg.structure_plus(x), gcalg.structure_minus(x)):
        scale = max(1.0, np.abs(m).max() ** 2)
        assert np.abs(m @ m + np.eye(4)).max() <= 1e-12 * scale
        assert np.abs(m.T @ gcalg.NEUTRAL + gcalg.NEUTRAL @ m).max() <= 1e-12 * scale


@settings(max_examples=200, deadline=None)
@given(a2=coord, a3=coord, b2=coord, b3=coord, s=sheet, t=sheet)
def test_plus_commutes_with_minus_and_positivity_is_sheetwise(a2, a3, b2, b3, s, t):
    i = gcalg.structure_plus(Hyper3.from_chart(a2, a3, s))
    j = gcalg.structure_minus(Hyper3.from_chart(b2, b3, t))
    assert np.abs(i @ j - j @ i).max() < 1e-9
    assert gcalg.positivity(i, j) == (s == t)


def test_positivity_examples():
    i = gcalg.structure_plus((1, 0, 0))
    assert gcalg.positivity(i, gcalg.structure_minus((1, 0, 0)))
    assert not gcalg.positivity(i, gcalg.structure_minus((-1, 0, 0)))
    assert np.linalg.eigvalsh(gcalg.positivity_gram(i, gcalg.structure_minus((1, 0, 0)))).min() > 0
    with pytest.raises(gcalg.OrientationError):
        gcalg.positivity(gcalg.structure_minus((1, 0, 0)), i)


def test_injective_on_samples(rng):
    pts = [Hyper3.from_chart(*rng.uniform(-2, 2, 2)) for _ in range(50)]
    mats = [gcalg.structure_plus(p) for p in pts]
    for a in range(len(mats)):
        for b in range(a):
            assert np.abs(mats[a] - mats[b]).max() > 1e-6


def test_coordinates_invert_builders(rng):
    for _ in range(20):
        x = Hyper3.from_chart(*rng.uniform(-2, 2, 2), sheet=int(rng.choice([-1, 1])))
        np.testing.assert_allclose(gcalg.plus_coordinates(gcalg.structure_plus(x)), x.as_array(), atol=1e-12)
        np.testing.assert_allclose(gcalg.minus_coordinates(gcalg.structure_minus(x)), x.as_array(), atol=1e-12)


def test_complex_and_symplectic_constructors():
    k = np.array([[0.0, -1.0], [1.0, 0.0]])
    np.testing.assert_array_equal(gcalg.from_complex(k), gcalg.structure_plus((1, 0, 0)))
    np.testing.assert_array_equal(gcalg.from_symplectic(1.0), gcalg.structure_minus((1, 0, 0)))
    with pytest.raises(ValueError):
        gcalg.from_complex(np.eye(2))
    with pytest.raises(ValueError):
        gcalg.from_symplectic(0.0)


@settings(max_examples=50, deadline=None)
@given(a=st.floats(-3, 3), b=st.floats(0.2, 3), w=st.floats(0.1, 5), sgn=sheet)
def test_orientation_of_constructors(a, b, w, sgn):
    # any complex structure on the plane: conjugate the standard one
    p = np.array([[1.0, a], [0.0, b]])
    k = p @ np.array([[0.0, -1.0], [1.0, 0.0]]) @ np.linalg.inv(p)
    assert gcalg.orientation_class(gcalg.from_complex(k)) == 1
    assert gcalg.orientation_class(gcalg.from_symplectic(sgn * w)) == -1


def test_orientation_examples():
    assert gcalg.orientation_class(gcalg.structure_plus((1, 0, 0))) == 1
    assert gcalg.orientation_class(gcalg.structure_minus((2, 0, math.sqrt(3)))) == -1
    assert gcalg.orientation_class(gcalg.from_symplectic(1.0)) == -1
    with pytest.raises(ValueError):
        gcalg.orientation_class(np.eye(4))


@settings(max_examples=100, deadline=None)
@given(c2=coord, c3=coord, s=sheet, b=st.floats(-4, 4))
def test_transforms_preserve_class(c2, c3, s, b):
    x = Hyper3.from_chart(c2, c3, s)
    for m, cls in ((gcalg.structure_plus(x), 1), (gcalg.structure_minus(x), -1)):
        for t in (gcalg.b_transform(m, b), gcalg.beta_transform(m, b)):
            assert gcalg.is_structure(t, tol=1e-9 * max(1.0, np.abs(t).max() ** 2))
            assert gcalg.orientation_class(t) == cls


def test_b_transform_action():
    j = gcalg.structure_minus((1, 0, 0))
    np.testing.assert_array_equal(gcalg.b_transform(j, 0.0), j)
    # e^B e1 = e1 + i_{e1}(B eta1^eta2) = e1 + B eta2
    eb = np.eye(4)
    eb[2:, :2] = [[0.0, -2.0], [2.0, 0.0]]
    np.testing.assert_allclose(gcalg.b_transform(j, 2.0), eb @ j @ np.linalg.inv(eb), atol=1e-15)
    beta = gcalg.beta_transform(j, 1.0)
    assert gcalg.orientation_class(beta) == -1 and gcalg.is_structure(beta)


def test_transforms_keep_positivity(rng):
    for _ in range(50):
        s = int(rng.choice([-1, 1]))
        i = gcalg.structure_plus(Hyper3.from_chart(*rng.uniform(-2, 2, 2), sheet=s))
        j = gcalg.structure_minus(Hyper3.from_chart(*rng.uniform(-2, 2, 2), sheet=s))
        b = rng.normal()
        assert gcalg.positivity(gcalg.b_transform(i, b), gcalg.b_transform(j, b))
        assert gcalg.positivity(gcalg.beta_transform(i, b), gcalg.beta_transform(j, b))


@settings(max_examples=60, deadline=None)
@given(c2=coord, c3=coord, s=sheet, minus=st.booleans())
def test_fiber_geometry(c2, c3, s, minus):
    x = Hyper3.from_chart(c2, c3, s)
    j = gcalg.structure_minus(x) if minus else gcalg.structure_plus(x)
    fg = gcalg.fiber_geometry(j)
    for q in fg.basis:
        assert np.abs(q @ j + j @ q).max() < 1e-9 * max(1.0, np.abs(j).max() ** 2)
        assert gcalg.is_skew(q, tol=1e-9 * max(1.0, np.abs(q).max()))
    assert np.linalg.eigvalsh(fg.h).min() > 0
    np.testing.assert_allclose(fg.kappa @ fg.kappa, -np.eye(2), atol=1e-8)
    for c in np.eye(2):
        np.testing.assert_allclose(fg.sharp(fg.flat(c)), c, atol=1e-12)
        np.testing.assert_allclose(fg.vector(fg.K(c)), j @ fg.vector(c), atol=1e-8 * max(1.0, np.abs(j).max() ** 2))
        np.testing.assert_allclose(fg.coords(fg.vector(c)), c, atol=1e-9)


def test_sheet_tangent_basis_lies_in_tangent_space(rng):
    for _ in range(20):
        x = Hyper3.from_chart(*rng.uniform(-2, 2, 2))
        i = gcalg.structure_plus(x)
        for q in gcalg.sheet_tangent_basis(x.x1, x.x2, x.x3, gcalg.PLUS_BASIS):
            assert np.abs(q @ i + i @ q).max() < 1e-12


def _pair(rng, s):
    x = Hyper3.from_chart(*rng.uniform(-2, 2, 2), sheet=s)
    y = Hyper3.from_chart(*rng.uniform(-2, 2, 2), sheet=s)
    return gcalg.structure_plus(x), gcalg.structure_minus(y)


def test_fiber_pair_invariants(rng):
    for k in range(100):
        i, j = _pair(rng, 1 - 2 * (k % 2))
        fp = gcalg.gks_fiber_pair(i, j)
        a, b, g = fp.cal_i, fp.cal_j, fp.pairing
        eye = np.eye(8)
        assert np.abs(a @ a + eye).max() < 1e-9
        assert np.abs(b @ b + eye).max() < 1e-9
        assert np.abs(a @ b - b @ a).max() < 1e-9
        assert np.abs(a.T @ g @ a - g).max() < 1e-9
        assert np.abs(b.T @ g @ b - g).max() < 1e-9
        q = a.T @ g @ b
        assert np.linalg.eigvalsh(0.5 * (q + q.T)).min() > 1e-9


def test_fiber_pair_first_line(rng):
    i, j = _pair(rng, 1)
    fp = gcalg.gks_fiber_pair(i, j)
    for c in np.eye(2):
        w = np.zeros(8)
        w[:2] = c
        out = fp.cal_i @ w
        np.testing.assert_allclose(fp.plus.vector(out[:2]), i @ fp.plus.vector(c), atol=1e-12)
        assert np.abs(out[2:]).max() < 1e-15


def test_fiber_pair_requires_positivity():
    with pytest.raises(ValueError):
        gcalg.gks_fiber_pair(gcalg.structure_plus((1, 0, 0)), gcalg.structure_minus((-1, 0, 0)))
