import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gktwist.fields import (
    Chart, DomainError, ExprSyntaxError, UnboundVariableError, derivatives, diff,
    evaluate, evaluate_array, parse, substitute, to_string,
)

NAMES = ("u", "v")
SAMPLES = [
    "u^2*v - 3*v + 1",
    "sin(u)*cos(v)",
    "exp(u - v)/(2 + u^2)",
    "sqrt(1 + u^2 + v^2)",
    "(u + v)^3 - u/(v^2 + 4)",
    "-u^-2 + cos(u*v)^2",
    "pi*sin(2*u)",
]


def test_precedence_and_unary_minus():
    assert evaluate(parse("2 + 3*4"), {}) == 14.0
    assert evaluate(parse("-2^2"), {}) == -4.0
    assert evaluate(parse("2^-1"), {}) == 0.5
    assert evaluate(parse("(1 + 2)*3"), {}) == 9.0
    assert evaluate(parse("8/2/2"), {}) == 2.0


@pytest.mark.parametrize("text, pos", [("u**2", 2), ("u +", 3), ("sin u", 4), ("(u", 2), ("u^2.5", 2)])
def test_syntax_errors_report_position(text, pos):
    with pytest.raises(ExprSyntaxError) as info:
        parse(text, NAMES)
    assert info.value.position == pos


def test_unknown_identifier_rejected_with_names():
    with pytest.raises(ExprSyntaxError):
        parse("w + 1", NAMES)
    assert evaluate(parse("pi", NAMES), {}) == math.pi


def test_unbound_variable_on_evaluation():
    with pytest.raises(UnboundVariableError):
        evaluate(parse("u + w"), {"u": 1.0})


@pytest.mark.parametrize("text", SAMPLES)
def test_round_trip_through_printer(text, rng):
    e = parse(text, NAMES)
    again = parse(to_string(e), NAMES)
    for p in rng.uniform(0.2, 1.0, size=(5, 2)):
        env = dict(zip(NAMES, p))
        assert evaluate(again, env) == pytest.approx(evaluate(e, env), rel=1e-14)


@pytest.mark.parametrize("text", SAMPLES)
def test_gradient_against_central_differences(text, rng):
    chart = Chart(NAMES, ((0.2, 1.0), (0.2, 1.0)))
    e = parse(text, NAMES)
    pts = chart.sample(rng, 100, 0.05)
    _, grad = evaluate_array(chart, np.array([e], dtype=object), pts)
    h = 1e-5
    for k in range(2):
        step = np.zeros(2)
        step[k] = h
        fd = np.array([(evaluate(e, dict(zip(NAMES, p + step))) - evaluate(e, dict(zip(NAMES, p - step)))) / (2 * h)
                       for p in pts])
        np.testing.assert_allclose(grad[:, 0, k], fd, rtol=1e-6, atol=1e-8)


@pytest.mark.parametrize("text", SAMPLES)
def test_hessian_is_symmetric_and_matches_symbolic(text):
    e = parse(text, NAMES)
    p = np.array([0.7, 0.4])
    val, grad, hess = derivatives(e, NAMES, p)
    assert abs(hess[0, 1] - hess[1, 0]) < 1e-10
    env = dict(zip(NAMES, p))
    assert val == pytest.approx(evaluate(e, env))
    for i, a in enumerate(NAMES):
        assert grad[i] == pytest.approx(evaluate(diff(e, a), env), rel=1e-12, abs=1e-14)
        for j, b in enumerate(NAMES):
            assert hess[i, j] == pytest.approx(evaluate(diff(diff(e, a), b), env), rel=1e-12, abs=1e-12)


def test_substitution_composes():
    e = parse("u^2 + v", NAMES)
    s = substitute(e, {"u": parse("v + 1", NAMES)})
    assert evaluate(s, {"v": 2.0}) == 11.0


def test_domain_is_enforced():
    chart = Chart(NAMES, ((0.0, 1.0), (0.0, 1.0)))
    with pytest.raises(DomainError):
        evaluate_array(chart, np.array([parse("u", NAMES)], dtype=object), [[1.5, 0.5]])


def test_bad_chart_bounds():
    with pytest.raises(ValueError):
        Chart(NAMES, ((1.0, 0.0), (0.0, 1.0)))
    with pytest.raises(ValueError):
        Chart(("u", "u"), ((0.0, 1.0), (0.0, 1.0)))


@settings(max_examples=60, deadline=None)
@given(a=st.floats(-3, 3), b=st.floats(-3, 3), n=st.integers(0, 4),
       u=st.floats(0.1, 2.0), v=st.floats(0.1, 2.0))
def test_polynomial_derivative_rule(a, b, n, u, v):
    e = parse(f"({a!r})*u^{n} + ({b!r})*v", NAMES)
    _, grad, _ = derivatives(e, NAMES, [u, v])
    expect = a * n * u ** (n - 1) if n else 0.0
    assert grad[0] == pytest.approx(expect, rel=1e-12, abs=1e-12)
    assert grad[1] == pytest.approx(b, rel=1e-12, abs=1e-12)
