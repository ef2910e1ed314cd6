import math

import numpy as np
import pytest

from gktwist import connection as conn
from gktwist import twistor as tw
from gktwist.fields import Chart


def square_chart(lo=-1.0, hi=1.0):
    return Chart(("u", "v"), ((lo, hi), (lo, hi)))


def sphere_chart():
    return Chart(("u", "v"), ((0.6, math.pi - 0.6), (-1.0, 1.0)))


def flat_spec():
    return conn.flat(square_chart())


def pullback_spec():
    wide = Chart(("u", "v"), ((-3.0, 3.0), (-1.0, 1.0)))
    return conn.pullback(conn.flat(wide), square_chart(), ["u + v^2", "v"])


def sphere_spec():
    return conn.levi_civita(sphere_chart(), "1", "0", "sin(u)^2", label="sphere")


def traceful_spec():
    return conn.from_gamma(square_chart(), [[["v", 0], [0, 0]], [[0, 0], [0, 0]]], label="traceful")


SPECS = {
    "flat": flat_spec,
    "pullback": pullback_spec,
    "sphere": sphere_spec,
    "traceful": traceful_spec,
}


@pytest.fixture(scope="session")
def twistors():
    """One Twistor per connection; building the symbolic structures is the slow part."""
    return {name: tw.Twistor(make(), tw.TwistorChart(make().chart)) for name, make in SPECS.items()}


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
