"""Bi-Hermitian data on the twistor space and a point where d omega is nonzero."""

import math

import numpy as np

from gktwist import connection as conn
from gktwist import twistor as tw
from gktwist.fields import Chart

np.set_printoptions(precision=4, suppress=True)
square = Chart(("u", "v"), ((-1.0, 1.0), (-1.0, 1.0)))
t = tw.Twistor(conn.flat(square), tw.TwistorChart(square))

# y = (2, 0, sqrt 3) on the minus sheet, I at the unit point, W moves only b3
p = np.array([0.0, 0.0, 0.0, 0.0, 0.0, math.sqrt(3.0)])
d = t.bihermitian_data(p)
print("g (adapted frame) =\n", d.adapted["g"])
print("J+ J- - J- J+:", np.abs(d.j_plus @ d.j_minus - d.j_minus @ d.j_plus).max())

w = [0.0, 0.0, 0.0, 2.0]
for sign in ("plus", "minus"):
    closed = t.domega_closed_form(sign, (1, 0), (0, 1), w, p)
    numeric = t.domega_numeric(sign, (1, 0), (0, 1), w, p)
    print(f"d omega_{sign}(X^h, Y^h, W): closed form {closed:.6f}, numeric {numeric:.6f}")
print("expected -1/(2 + sqrt 3) =", -1 / (2 + math.sqrt(3)))

pts = t.tchart.sample(np.random.default_rng(0), 5)
print("J+- Nijenhuis:", t.j_pm_nijenhuis(pts))
print("max |db|:", t.db_max(pts))
