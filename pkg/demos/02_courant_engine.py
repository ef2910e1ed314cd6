"""Courant bracket and Nijenhuis tensor with exact derivatives."""

import numpy as np

from gktwist.fields import (
    Chart, Form, Section, b_transform_field, complex_structure_field, courant_bracket,
    evaluate_array, nijenhuis_tensor, parse, symplectic_structure_field, tensoriality_check,
)

chart = Chart(("u", "v"), ((-1.0, 1.0), (-1.0, 1.0)))
u, v = chart.coords()
pts = chart.sample(np.random.default_rng(0), 5, 0.1)

# [u d_v, dv] = du/2
br = courant_bracket(Section(chart, (0.0, u), (0.0, 0.0)), Section(chart, (0.0, 0.0), (0.0, 1.0)))
print("[u d_v, dv] at a point:", evaluate_array(chart, np.array(br.components, dtype=object), pts[:1])[0][0])

# a complex structure is integrable, and stays so after a closed B-transform
J = complex_structure_field(chart, [[0.0, -1.0], [1.0, 0.0]])
JB = b_transform_field(J, Form.two_form(chart, {(0, 1): parse("u^2*v + sin(v)", chart.names)}))
print("max |N| complex:", np.abs(nijenhuis_tensor(J, pts)).max())
print("max |N| B-transformed:", np.abs(nijenhuis_tensor(JB, pts)).max())

# a symplectic-type structure needs a closed form; p3 dp1^dp2 + dp3^dp4 is not closed
c4 = Chart(("p1", "p2", "p3", "p4"), ((0.2, 1.0),) * 4)
w = Form.two_form(c4, {(0, 1): c4.coords()[2], (2, 3): 1.0})
S = symplectic_structure_field(c4, w)
N = nijenhuis_tensor(S, c4.sample(np.random.default_rng(1), 3, 0.1))
print("max |N| non-closed symplectic:", np.abs(N).max())

# N is a tensor even though the bracket is not C-infinity linear
print("tensoriality deviation:", tensoriality_check(S, [0.5, 0.5, 0.5, 0.5]))
