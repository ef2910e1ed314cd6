"""Curvature of three connections and which structures it annihilates."""

import numpy as np

from gktwist import connection as conn
from gktwist import gcalg
from gktwist.fields import Chart

rng = np.random.default_rng(3)
square = Chart(("u", "v"), ((-1.0, 1.0), (-1.0, 1.0)))
sphere_chart = Chart(("u", "v"), ((0.6, 2.5), (-1.0, 1.0)))

specs = {
    "flat": conn.flat(square),
    "pullback of flat by (u+v^2, v)": conn.pullback(
        conn.flat(Chart(("u", "v"), ((-3.0, 3.0), (-1.0, 1.0)))), square, ["u + v^2", "v"]),
    "round sphere": conn.levi_civita(sphere_chart, "1", "0", "sin(u)^2"),
    "Gamma^1_11 = v": conn.from_gamma(square, [[["v", 0], [0, 0]], [[0, 0], [0, 0]]]),
}

for name, spec in specs.items():
    rep = conn.flatness_scan(spec, spec.chart.grid(9))
    p = spec.chart.sample(rng, 1, 0.1)[0]
    ann = conn.sheet_annihilation(spec, p, rng)
    print(f"{name}:")
    print(f"  max |rho(d_u, d_v)| = {rep.max_norm:.3e}, flat = {rep.flat}")
    print(f"  trace {ann['trace']:+.3f}, trace-free part {ann['traceless_norm']:.3f}")
    print(f"  max |[rho, I]| over plus family {ann['plus']:.3e}, over minus family {ann['minus']:.3e}")

# the minus family sees only the trace and the plus family only the trace-free part
pure_trace = conn.extend(np.eye(2))
worst = 0.0
for _ in range(50):
    I = gcalg.structure_plus(gcalg.Hyper3.from_chart(*rng.uniform(-2, 2, 2)))
    worst = max(worst, np.abs(pure_trace @ I - I @ pure_trace).max())
print("pure-trace curvature against 50 plus structures:", worst)
