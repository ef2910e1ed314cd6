"""The two structures on the twistor space: integrable exactly over flat connections."""

import numpy as np

from gktwist import connection as conn
from gktwist import twistor as tw
from gktwist.fields import Chart

square = Chart(("u", "v"), ((-1.0, 1.0), (-1.0, 1.0)))
cases = {
    "flat": conn.flat(square),
    "round sphere": conn.levi_civita(Chart(("u", "v"), ((0.6, 2.5), (-1.0, 1.0))), "1", "0", "sin(u)^2"),
    "Gamma^1_11 = v": conn.from_gamma(square, [[["v", 0], [0, 0]], [[0, 0], [0, 0]]]),
}

for name, spec in cases.items():
    t = tw.Twistor(spec, tw.TwistorChart(spec.chart))
    pts = t.tchart.sample(np.random.default_rng(0), 20)
    inv = t.invariant_residuals(pts)
    print(f"{name}")
    print(f"  square {inv['square']:.1e}  skew {inv['skew']:.1e}  commute {inv['commute']:.1e}"
          f"  positivity min eig {inv['positivity_min_eig']:.3f}")
    print(f"  lift bracket vs curvature {t.lift_bracket_residual((1, 0), (0, 1), pts[:5]):.1e}")
    for which in "IJ":
        blocks = t.nijenhuis_blocks(which, pts)
        print(f"  N^{which} blocks: " + "  ".join(f"{k} {v:.2e}" for k, v in blocks.items()))
    cf = t.closed_form_check("J", pts[:2])
    print(f"  closed form for N^J on horizontal pairs: diff {cf['max_diff']:.1e}, size {cf['max_brute']:.2f}")
