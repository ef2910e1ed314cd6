"""Command-line batch driver.

    gktwist <suite> --config run.json [--out report.json] [--seed N]
                    [--tol-override name=value ...] [--timings]

Suites: fiber-algebra, courant, connection, theorem, bihermitian, and all
(which runs every suite listed under "checks" in the config).  The report
is JSON with sorted keys; it is byte-identical for identical inputs unless
--timings is given.  Exit codes: 0 all checks pass, 1 a check failed or
raised, 2 the config or command line is invalid.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
import zlib
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from . import connection as conn
from . import gcalg
from . import twistor as tw
from .fields import Chart, DomainError, ExprSyntaxError, Form, Section, calculus, parse

SUITES = ("fiber-algebra", "courant", "connection", "theorem", "bihermitian")

DEFAULT_TOLERANCES = {
    "fiber_exact": 1e-12,        # structure identities on single fibers
    "algebra": 1e-9,             # identities of assembled fields
    "flat_curvature": 1e-9,      # flatness threshold
    "flat_nijenhuis": 1e-7,      # Nijenhuis residual treated as zero
    "nonflat_floor": 1e-4,       # smallest component accepted as a curvature signal
    "bracket": 1e-7,             # lift bracket against curvature action
    "closed_form": 1e-6,         # closed forms against brute force
    "bihermitian": 1e-10,        # invariants of (g, J+, J-, b)
    "complex_nijenhuis": 1e-8,   # classical Nijenhuis of J+ and J-
    "witness_floor": 1e-3,       # non-Kähler witness must exceed this
    "courant": 1e-10,
    "tensoriality": 1e-8,
}

DEFAULT_SAMPLES = {"fiber": 1000, "pairs": 100, "points": 30, "closed_form_points": 3}

PRNG_NAME = "numpy.random.Generator(PCG64), seeded with [seed, crc32(suite name)]"


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending path."""


@dataclass
class RunConfig:
    chart: Chart
    connection: conn.ConnectionSpec
    twistor: tw.TwistorChart
    checks: list
    seed: int
    tolerances: dict
    samples: dict
    recoordinatize: dict | None = None
    witness: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)


# ------------------------------------------------------------------ config

def _require(obj, key, path, kind=None):
    if not isinstance(obj, dict) or key not in obj:
        raise ConfigError(f"{path}: missing required key {key!r}")
    val = obj[key]
    if kind is not None and not isinstance(val, kind):
        raise ConfigError(f"{path}.{key}: expected {_kind_name(kind)}")
    return val


def _kind_name(kind):
    names = {dict: "object", list: "array", str: "string", bool: "boolean", int: "integer"}
    if isinstance(kind, tuple):
        return " or ".join(names.get(k, k.__name__) for k in kind)
    return names.get(kind, kind.__name__)


def _bounds(val, path, n):
    if not isinstance(val, list) or len(val) != n:
        raise ConfigError(f"{path}: expected {n} [lo, hi] pairs")
    out = []
    for k, b in enumerate(val):
        if (not isinstance(b, list) or len(b) != 2
                or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in b)):
            raise ConfigError(f"{path}[{k}]: expected [lo, hi] numbers")
        lo, hi = float(b[0]), float(b[1])
        if not (math.isfinite(lo) and math.isfinite(hi)) or hi <= lo:
            raise ConfigError(f"{path}[{k}]: bounds must be finite with lo < hi")
        out.append((lo, hi))
    return tuple(out)


def _chart(block, path) -> Chart:
    if not isinstance(block, dict):
        raise ConfigError(f"{path}: expected object")
    names = _require(block, "names", path, list)
    if len(names) != 2 or not all(isinstance(n, str) and n.isidentifier() for n in names):
        raise ConfigError(f"{path}.names: expected two identifier strings")
    if len(set(names)) != 2:
        raise ConfigError(f"{path}.names: coordinate names must be unique")
    if set(names) & set(tw.FIBER_NAMES):
        raise ConfigError(f"{path}.names: {tw.FIBER_NAMES} are reserved for fiber coordinates")
    return Chart(tuple(names), _bounds(_require(block, "bounds", path), f"{path}.bounds", 2))


def _expr(text, names, path):
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        return float(text)
    if not isinstance(text, str):
        raise ConfigError(f"{path}: expected expression string or number")
    try:
        return parse(text, names)
    except ExprSyntaxError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _connection(block, chart, path) -> conn.ConnectionSpec:
    if not isinstance(block, dict):
        raise ConfigError(f"{path}: expected object")
    sources = [k for k in ("gamma", "metric", "flat") if k in block]
    if len(sources) != 1:
        raise ConfigError(f"{path}: exactly one connection source (gamma, metric or flat) is required")
    src = sources[0]
    label = block.get("label", src)
    if src == "flat":
        if block["flat"] is not True:
            raise ConfigError(f"{path}.flat: must be true")
        return conn.flat(chart)
    if src == "metric":
        m = block["metric"]
        if not isinstance(m, dict) or set(m) != {"E", "F", "G"}:
            raise ConfigError(f"{path}.metric: expected keys E, F, G")
        comps = [_expr(m[k], chart.names, f"{path}.metric.{k}") for k in ("E", "F", "G")]
        return conn.levi_civita(chart, *comps, label=label)
    g = block["gamma"]
    arr = np.asarray(g, dtype=object) if isinstance(g, list) else None
    if arr is None or arr.shape != (2, 2, 2):
        raise ConfigError(f"{path}.gamma: expected a 2x2x2 nested array (gamma[k][i][j])")
    out = np.empty((2, 2, 2), dtype=object)
    for k, i, j in np.ndindex(2, 2, 2):
        out[k, i, j] = _expr(arr[k, i, j], chart.names, f"{path}.gamma[{k}][{i}][{j}]")
    return conn.from_gamma(chart, out, label=label)


def parse_config(text: str, seed: int | None = None, overrides: dict | None = None) -> RunConfig:
    """Validate a JSON config; raises :class:`ConfigError` with a path-qualified message."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"$: invalid JSON ({exc.msg} at line {exc.lineno} column {exc.colno})") from None
    if not isinstance(raw, dict):
        raise ConfigError("$: expected object")
    known = {"chart", "connection", "twistor", "checks", "seed", "tolerances", "samples",
             "recoordinatize", "witness"}
    extra = sorted(set(raw) - known)
    if extra:
        raise ConfigError(f"$: unknown keys {extra}")
    chart = _chart(_require(raw, "chart", "$"), "$.chart")
    spec = _connection(_require(raw, "connection", "$"), chart, "$.connection")

    tblock = raw.get("twistor", {})
    if not isinstance(tblock, dict):
        raise ConfigError("$.twistor: expected object")
    sheet = tblock.get("sheet", 1)
    if sheet not in (1, -1) or isinstance(sheet, bool):
        raise ConfigError("$.twistor.sheet: must be 1 or -1")
    fb = _bounds(tblock.get("fiber_bounds", [[-2.0, 2.0]] * 4), "$.twistor.fiber_bounds", 4)
    tchart = tw.TwistorChart(chart, fb, sheet)

    checks = _require(raw, "checks", "$", list)
    if not checks:
        raise ConfigError("$.checks: must be nonempty")
    for k, c in enumerate(checks):
        if c not in SUITES:
            raise ConfigError(f"$.checks[{k}]: unknown suite {c!r}; expected one of {list(SUITES)}")

    if seed is None:
        seed = _require(raw, "seed", "$")
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ConfigError("$.seed: expected a non-negative integer")

    tol = dict(DEFAULT_TOLERANCES)
    for src, vals in (("$.tolerances", raw.get("tolerances", {})), ("--tol-override", overrides or {})):
        if not isinstance(vals, dict):
            raise ConfigError(f"{src}: expected object")
        for k, v in vals.items():
            if k not in tol:
                raise ConfigError(f"{src}.{k}: unknown tolerance; expected one of {sorted(tol)}")
            if not isinstance(v, (int, float)) or isinstance(v, bool) or not v > 0:
                raise ConfigError(f"{src}.{k}: expected a positive number")
            tol[k] = float(v)

    samples = dict(DEFAULT_SAMPLES)
    for k, v in raw.get("samples", {}).items():
        if k not in samples:
            raise ConfigError(f"$.samples.{k}: unknown sample count; expected one of {sorted(samples)}")
        if not isinstance(v, int) or isinstance(v, bool) or v < 1:
            raise ConfigError(f"$.samples.{k}: expected a positive integer")
        samples[k] = v

    recoord = raw.get("recoordinatize")
    if recoord is not None:
        if not isinstance(recoord, dict):
            raise ConfigError("$.recoordinatize: expected object")
        mp = _require(recoord, "map", "$.recoordinatize", list)
        if len(mp) != 2:
            raise ConfigError("$.recoordinatize.map: expected two expressions")
        new_chart = Chart(chart.names, _bounds(_require(recoord, "bounds", "$.recoordinatize"),
                                               "$.recoordinatize.bounds", 2))
        phi = [_expr(m, chart.names, f"$.recoordinatize.map[{k}]") for k, m in enumerate(mp)]
        try:
            pulled = conn.pullback(spec, new_chart, phi)
        except DomainError as exc:
            raise ConfigError(f"$.recoordinatize: map leaves the chart ({exc})") from None
        recoord = {"spec": pulled, "map": [str(m) for m in mp]}

    witness = raw.get("witness", {})
    if not isinstance(witness, dict):
        raise ConfigError("$.witness: expected object")
    return RunConfig(chart, spec, tchart, list(checks), seed, tol, samples, recoord, witness, raw)


# ------------------------------------------------------------------ suites

def _rng(seed: int, name: str) -> np.random.Generator:
    return np.random.default_rng([seed, zlib.crc32(name.encode())])


def _r(x: float) -> float:
    """Round residuals to 3 significant digits so tiny round-off noise stays stable in reports."""
    return float(f"{float(x):.3e}")


def suite_fiber_algebra(cfg: RunConfig, rng) -> dict:
    tol = cfg.tolerances
    n = cfg.samples["fiber"]
    sq = skew = comm = 0.0
    mismatches = 0
    orient_bad = 0
    for _ in range(n):
        x = gcalg.Hyper3.from_chart(*rng.uniform(-2, 2, 2), sheet=int(rng.choice([-1, 1])))
        y = gcalg.Hyper3.from_chart(*rng.uniform(-2, 2, 2), sheet=int(rng.choice([-1, 1])))
        i_m, j_m = gcalg.structure_plus(x), gcalg.structure_minus(y)
        for m in (i_m, j_m):
            sq = max(sq, np.abs(m @ m + np.eye(4)).max())
            skew = max(skew, np.abs(m.T @ gcalg.NEUTRAL + gcalg.NEUTRAL @ m).max())
        comm = max(comm, np.abs(i_m @ j_m - j_m @ i_m).max())
        mismatches += gcalg.positivity(i_m, j_m) != (x.x1 * y.x1 > 0)
        b = rng.normal()
        orient_bad += (gcalg.orientation_class(i_m) != 1 or gcalg.orientation_class(j_m) != -1
                       or gcalg.orientation_class(gcalg.b_transform(j_m, b)) != -1
                       or gcalg.orientation_class(gcalg.beta_transform(i_m, b)) != 1)
    pair = {"square": 0.0, "commute": 0.0, "pairing": 0.0}
    min_eig = np.inf
    for _ in range(cfg.samples["pairs"]):
        s = int(rng.choice([-1, 1]))
        x = gcalg.Hyper3.from_chart(*rng.uniform(-2, 2, 2), sheet=s)
        y = gcalg.Hyper3.from_chart(*rng.uniform(-2, 2, 2), sheet=s)
        fp = gcalg.gks_fiber_pair(gcalg.structure_plus(x), gcalg.structure_minus(y))
        a, b, g = fp.cal_i, fp.cal_j, fp.pairing
        pair["square"] = max(pair["square"], np.abs(a @ a + np.eye(8)).max(), np.abs(b @ b + np.eye(8)).max())
        pair["commute"] = max(pair["commute"], np.abs(a @ b - b @ a).max())
        pair["pairing"] = max(pair["pairing"], np.abs(a.T @ g @ a - g).max(), np.abs(b.T @ g @ b - g).max())
        q = a.T @ g @ b
        min_eig = min(min_eig, np.linalg.eigvalsh(0.5 * (q + q.T)).min())
    ok = (max(sq, skew) <= tol["fiber_exact"] and comm <= tol["algebra"] and mismatches == 0
          and orient_bad == 0 and max(pair.values()) <= tol["algebra"] and min_eig > tol["algebra"])
    return {
        "status": ok,
        "residuals": {"structure_square": _r(sq), "structure_skew": _r(skew), "plus_minus_commute": _r(comm),
                      "pair_square": _r(pair["square"]), "pair_commute": _r(pair["commute"]),
                      "pair_pairing": _r(pair["pairing"])},
        "details": {"samples": n, "pair_samples": cfg.samples["pairs"],
                    "positivity_sheet_mismatches": int(mismatches),
                    "orientation_failures": int(orient_bad), "pair_min_eigenvalue": _r(min_eig)},
    }


def suite_courant(cfg: RunConfig, rng) -> dict:
    tol = cfg.tolerances
    chart = cfg.chart
    x0, x1 = chart.coords()
    pts = chart.sample(rng, 20, 0.05)
    zero = 0.0
    a = Section(chart, (zero, x0), (zero, zero))
    b = Section(chart, (zero, zero), (zero, 1.0))
    got, _ = calculus.evaluate_array(chart, np.array(calculus.courant_bracket(a, b).components, dtype=object), pts)
    expect = np.zeros_like(got)
    expect[:, 2] = 0.5
    bracket_res = float(np.abs(got - expect).max())
    # pointwise engine against the symbolic one on random polynomial sections
    s1 = Section(chart, (x0 * x1, x1 * x1), (x0, x0 * x0 * x1))
    s2 = Section(chart, (x1, x0 * x0), (x1 * x0, 1.0 + x0))
    sym, _ = calculus.evaluate_array(chart, np.array(calculus.courant_bracket(s1, s2).components, dtype=object), pts)
    pw = calculus.courant_pointwise(*s1.jets(pts), *s2.jets(pts))
    anti = calculus.courant_pointwise(*s2.jets(pts), *s1.jets(pts))
    engine_res = max(float(np.abs(sym - pw).max()), float(np.abs(pw + anti).max()))
    # complex structure => integrable
    cx = calculus.complex_structure_field(chart, [[0.0, -1.0], [1.0, 0.0]])
    n_complex = float(np.abs(calculus.nijenhuis_tensor(cx, pts)).max())
    # non-closed 2-form on a 4-chart => not integrable
    c4 = Chart(("p1", "p2", "p3", "p4"), ((-1.0, 1.0),) * 4)
    q3 = c4.coords()[2]
    om = Form.two_form(c4, {(0, 1): q3, (2, 3): 1.0})
    sp = calculus.symplectic_structure_field(c4, om)
    pts4 = c4.sample(rng, 10, 0.05)
    pts4[:, 2] = np.where(np.abs(pts4[:, 2]) < 0.1, 0.5, pts4[:, 2])
    n_symp = float(np.abs(calculus.nijenhuis_tensor(sp, pts4)).max())
    # closed B-transform of an integrable structure
    bt = calculus.b_transform_field(cx, Form.two_form(chart, {(0, 1): x0 * x1 + x1 * x1}))
    n_btrans = float(np.abs(calculus.nijenhuis_tensor(bt, pts)).max())
    tens = max(calculus.tensoriality_check(sp, pts4[0]), calculus.tensoriality_check(bt, pts[0]))
    ok = (bracket_res <= tol["courant"] and engine_res <= tol["courant"] and n_complex <= tol["tensoriality"]
          and n_symp > tol["nonflat_floor"] and n_btrans <= tol["tensoriality"] and tens <= tol["tensoriality"])
    return {
        "status": ok,
        "residuals": {"bracket_example": _r(bracket_res), "engine_consistency": _r(engine_res),
                      "complex_nijenhuis": _r(n_complex), "b_transform_nijenhuis": _r(n_btrans),
                      "tensoriality": _r(tens)},
        "details": {"nonclosed_symplectic_nijenhuis_max": _r(n_symp)},
    }


def _curvature_summary(spec, chart, rng, tol):
    grid = chart.grid(9)
    inner = chart.sample(rng, 20, 0.05)
    report = conn.flatness_scan(spec, grid, tol["flat_curvature"])
    traces = [float(np.trace(r)) for r in conn.curvature_uv(spec, inner)]
    return report, traces, inner


def suite_connection(cfg: RunConfig, rng) -> dict:
    tol = cfg.tolerances
    spec, chart = cfg.connection, cfg.chart
    torsion_free = conn.is_torsion_free(spec)
    report, traces, inner = _curvature_summary(spec, chart, rng, tol)
    rho = conn.curvature_components(spec)
    vals, _ = calculus.evaluate_array(chart, rho, inner)
    anti = float(np.abs(vals + np.swapaxes(vals, -1, -2)).max())
    bianchi = 0.0
    if torsion_free:
        # rho(X,Y)Z + rho(Y,Z)X + rho(Z,X)Y over frame triples
        for i in range(2):
            for j in range(2):
                for k in range(2):
                    cyc = vals[:, :, k, i, j] + vals[:, :, i, j, k] + vals[:, :, j, k, i]
                    bianchi = max(bianchi, float(np.abs(cyc).max()))
    sheets = conn.sheet_annihilation(spec, inner[0], rng)
    skew = max(float(np.abs(conn.extend(r).T @ gcalg.NEUTRAL + gcalg.NEUTRAL @ conn.extend(r)).max())
               for r in conn.curvature_uv(spec, inner))
    ok = anti <= tol["algebra"] and bianchi <= tol["algebra"] and skew <= tol["algebra"]
    return {
        "status": ok,
        "residuals": {"antisymmetry": _r(anti), "first_bianchi": _r(bianchi), "extension_skew": _r(skew)},
        "witness": {"max_curvature_point": list(report.argmax)},
        "details": {
            "label": spec.label, "torsion_free": bool(torsion_free),
            "flat": report.flat, "max_curvature": _r(report.max_norm),
            "trace_condition_holds": bool(max(abs(t) for t in traces) <= tol["flat_curvature"]),
            "max_abs_trace": _r(max(abs(t) for t in traces)),
            "sheet_annihilation": {k: _r(v) for k, v in sheets.items()},
            "trace_condition_sheet": _trace_sheet(sheets, tol),
        },
    }


def _trace_sheet(sheets, tol):
    """Which family the curvature annihilates at the sampled point."""
    plus = sheets["plus"] <= tol["algebra"]
    minus = sheets["minus"] <= tol["algebra"]
    return {(True, True): "both", (False, True): "minus", (True, False): "plus"}.get((plus, minus), "neither")


def _verdict(blocks, tol):
    """Integrable iff every block is at round-off level."""
    return all(v <= tol["flat_nijenhuis"] for v in blocks.values())


def _theorem_blocks(spec, cfg, rng):
    twc = tw.Twistor(spec, cfg.twistor)
    pts = cfg.twistor.sample(rng, cfg.samples["points"])
    blocks = {w: twc.nijenhuis_blocks(w, pts) for w in ("I", "J")}
    return twc, pts, blocks


def suite_theorem(cfg: RunConfig, rng) -> dict:
    tol = cfg.tolerances
    spec = cfg.connection
    twc, pts, blocks = _theorem_blocks(spec, cfg, rng)
    report, _, _ = _curvature_summary(spec, cfg.chart, rng, tol)
    inv = twc.invariant_residuals(pts)
    integrable = {w: _verdict(blocks[w], tol) for w in blocks}
    both = integrable["I"] and integrable["J"]
    # theorem: both integrable <=> flat; the non-flat side needs a clear signal
    strongest = max(blocks["I"]["all"], blocks["J"]["all"])
    consistent = (both == report.flat) and (report.flat or strongest > tol["nonflat_floor"])
    cpts = pts[: cfg.samples["closed_form_points"]]
    closed = {w: twc.closed_form_check(w, cpts) for w in ("I", "J")}
    gamma = {w: twc.gamma_check(w, cpts) for w in ("I", "J")}
    gamma_printed = twc.gamma_check("I", cpts, outer="J")
    lift = twc.lift_bracket_residual((1.0, 0.0), (0.0, 1.0), cpts)
    inv_ok = (max(inv["square"], inv["skew"], inv["commute"]) <= tol["algebra"]
              and inv["positivity_min_eig"] > 0)
    cf_ok = all(c["max_diff"] <= tol["closed_form"] for c in list(closed.values()) + list(gamma.values()))
    recoord = None
    if cfg.recoordinatize is not None:
        spec2 = cfg.recoordinatize["spec"]
        cfg2 = RunConfig(spec2.chart, spec2, tw.TwistorChart(spec2.chart, cfg.twistor.fiber_bounds, cfg.twistor.sheet),
                         cfg.checks, cfg.seed, cfg.tolerances, cfg.samples)
        _, _, blocks2 = _theorem_blocks(spec2, cfg2, rng)
        pattern = {w: {k: v > tol["flat_nijenhuis"] for k, v in blocks[w].items()} for w in blocks}
        pattern2 = {w: {k: v > tol["flat_nijenhuis"] for k, v in blocks2[w].items()} for w in blocks2}
        recoord = {"map": cfg.recoordinatize["map"], "same_verdict": pattern == pattern2,
                   "nonzero_blocks": {w: sorted(k for k, v in pattern2[w].items() if v and k != "all")
                                      for w in pattern2}}
    ok = consistent and inv_ok and cf_ok and lift <= tol["bracket"] and (recoord is None or recoord["same_verdict"])
    nonzero = {w: sorted(k for k, v in blocks[w].items() if k != "all" and v > tol["flat_nijenhuis"])
               for w in blocks}
    return {
        "status": ok,
        "verdict": "flat" if report.flat else "not flat",
        "residuals": {
            "max_nijenhuis_I": _r(blocks["I"]["all"]), "max_nijenhuis_J": _r(blocks["J"]["all"]),
            "structure_square": _r(inv["square"]), "structure_skew": _r(inv["skew"]),
            "structure_commute": _r(inv["commute"]), "lift_bracket": _r(lift),
            "closed_form_I": _r(closed["I"]["max_diff"]), "closed_form_J": _r(closed["J"]["max_diff"]),
            "gamma_identity_I": _r(gamma["I"]["max_diff"]), "gamma_identity_J": _r(gamma["J"]["max_diff"]),
        },
        "witness": {"sample_points": cfg.samples["points"], "first_point": [_r(c) for c in pts[0]]},
        "details": {
            "label": spec.label, "max_curvature": _r(report.max_norm),
            "integrable": integrable, "nonzero_blocks": nonzero,
            "blocks": {w: {k: _r(v) for k, v in blocks[w].items()} for w in blocks},
            "positivity_min_eig": _r(inv["positivity_min_eig"]),
            "gamma_identity_printed_form_I": {k: _r(v) for k, v in gamma_printed.items()},
            "recoordinatized": recoord,
        },
    }


def _witness_point(cfg: RunConfig):
    w = cfg.witness
    lo_hi = cfg.chart.bounds
    base = w.get("base", [0.5 * (lo + hi) for lo, hi in lo_hi])
    a = w.get("a", [0.0, 0.0])
    b = w.get("b", [0.0, math.sqrt(3.0)])
    vel = w.get("w", [0.0, 0.0, 0.0, 2.0])
    for name, val, n in (("base", base, 2), ("a", a, 2), ("b", b, 2), ("w", vel, 4)):
        if not (isinstance(val, list) and len(val) == n and all(isinstance(t, (int, float)) for t in val)):
            raise ConfigError(f"$.witness.{name}: expected {n} numbers")
    return np.array([*base, *a, *b], dtype=float), np.array(vel, dtype=float)


def suite_bihermitian(cfg: RunConfig, rng) -> dict:
    tol = cfg.tolerances
    twc = tw.Twistor(cfg.connection, cfg.twistor)
    pts = cfg.twistor.sample(rng, 10)
    res = {"g_symmetric": 0.0, "g_min_eig": np.inf, "j_square": 0.0, "j_orthogonal": 0.0,
           "omega_consistency": 0.0, "j_commute": 0.0, "b_antisymmetric": 0.0}
    distinct = np.inf
    e = np.eye(6)
    for p in pts:
        d = twc.bihermitian_data(p)
        res["g_symmetric"] = max(res["g_symmetric"], np.abs(d.g - d.g.T).max())
        res["g_min_eig"] = min(res["g_min_eig"], np.linalg.eigvalsh(d.g).min())
        for j, om in ((d.j_plus, d.omega_plus), (d.j_minus, d.omega_minus)):
            res["j_square"] = max(res["j_square"], np.abs(j @ j + e).max())
            res["j_orthogonal"] = max(res["j_orthogonal"], np.abs(j.T @ d.g @ j - d.g).max())
            res["omega_consistency"] = max(res["omega_consistency"], np.abs(om - j.T @ d.g).max())
        res["j_commute"] = max(res["j_commute"], np.abs(d.j_plus @ d.j_minus - d.j_minus @ d.j_plus).max())
        res["b_antisymmetric"] = max(res["b_antisymmetric"], np.abs(d.b + d.b.T).max())
        distinct = min(distinct, np.abs(d.j_plus - d.j_minus).max(), np.abs(d.j_plus + d.j_minus).max())
    jn = twc.j_pm_nijenhuis(pts)
    wpt, wvel = _witness_point(cfg)
    cfg.twistor.chart.check(wpt)
    wit = {}
    for sign in ("plus", "minus"):
        closed = twc.domega_closed_form(sign, (1.0, 0.0), (0.0, 1.0), wvel, wpt)
        numeric = twc.domega_numeric(sign, (1.0, 0.0), (0.0, 1.0), wvel, wpt)
        wit[sign] = {"closed_form": _r(closed), "numeric": _r(numeric), "diff": _r(abs(closed - numeric))}
    db = twc.db_max(pts)
    alg = max(v for k, v in res.items() if k != "g_min_eig")
    ok = (alg <= tol["bihermitian"] and res["g_min_eig"] > 0 and distinct > tol["algebra"]
          and max(jn.values()) <= tol["complex_nijenhuis"]
          and all(float(w["diff"]) <= tol["closed_form"] for w in wit.values())
          and all(abs(float(w["numeric"])) > tol["witness_floor"] for w in wit.values()))
    return {
        "status": ok,
        "residuals": {**{k: _r(v) for k, v in res.items()},
                      "j_plus_nijenhuis": _r(jn["plus"]), "j_minus_nijenhuis": _r(jn["minus"])},
        "witness": {"point": [_r(c) for c in wpt], "vertical_velocity": [_r(c) for c in wvel],
                    "domega": wit},
        "details": {"j_plus_minus_separation": _r(distinct), "db_max": _r(db),
                    "db_closed": bool(db <= tol["algebra"])},
    }


RUNNERS = {
    "fiber-algebra": suite_fiber_algebra,
    "courant": suite_courant,
    "connection": suite_connection,
    "theorem": suite_theorem,
    "bihermitian": suite_bihermitian,
}


def run(cfg: RunConfig, suites, timings: bool = False) -> dict:
    """Run suites and assemble the report; suite errors are captured per check."""
    checks = []
    for name in suites:
        t0 = time.perf_counter()
        try:
            out = RUNNERS[name](cfg, _rng(cfg.seed, name))
            out["status"] = "pass" if out["status"] else "fail"
        except Exception as exc:  # noqa: BLE001 - reported per check
            out = {"status": "error", "error": f"{type(exc).__name__}: {exc}"}
        out["name"] = name
        if timings:
            out["wall_time_s"] = round(time.perf_counter() - t0, 3)
        checks.append(out)
    canon = json.dumps(cfg.raw, sort_keys=True, separators=(",", ":"))
    return {
        "version": __version__,
        "seed": cfg.seed,
        "prng": PRNG_NAME,
        "config_sha256": hashlib.sha256(canon.encode()).hexdigest(),
        "tolerances": cfg.tolerances,
        "checks": checks,
        "status": "pass" if all(c["status"] == "pass" for c in checks) else "fail",
    }


def dumps(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def _overrides(items):
    out = {}
    for item in items or []:
        key, sep, val = item.partition("=")
        if not sep:
            raise ConfigError(f"--tol-override {item!r}: expected name=value")
        try:
            out[key.strip()] = float(val)
        except ValueError:
            raise ConfigError(f"--tol-override {item!r}: value is not a number") from None
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gktwist", description="Verification suites for twistor generalized Kähler structures.")
    p.add_argument("suite", choices=SUITES + ("all",))
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--tol-override", action="append", metavar="NAME=VALUE", help="override a tolerance")
    p.add_argument("--timings", action="store_true", help="add wall times (reports stop being byte-identical)")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
        cfg = parse_config(text, seed=args.seed, overrides=_overrides(args.tol_override))
    except (OSError, UnicodeDecodeError) as exc:
        print(f"gktwist: cannot read config: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, ValueError) as exc:
        print(f"gktwist: config error: {exc}", file=sys.stderr)
        return 2
    suites = cfg.checks if args.suite == "all" else [args.suite]
    report = run(cfg, suites, timings=args.timings)
    text = dumps(report)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if report["status"] == "pass" else 1


if __name__ == "__main__":
    sys.exit(main())
