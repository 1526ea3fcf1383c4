"""Acceptance suite: one test per criterion, each reporting a PASS/FAIL line.

The published values are typed in below exactly as printed (normalized, s = 0
for the grid, m = 4, n = 3 for the s-scan).
"""

import json
import math

import numpy as np
import pytest

from nlcone import cli
from nlcone.cone_model import ConeParams
from nlcone.curvature_solver import alpha0, mean_curvature, solve_alpha
from nlcone.oracle import mc_mean_curvature, mc_surface_integral
from nlcone.stability import C_constant, a0_integral, c_integral, jacobi_probe

RESULTS: dict[int, tuple[bool, str]] = {}

PUBLISHED_GRID = {
    # (m, n): (H, A0^2)
    (2, 1): (0.8140, 3.2669), (2, 2): (1.0679, 2.3015),
    (3, 1): (1.1978, 2.5984), (3, 2): (1.2346, 1.7918), (3, 3): (0.3926, 0.4463),
    (4, 1): (1.3968, 2.0413), (4, 2): (1.3649, 1.5534), (4, 3): (0.4477, 0.4288), (4, 4): (0.1613, 0.1356),
    (5, 1): (1.5117, 1.7332), (5, 2): (1.4570, 1.3981), (5, 3): (0.4895, 0.4118), (5, 4): (0.1845, 0.1398),
    (5, 5): (0.06978, 0.04849),
    (6, 1): (1.5833, 1.5318), (6, 2): (1.5231, 1.2841), (6, 3): (0.5215, 0.3955), (6, 4): (0.2031, 0.1412),
    (6, 5): (0.08013, 0.05173), (6, 6): (0.03113, 0.01885),
    (7, 1): (1.6303, 1.3872), (7, 2): (1.5719, 1.1951), (7, 3): (0.5465, 0.3802), (7, 4): (0.2182, 0.1409),
    (7, 5): (0.08885, 0.05381), (7, 6): (0.03583, 0.02051), (7, 7): (0.01416, 0.007704),
}
PUBLISHED_SCAN = {
    # s: (alpha, H, A0^2)
    0.1: (0.8379, 0.4113, 0.4007), 0.2: (0.8361, 0.3856, 0.3830),
    0.3: (0.8341, 0.3699, 0.3756), 0.4: (0.8319, 0.3639, 0.3786),
}
MONOTONE_TRIPLES = [(2, 1, 0.2), (3, 1, 0.5), (3, 2, 0.3), (4, 3, 0.1), (5, 2, 0.4), (6, 1, 0.7)]
BETA_TRIPLES = [(3, 2, 0.0, 0.6), (4, 3, 0.3, 0.834), (3, 1, 0.5, 0.45), (5, 5, 0.2, 1.0)]
JACOBI_CASES = [(4, 3, 0.0, 0.84), (3, 3, 0.2, 1.0), (2, 1, 0.3, 0.55), (5, 2, 0.5, 0.6)]
MC_GRID = [(2, 1, 0.2, 0.55), (3, 1, 0.5, 0.45), (4, 3, 0.2, 0.84), (3, 2, 0.5, 0.7), (2, 2, 0.2, 1.0),
           (5, 2, 0.5, 0.6)]
MC_SAMPLES = 1_000_000


def record(k: int, failures: list[str], summary: str) -> None:
    ok = not failures
    detail = summary if ok else "; ".join(failures)
    RESULTS[k] = (ok, detail)
    print(f"criterion {k}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, detail


def run_cli(tmp_path_factory, *argv) -> dict:
    path = tmp_path_factory.mktemp("cli") / "out.json"
    assert cli.main([*argv, "--format", "json", "--out", str(path)]) == 0
    return json.loads(path.read_text())


@pytest.fixture(scope="module")
def grid(tmp_path_factory):
    doc = run_cli(tmp_path_factory, "table1", "--jobs", "4")
    return {(c["m"], c["n"]): c for c in doc["result"]["cells"]}


@pytest.fixture(scope="module")
def scan(tmp_path_factory):
    doc = run_cli(tmp_path_factory, "scan", "--m", "4", "--n", "3", "--s-from", "0.1", "--s-to", "0.4",
                  "--steps", "4", "--bracket-threshold")
    return doc["result"]


def test_criterion_1_grid_reproduction(grid):
    failures = []
    worst = 0.0
    for (m, n), (h_pub, a_pub) in PUBLISHED_GRID.items():
        cell = grid[(m, n)]
        for label, ours, pub in (("H", cell["H"]["value"], h_pub), ("A0^2", cell["A0_squared"]["value"], a_pub)):
            tol = max(2e-3, 5e-3 * abs(pub))
            worst = max(worst, abs(ours - pub) / tol)
            if abs(ours - pub) > tol:
                failures.append(f"({m},{n}) {label}: computed {ours:.6g}, published {pub}, |diff| {abs(ours - pub):.3g} > {tol:.3g}")
    record(1, failures, f"54 entries within tolerance, worst at {worst:.2f} of its tolerance")


def test_criterion_2_scan_reproduction(scan):
    failures = []
    rows = {round(r["s"], 6): r for r in scan["rows"]}
    for s, (a_pub, h_pub, q_pub) in PUBLISHED_SCAN.items():
        r = rows[s]
        for label, ours, pub, tol in (("alpha", r["alpha"]["value"], a_pub, 5e-4),
                                      ("H", r["H"]["value"], h_pub, 2e-3),
                                      ("A0^2", r["A0_squared"]["value"], q_pub, 2e-3)):
            if abs(ours - pub) > tol:
                failures.append(f"s={s} {label}: computed {ours:.6g}, published {pub}, |diff| {abs(ours - pub):.3g} > {tol:g}")
    record(2, failures, "alpha, H and A0^2 match at s = 0.1, 0.2, 0.3, 0.4")


def test_criterion_3_verdicts(grid):
    failures = []
    for (m, n), cell in grid.items():
        N = m + n
        if N > 8:
            continue
        want = "unstable" if N <= 6 else "stable"
        if cell["verdict"] != want:
            failures.append(f"({m},{n}) N={N}: {cell['verdict']}, expected {want}")
    record(3, failures, "N <= 6 unstable, N = 7 and N = 8 stable")


def test_criterion_4_closed_form_anchors():
    failures = []
    for m, s in ((2, 0.1), (4, 0.3), (6, 0.5)):
        a = solve_alpha(m, m, s).alpha
        if a != 1.0:
            failures.append(f"alpha({m},{m},{s}) = {a!r}, expected 1")
    a = alpha0(2, 1).alpha
    if abs(a - 1 / math.sqrt(3)) >= 1e-8:
        failures.append(f"alpha0(2,1) = {a!r}, expected 1/sqrt(3)")
    for m, n, s in ((4, 3, 0.0), (3, 1, 0.3), (2, 2, 0.5)):
        al = alpha0(m, n).alpha if s == 0 else solve_alpha(m, n, s).alpha
        c = C_constant(m, n, s, 1e-4, al)
        if not abs(c) < 1e-6:
            failures.append(f"|C({m},{n},{s}, beta=1e-4)| = {abs(c):.3g}, not below 1e-6")
    record(4, failures, "symmetric apertures, alpha0(2,1) and small-beta C")


def test_criterion_5_property_suites():
    failures = []
    for m, n, s in MONOTONE_TRIPLES:
        grid_a = np.linspace(0.1, 1.0, 10)
        vals = [mean_curvature(ConeParams(m, n, s, a)).value for a in grid_a]
        if not all(b < a for a, b in zip(vals, vals[1:])):
            failures.append(f"H not strictly decreasing for ({m},{n},{s})")
    for m, n, s, a in BETA_TRIPLES:
        p = ConeParams(m, n, s, a)
        top = p.N - 2 - s
        betas = np.linspace(0.0, top, 13)[1:-1]
        res = [c_integral(p, b) for b in betas]
        for i in range(5):
            x, y = res[i], res[10 - i]
            if abs(x.value - y.value) > x.error_estimate + y.error_estimate + 1e-12:
                failures.append(f"C({m},{n},{s}) not symmetric at beta={betas[i]:.4g}")
        if int(np.argmax([r.value for r in res])) != 5:
            failures.append(f"C({m},{n},{s}) not maximal at the midpoint")
    for m, n, s, a in JACOBI_CASES:
        beta = ConeParams(m, n, s, a).hardy_beta()
        probe = jacobi_probe(m, n, s, a, beta)
        if not (probe.converged and abs(probe.discrepancy) <= probe.combined_error):
            failures.append(f"jacobi ({m},{n},{s},{a}): pv {probe.pv_term:.10g} vs {probe.predicted:.10g}")
    worst = 0.0
    for m, n, s, a in MC_GRID:
        p = ConeParams(m, n, s, a)
        beta = p.hardy_beta()
        pairs = (("mean curvature", mc_mean_curvature(m, n, s, a, MC_SAMPLES, 0), mean_curvature(p, raw=True)),
                 ("A0^2", mc_surface_integral(m, n, s, a, "normal-alignment", samples=MC_SAMPLES, seed=0),
                  a0_integral(p, raw=True)),
                 ("C", mc_surface_integral(m, n, s, a, "hardy-weight", beta, MC_SAMPLES, 0),
                  c_integral(p, beta, raw=True)))
        for label, est, ref in pairs:
            z = abs(est.mean - ref.value) / est.stderr
            worst = max(worst, z)
            if z > 3.0:
                failures.append(f"MC {label} ({m},{n},{s},{a}): {est.mean:.6g} +- {est.stderr:.2g} vs {ref.value:.6g}")
    record(5, failures, f"monotonicity, beta symmetry/maximality, Jacobi routes, MC grid (max |z| {worst:.2f})")


def test_criterion_6_threshold(scan):
    th = scan["threshold"]
    failures = []
    if not th["found"]:
        failures.append("no sign change of H - A0^2 reported")
    else:
        lo, hi = th["bracket"][0]["value"], th["bracket"][1]["value"]
        if not 0.2 < lo < hi < 0.4:
            failures.append(f"bracket [{lo}, {hi}] not inside (0.2, 0.4)")
        if th["direction"] != "stable-to-unstable":
            failures.append(f"direction {th['direction']}")
    margins = {round(r["s"], 6): r["margin"]["value"] for r in scan["rows"]}
    if not (margins[0.2] > 0 > margins[0.3]):
        failures.append(f"margin does not flip between s=0.2 ({margins[0.2]:.4g}) and s=0.3 ({margins[0.3]:.4g})")
    est = th.get("estimate") or {}
    record(6, failures, f"sign change bracketed near s = {est.get('value', float('nan')):.4f}")
