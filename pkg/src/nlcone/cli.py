"""Command-line front end.

Every machine-readable number computed by a command is emitted as
``{"value": x, "error": e}``; input parameters are echoed as given.  JSON has
the shape ``{"meta": {...}, "result": ...}``, CSV and human output start with
a ``#`` provenance header carrying the same meta block.

Exit codes: 0 success, 2 invalid arguments, 3 numerical non-convergence,
4 internal inconsistency.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Callable, Sequence

from . import __version__
from .cone_model import ConeParams
from .curvature_solver import DEFAULT_ALPHA_TOL, alpha0, mean_curvature, solve_alpha
from .errors import ConvergenceError, InconsistencyError
from .oracle import DEFAULT_SAMPLES, mc_mean_curvature, mc_surface_integral
from .quadrature import INNER, OUTER, QuadSpec
from .stability import a0_integral, c_integral, jacobi_probe, stability_report

ENV_ABS = "NLCONE_QUAD_ABS_TOL"
ENV_REL = "NLCONE_QUAD_REL_TOL"
FORMATS = ("json", "csv", "human")
TABLE_M = range(2, 8)
THRESHOLD_TOL = 1e-3
SELF_CHECK_SIGMA = 6.0


def num(value: float, error: float = 0.0) -> dict:
    """A number with its error estimate; non-finite values become null."""
    def clean(x):
        x = float(x)
        return x if math.isfinite(x) else None
    return {"value": clean(value), "error": clean(error)}


@dataclass
class RunConfig:
    """Validated command, parameters, tolerances and output settings."""

    command: str
    params: dict
    outer: QuadSpec = OUTER
    inner: QuadSpec = INNER
    fmt: str = "human"
    out: str | None = None
    jobs: int = 1
    raw: bool = False
    defaults: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# argument parsing


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"must be positive and finite: {text!r}")
    return v


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1: {text!r}")
    return v


def _nonneg_int(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0: {text!r}")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=FORMATS, default="human", dest="fmt")
    common.add_argument("--out", metavar="PATH", help="write to PATH instead of standard output")
    common.add_argument("--jobs", type=_positive_int, default=1, help="worker processes for table cells")
    common.add_argument("--raw", action="store_true", help="report surface integrals without normalization")
    common.add_argument("--abs-tol", type=_positive_float, help=f"outer quadrature absolute tolerance (env {ENV_ABS})")
    common.add_argument("--rel-tol", type=_positive_float, help=f"outer quadrature relative tolerance (env {ENV_REL})")

    cone = argparse.ArgumentParser(add_help=False)
    cone.add_argument("--m", type=int, required=True)
    cone.add_argument("--n", type=int, required=True)

    p = argparse.ArgumentParser(prog="nlcone", description="Nonlocal Lawson cones: apertures and stability constants.")
    p.add_argument("--version", action="version", version=f"nlcone {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("alpha", parents=[common, cone], help="aperture alpha(s, m, n)")
    a.add_argument("--s", type=float, required=True)
    a.add_argument("--tol", type=_positive_float, default=DEFAULT_ALPHA_TOL)

    a0 = sub.add_parser("alpha0", parents=[common, cone], help="s -> 0 aperture")
    a0.add_argument("--tol", type=_positive_float, default=1e-12)

    st = sub.add_parser("stability", parents=[common, cone], help="H, A0^2 and the verdict")
    st.add_argument("--s", type=float, required=True)
    st.add_argument("--alpha", type=_positive_float)

    sub.add_parser("table1", parents=[common], help="H and A0^2 at s = 0 for 1 <= n <= m, 2 <= m <= 7")

    sc = sub.add_parser("scan", parents=[common, cone], help="stability along an s grid")
    sc.add_argument("--s-from", type=float, required=True)
    sc.add_argument("--s-to", type=float, required=True)
    sc.add_argument("--steps", type=_positive_int, required=True)
    sc.add_argument("--bracket-threshold", action="store_true",
                    help="bisect the sign change of H - A0^2 along the grid")
    sc.add_argument("--tol", type=_positive_float, default=THRESHOLD_TOL, help="width of the threshold bracket")

    mc = sub.add_parser("mc-check", parents=[common, cone], help="Monte Carlo oracle against quadrature")
    mc.add_argument("--s", type=float, required=True)
    mc.add_argument("--alpha", type=_positive_float, required=True)
    mc.add_argument("--integrand", choices=("mean-curvature", "normal-alignment", "hardy-weight"),
                    default="mean-curvature")
    mc.add_argument("--beta", type=_positive_float)
    mc.add_argument("--samples", type=_positive_int, default=DEFAULT_SAMPLES)
    mc.add_argument("--seed", type=_nonneg_int, default=0)

    jp = sub.add_parser("jacobi-probe", parents=[common, cone], help="p.v. term of the Jacobi operator on |x|^-beta")
    jp.add_argument("--s", type=float, required=True)
    jp.add_argument("--alpha", type=_positive_float, required=True)
    jp.add_argument("--beta", type=_positive_float, help="default: (N - 2 - s)/2")

    sf = sub.add_parser("self-check", parents=[common], help="internal consistency checks")
    sf.add_argument("--samples", type=_positive_int, default=200_000)
    sf.add_argument("--seed", type=_nonneg_int, default=0)
    return p


def _env_float(name: str) -> float | None:
    text = os.environ.get(name)
    if text is None or text == "":
        return None
    try:
        v = float(text)
    except ValueError:
        raise ValueError(f"{name}={text!r} is not a number")
    if not (v > 0 and math.isfinite(v)):
        raise ValueError(f"{name} must be positive and finite")
    return v


def make_config(ns: argparse.Namespace) -> RunConfig:
    """Resolve tolerances (flags over environment over defaults) and validate inputs."""
    abs_tol = ns.abs_tol if ns.abs_tol is not None else _env_float(ENV_ABS)
    rel_tol = ns.rel_tol if ns.rel_tol is not None else _env_float(ENV_REL)
    outer = QuadSpec(abs_tol if abs_tol is not None else OUTER.abs_tol,
                     rel_tol if rel_tol is not None else OUTER.rel_tol, OUTER.max_subdivisions)
    # inner (angular) integrals stay two orders tighter than the outer ones
    inner = QuadSpec(min(INNER.abs_tol, 0.01 * outer.abs_tol), min(INNER.rel_tol, 0.01 * outer.rel_tol),
                     INNER.max_subdivisions)
    skip = {"command", "fmt", "out", "jobs", "raw", "abs_tol", "rel_tol"}
    params = {k: v for k, v in vars(ns).items() if k not in skip}
    cfg = RunConfig(ns.command, params, outer, inner, ns.fmt, ns.out, ns.jobs, ns.raw)
    cfg.defaults = {"quad_abs_tol": outer.abs_tol, "quad_rel_tol": outer.rel_tol,
                    "inner_abs_tol": inner.abs_tol, "inner_rel_tol": inner.rel_tol,
                    "alpha_tol": DEFAULT_ALPHA_TOL, "mc_samples": DEFAULT_SAMPLES, "seed": 0,
                    "normalization": "raw" if ns.raw else "normalized"}
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    p = cfg.params
    if "m" in p:
        s = p.get("s", p.get("s_from", 0.0))
        ConeParams(p["m"], p["n"], s, p.get("alpha") or 1.0)
    if cfg.command == "scan":
        ConeParams(p["m"], p["n"], p["s_to"], 1.0)
        if not p["s_from"] < p["s_to"]:
            raise ValueError("--s-from must be below --s-to")
        if p["bracket_threshold"] and p["steps"] < 2:
            raise ValueError("--bracket-threshold needs at least 2 steps")
    if cfg.command in ("mc-check", "jacobi-probe"):
        P = ConeParams(p["m"], p["n"], p["s"], p["alpha"])
        beta = p.get("beta")
        if cfg.command == "mc-check" and p["integrand"] == "hardy-weight" and beta is None:
            raise ValueError("--integrand hardy-weight needs --beta")
        if beta is not None and not 0 < beta < P.N - 2 - P.s:
            raise ValueError(f"--beta must lie in (0, {P.N - 2 - P.s:g})")
        if cfg.command == "mc-check" and p["samples"] < 10_000:
            raise ValueError("--samples must be >= 10000")


# ---------------------------------------------------------------------------
# commands


def _solution_dict(sol) -> dict:
    lo, hi = sol.bracket
    return {"m": sol.params.m, "n": sol.params.n, "s": sol.params.s,
            "alpha": num(sol.alpha, 0.5 * (hi - lo)), "residual": num(sol.residual, sol.residual_error),
            "bracket": [num(lo), num(hi)], "method": sol.method, "evaluations": sol.evaluations}


def cmd_alpha(cfg: RunConfig) -> dict:
    p = cfg.params
    if p["s"] == 0.0:
        sol = alpha0(p["m"], p["n"], min(p["tol"], 1e-10))
    else:
        sol = solve_alpha(p["m"], p["n"], p["s"], p["tol"], cfg.outer, cfg.inner)
    return _solution_dict(sol)


def cmd_alpha0(cfg: RunConfig) -> dict:
    p = cfg.params
    return _solution_dict(alpha0(p["m"], p["n"], p["tol"]))


def _report_dict(rep, raw: bool) -> dict:
    d = rep.diagnostics
    if raw:
        h, a = num(rep.H_value, d["H_error_raw"]), num(rep.A0_squared, d["A0_error_raw"])
        margin = num(rep.margin, d["H_error_raw"] + d["A0_error_raw"])
    else:
        h, a = num(rep.H_normalized, d["H_error"]), num(rep.A0_normalized, d["A0_error"])
        margin = num(rep.margin_normalized, d["H_error"] + d["A0_error"])
    return {"m": rep.params.m, "n": rep.params.n, "s": rep.params.s, "alpha": num(rep.params.alpha, d.get("alpha_error", 0.0)),
            "alpha_source": rep.alpha_source, "H": h, "A0_squared": a, "margin": margin,
            "verdict": rep.verdict, "normalization": "raw" if raw else "normalized",
            "raw_factor": num(d["raw_factor"])}


def cmd_stability(cfg: RunConfig) -> dict:
    p = cfg.params
    rep = stability_report(p["m"], p["n"], p["s"], p.get("alpha"), cfg.outer, cfg.inner)
    return _report_dict(rep, cfg.raw)


def _table_cell(args) -> dict:
    m, n, outer, inner, raw = args
    return _report_dict(stability_report(m, n, 0.0, None, outer, inner), raw)


def _map(fn: Callable, items: Sequence, jobs: int) -> list:
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items))


def cmd_table1(cfg: RunConfig) -> dict:
    cells = [(m, n) for m in TABLE_M for n in range(1, m + 1)]
    rows = _map(_table_cell, [(m, n, cfg.outer, cfg.inner, cfg.raw) for m, n in cells], cfg.jobs)
    return {"cells": rows}


def _scan_point(m, n, s, cfg: RunConfig):
    rep = stability_report(m, n, s, None, cfg.outer, cfg.inner)
    return rep, _report_dict(rep, cfg.raw)


def cmd_scan(cfg: RunConfig) -> dict:
    p = cfg.params
    m, n, steps = p["m"], p["n"], p["steps"]
    grid = [p["s_from"] + (p["s_to"] - p["s_from"]) * k / max(steps - 1, 1) for k in range(steps)]
    if steps == 1:
        grid = [p["s_from"]]
    reps, rows = [], []
    for s in grid:
        rep, row = _scan_point(m, n, s, cfg)
        reps.append(rep)
        rows.append(row)
    out: dict[str, Any] = {"rows": rows}
    if p["bracket_threshold"]:
        out["threshold"] = bracket_threshold(m, n, grid, [r.margin_normalized for r in reps], p["tol"], cfg)
    return out


def bracket_threshold(m: int, n: int, grid: Sequence[float], margins: Sequence[float], tol: float,
                      cfg: RunConfig) -> dict:
    """Bisect the first sign change of H - A0^2 found on the grid."""
    for k in range(len(grid) - 1):
        if (margins[k] >= 0) != (margins[k + 1] >= 0):
            lo, hi = grid[k], grid[k + 1]
            m_lo = margins[k]
            break
    else:
        return {"found": False, "bracket": None, "estimate": None}
    evals = 0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        rep, _ = _scan_point(m, n, mid, cfg)
        evals += 1
        if (rep.margin_normalized >= 0) == (m_lo >= 0):
            lo = mid
        else:
            hi = mid
    return {"found": True, "bracket": [num(lo), num(hi)], "estimate": num(0.5 * (lo + hi), 0.5 * (hi - lo)),
            "direction": "stable-to-unstable" if m_lo >= 0 else "unstable-to-stable", "evaluations": evals}


def cmd_mc_check(cfg: RunConfig) -> dict:
    p = cfg.params
    m, n, s, alpha = p["m"], p["n"], p["s"], p["alpha"]
    P = ConeParams(m, n, s, alpha)
    kind = p["integrand"]
    if kind == "mean-curvature":
        est = mc_mean_curvature(m, n, s, alpha, p["samples"], p["seed"])
        ref = mean_curvature(P, "surface", cfg.outer, cfg.inner, raw=True)
    elif kind == "normal-alignment":
        est = mc_surface_integral(m, n, s, alpha, kind, samples=p["samples"], seed=p["seed"])
        ref = a0_integral(P, cfg.outer, cfg.inner, raw=True)
    else:
        est = mc_surface_integral(m, n, s, alpha, kind, p["beta"], p["samples"], p["seed"])
        ref = c_integral(P, p["beta"], cfg.outer, cfg.inner, raw=True)
    if not ref.converged:
        raise ConvergenceError("mc-check", f"reference quadrature unconverged: {ref.note}")
    z = (est.mean - ref.value) / est.stderr if est.stderr > 0 else math.inf
    out = {"m": m, "n": n, "s": s, "alpha": num(alpha), "integrand": kind, "beta": p.get("beta"),
           "monte_carlo": num(est.mean, est.stderr), "quadrature": num(ref.value, ref.error_estimate),
           "z_score": num(z), "agrees_3sigma": bool(abs(z) <= 3.0), "samples": est.samples, "seed": est.seed,
           "cutoff_radius": num(est.cutoff_radius), "excision_radius": num(est.excision_radius),
           "normalization": "raw"}
    if "halfspace_mean" in est.details:
        out["monte_carlo_halfspace"] = num(est.details["halfspace_mean"], est.details["halfspace_stderr"])
    return out


def cmd_jacobi_probe(cfg: RunConfig) -> dict:
    p = cfg.params
    P = ConeParams(p["m"], p["n"], p["s"], p["alpha"])
    beta = p.get("beta") or P.hardy_beta()
    probe = jacobi_probe(P.m, P.n, P.s, P.alpha, beta, cfg.outer, cfg.inner)
    return {"m": P.m, "n": P.n, "s": P.s, "alpha": num(P.alpha), "beta": num(beta),
            "pv_term": num(probe.pv_term, probe.pv_error), "predicted": num(probe.predicted, probe.predicted_error),
            "discrepancy": num(probe.discrepancy, probe.combined_error),
            "agrees": bool(abs(probe.discrepancy) <= probe.combined_error), "converged": probe.converged,
            "normalization": "raw"}


def cmd_self_check(cfg: RunConfig) -> dict:
    """Cheap cross-checks between independent routes; raises InconsistencyError on failure."""
    p = cfg.params
    checks = []

    def record(name, ok, detail):
        checks.append({"check": name, "ok": bool(ok), **detail})

    sol = alpha0(2, 1)
    record("alpha0(2,1) = 1/sqrt(3)", abs(sol.alpha - 1 / math.sqrt(3)) < 1e-8,
           {"value": num(sol.alpha, 0.5 * (sol.bracket[1] - sol.bracket[0]))})
    sym = mean_curvature(ConeParams(3, 3, 0.3, 1.0), "surface", cfg.outer, cfg.inner)
    record("H(3,3,0.3, alpha=1) = 0", abs(sym.value) <= max(sym.error_estimate, 1e-12), {"value": num(sym.value, sym.error_estimate)})
    P = ConeParams(4, 3, 0.3, 0.6)
    routes = {r: mean_curvature(P, r, cfg.outer, cfg.inner) for r in ("surface", "halfspace")}
    gap = abs(routes["surface"].value - routes["halfspace"].value)
    record("H surface route = half-space route", gap <= 10 * (routes["surface"].error_estimate + routes["halfspace"].error_estimate),
           {"surface": num(routes["surface"].value, routes["surface"].error_estimate),
            "halfspace": num(routes["halfspace"].value, routes["halfspace"].error_estimate)})
    probe = jacobi_probe(3, 3, 0.2, 1.0, ConeParams(3, 3, 0.2, 1.0).hardy_beta(), cfg.outer, cfg.inner)
    record("jacobi p.v. term = -C", abs(probe.discrepancy) <= probe.combined_error,
           {"pv_term": num(probe.pv_term, probe.pv_error), "predicted": num(probe.predicted, probe.predicted_error)})
    for (m, n, s, a, kind) in ((2, 1, 0.3, 0.5, "mean-curvature"), (2, 2, 0.2, 1.0, "normal-alignment")):
        Q = ConeParams(m, n, s, a)
        if kind == "mean-curvature":
            est = mc_mean_curvature(m, n, s, a, p["samples"], p["seed"])
            ref = mean_curvature(Q, "surface", cfg.outer, cfg.inner, raw=True)
        else:
            est = mc_surface_integral(m, n, s, a, kind, samples=p["samples"], seed=p["seed"])
            ref = a0_integral(Q, cfg.outer, cfg.inner, raw=True)
        record(f"Monte Carlo {kind} ({m},{n},{s},{a})",
               abs(est.mean - ref.value) <= SELF_CHECK_SIGMA * est.stderr + ref.error_estimate,
               {"monte_carlo": num(est.mean, est.stderr), "quadrature": num(ref.value, ref.error_estimate)})
    result = {"checks": checks, "all_ok": all(c["ok"] for c in checks)}
    if not result["all_ok"]:
        failed = ", ".join(c["check"] for c in checks if not c["ok"])
        err = InconsistencyError(f"self-check failed: {failed}")
        err.result = result
        raise err
    return result


COMMANDS: dict[str, Callable[[RunConfig], dict]] = {
    "alpha": cmd_alpha, "alpha0": cmd_alpha0, "stability": cmd_stability, "table1": cmd_table1,
    "scan": cmd_scan, "mc-check": cmd_mc_check, "jacobi-probe": cmd_jacobi_probe, "self-check": cmd_self_check,
}


# ---------------------------------------------------------------------------
# output


def meta_block(cfg: RunConfig) -> dict:
    return {"version": __version__, "command": cfg.command, "params": cfg.params, "defaults": cfg.defaults,
            "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds")}


def to_json(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _flat(prefix: str, obj: Any, out: dict) -> None:
    if isinstance(obj, dict) and set(obj) == {"value", "error"}:
        out[prefix] = obj["value"]
        out[f"{prefix}_error"] = obj["error"]
    elif isinstance(obj, dict):
        for k, v in obj.items():
            _flat(f"{prefix}.{k}" if prefix else k, v, out)
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            _flat(f"{prefix}[{i}]", v, out)
    else:
        out[prefix] = obj


def _header(meta: dict) -> str:
    lines = [f"# nlcone {meta['version']} {meta['command']} {meta['timestamp']}"]
    lines += [f"# param {k}={v}" for k, v in sorted(meta["params"].items())]
    lines += [f"# default {k}={v}" for k, v in sorted(meta["defaults"].items())]
    return "\n".join(lines) + "\n"


def _table1_csv(cells: list[dict]) -> list[list]:
    # rows m with sub-rows H and A0^2, columns n = 1..7 (value, error)
    head = ["m", "quantity"]
    for n in range(1, 8):
        head += [f"n{n}", f"n{n}_error"]
    rows = [head]
    by = {(c["m"], c["n"]): c for c in cells}
    for m in TABLE_M:
        for q, label in (("H", "H"), ("A0_squared", "A0^2")):
            row = [m, label]
            for n in range(1, 8):
                c = by.get((m, n))
                row += [c[q]["value"], c[q]["error"]] if c else ["", ""]
            rows.append(row)
    return rows


def to_csv(doc: dict) -> str:
    buf = io.StringIO()
    buf.write(_header(doc["meta"]))
    w = csv.writer(buf, lineterminator="\n")
    res = doc["result"]
    if doc["meta"]["command"] == "table1":
        w.writerows(_table1_csv(res["cells"]))
        return buf.getvalue()
    records = res.get("rows") or res.get("checks") or [res]
    flat = []
    for r in records:
        d: dict = {}
        _flat("", r, d)
        flat.append(d)
    keys = list(dict.fromkeys(k for d in flat for k in d))
    w.writerow(keys)
    for d in flat:
        w.writerow([d.get(k, "") for k in keys])
    if "threshold" in res:
        d = {}
        _flat("threshold", res["threshold"], d)
        w.writerow([])
        w.writerow(list(d))
        w.writerow(list(d.values()))
    return buf.getvalue()


def _fmt(obj: Any) -> str:
    if isinstance(obj, dict) and set(obj) == {"value", "error"}:
        v, e = obj["value"], obj["error"]
        if v is None:
            return "nan"
        return f"{v:.10g}" if not e else f"{v:.10g} +- {e:.2g}"
    return str(obj)


def to_human(doc: dict) -> str:
    buf = io.StringIO()
    buf.write(_header(doc["meta"]))
    res = doc["result"]
    if doc["meta"]["command"] == "table1":
        for c in res["cells"]:
            buf.write(f"m={c['m']} n={c['n']}  alpha={_fmt(c['alpha'])}  H={_fmt(c['H'])}  "
                      f"A0^2={_fmt(c['A0_squared'])}  {c['verdict']}\n")
        return buf.getvalue()
    records = res.get("rows") or res.get("checks") or [res]
    for r in records:
        for k, v in r.items():
            buf.write(f"{k}: {_fmt(v) if not isinstance(v, list) else ', '.join(_fmt(x) for x in v)}\n")
        if len(records) > 1:
            buf.write("\n")
    if "threshold" in res:
        for k, v in res["threshold"].items():
            buf.write(f"threshold.{k}: {_fmt(v) if not isinstance(v, list) else ', '.join(_fmt(x) for x in v)}\n")
    return buf.getvalue()


def render(doc: dict, fmt: str) -> str:
    return {"json": to_json, "csv": to_csv, "human": to_human}[fmt](doc)


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = make_config(ns)
    except ValueError as exc:
        print(f"nlcone: error: {exc}", file=sys.stderr)
        return 2
    meta = meta_block(cfg)
    try:
        result = COMMANDS[cfg.command](cfg)
    except InconsistencyError as exc:
        if hasattr(exc, "result"):
            _emit(render({"meta": meta, "result": exc.result}, cfg.fmt), cfg.out)
        print(f"nlcone: inconsistency: {exc}", file=sys.stderr)
        return 4
    except ConvergenceError as exc:
        print(f"nlcone: non-convergence in stage {exc.stage}: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"nlcone: error: {exc}", file=sys.stderr)
        return 2
    _emit(render({"meta": meta, "result": result}, cfg.fmt), cfg.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
