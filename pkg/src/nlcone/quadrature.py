"""Adaptive quadrature for smooth, endpoint-singular, peaked and principal-value integrals.

Integrands are vectorized: they receive an ndarray of abscissae (two arrays in
2D) and return an ndarray of the same shape.  An integrand may instead return
a pair ``(values, errors)`` when every value is itself the output of a nested
integration; the nested errors are then folded into the error budget.

Three strategies are used by :func:`integrate_1d`:

* endpoint singularities (declared in ``singularity_locations`` with
  ``singularity_scale == 0``) are handled by tanh-sinh substitution;
* peaked integrands (declared locations with a positive
  ``singularity_scale``) start from a mesh graded geometrically towards the
  peak and are then refined adaptively with Gauss-Kronrod 7/15 panels;
* everything else goes through plain globally adaptive Gauss-Kronrod.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

_EPS = float(np.finfo(float).eps)
_HALF_PI = 0.5 * math.pi

# hard caps on live panels, independent of max_subdivisions, to bound memory
MAX_PANELS = 20000
MAX_RECTANGLES = 8000
MAX_TS_LEVELS = 12

DEFAULT_LADDER = tuple(0.1 * 2.0**-k for k in range(11))

# Gauss-Kronrod 7/15 abscissae and weights on [-1, 1] (QUADPACK qk15).
_XGK_HALF = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
])
_WGK_HALF = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG_HALF = np.array([
    0.0,
    0.129484966168869693270611432679082,
    0.0,
    0.279705391489276667901467771423780,
    0.0,
    0.381830050505118944950369775488975,
    0.0,
    0.417959183673469387755102040816327,
])

XK = np.concatenate([-_XGK_HALF[:-1], _XGK_HALF[::-1]])
WK = np.concatenate([_WGK_HALF[:-1], _WGK_HALF[::-1]])
WG = np.concatenate([_WG_HALF[:-1], _WG_HALF[::-1]])


class QuadratureError(RuntimeError):
    """Raised when a caller asks for a hard failure on non-convergence."""


@dataclass(frozen=True)
class QuadSpec:
    """Tolerances and singularity hints for one integration.

    ``max_subdivisions`` bounds the number of refinement passes (adaptive
    rules) or step halvings (tanh-sinh).  ``singularity_scale`` is the width of
    a near-singular peak sitting at the declared locations; zero means the
    locations are genuine endpoint singularities.  ``pv_exponents`` are the
    powers of the excision radius eliminated by Richardson extrapolation in
    :func:`integrate_pv`.
    """

    abs_tol: float = 1e-9
    rel_tol: float = 1e-8
    max_subdivisions: int = 200
    pv_excision_sequence: tuple[float, ...] = DEFAULT_LADDER
    singularity_locations: tuple = ()
    singularity_scale: float = 0.0
    pv_exponents: tuple[float, ...] = (1.0, 2.0, 3.0)

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("abs_tol and rel_tol must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")
        ladder = tuple(float(e) for e in self.pv_excision_sequence)
        if not ladder or any(e <= 0 for e in ladder):
            raise ValueError("pv_excision_sequence must hold positive radii")
        if any(b >= a for a, b in zip(ladder, ladder[1:])):
            raise ValueError("pv_excision_sequence must be strictly decreasing")
        if self.singularity_scale < 0:
            raise ValueError("singularity_scale must be >= 0")
        object.__setattr__(self, "pv_excision_sequence", ladder)
        object.__setattr__(self, "singularity_locations", tuple(self.singularity_locations))

    def tolerance(self, value: float) -> float:
        return max(self.abs_tol, self.rel_tol * abs(value))


INNER = QuadSpec(abs_tol=1e-9, rel_tol=1e-8)
OUTER = QuadSpec(abs_tol=1e-7, rel_tol=1e-6)


@dataclass
class IntegralResult:
    """Quadrature value with an a-posteriori error estimate.

    ``converged`` is set when the estimate met ``max(abs_tol, rel_tol*|value|)``
    or hit the floating-point floor of the integrand magnitude; the latter is
    recorded in ``note``.
    """

    value: float
    error_estimate: float
    evaluations: int
    converged: bool
    note: str = ""

    def __add__(self, other: "IntegralResult") -> "IntegralResult":
        return IntegralResult(
            self.value + other.value,
            self.error_estimate + other.error_estimate,
            self.evaluations + other.evaluations,
            self.converged and other.converged,
            "; ".join(n for n in (self.note, other.note) if n),
        )

    def scaled(self, factor: float) -> "IntegralResult":
        return IntegralResult(self.value * factor, self.error_estimate * abs(factor),
                              self.evaluations, self.converged, self.note)


def _call(f, *args):
    out = f(*args)
    if isinstance(out, tuple):
        vals, errs = out
        return np.asarray(vals, dtype=float), np.asarray(errs, dtype=float)
    return np.asarray(out, dtype=float), None


def _kronrod_error(k, g, resasc):
    # QUADPACK heuristic: sharpen |K - G| when the panel is well resolved
    raw = np.abs(k - g)
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = np.where(resasc > 0, resasc * np.minimum(1.0, (200.0 * raw / resasc) ** 1.5), raw)
    return np.maximum(np.nan_to_num(scaled, nan=raw), 0.0)


def _gk_panels(f, lo, hi):
    """Apply G7/K15 to every panel [lo_i, hi_i]; returns value, error, |f| mass, nested error."""
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    x = mid[:, None] + half[:, None] * XK[None, :]
    vals, errs = _call(f, x)
    k = half * (vals @ WK)
    g = half * (vals @ WG)
    mean = (vals @ WK) / 2.0
    resasc = half * (np.abs(vals - mean[:, None]) @ WK)
    resabs = half * (np.abs(vals) @ WK)
    nested = half * (errs @ WK) if errs is not None else np.zeros_like(k)
    return k, _kronrod_error(k, g, resasc), resabs, nested


def _select_for_split(errs, total_err, tol, splittable):
    order = np.argsort(-errs)
    order = order[splittable[order]]
    if order.size == 0:
        return order
    cum = np.cumsum(errs[order])
    k = int(np.searchsorted(cum, total_err - 0.5 * tol)) + 1
    return order[:max(1, min(k, order.size))]


def _graded_breaks(a: float, b: float, locations: Sequence[float], scale: float) -> np.ndarray:
    """Breakpoints on [a, b] graded geometrically (ratio 2) towards each location."""
    pts = {a, b}
    for c in locations:
        c = float(c)
        if not a <= c <= b:
            continue
        pts.add(c)
        for side, room in ((-1.0, c - a), (1.0, b - c)):
            h = scale
            while h < room:
                pts.add(c + side * h)
                h *= 2.0
    return np.array(sorted(pts))


def _adaptive_gk(f, breaks, spec: QuadSpec) -> IntegralResult:
    lo, hi = breaks[:-1].astype(float), breaks[1:].astype(float)
    val, err, resabs, nested = _gk_panels(f, lo, hi)
    evals = lo.size * XK.size
    passes = 0
    note = ""
    while True:
        total = float(val.sum())
        total_err = float(err.sum())
        floor = 50.0 * _EPS * float(resabs.sum())
        tol = spec.tolerance(total)
        if not math.isfinite(total + total_err):
            converged = False
            note = "non-finite integrand values"
            break
        if total_err <= tol or total_err <= floor:
            if total_err > tol:
                note = "roundoff-limited"
            converged = True
            break
        if lo.size > MAX_PANELS:
            converged = False
            note = f"panel budget of {MAX_PANELS} exhausted"
            break
        if passes >= spec.max_subdivisions:
            converged = False
            note = f"no convergence after {passes} refinement passes"
            break
        splittable = (err > 50.0 * _EPS * resabs) & (hi - lo > 4 * _EPS * np.maximum(np.abs(lo), np.abs(hi)))
        chosen = _select_for_split(err, total_err, tol, splittable)
        if chosen.size == 0:
            converged = total_err <= max(tol, 1e3 * floor)
            note = "roundoff-limited" if converged else "panels cannot be split further"
            break
        keep = np.ones(lo.size, dtype=bool)
        keep[chosen] = False
        c_lo, c_hi = lo[chosen], hi[chosen]
        c_mid = 0.5 * (c_lo + c_hi)
        n_lo = np.concatenate([c_lo, c_mid])
        n_hi = np.concatenate([c_mid, c_hi])
        n_val, n_err, n_abs, n_nest = _gk_panels(f, n_lo, n_hi)
        evals += n_lo.size * XK.size
        lo = np.concatenate([lo[keep], n_lo])
        hi = np.concatenate([hi[keep], n_hi])
        val = np.concatenate([val[keep], n_val])
        err = np.concatenate([err[keep], n_err])
        resabs = np.concatenate([resabs[keep], n_abs])
        nested = np.concatenate([nested[keep], n_nest])
        passes += 1
    nested_err = float(nested.sum())
    return IntegralResult(float(val.sum()), float(err.sum()) + nested_err, evals, converged, note)


# ---------------------------------------------------------------------------
# tanh-sinh


def _ts_nodes(t: np.ndarray):
    """Distance to the nearer endpoint of [-1, 1] and the weight dx/dt."""
    u = _HALF_PI * np.sinh(np.abs(t))
    # 1 - tanh(u) = 2 / (exp(2u) + 1), kept exact for large u
    dist = 2.0 / (np.exp(np.minimum(2.0 * u, 1400.0)) + 1.0)
    w = _HALF_PI * np.cosh(t) / np.cosh(np.minimum(u, 700.0)) ** 2
    return dist, w


def _ts_points(t, a, b):
    dist, w = _ts_nodes(t)
    half = 0.5 * (b - a)
    x = np.where(t < 0, a + half * dist, b - half * dist)
    x = np.where(t == 0, 0.5 * (a + b), x)
    return x, w * half


def _ts_sum(f, t, a, b, stats):
    x, w = _ts_points(t, a, b)
    keep = w > 0
    x, w, t = x[keep], w[keep], t[keep]
    if x.size == 0:
        return 0.0, 0.0, 0.0
    vals, errs = _call(f, x)
    stats["evals"] += x.size
    terms = w * vals
    nested = float(np.sum(w * errs)) if errs is not None else 0.0
    return float(terms.sum()), float(np.abs(terms).sum()), nested


def _tanh_sinh(f, a: float, b: float, spec: QuadSpec) -> IntegralResult:
    """Tanh-sinh quadrature on [a, b] with endpoint-adaptive truncation.

    Endpoint abscissae are formed as ``a + distance`` / ``b - distance`` so that
    an integrand written in terms of the distance to a singular endpoint at 0
    keeps full relative precision.
    """
    stats = {"evals": 0}
    t_core = 3.0
    h = 0.5

    # level 0 on the core window, then extend outwards while tails matter
    t0 = np.arange(-t_core, t_core + 0.5 * h, h)
    s_core, a_core, nest = _ts_sum(f, t0, a, b, stats)
    t_hi = t_core

    def extend(total, absum, nested, t_hi, step):
        while t_hi < 6.5:
            t_new = np.arange(t_hi + step, t_hi + 0.5 + 0.5 * step, step)
            t_new = np.concatenate([-t_new, t_new])
            s, ab, ne = _ts_sum(f, t_new, a, b, stats)
            total += s
            absum += ab
            nested += ne
            t_hi += 0.5
            if ab <= 1e-3 * spec.tolerance(total):
                break
        return total, absum, nested, t_hi

    total, absum, nested, t_hi = extend(s_core, a_core, nest, t_hi, h)
    estimates = [total * h]
    converged = False
    err = math.inf
    level = 0
    while level < min(spec.max_subdivisions, MAX_TS_LEVELS):
        level += 1
        h *= 0.5
        t_mid = np.arange(-t_hi + h, t_hi, 2 * h)
        s, ab, ne = _ts_sum(f, t_mid, a, b, stats)
        total += s
        absum += ab
        nested += ne
        estimates.append(total * h)
        d1 = abs(estimates[-1] - estimates[-2])
        floor = 50.0 * _EPS * absum * h
        if len(estimates) >= 3 and d1 > 0:
            d2 = abs(estimates[-1] - estimates[-3])
            # quadratic convergence: err_k ~ d1^2 / d2 (Bailey's estimate)
            err = min(d1, d1 * d1 / d2) if d2 > 0 else d1
        else:
            err = d1
        err = max(err, floor)
        if not math.isfinite(estimates[-1] + err):
            return IntegralResult(estimates[-1], math.inf, stats["evals"], False,
                                  "non-finite integrand values")
        if level >= 3 and (err <= spec.tolerance(estimates[-1]) or d1 <= floor):
            converged = True
            break
    note = "" if converged else f"no convergence after {level} halvings"
    return IntegralResult(estimates[-1], err + nested * h, stats["evals"], converged, note)


# ---------------------------------------------------------------------------
# public 1D / 2D / p.v. entry points


def integrate_1d(f: Callable, a: float, b: float, spec: QuadSpec = INNER) -> IntegralResult:
    """Integrate a vectorized ``f`` over the finite interval [a, b].

    Locations in ``spec.singularity_locations`` lying strictly inside (a, b)
    split the interval.  With ``singularity_scale == 0`` each piece touching a
    declared location is integrated by tanh-sinh; with a positive scale the
    mesh is graded towards the locations and refined by Gauss-Kronrod.
    """
    a, b = float(a), float(b)
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ValueError("integrate_1d needs a finite interval; fold infinite ranges first")
    if a == b:
        return IntegralResult(0.0, 0.0, 0, True)
    if a > b:
        return integrate_1d(f, b, a, spec).scaled(-1.0)
    locs = sorted({float(c) for c in spec.singularity_locations if a <= float(c) <= b})
    if spec.singularity_scale > 0:
        return _adaptive_gk(f, _graded_breaks(a, b, locs, spec.singularity_scale), spec)
    if not locs:
        return _adaptive_gk(f, np.array([a, b]), spec)
    cuts = sorted({a, b, *locs})
    result = IntegralResult(0.0, 0.0, 0, True)
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        if lo in locs or hi in locs:
            result = result + _tanh_sinh(f, lo, hi, spec)
        else:
            result = result + _adaptive_gk(f, np.array([lo, hi]), spec)
    return result


def _gk_rects(f, x0, x1, y0, y1):
    hx, mx = 0.5 * (x1 - x0), 0.5 * (x1 + x0)
    hy, my = 0.5 * (y1 - y0), 0.5 * (y1 + y0)
    X = mx[:, None, None] + hx[:, None, None] * XK[None, :, None]
    Y = my[:, None, None] + hy[:, None, None] * XK[None, None, :]
    X, Y = np.broadcast_arrays(X, Y)
    vals, errs = _call(f, X, Y)
    jac = hx * hy
    k = jac * np.einsum("rij,i,j->r", vals, WK, WK)
    g = jac * np.einsum("rij,i,j->r", vals, WG, WG)
    mean = k / (4.0 * jac) if np.all(jac > 0) else np.zeros_like(k)
    resasc = jac * np.einsum("rij,i,j->r", np.abs(vals - mean[:, None, None]), WK, WK)
    resabs = jac * np.einsum("rij,i,j->r", np.abs(vals), WK, WK)
    nested = jac * np.einsum("rij,i,j->r", errs, WK, WK) if errs is not None else np.zeros_like(k)
    return k, _kronrod_error(k, g, resasc), resabs, nested


def _corner_mesh(x0, x1, y0, y1, cx, cy, scale):
    """Rectangles graded geometrically (ratio 2) towards the point (cx, cy).

    Each quadrant around the point is covered by L-shaped shells
    ``h <= max(|x-cx|, |y-cy|) <= 2h`` split into three rectangles, so the
    panel count grows with log(size/scale) rather than its square.
    """
    rects = []
    for sx, lx in ((-1.0, cx - x0), (1.0, x1 - cx)):
        for sy, ly in ((-1.0, cy - y0), (1.0, y1 - cy)):
            if lx <= 0 or ly <= 0:
                continue
            big = max(lx, ly)
            h = min(scale, big) if scale > 0 else big
            local = [(0.0, min(h, lx), 0.0, min(h, ly))]
            while h < big:
                h2 = 2.0 * h
                local += [(h, h2, 0.0, h), (0.0, h, h, h2), (h, h2, h, h2)]
                h = h2
            for a0, a1, b0, b1 in local:
                a0, a1 = min(a0, lx), min(a1, lx)
                b0, b1 = min(b0, ly), min(b1, ly)
                if a1 <= a0 or b1 <= b0:
                    continue
                xa, xb = sorted((cx + sx * a0, cx + sx * a1))
                ya, yb = sorted((cy + sy * b0, cy + sy * b1))
                rects.append((xa, xb, ya, yb))
    return np.array(rects).T


def integrate_2d(f: Callable, spec: QuadSpec = INNER,
                 domain: tuple[float, float, float, float] = (0.0, math.pi, 0.0, math.pi)) -> IntegralResult:
    """Adaptive-rectangle integration of ``f(x, y)`` over ``domain``.

    Each rectangle carries a tensor Gauss-Kronrod 7/15 rule.  Declared
    singular points are made rectangle corners; with a positive
    ``singularity_scale`` the initial mesh is graded towards them.
    """
    x0, x1, y0, y1 = (float(v) for v in domain)
    pts = [tuple(map(float, p)) for p in spec.singularity_locations]
    if len(pts) > 1:
        raise ValueError("integrate_2d supports a single declared singular point")
    if pts:
        x0r, x1r, y0r, y1r = _corner_mesh(x0, x1, y0, y1, pts[0][0], pts[0][1], spec.singularity_scale)
    else:
        xm, ym = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
        x0r, x1r = np.array([x0, xm, x0, xm]), np.array([xm, x1, xm, x1])
        y0r, y1r = np.array([y0, y0, ym, ym]), np.array([ym, ym, y1, y1])
    keep_area = (x1r > x0r) & (y1r > y0r)
    x0r, x1r, y0r, y1r = x0r[keep_area], x1r[keep_area], y0r[keep_area], y1r[keep_area]
    val, err, resabs, nested = _gk_rects(f, x0r, x1r, y0r, y1r)
    evals = x0r.size * XK.size**2
    passes = 0
    note = ""
    while True:
        total = float(val.sum())
        total_err = float(err.sum())
        floor = 50.0 * _EPS * float(resabs.sum())
        tol = spec.tolerance(total)
        if not math.isfinite(total + total_err):
            converged = False
            note = "non-finite integrand values"
            break
        if total_err <= tol or total_err <= floor:
            converged = True
            if total_err > tol:
                note = "roundoff-limited"
            break
        if x0r.size > MAX_RECTANGLES:
            converged = False
            note = f"rectangle budget of {MAX_RECTANGLES} exhausted"
            break
        if passes >= spec.max_subdivisions:
            converged = False
            note = f"no convergence after {passes} refinement passes"
            break
        splittable = err > 50.0 * _EPS * resabs
        chosen = _select_for_split(err, total_err, tol, splittable)
        if chosen.size == 0:
            converged = total_err <= max(tol, 1e3 * floor)
            note = "roundoff-limited" if converged else "rectangles cannot be split further"
            break
        keep = np.ones(x0r.size, dtype=bool)
        keep[chosen] = False
        a0, a1, b0, b1 = x0r[chosen], x1r[chosen], y0r[chosen], y1r[chosen]
        am, bm = 0.5 * (a0 + a1), 0.5 * (b0 + b1)
        n_x0 = np.concatenate([a0, am, a0, am])
        n_x1 = np.concatenate([am, a1, am, a1])
        n_y0 = np.concatenate([b0, b0, bm, bm])
        n_y1 = np.concatenate([bm, bm, b1, b1])
        n_val, n_err, n_abs, n_nest = _gk_rects(f, n_x0, n_x1, n_y0, n_y1)
        evals += n_x0.size * XK.size**2
        x0r = np.concatenate([x0r[keep], n_x0])
        x1r = np.concatenate([x1r[keep], n_x1])
        y0r = np.concatenate([y0r[keep], n_y0])
        y1r = np.concatenate([y1r[keep], n_y1])
        val = np.concatenate([val[keep], n_val])
        err = np.concatenate([err[keep], n_err])
        resabs = np.concatenate([resabs[keep], n_abs])
        nested = np.concatenate([nested[keep], n_nest])
        passes += 1
    return IntegralResult(float(val.sum()), float(err.sum() + nested.sum()), evals, converged, note)


def richardson(values: Sequence[float], radii: Sequence[float], exponents: Sequence[float]):
    """Extrapolate ``S(eps) = S0 + sum c_j eps**gamma_j`` to eps -> 0.

    Returns the best estimate and the difference to the next-best diagonal
    entry, used as the extrapolation residual.
    """
    vals = [float(v) for v in values]
    eps = [float(e) for e in radii]
    table = [vals]
    for j, gamma in enumerate(exponents):
        prev = table[-1]
        if len(prev) < 2:
            break
        col = []
        for k in range(1, len(prev)):
            e_old, e_new = eps[k - 1 + j] ** gamma, eps[k + j] ** gamma
            col.append((e_old * prev[k] - e_new * prev[k - 1]) / (e_old - e_new))
        table.append(col)
    best = table[-1][-1]
    if len(table[-1]) >= 2:
        resid = abs(table[-1][-1] - table[-1][-2])
    else:
        resid = abs(best - table[-2][-1])
    return best, resid


def integrate_pv(f: Callable, a: float, b: float, spec: QuadSpec = OUTER,
                 center: float = 1.0) -> IntegralResult:
    """Principal value of the integral of ``f`` over [a, b] with a singularity at ``center``.

    Symmetric excisions ``|x - center| > eps_k`` follow
    ``spec.pv_excision_sequence``.  The ladder increments are integrated with
    the pairing ``f(center - u) + f(center + u)``, which removes the odd
    leading part of the singularity, and the partial sums are extrapolated by
    Richardson over ``spec.pv_exponents``.
    """
    a, b, c = float(a), float(b), float(center)
    ladder = spec.pv_excision_sequence
    if not a < c < b:
        raise ValueError("center must lie strictly inside (a, b)")
    if ladder[0] >= min(c - a, b - c):
        raise ValueError("largest excision radius must fit inside (a, b)")
    inner = QuadSpec(abs_tol=spec.abs_tol / (4 * len(ladder)), rel_tol=spec.rel_tol / 4,
                     max_subdivisions=spec.max_subdivisions)

    def paired(u):
        v1, e1 = _call(f, c - u)
        v2, e2 = _call(f, c + u)
        if e1 is None and e2 is None:
            return v1 + v2
        e1 = np.zeros_like(v1) if e1 is None else e1
        e2 = np.zeros_like(v2) if e2 is None else e2
        return v1 + v2, e1 + e2

    outer = integrate_1d(f, a, c - ladder[0], inner) + integrate_1d(f, c + ladder[0], b, inner)
    partial = [outer.value]
    increments = []
    budget = outer
    for e_hi, e_lo in zip(ladder[:-1], ladder[1:]):
        inc = integrate_1d(paired, e_lo, e_hi, inner)
        increments.append(inc.value)
        budget = budget + inc
        partial.append(partial[-1] + inc.value)
    best, resid = richardson(partial, ladder, spec.pv_exponents)
    err = resid + budget.error_estimate
    note = budget.note
    converged = budget.converged and err <= spec.tolerance(best)
    if len(increments) >= 3:
        tail = [abs(v) for v in increments[-3:]]
        if tail[2] >= 0.9 * tail[1] >= 0.81 * tail[0] and tail[2] > spec.tolerance(best):
            converged = False
            note = "divergent: excision ladder does not stabilize"
            err = math.inf
    return IntegralResult(best, err, budget.evaluations, converged, note)
