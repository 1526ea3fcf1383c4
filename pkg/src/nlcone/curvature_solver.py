"""Nonlocal mean curvature of Lawson cones, the aperture alpha(s, m, n) and its s -> 0 limit.

Normalization
-------------
``mean_curvature_H`` returns

    H(alpha) = p.v. integral over r in (0, inf) of r^{m-1} (A(r) - B(r)) dr,

the reduced integral of the signed indicator (+1 on {|z| > alpha |y|}, -1
outside) against |x - p|^{-(N+s)} at p = (e1, alpha e1), with the angular
measure sin^{m-2} sin^{n-2} dtheta dphi and no sphere-area factors.  For
n = 1 the phi integral is the sum over z = +-|z|.  The true curvature at the
unit point p/|p| is ``(1 + alpha^2)^{s/2} A_{m-2} A_{n-2} H`` (``raw=True``).

Three evaluation routes give this number:

``surface``  (default) the divergence theorem turns the volume integral into
    (2 alpha^n / s) * integral over (0,1) of (r^{N-2} + r^s) K(r) dr
    with K the cone kernel weighted by cos(theta) - cos(phi).  No principal
    value is left, because x . nu(x) = 0 on a cone.
``halfspace``  subtract the indicator of the tangent half-space at p.  In
    polar coordinates about p the radial integral is explicit, leaving an
    absolutely convergent integral over directions.
``excision``  the literal radial principal value with symmetric excisions
    |r - 1| > eps and Richardson extrapolation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy.special import beta as beta_fn
from scipy.special import betainc, hyp2f1

from .angular import folded_radial_integral, symmetric_weight
from .cone_model import ConeParams, curvature_numerator, inner_sphere_factor
from .errors import BracketError, ConvergenceError, UnsupportedParameterError
from .quadrature import INNER, OUTER, IntegralResult, QuadSpec, integrate_1d, integrate_2d, integrate_pv

Route = Literal["surface", "halfspace", "excision"]
ROUTES: tuple[str, ...] = ("surface", "halfspace", "excision")

S_MIN, S_MAX = 0.01, 0.9
DEFAULT_ALPHA_TOL = 1e-6


@dataclass
class ApertureSolution:
    """Root of H (or of C_0 at s = 0) with its final bracket."""

    params: ConeParams
    residual: float
    bracket: tuple[float, float]
    method: str
    residual_error: float = 0.0
    slope: float = float("nan")
    evaluations: int = 0
    notes: list[str] = field(default_factory=list)

    @property
    def alpha(self) -> float:
        return self.params.alpha


def raw_curvature_factor(params: ConeParams) -> float:
    """Factor taking the reduced H to the curvature at the unit point p/|p|."""
    return (1.0 + params.alpha**2) ** (0.5 * params.s) * inner_sphere_factor(params.m, params.n)


# ---------------------------------------------------------------------------
# surface route


def _surface(params: ConeParams, outer: QuadSpec, inner: QuadSpec) -> IntegralResult:
    res = folded_radial_integral(params, symmetric_weight(params.N, params.s),
                                 curvature_numerator, outer, inner)
    return res.scaled(2.0 * params.alpha**params.n / params.s)


# ---------------------------------------------------------------------------
# half-space route
#
# Write x - p = R (cos(psi) (a-part), sin(psi) (b-part)) in the two half-planes
# (|y| direction, |z| direction).  Along a ray the signed indicator depends on
# sign(c1 + c2 R) with c1 = 2 alpha (sin(psi) cos(gb) - alpha cos(psi) cos(ga))
# and c2 = sin(psi)^2 - alpha^2 cos(psi)^2.  The tangent half-space keeps
# sign(c1) and contributes zero by symmetry; the difference integrates over R to
# (2/s) sign(c2) (|c2|/|c1|)^s when c1 c2 < 0.


def _hyp2f1_near_one(a, b, c, z, one_minus_z):
    """hyp2f1 with 1 - z passed separately: close to z = 1 it is recomputed
    from the exact complement in extended precision."""
    z = np.asarray(z, dtype=float)
    omz = np.asarray(one_minus_z, dtype=float)
    out = np.empty(z.shape)
    near = omz < 0.1
    out[~near] = hyp2f1(a, b, c, z[~near])
    if near.any():
        import mpmath as mp

        with mp.workdps(30):
            out[near] = [float(mp.hyp2f1(a, b, c, mp.mpf(1) - mp.mpf(float(o)))) for o in omz[near]]
    return out


def _gamma_b_integral(sp: float, k: np.ndarray, orient: float, n: int, s: float) -> np.ndarray:
    """Integral over {x in [-1,1] : orient (sp x - k) > 0} of |sp x - k|^{-s} (1-x^2)^{(n-3)/2} dx.

    Here x = cos(gamma_b).  Closed forms via Euler's integral for 2F1.
    """
    h = 0.5 * (n - 1)
    kk = orient * np.asarray(k, dtype=float)
    out = np.zeros(kk.shape)
    upper = sp - kk          # sp (1 - x*)
    lower = sp + kk          # sp (1 + x*)
    inside = (upper > 0) & (lower > 0)
    su, sl = upper[inside], lower[inside]
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        out[inside] = ((su * sl) ** (h - s) * sp ** (s - 2 * h) * 2 ** (s - 1) * beta_fn(1 - s, h)
                       * _hyp2f1_near_one(2 * h - s, 1 - s, 1 - s + h, su / (2 * sp), sl / (2 * sp)))
        full = (lower <= 0) & (upper > 0)
        uf, lf = upper[full], lower[full]
        out[full] = (2 ** (2 * h - 1) * uf ** (-s) * beta_fn(h, h)
                     * _hyp2f1_near_one(s, h, 2 * h, 2 * sp / uf, -lf / uf))
    # rounding can land a node exactly on the integrable singular curve
    return np.where(np.isfinite(out), out, 0.0)


def _halfspace(params: ConeParams, outer: QuadSpec, inner: QuadSpec) -> IntegralResult:
    m, n, s, a = params.m, params.n, params.s, params.alpha
    diag = {"fail": 0}

    def direction_integral(psi: float) -> tuple[float, float]:
        sp, cp = math.sin(psi), math.cos(psi)
        c2 = sp * sp - a * a * cp * cp
        if c2 == 0.0 or sp == 0.0 or cp == 0.0:
            return 0.0, 0.0
        t = sp / (a * cp)
        locs = tuple(sorted(math.acos(v) for v in (t, -t) if abs(v) < 1.0))
        pref = (2.0 / s) * math.copysign(1.0, c2) * abs(c2) ** s

        def g(ga):
            k = a * cp * np.cos(ga)
            if n == 1:
                tot = np.zeros_like(k)
                for sig in (1.0, -1.0):
                    c1 = 2.0 * a * (sp * sig - k)
                    with np.errstate(divide="ignore"):
                        tot = tot + np.where(c1 * c2 < 0, np.abs(c1) ** (-s), 0.0)
            else:
                tot = (2.0 * a) ** (-s) * _gamma_b_integral(sp, k, -math.copysign(1.0, c2), n, s)
            return np.sin(ga) ** (m - 2) * pref * tot

        spec = QuadSpec(inner.abs_tol, inner.rel_tol, inner.max_subdivisions, singularity_locations=locs)
        res = integrate_1d(g, 0.0, math.pi, spec)
        if not res.converged:
            diag["fail"] += 1
        return res.value, res.error_estimate

    def f(psi):
        flat = np.ravel(psi)
        vals = np.empty(flat.size)
        errs = np.empty(flat.size)
        for i, p in enumerate(flat):
            vals[i], errs[i] = direction_integral(float(p))
        w = np.cos(flat) ** (m - 1) * np.sin(flat) ** (n - 1)
        return (w * vals).reshape(np.shape(psi)), (w * errs).reshape(np.shape(psi))

    spec = QuadSpec(outer.abs_tol, outer.rel_tol, outer.max_subdivisions,
                    singularity_locations=(0.0, math.atan(a), 0.5 * math.pi))
    res = integrate_1d(f, 0.0, 0.5 * math.pi, spec)
    if diag["fail"]:
        res.converged = False
        res.note = "; ".join(x for x in (res.note, f"{diag['fail']} direction integrals unconverged") if x)
    return res


# ---------------------------------------------------------------------------
# excision route


def _sign_measure(kappa: np.ndarray, n: int) -> np.ndarray:
    """Integral over gamma in (0, pi) of sign(cos(gamma) - kappa) sin(gamma)^{n-2}."""
    if n == 1:
        return np.where(kappa < -1, 2.0, np.where(kappa > 1, -2.0, 0.0))
    h = 0.5 * (n - 1)
    total = 2 ** (2 * h - 1) * beta_fn(h, h)
    kc = np.clip(kappa, -1.0, 1.0)
    return total * (1.0 - 2.0 * betainc(h, h, 0.5 * (1.0 + kc)))


def signed_shell(params: ConeParams, r: float, spec: QuadSpec = INNER) -> IntegralResult:
    """A(r) - B(r): the signed indicator integrated over the slice |y| = r.

    The z half-plane is written in polar coordinates (t, gamma) about alpha e1;
    the gamma integral is explicit, leaving a (theta, t) integral.  The t range
    is split where the sign pattern changes, t = alpha |1 - r| and
    t = alpha (1 + r), and each piece is mapped so that the square-root
    behaviour at its ends becomes smooth.
    """
    m, n, s, a = params.m, params.n, params.s, params.alpha
    pw = -0.5 * (params.N + s)
    u = 1.0 - r
    t1, t2 = sorted((a * abs(u), a * (1.0 + r)))
    total = IntegralResult(0.0, 0.0, 0, True)
    for lo, hi in ((0.0, t1), (t1, t2), (t2, None)):
        if hi is not None and hi <= lo:
            continue

        def f(tau, sg, lo=lo, hi=hi):
            # theta = pi tau^2 matches the sqrt-scale of the t maps near the peak
            th = np.pi * tau * tau
            if hi is None:
                t = lo / (1.0 - sg * sg)
                dt = 2.0 * lo * sg / (1.0 - sg * sg) ** 2
            else:
                t = lo + (hi - lo) * 0.5 * (1.0 - np.cos(np.pi * sg))
                dt = (hi - lo) * 0.5 * np.pi * np.sin(np.pi * sg)
            d2 = u * u + 4.0 * r * np.sin(0.5 * th) ** 2
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                kappa = (a * a * (r * r - 1.0) - t * t) / (2.0 * a * t)
                val = (np.sin(th) ** (m - 2) * t ** (n - 1) * (d2 + t * t) ** pw
                       * _sign_measure(kappa, n) * dt * 2.0 * np.pi * tau)
            return np.where(np.isfinite(val), val, 0.0)

        scale = 0.3 * math.sqrt(min(abs(u), 1.0))
        piece = QuadSpec(spec.abs_tol, spec.rel_tol, spec.max_subdivisions,
                         singularity_locations=((0.0, 0.0),), singularity_scale=scale)
        total = total + integrate_2d(f, piece, domain=(0.0, 1.0, 0.0, 1.0))
    return total


def _excision(params: ConeParams, outer: QuadSpec, inner: QuadSpec) -> IntegralResult:
    m, s = params.m, params.s
    diag = {"fail": 0}

    def g(r, spec=inner):
        flat = np.ravel(r)
        vals = np.empty(flat.size)
        errs = np.empty(flat.size)
        for i, ri in enumerate(flat):
            res = signed_shell(params, float(ri), spec)
            vals[i], errs[i] = res.value, res.error_estimate
            if not res.converged:
                diag["fail"] += 1
        w = flat ** (m - 1)
        return (w * vals).reshape(np.shape(r)), (w * errs).reshape(np.shape(r))

    pv_spec = QuadSpec(outer.abs_tol, outer.rel_tol, outer.max_subdivisions,
                       pv_excision_sequence=outer.pv_excision_sequence,
                       pv_exponents=(1.0 - s, 1.0, 2.0 - s, 2.0, 3.0 - s))
    core = integrate_pv(g, 0.0, 2.0, pv_spec, center=1.0)

    def tail(v, spec):
        gv, ge = g(2.0 / v, spec)
        jac = 2.0 / np.asarray(v) ** 2
        return gv * jac, ge * jac

    # far shells are tiny and get multiplied by 2/v^2: only a relative target makes sense there
    far_inner = QuadSpec(1e-30, inner.rel_tol, inner.max_subdivisions)
    far = integrate_1d(lambda v: tail(v, far_inner), 0.0, 1.0,
                       QuadSpec(outer.abs_tol, outer.rel_tol, outer.max_subdivisions,
                                singularity_locations=(0.0,)))
    res = core + far
    if diag["fail"]:
        res.converged = False
        res.note = "; ".join(x for x in (res.note, f"{diag['fail']} shell integrals unconverged") if x)
    return res


_ROUTE_FUNCS = {"surface": _surface, "halfspace": _halfspace, "excision": _excision}


def mean_curvature(params: ConeParams, route: Route = "surface", outer: QuadSpec = OUTER,
                   inner: QuadSpec = INNER, raw: bool = False) -> IntegralResult:
    """H(alpha) with its error estimate; see the module docstring for the normalization."""
    if params.s <= 0.0:
        raise ValueError("mean curvature needs s > 0; the s = 0 aperture comes from alpha0")
    if route not in _ROUTE_FUNCS:
        raise ValueError(f"unknown route {route!r}; choose from {ROUTES}")
    res = _ROUTE_FUNCS[route](params, outer, inner)
    return res.scaled(raw_curvature_factor(params)) if raw else res


def mean_curvature_H(m: int, n: int, s: float, alpha: float, route: Route = "surface",
                     raw: bool = False) -> float:
    """H(alpha) as a plain number (reduced normalization unless ``raw``)."""
    res = mean_curvature(ConeParams(m, n, s, alpha), route, raw=raw)
    if not res.converged:
        raise ConvergenceError("mean_curvature", f"H({m},{n},{s},{alpha}) did not converge: {res.note}")
    return res.value


# ---------------------------------------------------------------------------
# root finding


def _check_pair(m: int, n: int) -> None:
    if m < n:
        raise ValueError(f"expected m >= n, got ({m}, {n})")
    if m + n < 3:
        raise ValueError("m + n = 2 is excluded (the answer there is alpha = 1 by symmetry)")


def solve_alpha(m: int, n: int, s: float, tol: float = DEFAULT_ALPHA_TOL,
                outer: QuadSpec = OUTER, inner: QuadSpec = INNER) -> ApertureSolution:
    """Unique alpha in (0, 1] with H(alpha) = 0, by bisection.

    H is decreasing in alpha, H(1) <= 0 and H -> +inf as alpha -> 0.  The
    bracket starts around the s = 0 aperture and is widened until the signs
    differ, then halved until its width is below ``tol``.
    """
    _check_pair(m, n)
    if not tol > 0:
        raise ValueError("tol must be positive")
    if not S_MIN <= s <= S_MAX:
        raise UnsupportedParameterError(f"solve_alpha supports s in [{S_MIN}, {S_MAX}], got {s}")
    if m == n:
        return ApertureSolution(ConeParams(m, n, s, 1.0), 0.0, (1.0, 1.0), "closed-form-symmetry")

    evals = 0
    cache: dict[float, IntegralResult] = {}

    def H(alpha):
        nonlocal evals
        if alpha not in cache:
            cache[alpha] = mean_curvature(ConeParams(m, n, s, alpha), "surface", outer, inner)
            evals += 1
            if not cache[alpha].converged:
                raise ConvergenceError("solve_alpha", f"H at alpha={alpha} unconverged: {cache[alpha].note}")
        return cache[alpha].value

    guess = alpha0(m, n).alpha
    step = 0.02
    lo, hi = guess, min(1.0, guess + step)
    if H(lo) > 0:
        while H(hi) > 0:
            if hi >= 1.0:
                raise BracketError("solve_alpha", f"H(1) = {H(1.0):.3e} > 0 contradicts H(1) <= 0")
            lo, hi = hi, min(1.0, hi + step)
            step *= 2
    else:
        hi = lo
        lo = guess - step
        while H(lo) <= 0:
            hi = lo
            step *= 2
            lo = lo - step
            if lo <= 1e-3:
                raise BracketError("solve_alpha", "H stays <= 0 down to alpha = 1e-3")
    h_lo, h_hi = H(lo), H(hi)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if abs(H(mid)) <= cache[mid].error_estimate:
            lo = hi = mid
            break
        if H(mid) > 0:
            lo = mid
        else:
            hi = mid
    alpha = 0.5 * (lo + hi)
    slope = (h_lo - h_hi) / max(hi - lo, 1e-300) if hi > lo else float("nan")
    final = mean_curvature(ConeParams(m, n, s, alpha), "surface", outer, inner)
    evals += 1
    lo_v, hi_v = cache.get(lo), cache.get(hi)
    if lo_v is not None and hi_v is not None and hi > lo:
        slope = (lo_v.value - hi_v.value) / (hi - lo)
    return ApertureSolution(ConeParams(m, n, s, alpha), final.value, (lo, hi), "bisection",
                            residual_error=final.error_estimate, slope=slope, evaluations=evals)


def c0_function(m: int, n: int, alpha: float, spec: QuadSpec = QuadSpec(1e-14, 1e-13)) -> IntegralResult:
    """C_0(alpha): integral of t^{n-1}(1+t^2)^{-N/2} over (alpha, inf) minus over (0, alpha).

    The infinite piece is folded by t -> 1/t into an integral of
    u^{m-1}(1+u^2)^{-N/2} over (0, 1/alpha).
    """
    N = m + n
    far = integrate_1d(lambda u: u ** (m - 1) * (1.0 + u * u) ** (-0.5 * N), 0.0, 1.0 / alpha, spec)
    near = integrate_1d(lambda t: t ** (n - 1) * (1.0 + t * t) ** (-0.5 * N), 0.0, alpha, spec)
    return far + near.scaled(-1.0)


def alpha0(m: int, n: int, tol: float = 1e-12) -> ApertureSolution:
    """s -> 0 aperture: the root of the strictly decreasing function C_0."""
    _check_pair(m, n)
    if not tol > 0:
        raise ValueError("tol must be positive")
    if m == n:
        return ApertureSolution(ConeParams(m, n, 0.0, 1.0), 0.0, (1.0, 1.0), "closed-form-symmetry")
    lo, hi = 1e-6, 1.0
    evals = 0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        evals += 1
        if c0_function(m, n, mid).value > 0:
            lo = mid
        else:
            hi = mid
    alpha = 0.5 * (lo + hi)
    res = c0_function(m, n, alpha)
    return ApertureSolution(ConeParams(m, n, 0.0, alpha), res.value, (lo, hi), "bisection",
                            residual_error=res.error_estimate, slope=2 * alpha ** (n - 1) * (1 + alpha**2) ** (-0.5 * (m + n)),
                            evaluations=evals + 1)
