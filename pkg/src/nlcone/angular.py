"""Angular kernels integrated over the cone and the folded radial integrals built on them.

At fixed radial ratio r = 1 - u the kernel family is

    K_g(r) = integral over [0, pi]^2 of sin(theta)^{m-2} sin(phi)^{n-2} g(theta, phi) D^{-(N+s)/2}

with D = |x - p|^2 from :func:`nlcone.cone_model.denominator`.  For n = 1 the
phi integral is replaced by the sum over the two branches.  Near u = 0 the
kernel peaks at theta = phi = 0 with width of order u, which is passed to the
quadrature as a singularity scale.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .cone_model import Branch, ConeParams, alignment, curvature_numerator, denominator
from .quadrature import INNER, OUTER, IntegralResult, QuadSpec, integrate_1d, integrate_2d

Numerator = Callable[[np.ndarray, np.ndarray, Branch], np.ndarray]


def unit_numerator(st, sp, branch):
    return np.ones_like(np.asarray(st, dtype=float))


def alignment_numerator(alpha: float) -> Numerator:
    return lambda st, sp, branch: alignment(st, sp, alpha, branch)


NUMERATORS: dict[str, Callable[[float], Numerator]] = {
    "hardy": lambda alpha: unit_numerator,
    "alignment": alignment_numerator,
    "curvature": lambda alpha: curvature_numerator,
}


def _peak_scale(params: ConeParams, u: float) -> float:
    r = 1.0 - u
    if r <= 0:
        return math.pi
    width = abs(u) * math.sqrt(1.0 + params.alpha**2) / (max(1.0, params.alpha) * math.sqrt(r))
    return min(0.5 * width, math.pi)


def _log_pow(x, k):
    # k * log(x), with 0 * log(0) taken as 0
    return k * np.log(x) if k else 0.0


def angular_integral(params: ConeParams, u: float, numerator: Numerator,
                     spec: QuadSpec = INNER, u_power: float = 0.0) -> IntegralResult:
    """Integrate ``numerator * D^{-(N+s)/2}`` over the angles at r = 1 - u.

    Any u < 1, u != 0 is accepted (u < 0 means r > 1).  The result is
    multiplied by ``|u|**u_power``.  The kernel is assembled in
    log space, since D^{-(N+s)/2} alone overflows for u below ~1e-22 while the
    scaled integral stays moderate.
    """
    m, n, alpha = params.m, params.n, params.alpha
    power = -0.5 * (params.N + params.s)
    scale = _peak_scale(params, u)
    log_u = u_power * math.log(abs(u)) if u_power else 0.0
    if n == 1:
        def branch_fn(branch):
            def f(th):
                st = np.sin(0.5 * th) ** 2
                d = denominator(u, st, 0.0, alpha, branch)
                with np.errstate(divide="ignore"):
                    logk = power * np.log(d) + _log_pow(np.sin(th), m - 2) + log_u
                return numerator(st, 0.0, branch) * np.exp(logk)
            return f
        inner = QuadSpec(spec.abs_tol, spec.rel_tol, spec.max_subdivisions,
                         singularity_locations=(0.0,), singularity_scale=scale)
        return (integrate_1d(branch_fn("interior"), 0.0, math.pi, inner)
                + integrate_1d(branch_fn("exterior"), 0.0, math.pi,
                               QuadSpec(spec.abs_tol, spec.rel_tol, spec.max_subdivisions)))

    def f(th, ph):
        st = np.sin(0.5 * th) ** 2
        sp = np.sin(0.5 * ph) ** 2
        d = denominator(u, st, sp, alpha)
        with np.errstate(divide="ignore"):
            logk = (power * np.log(d) + _log_pow(np.sin(th), m - 2)
                    + _log_pow(np.sin(ph), n - 2) + log_u)
        return numerator(st, sp, "interior") * np.exp(logk)

    inner = QuadSpec(spec.abs_tol, spec.rel_tol, spec.max_subdivisions,
                     singularity_locations=((0.0, 0.0),), singularity_scale=scale)
    return integrate_2d(f, inner)


def folded_radial_integral(params: ConeParams, weight: Callable[[np.ndarray], np.ndarray],
                           numerator: Numerator, outer: QuadSpec = OUTER,
                           inner: QuadSpec = INNER, u_power: float = 0.0) -> IntegralResult:
    """Integral over r in (0, 1) of ``weight(u) * K_g(1 - u)``, in the variable u = 1 - r.

    ``weight`` must already be divided by ``u**u_power``; the factor is moved
    onto the angular integral so neither piece overflows as u -> 0.

    Both ends are treated as endpoint singularities (tanh-sinh): the kernel
    blows up like u^{-(2+s)} at u = 0, which the weights tame, and weights
    such as r^s are singular at r = 0.
    """
    diag = {"inner_failures": 0}

    def f(u):
        flat = np.ravel(u)
        vals = np.empty(flat.size)
        errs = np.empty(flat.size)
        for i, ui in enumerate(flat):
            if ui <= 0.0:
                vals[i] = errs[i] = 0.0
                continue
            res = angular_integral(params, float(ui), numerator, inner, u_power)
            vals[i], errs[i] = res.value, res.error_estimate
            if not res.converged:
                diag["inner_failures"] += 1
        w = weight(flat)
        return (w * vals).reshape(np.shape(u)), (np.abs(w) * errs).reshape(np.shape(u))

    spec = QuadSpec(outer.abs_tol, outer.rel_tol, outer.max_subdivisions,
                    singularity_locations=(0.0, 1.0))
    res = integrate_1d(f, 0.0, 1.0, spec)
    if diag["inner_failures"]:
        res.converged = False
        res.note = "; ".join(x for x in (res.note, f"{diag['inner_failures']} angular integrals unconverged") if x)
    return res


# ---------------------------------------------------------------------------
# radial weights, written in u = 1 - r


def hardy_weight(N: int, s: float, beta: float, u_power: float = 0.0) -> Callable[[np.ndarray], np.ndarray]:
    """(r^{N-2} - r^{N-2-beta} + r^s - r^{beta+s}) / u^u_power, cancellation-free.

    The weight equals r^s (r^{N-2-beta-s} - 1)(r^beta - 1): a product of two
    expm1 terms, each vanishing linearly at r = 1, so u_power = 2 leaves a
    bounded function.
    """
    def w(u):
        u = np.asarray(u, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            lr = np.log1p(-u)
            out = np.exp(s * lr) * np.expm1((N - 2 - beta - s) * lr) * np.expm1(beta * lr)
            out = np.where(np.isfinite(lr), out, 0.0 if s > 0 else 1.0)
            if u_power:
                out = out / u**u_power
        return out
    return w


def symmetric_weight(N: int, s: float) -> Callable[[np.ndarray], np.ndarray]:
    """r^{N-2} + r^s: the weight produced by folding (1, inf) onto (0, 1)."""
    def w(u):
        r = 1.0 - np.asarray(u, dtype=float)
        return r ** (N - 2) + r**s
    return w
