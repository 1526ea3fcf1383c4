"""Hardy constant, the potential A0^2 and the stability verdict of a Lawson cone.

Normalization
-------------
Reduced ("normalized") constants are the folded radial integrals

    C(beta) = integral over (0,1) of w_beta(r) I(r) dr,
    A0^2    = integral over (0,1) of (r^{N-2} + r^s) J(r) dr,

where I and J are the angular kernels of :mod:`nlcone.angular` (unit and
alignment numerators) and w_beta is :func:`nlcone.angular.hardy_weight`.
These are the numbers tabulated for s = 0 and m = 4, n = 3.  The surface
integrals at the unit point of the cone ("raw") are the reduced values times

    (1 + alpha^2)^{(2+s)/2} alpha^{n-1} A_{m-2} A_{n-2},

with A_{n-2} read as 1 when n = 1.  Both share the sign of H - A0^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Literal

import numpy as np

from .angular import (alignment_numerator, angular_integral, folded_radial_integral, hardy_weight,
                      symmetric_weight, unit_numerator)
from .cone_model import ConeParams, inner_sphere_factor
from .curvature_solver import ApertureSolution, alpha0, solve_alpha
from .errors import ConvergenceError
from .quadrature import INNER, OUTER, IntegralResult, QuadSpec, integrate_1d, integrate_pv

Verdict = Literal["stable", "unstable"]


def raw_factor(params: ConeParams) -> float:
    """Factor taking reduced constants to surface integrals at the unit point."""
    a = params.alpha
    return (1.0 + a * a) ** (0.5 * (2.0 + params.s)) * a ** (params.n - 1) * inner_sphere_factor(params.m, params.n)


def _check_beta(params: ConeParams, beta: float) -> None:
    top = params.N - 2 - params.s
    if not 0.0 < beta < top:
        raise ValueError(f"beta must lie in (0, {top:g}) for (m, n, s) = ({params.m}, {params.n}, {params.s:g}), got {beta}")


def c_integral(params: ConeParams, beta: float, outer: QuadSpec = OUTER,
               inner: QuadSpec = INNER, raw: bool = False) -> IntegralResult:
    """C(m, n, s, beta) with its error estimate."""
    _check_beta(params, beta)
    # the weight vanishes like u^2 at r = 1; u^2 is moved onto the kernel
    res = folded_radial_integral(params, hardy_weight(params.N, params.s, beta, u_power=2.0),
                                 unit_numerator, outer, inner, u_power=2.0)
    return res.scaled(raw_factor(params)) if raw else res


def a0_integral(params: ConeParams, outer: QuadSpec = OUTER, inner: QuadSpec = INNER,
                raw: bool = False) -> IntegralResult:
    """A0(m, n, s)^2 with its error estimate."""
    res = folded_radial_integral(params, symmetric_weight(params.N, params.s),
                                 alignment_numerator(params.alpha), outer, inner)
    return res.scaled(raw_factor(params)) if raw else res


def _value(res: IntegralResult, stage: str) -> float:
    if not res.converged:
        raise ConvergenceError(stage, f"quadrature did not converge (estimate {res.value:.6g} +- {res.error_estimate:.2g}): {res.note}")
    return res.value


def C_constant(m: int, n: int, s: float, beta: float, alpha: float, raw: bool = False) -> float:
    """Generalized Hardy constant C(m, n, s, beta), reduced unless ``raw``."""
    return _value(c_integral(ConeParams(m, n, s, alpha), beta, raw=raw), "C_constant")


def hardy_constant(m: int, n: int, s: float, alpha: float, raw: bool = False) -> float:
    """H(m, n, s) = C at the midpoint beta = (N - 2 - s)/2."""
    p = ConeParams(m, n, s, alpha)
    return _value(c_integral(p, p.hardy_beta(), raw=raw), "hardy_constant")


def a0_squared(m: int, n: int, s: float, alpha: float, raw: bool = False) -> float:
    """A0(m, n, s)^2, reduced unless ``raw``."""
    return _value(a0_integral(ConeParams(m, n, s, alpha), raw=raw), "a0_squared")


# ---------------------------------------------------------------------------
# report


@dataclass
class StabilityReport:
    """H and A0^2 at one cone.  ``H_value`` and ``A0_squared`` are raw."""

    params: ConeParams
    H_value: float
    A0_squared: float
    H_normalized: float
    A0_normalized: float
    verdict: Verdict
    margin: float
    alpha_source: str
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.A0_squared < 0:
            raise ValueError("A0^2 must be nonnegative")

    @property
    def margin_normalized(self) -> float:
        return self.H_normalized - self.A0_normalized


def resolve_alpha(m: int, n: int, s: float) -> ApertureSolution:
    """Aperture used for a report: alpha0 at s = 0, the root of H otherwise."""
    return alpha0(m, n) if s == 0.0 else solve_alpha(m, n, s)


def stability_report(m: int, n: int, s: float, alpha: float | None = None,
                     outer: QuadSpec = OUTER, inner: QuadSpec = INNER) -> StabilityReport:
    """Compute H and A0^2 and compare them.

    Without ``alpha`` the aperture is resolved through :func:`resolve_alpha`;
    the source is recorded in ``alpha_source``.
    """
    if alpha is None:
        sol = resolve_alpha(m, n, s)
        alpha, source = sol.alpha, f"alpha0 ({sol.method})" if s == 0.0 else f"solve_alpha ({sol.method})"
        alpha_error = 0.5 * (sol.bracket[1] - sol.bracket[0])
    else:
        source, alpha_error = "supplied", 0.0
    p = ConeParams(m, n, s, alpha)
    h = c_integral(p, p.hardy_beta(), outer, inner)
    a = a0_integral(p, outer, inner)
    h_val = _value(h, "stability_report:H")
    a_val = _value(a, "stability_report:A0")
    f = raw_factor(p)
    margin = f * (h_val - a_val)
    return StabilityReport(
        params=p, H_value=f * h_val, A0_squared=f * a_val, H_normalized=h_val, A0_normalized=a_val,
        verdict="stable" if h_val >= a_val else "unstable", margin=margin, alpha_source=source,
        diagnostics={"H_error": h.error_estimate, "A0_error": a.error_estimate,
                     "H_error_raw": f * h.error_estimate, "A0_error_raw": f * a.error_estimate,
                     "raw_factor": f, "alpha_error": alpha_error, "evaluations": h.evaluations + a.evaluations,
                     "margin_resolved": abs(h_val - a_val) > h.error_estimate + a.error_estimate},
    )


# ---------------------------------------------------------------------------
# Jacobi operator probe


@dataclass
class JacobiProbe:
    """Direct principal value against the prediction -C, both raw.

    Iterating yields ``(pv_term, predicted)``.
    """

    params: ConeParams
    beta: float
    pv_term: float
    pv_error: float
    predicted: float
    predicted_error: float
    converged: bool
    note: str = ""

    def __iter__(self) -> Iterator[float]:
        return iter((self.pv_term, self.predicted))

    @property
    def discrepancy(self) -> float:
        return self.pv_term - self.predicted

    @property
    def combined_error(self) -> float:
        return self.pv_error + self.predicted_error


def jacobi_pv_integral(params: ConeParams, beta: float, outer: QuadSpec = OUTER,
                       inner: QuadSpec = INNER) -> IntegralResult:
    """p.v. integral over the cone of (|y|^{-beta} - 1) |y - p|^{-(N+s)}, raw.

    This is the literal unfolded integral over r in (0, inf), with symmetric
    excision about r = 1 and Richardson extrapolation; it shares only the
    angular kernel with the folded C-integral.
    """
    _check_beta(params, beta)
    N, s = params.N, params.s
    fails = {"n": 0}

    def g(r, spec=inner):
        flat = np.ravel(np.asarray(r, dtype=float))
        vals = np.zeros(flat.size)
        errs = np.zeros(flat.size)
        for i, ri in enumerate(flat):
            if ri <= 0.0 or ri == 1.0:
                continue
            k = angular_integral(params, 1.0 - ri, unit_numerator, spec)
            if not k.converged:
                fails["n"] += 1
            w = ri ** (N - 2) * math.expm1(-beta * math.log(ri))
            vals[i], errs[i] = w * k.value, abs(w) * k.error_estimate
        return vals.reshape(np.shape(r)), errs.reshape(np.shape(r))

    pv_spec = QuadSpec(outer.abs_tol, outer.rel_tol, outer.max_subdivisions,
                       pv_excision_sequence=outer.pv_excision_sequence,
                       pv_exponents=(1.0 - s, 1.0, 2.0 - s, 2.0, 3.0 - s))
    core = integrate_pv(g, 0.5, 1.5, pv_spec, center=1.0)
    near = integrate_1d(g, 0.0, 0.5, QuadSpec(outer.abs_tol, outer.rel_tol, outer.max_subdivisions,
                                             singularity_locations=(0.0,)))
    far_inner = QuadSpec(1e-30, inner.rel_tol, inner.max_subdivisions)

    def tail(v):
        v = np.asarray(v, dtype=float)
        with np.errstate(divide="ignore"):
            r = np.where(v > 0, 1.5 / np.where(v > 0, v, 1.0), 0.0)
        gv, ge = g(r, far_inner)
        jac = np.where(v > 0, 1.5 / np.where(v > 0, v, 1.0) ** 2, 0.0)
        return gv * jac, ge * jac

    far = integrate_1d(tail, 0.0, 1.0, QuadSpec(outer.abs_tol, outer.rel_tol, outer.max_subdivisions,
                                               singularity_locations=(0.0,)))
    res = (core + near + far).scaled(raw_factor(params))
    if fails["n"]:
        res.converged = False
        res.note = "; ".join(x for x in (res.note, f"{fails['n']} angular integrals unconverged") if x)
    return res


def jacobi_probe(m: int, n: int, s: float, alpha: float, beta: float,
                 outer: QuadSpec = OUTER, inner: QuadSpec = INNER) -> JacobiProbe:
    """Evaluate the p.v. term of the Jacobi operator on w = |x|^{-beta} at the unit point.

    Homogeneity predicts ``pv_term = -C(m, n, s, beta)`` (raw).  At the
    midpoint beta the Jacobi operator applied to w equals A0^2 - H there.
    """
    p = ConeParams(m, n, s, alpha)
    pv = jacobi_pv_integral(p, beta, outer, inner)
    c = c_integral(p, beta, outer, inner, raw=True)
    return JacobiProbe(p, beta, pv.value, pv.error_estimate, -c.value, c.error_estimate,
                       pv.converged and c.converged, "; ".join(x for x in (pv.note, c.note) if x))
