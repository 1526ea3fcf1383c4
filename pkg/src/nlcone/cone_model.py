"""Lawson cone geometry: parameters, sphere areas and the angular kernels.

A point of the cone ``|z| = alpha |y|`` in R^m x R^n is written
``x = (r w1, alpha r w2)`` with ``w1`` in S^{m-1} and ``w2`` in S^{n-1}.  The
reference point is ``p = (e1, alpha e1)``; ``theta`` is the angle between
``w1`` and ``e1`` and ``phi`` the angle between ``w2`` and ``e1``.

For n = 1 the sphere S^0 = {+1, -1} is handled as two explicit branches:
``interior`` (w2 = +1, the sheet through p) and ``exterior`` (w2 = -1).

Near r = 1 the textbook form ``r^2 + 1 - 2r cos(theta)`` loses all relative
precision, so the vectorized helpers below take ``u = 1 - r`` together with
``st = sin(theta/2)^2`` and ``sp = sin(phi/2)^2`` and use
``r^2 + 1 - 2r cos(theta) = u^2 + 4 r st``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

Branch = Literal["interior", "exterior"]
BRANCHES: tuple[Branch, ...] = ("interior", "exterior")


def sphere_area(k: int) -> float:
    """Area of the unit sphere S^k in R^{k+1}: 2 pi^{(k+1)/2} / Gamma((k+1)/2)."""
    if int(k) != k or k < 0:
        raise ValueError(f"sphere dimension must be a nonnegative integer, got {k!r}")
    h = 0.5 * (k + 1)
    return 2.0 * math.pi**h / math.gamma(h)


def inner_sphere_factor(m: int, n: int) -> float:
    """A_{m-2} A_{n-2}, with the convention A_{n-2} = 1 when n = 1."""
    return sphere_area(m - 2) * (sphere_area(n - 2) if n >= 2 else 1.0)


@dataclass(frozen=True)
class ConeParams:
    """Cone ``|z| = alpha |y|`` in R^m x R^n with fractional order ``s``.

    The ordering m >= n is required.  Use :meth:`canonical` to build from an
    arbitrary pair: (m, n, alpha) and (n, m, 1/alpha) describe the same
    surface with the two sides exchanged.
    """

    m: int
    n: int
    s: float
    alpha: float

    def __post_init__(self):
        for name in ("m", "n"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v:
                raise ValueError(f"{name} must be an integer, got {v!r}")
            object.__setattr__(self, name, int(v))
        object.__setattr__(self, "s", float(self.s))
        object.__setattr__(self, "alpha", float(self.alpha))
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.m < self.n:
            raise ValueError(f"expected m >= n, got (m, n) = ({self.m}, {self.n}); use ConeParams.canonical")
        if self.m + self.n < 3:
            raise ValueError("m + n = 2 is excluded: the only cone is the symmetric one, alpha = 1")
        if not 0.0 <= self.s < 1.0:
            raise ValueError(f"s must lie in [0, 1), got {self.s}")
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise ValueError(f"alpha must be positive and finite, got {self.alpha}")

    @classmethod
    def canonical(cls, m: int, n: int, s: float, alpha: float = 1.0) -> "ConeParams":
        if m < n:
            return cls(n, m, s, 1.0 / alpha)
        return cls(m, n, s, alpha)

    @property
    def N(self) -> int:
        return self.m + self.n

    @property
    def branches(self) -> tuple[Branch, ...]:
        return BRANCHES if self.n == 1 else ("interior",)

    def with_alpha(self, alpha: float) -> "ConeParams":
        return ConeParams(self.m, self.n, self.s, alpha)

    def hardy_beta(self) -> float:
        """Midpoint (N - 2 - s)/2 of the admissible exponent range."""
        return 0.5 * (self.N - 2 - self.s)


@dataclass(frozen=True)
class KernelPoint:
    """Radial ratio ``r`` and polar angles of a cone point relative to p."""

    r: float
    theta1: float
    phi1: float = 0.0

    def __post_init__(self):
        if not self.r >= 0:
            raise ValueError("r must be >= 0")
        for name in ("theta1", "phi1"):
            v = getattr(self, name)
            if not 0.0 <= v <= math.pi:
                raise ValueError(f"{name} must lie in [0, pi], got {v}")


def _check_branch(params: ConeParams, branch: Branch) -> None:
    if branch not in BRANCHES:
        raise ValueError(f"unknown branch {branch!r}")
    if params.n >= 2 and branch != "interior":
        raise ValueError("the exterior branch exists only for n = 1")


# ---------------------------------------------------------------------------
# vectorized kernels in (u, st, sp) variables


def denominator(u, st, sp, alpha: float, branch: Branch = "interior"):
    """|x - p|^2 for x on the cone, in cancellation-free form.

    For n >= 2 pass ``sp = sin(phi/2)^2``; for n = 1 ``sp`` is ignored and
    the branch selects alpha^2 (r - 1)^2 or alpha^2 (r + 1)^2.
    """
    u = np.asarray(u, dtype=float)
    r = 1.0 - u
    a2 = alpha * alpha
    if branch == "interior":
        return u * u * (1.0 + a2) + 4.0 * r * st + 4.0 * r * a2 * sp
    return u * u + 4.0 * r * st + a2 * (2.0 - u) ** 2


def alignment(st, sp, alpha: float, branch: Branch = "interior"):
    """1 - <nu(x), nu(p)> for unit normals nu, in (st, sp) variables."""
    a2 = alpha * alpha
    if branch == "interior":
        return (2.0 * a2 * st + 2.0 * sp) / (1.0 + a2)
    return (2.0 + 2.0 * a2 * st) / (1.0 + a2)


def curvature_numerator(st, sp, branch: Branch = "interior"):
    """cos(theta) - cos(phi): the flux factor of the divergence-theorem form of H.

    For n = 1, cos(phi) is +1 on the interior branch and -1 on the exterior one.
    """
    if branch == "interior":
        return 2.0 * (sp - st)
    return 2.0 - 2.0 * st


# ---------------------------------------------------------------------------
# scalar contract versions


def kernel_denominator(params: ConeParams, pt: KernelPoint, sign: Branch = "interior") -> float:
    """Bare squared distance r^2 + 1 - 2r cos(theta) + alpha^2 (...) (no power applied)."""
    _check_branch(params, sign)
    u = 1.0 - pt.r
    st = math.sin(0.5 * pt.theta1) ** 2
    sp = math.sin(0.5 * pt.phi1) ** 2 if params.n >= 2 else 0.0
    return float(max(denominator(u, st, sp, params.alpha, sign), 0.0))


def normal_alignment(params: ConeParams, pt: KernelPoint, sign: Branch = "interior") -> float:
    """1 - <nu(x), nu(p)>, a number in [0, 2]."""
    _check_branch(params, sign)
    st = math.sin(0.5 * pt.theta1) ** 2
    sp = math.sin(0.5 * pt.phi1) ** 2 if params.n >= 2 else 0.0
    return float(min(max(alignment(st, sp, params.alpha, sign), 0.0), 2.0))


def unit_point(params: ConeParams) -> np.ndarray:
    """p_hat = (e1, alpha e1) / sqrt(1 + alpha^2) as a vector in R^N."""
    p = np.zeros(params.N)
    lam = math.hypot(1.0, params.alpha)
    p[0] = 1.0 / lam
    p[params.m] = params.alpha / lam
    return p


def unit_normal(params: ConeParams, x: np.ndarray) -> np.ndarray:
    """Unit normal of the cone at points ``x`` (rows), pointing into {|z| > alpha |y|}."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y, z = x[:, : params.m], x[:, params.m:]
    w1 = y / np.linalg.norm(y, axis=1, keepdims=True)
    w2 = z / np.linalg.norm(z, axis=1, keepdims=True)
    nu = np.concatenate([-params.alpha * w1, w2], axis=1)
    return nu / math.hypot(1.0, params.alpha)
