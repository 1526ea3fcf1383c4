"""Monte Carlo validators built on the unreduced N-dimensional integrals.

Nothing here uses the angular reductions of the quadrature modules: points are
drawn as full vectors in R^N (or on the cone in R^N), and the integrands are
evaluated literally.  All estimates refer to the unit point
p_hat = (e1, alpha e1) / sqrt(1 + alpha^2), so they compare with the ``raw``
outputs of :mod:`nlcone.curvature_solver` and :mod:`nlcone.stability`.

Randomness comes from PCG64 streams spawned off one ``SeedSequence(seed)``,
one stream per fixed-size batch.  Batch sums are merged in batch order, so a
given (parameters, samples, seed) always reproduces the same bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np
from scipy.special import betainc

from .cone_model import ConeParams, sphere_area, unit_point

BATCH = 1 << 15
MIN_SAMPLES = 10_000
S_MIN_MC = 0.05
DEFAULT_SAMPLES = 1_000_000
DEFAULT_CUTOFF = 1e3
DEFAULT_EXCISION = 1e-6
LOCAL_RADIUS = 0.9
CAP_RADIUS = 1.0

Integrand = Literal["hardy-weight", "normal-alignment"]


@dataclass
class McEstimate:
    """Monte Carlo mean with its standard error and the truncation radii used."""

    mean: float
    stderr: float
    samples: int
    seed: int
    cutoff_radius: float
    excision_radius: float
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.stderr < 0:
            raise ValueError("stderr must be nonnegative")

    def agrees_with(self, value: float, k: float = 3.0, extra: float = 0.0) -> bool:
        """True if ``value`` lies within k standard errors (plus ``extra``)."""
        return abs(self.mean - value) <= k * self.stderr + extra


class _Accumulator:
    """Per-stratum sums, merged in a fixed order."""

    def __init__(self, names):
        self.n = {k: 0 for k in names}
        self.s1 = {k: 0.0 for k in names}
        self.s2 = {k: 0.0 for k in names}

    def add(self, name, values):
        values = np.asarray(values, dtype=float)
        self.n[name] += values.size
        self.s1[name] += float(values.sum())
        self.s2[name] += float(np.dot(values, values))

    def estimate(self):
        mean = var = 0.0
        for k in self.n:
            cnt = self.n[k]
            mu = self.s1[k] / cnt
            v = max(self.s2[k] / cnt - mu * mu, 0.0) * cnt / max(cnt - 1, 1)
            mean += mu
            var += v / cnt
        return mean, math.sqrt(var)


def _check_common(params: ConeParams, samples: int, seed: int) -> None:
    if samples < MIN_SAMPLES:
        raise ValueError(f"samples must be >= {MIN_SAMPLES}, got {samples}")
    if int(seed) != seed or seed < 0:
        raise ValueError("seed must be a nonnegative integer")


def _batches(samples: int, seed: int):
    nb = -(-samples // BATCH)
    children = np.random.SeedSequence(int(seed)).spawn(nb)
    for i, child in enumerate(children):
        size = min(BATCH, samples - i * BATCH)
        yield size, np.random.Generator(np.random.PCG64(child))


def _power_law(kappa: float, lo: float):
    """Inverse CDF for the density proportional to rho^{kappa-1} on (lo, 1), and its
    normalizer Z (density = rho^{kappa-1} / Z)."""
    if abs(kappa) < 1e-12:
        span = -math.log(lo)
        return (lambda u: lo * np.exp(span * u)), span
    a = lo**kappa
    return (lambda u: (a + (1.0 - a) * u) ** (1.0 / kappa)), (1.0 - a) / kappa


def _sphere(rng, size, dim):
    g = rng.standard_normal((size, dim))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


# ---------------------------------------------------------------------------
# volume integral: nonlocal mean curvature


def _cone_sign(x, m, alpha):
    # +1 on {|z| > alpha |y|}, -1 on the complement
    y = np.linalg.norm(x[:, :m], axis=1)
    z = np.linalg.norm(x[:, m:], axis=1)
    return np.where(z > alpha * y, 1.0, -1.0)


def cone_sign_mean(m: int, n: int, alpha: float) -> float:
    """Average over S^{N-1} of the signed indicator of {|z| > alpha |y|}."""
    # |y|^2 on the sphere is Beta(m/2, n/2)
    return 2.0 * betainc(0.5 * m, 0.5 * n, 1.0 / (1.0 + alpha * alpha)) - 1.0


def mc_mean_curvature(m: int, n: int, s: float, alpha: float, samples: int = DEFAULT_SAMPLES,
                      seed: int = 0, cutoff_radius: float = DEFAULT_CUTOFF,
                      excision_radius: float = DEFAULT_EXCISION) -> McEstimate:
    """p.v. integral of (chi_E - chi_{E^c})(x) |x - p_hat|^{-(N+s)} over R^N.

    Polar coordinates x = p_hat + rho w about p_hat.  Two estimators share the
    draws of (rho, w):

    * ``ball``: w and -w are averaged, which is the symmetric-ball principal
      value; the excised ball has radius ``excision_radius``.
    * ``halfspace``: a single direction, with the signed indicator of the
      tangent half-space at p_hat subtracted (its own principal value is 0).

    For rho > 1 the homogeneous limit sign(w) of the integrand is subtracted
    and added back analytically over (1, inf), which also covers the region
    beyond ``cutoff_radius``; the neglected remainder is O(cutoff^{-1-s}).
    The ``ball`` estimate is reported as the mean, the other in ``details``.
    """
    params = ConeParams(m, n, s, alpha)
    _check_common(params, samples, seed)
    if not S_MIN_MC <= s < 1.0:
        raise ValueError(f"mc_mean_curvature needs s in [{S_MIN_MC}, 1), got {s}")
    if not 0 < excision_radius < 1 < cutoff_radius:
        raise ValueError("need 0 < excision_radius < 1 < cutoff_radius")
    N = params.N
    p = unit_point(params)
    nu = np.zeros(N)
    lam = math.hypot(1.0, alpha)
    nu[0], nu[m] = -alpha / lam, 1.0 / lam
    area = sphere_area(N - 1)
    # the paired integrand is nonzero with probability ~ rho, so q ~ rho^{-1/2-s}
    # balances the second moment near the excision
    kappa = 0.5 - s
    near_law, near_norm = _power_law(kappa, excision_radius)
    far_mass = 1.0 - 1.0 / cutoff_radius

    acc = {"ball": _Accumulator(("near", "far")), "halfspace": _Accumulator(("near", "far"))}
    for size, rng in _batches(samples, seed):
        half = size // 2
        # near stratum: rho^{kappa-1} law on (eps, 1)
        w = _sphere(rng, half, N)
        rho = near_law(rng.random(half))[:, None]
        plus = _cone_sign(p + rho * w, m, alpha)
        minus = _cone_sign(p - rho * w, m, alpha)
        tangent = np.where(w @ nu > 0, 1.0, -1.0)
        scale = area * near_norm * rho[:, 0] ** (-s - kappa)
        acc["ball"].add("near", scale * 0.5 * (plus + minus))
        acc["halfspace"].add("near", scale * (plus - tangent))
        # far stratum: rho with density proportional to rho^-2 on (1, cutoff)
        w = _sphere(rng, size - half, N)
        rho = 1.0 / (1.0 - far_mass * rng.random(size - half))[:, None]
        plus = _cone_sign(p + rho * w, m, alpha)
        minus = _cone_sign(p - rho * w, m, alpha)
        limit = _cone_sign(w, m, alpha)
        scale = area * far_mass * rho[:, 0] ** (1.0 - s)
        acc["ball"].add("far", scale * (0.5 * (plus + minus) - limit))
        acc["halfspace"].add("far", scale * (plus - limit))

    analytic = area * cone_sign_mean(m, n, alpha) / s
    ball, ball_se = acc["ball"].estimate()
    hs, hs_se = acc["halfspace"].estimate()
    return McEstimate(ball + analytic, ball_se, samples, seed, cutoff_radius, excision_radius,
                      details={"estimator": "ball", "halfspace_mean": hs + analytic,
                               "halfspace_stderr": hs_se, "analytic_far": analytic,
                               "truncation_bound": area * cutoff_radius ** (-1.0 - s) * 4.0 / (1.0 + s),
                               "excision_bias_scale": area * excision_radius ** (1.0 - s) / (1.0 - s)})


# ---------------------------------------------------------------------------
# surface integrals over the cone


def _exp_map(v):
    """Point w of the unit sphere at geodesic offset ``v`` (rows) from e1.

    Returns w, the difference w - e1 (formed without cancellation) and the
    area density ratio (sin|v| / |v|)^{dim-1}.
    """
    t = np.linalg.norm(v, axis=1)
    safe = np.where(t > 0, t, 1.0)
    sinc = np.where(t > 0, np.sin(t) / safe, 1.0)
    tail = sinc[:, None] * v
    w = np.concatenate([np.cos(t)[:, None], tail], axis=1)
    dw = np.concatenate([(-2.0 * np.sin(0.5 * t) ** 2)[:, None], tail], axis=1)
    return w, dw, sinc ** (v.shape[1] - 1)


def _log_map(w):
    """Inverse of :func:`_exp_map` for points away from -e1."""
    c = np.clip(w[:, 0], -1.0, 1.0)
    t = np.arccos(c)
    tail = w[:, 1:]
    nt = np.linalg.norm(tail, axis=1)
    safe = np.where(nt > 0, nt, 1.0)
    return tail * (t / safe)[:, None]


def _surface_integrand(params: ConeParams, integrand: Integrand, beta: float | None) -> Callable:
    """g(y) |y - p_hat|^{-(N+s)} in terms of delta = rho - 1 and the offsets
    dw1 = w1 - e1, dw2 = w2 - e1, so that nothing cancels near p_hat."""
    m, alpha, N, s = params.m, params.alpha, params.N, params.s
    lam = math.hypot(1.0, alpha)

    def f(delta, w1, dw1, w2, dw2):
        rho = 1.0 + delta
        # y - p_hat = (rho w1 - e1, alpha (rho w2 - e1)) / lam
        diff = np.concatenate([delta[:, None] * w1 + dw1,
                               alpha * (delta[:, None] * w2 + dw2)], axis=1) / lam
        kern = np.sum(diff * diff, axis=1) ** (-0.5 * (N + s))
        if integrand == "normal-alignment":
            # 1 - <nu, nu_p> = |nu - nu_p|^2 / 2 with nu = (-alpha w1, w2) / lam
            dnu2 = (alpha * alpha * np.sum(dw1 * dw1, axis=1) + np.sum(dw2 * dw2, axis=1)) / lam**2
            return 0.5 * dnu2 * kern
        return -np.expm1(-beta * np.log1p(delta)) * kern

    return f


def _offsets(w):
    e = np.zeros(w.shape[1])
    e[0] = 1.0
    return w - e


def mc_surface_integral(m: int, n: int, s: float, alpha: float, integrand: Integrand,
                        beta: float | None = None, samples: int = DEFAULT_SAMPLES,
                        seed: int = 0) -> McEstimate:
    """Surface integral over the cone of g(y) |y - p_hat|^{-(N+s)} dsigma(y).

    ``normal-alignment``: g = 1 - <nu(y), nu(p_hat)>, giving A0^2 (raw).
    ``hardy-weight``: g = 1 - |y|^{-beta}, a principal value giving C(beta) (raw).

    Points are y = rho (w1, alpha w2) / sqrt(1 + alpha^2).  Half of the draws
    go to a ball of radius 0.9 around p_hat in the chart
    (rho - 1, log w1, log w2), sampled with density ~ |xi|^{2-N-s} and averaged
    over xi and -xi (symmetric excision in the chart).  The rest cover the
    remaining surface with rho split at 1: rho^{c} law below, Pareto above,
    w2 uniform and w1 from a uniform/polar-cap mixture.
    """
    params = ConeParams(m, n, s, alpha)
    _check_common(params, samples, seed)
    if integrand == "hardy-weight":
        if beta is None:
            raise ValueError("hardy-weight needs beta")
        top = params.N - 2 - s
        if not 0.0 < beta < top:
            raise ValueError(f"beta must lie in (0, {top:g}), got {beta}")
    elif integrand == "normal-alignment":
        beta = 0.0
    else:
        raise ValueError(f"unknown integrand {integrand!r}")

    N, h = params.N, LOCAL_RADIUS
    lam = math.hypot(1.0, alpha)
    f = _surface_integrand(params, integrand, beta)
    # dsigma = jac * rho^{N-2} drho dw1 dw2
    jac = alpha ** (n - 1) * lam ** (-(N - 2))
    ball_area = sphere_area(N - 2)
    # near p_hat the (paired) integrand is ~ |xi|^{2-N-s}; kappa = 1 - s makes
    # the local weights bounded
    kappa = 1.0 - s
    c_low = N - 1 - beta
    k_high = 1.0 + s

    def in_ball(rho, w1, w2):
        parts = [rho - 1.0, _log_map(w1)]
        inside = np.ones(rho.size, dtype=bool)
        if n >= 2:
            parts.append(_log_map(w2))
        else:
            inside &= w2[:, 0] > 0
        xi = np.concatenate([parts[0][:, None]] + parts[1:], axis=1)
        return inside & (np.linalg.norm(xi, axis=1) < h) & (w1[:, 0] > -0.5)

    # w1 is drawn from an even mixture of the uniform law and a geodesic cap
    # about e1: for n = 1 and small alpha the opposite sheet passes close to
    # p_hat and uniform directions alone leave a heavy tail
    cap_vol = math.pi ** (0.5 * (m - 1)) / math.gamma(0.5 * (m - 1) + 1.0) * CAP_RADIUS ** (m - 1)
    w2_area = sphere_area(n - 1) if n >= 2 else 2.0

    def draw_angles(rng, size):
        w1 = _sphere(rng, size, m)
        use_cap = rng.random(size) < 0.5
        dirs = _sphere(rng, size, m - 1)
        offs = dirs * (CAP_RADIUS * rng.random(size) ** (1.0 / (m - 1)))[:, None]
        w1 = np.where(use_cap[:, None], _exp_map(offs)[0], w1)
        th = np.arccos(np.clip(w1[:, 0], -1.0, 1.0))
        sinc = np.where(th > 0, np.sin(th) / np.where(th > 0, th, 1.0), 1.0)
        cap = np.where(th < CAP_RADIUS, 1.0 / (cap_vol * sinc ** (m - 2)), 0.0)
        q1 = 0.5 / sphere_area(m - 1) + 0.5 * cap
        if n >= 2:
            w2 = _sphere(rng, size, n)
        else:
            w2 = np.where(rng.random(size) < 0.5, 1.0, -1.0)[:, None]
        return w1, w2, q1 / w2_area

    acc = _Accumulator(("local", "low", "high"))
    for size, rng in _batches(samples, seed):
        n_loc = size // 2
        n_low = (size - n_loc) // 2
        n_high = size - n_loc - n_low

        # local chart: |xi| = h U^{1/kappa}, mirror pairs
        dirs = _sphere(rng, n_loc, N - 1)
        t = h * rng.random(n_loc) ** (1.0 / kappa)
        xi = dirs * t[:, None]
        q = kappa * t ** (kappa - 1.0) / (h**kappa * ball_area * t ** (N - 2))
        vals = np.zeros(n_loc)
        for sign in (1.0, -1.0):
            x = sign * xi
            delta = x[:, 0]
            w1, dw1, r1 = _exp_map(x[:, 1:m])
            if n >= 2:
                w2, dw2, r2 = _exp_map(x[:, m:])
            else:
                w2, dw2, r2 = np.ones((n_loc, 1)), np.zeros((n_loc, 1)), 1.0
            vals += 0.5 * f(delta, w1, dw1, w2, dw2) * jac * (1.0 + delta) ** (N - 2) * r1 * r2 / q
        acc.add("local", vals)

        # rho in (0, 1) with density c rho^{c-1}
        rho = rng.random(n_low) ** (1.0 / c_low)
        w1, w2, q_ang = draw_angles(rng, n_low)
        q = c_low * rho ** (c_low - 1.0) * q_ang
        vals = f(rho - 1.0, w1, _offsets(w1), w2, _offsets(w2)) * jac * rho ** (N - 2) / q
        acc.add("low", np.where(in_ball(rho, w1, w2), 0.0, vals))

        # rho in (1, inf) with density k rho^{-k-1}
        rho = rng.random(n_high) ** (-1.0 / k_high)
        w1, w2, q_ang = draw_angles(rng, n_high)
        q = k_high * rho ** (-k_high - 1.0) * q_ang
        vals = f(rho - 1.0, w1, _offsets(w1), w2, _offsets(w2)) * jac * rho ** (N - 2) / q
        acc.add("high", np.where(in_ball(rho, w1, w2), 0.0, vals))

    mean, se = acc.estimate()
    return McEstimate(mean, se, samples, seed, math.inf, 0.0,
                      details={"integrand": integrand, "beta": beta, "local_radius": h})
