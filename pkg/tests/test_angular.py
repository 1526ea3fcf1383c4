import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nlcone.angular import (alignment_numerator, angular_integral, folded_radial_integral, hardy_weight,
                            symmetric_weight, unit_numerator)
from nlcone.cone_model import ConeParams
from nlcone.quadrature import integrate_2d


def naive_weight(N, s, beta, r):
    return r ** (N - 2) - r ** (N - 2 - beta) + r**s - r ** (beta + s)


class TestHardyWeight:
    @settings(max_examples=50, deadline=None)
    @given(st.integers(3, 14), st.floats(0.0, 0.9), st.floats(0.01, 0.99), st.floats(0.05, 0.95))
    def test_matches_naive_form(self, N, s, frac, r):
        beta = frac * (N - 2 - s)
        w = float(hardy_weight(N, s, beta)(np.array([1.0 - r]))[0])
        assert w == pytest.approx(naive_weight(N, s, beta, r), rel=1e-9, abs=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(3, 14), st.floats(0.0, 0.9), st.floats(0.01, 0.99))
    def test_nonnegative(self, N, s, frac):
        beta = frac * (N - 2 - s)
        u = np.linspace(0.0, 1.0, 201)
        assert np.all(hardy_weight(N, s, beta)(u) >= 0.0)

    def test_second_order_zero_at_one(self):
        # the weight over u^2 stays finite as r -> 1
        N, s, beta = 7, 0.3, 2.35
        w2 = hardy_weight(N, s, beta, u_power=2.0)
        vals = w2(np.array([1e-2, 1e-4, 1e-6, 1e-9]))
        assert np.all(np.isfinite(vals))
        assert vals[-1] == pytest.approx(beta * (N - 2 - beta - s), rel=1e-6)

    def test_c_integrand_finite_near_one(self):
        p = ConeParams(4, 3, 0.2, 0.84)
        w = hardy_weight(p.N, p.s, p.hardy_beta(), u_power=2.0)
        k = angular_integral(p, 1e-6, unit_numerator, u_power=2.0)
        assert k.converged
        assert math.isfinite(float(w(np.array([1e-6]))[0]) * k.value)

    def test_symmetric_in_beta(self):
        N, s = 6, 0.25
        u = np.linspace(0.0, 1.0, 51)
        assert np.allclose(hardy_weight(N, s, 0.7)(u), hardy_weight(N, s, N - 2 - s - 0.7)(u), atol=1e-15)

    def test_symmetric_weight(self):
        w = symmetric_weight(5, 0.3)
        assert w(np.array([0.0]))[0] == pytest.approx(2.0)
        assert w(np.array([0.5]))[0] == pytest.approx(0.5**3 + 0.5**0.3)


class TestAngularIntegral:
    def test_origin_is_constant_kernel(self):
        # r = 0: D = 1 + alpha^2 whatever the angles
        p = ConeParams(3, 2, 0.0, 0.7)
        k = angular_integral(p, 1.0 - 1e-300, unit_numerator)
        assert k.value == pytest.approx(2 * math.pi * (1 + 0.49) ** -2.5, rel=1e-8)

    def test_n1_sums_branches(self):
        # r = 0, n = 1: two branches, each int sin(theta) dtheta / (1+a^2)^{(3+s)/2}
        a, s = 0.6, 0.2
        p = ConeParams(3, 1, s, a)
        k = angular_integral(p, 1.0 - 1e-300, unit_numerator)
        assert k.value == pytest.approx(2 * 2.0 * (1 + a * a) ** (-(4 + s) / 2), rel=1e-8)

    @pytest.mark.parametrize("u", [0.3, -0.4, 0.05])
    def test_matches_direct_2d(self, u):
        p = ConeParams(3, 2, 0.3, 0.8)
        r = 1.0 - u

        def f(th, ph):
            d = r * r + 1 - 2 * r * np.cos(th) + p.alpha**2 * (r * r + 1 - 2 * r * np.cos(ph))
            return np.sin(th) * d ** (-(p.N + p.s) / 2)
        ref = integrate_2d(f)
        k = angular_integral(p, u, unit_numerator)
        assert abs(k.value - ref.value) <= k.error_estimate + ref.error_estimate + 1e-12 * abs(ref.value)

    def test_u_power_scaling(self):
        p = ConeParams(4, 2, 0.1, 0.5)
        a = angular_integral(p, 0.01, unit_numerator)
        b = angular_integral(p, 0.01, unit_numerator, u_power=2.0)
        assert b.value == pytest.approx(a.value * 1e-4, rel=1e-8)

    def test_alignment_vanishes_at_symmetric_point_scale(self):
        # the alignment kernel is much weaker than the unit kernel near the peak
        p = ConeParams(3, 3, 0.2, 1.0)
        one = angular_integral(p, 1e-3, unit_numerator)
        al = angular_integral(p, 1e-3, alignment_numerator(1.0))
        assert 0.0 < al.value < 1e-2 * one.value


def test_folded_integral_of_unit_weight_is_positive():
    p = ConeParams(3, 2, 0.2, 0.8)
    res = folded_radial_integral(p, symmetric_weight(p.N, p.s), alignment_numerator(p.alpha))
    assert res.converged and res.value > 0
