"""Numerical-kernel tests: quadrature, incomplete Beta, roots, log-sum-exp."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cfglab.errors import BracketError, ConvergenceError, DomainError
from cfglab.special_math import (
    BetaArgs,
    QuadratureSettings,
    adaptive_quad,
    bisection_root,
    improper_quad,
    incomplete_beta_definite,
    log_sum_exp,
)


class TestAdaptiveQuad:
    def test_linear(self):
        assert adaptive_quad(lambda x: x, 0.0, 1.0) == pytest.approx(0.5, abs=1e-12)

    def test_sine(self):
        assert adaptive_quad(math.sin, 0.0, math.pi) == pytest.approx(2.0, abs=1e-10)

    def test_empty_interval(self):
        assert adaptive_quad(math.exp, 1.3, 1.3) == 0.0

    def test_reversed_interval_rejected(self):
        with pytest.raises(DomainError):
            adaptive_quad(math.exp, 1.0, 0.0)

    def test_subdivision_exhaustion(self):
        nasty = lambda x: math.sin(1.0 / (x + 1e-14)) / math.sqrt(x + 1e-14)
        with pytest.raises(ConvergenceError):
            adaptive_quad(nasty, 0.0, 1.0, QuadratureSettings(max_subdivisions=4))

    def test_settings_validation(self):
        with pytest.raises(DomainError):
            QuadratureSettings(abs_tol=0.0)
        with pytest.raises(DomainError):
            QuadratureSettings(max_subdivisions=0)


class TestImproperQuad:
    def test_inverse_square_tail(self):
        # int_1^inf t^-2 dt = 1, tail bound int_T^inf = 1/T
        val = improper_quad(lambda t: t**-2, 1.0, tail_bound=lambda T: 1.0 / T)
        assert val == pytest.approx(1.0, abs=1e-8)

    def test_exponential_tail(self):
        val = improper_quad(lambda t: math.exp(-t), 0.0, tail_bound=lambda T: math.exp(-T))
        assert val == pytest.approx(1.0, abs=1e-8)

    def test_requires_tail_bound(self):
        with pytest.raises(DomainError):
            improper_quad(lambda t: t**-2, 1.0)


class TestIncompleteBeta:
    def test_uniform_integrand(self):
        assert incomplete_beta_definite(BetaArgs(1.0, 1.0, 0.0, 0.5)) == pytest.approx(
            0.5, abs=1e-12
        )

    @pytest.mark.parametrize("f", [0.1, 0.37, 0.8, 1.0])
    def test_identity_integrand(self, f):
        assert incomplete_beta_definite(BetaArgs(1.0, 1.0, 0.0, f)) == pytest.approx(
            f, abs=1e-10
        )

    def test_polynomial_antiderivative(self):
        # integrand r (1-r)^2; antiderivative r^2/2 - 2 r^3/3 + r^4/4
        val = incomplete_beta_definite(BetaArgs(2.0, 3.0, 0.2, 0.8))
        assert val == pytest.approx(0.066, abs=1e-10)

    @pytest.mark.parametrize("a,b", [(2, 3), (3, 2), (1, 4), (4, 2)])
    def test_complete_beta_vs_gamma_product(self, a, b):
        exact = math.gamma(a) * math.gamma(b) / math.gamma(a + b)
        got = incomplete_beta_definite(BetaArgs(float(a), float(b), 0.0, 1.0))
        assert got == pytest.approx(exact, abs=1e-10)

    def test_singular_left_endpoint(self):
        # a = 0.5, b = 1: int_0^f r^-0.5 dr = 2 sqrt(f)
        val = incomplete_beta_definite(BetaArgs(0.5, 1.0, 0.0, 0.49))
        assert val == pytest.approx(2.0 * math.sqrt(0.49), abs=1e-10)

    def test_singular_right_endpoint(self):
        # a = 1, b = 0.25: int_f^1 (1-r)^-0.75 dr = 4 (1-f)^0.25
        val = incomplete_beta_definite(BetaArgs(1.0, 0.25, 0.9, 1.0))
        assert val == pytest.approx(4.0 * 0.1**0.25, abs=1e-9)

    def test_negative_first_exponent_with_interior_lower_limit(self):
        # a = -1, b = 1: int r^-2 dr = 1/f1 - 1/f2
        val = incomplete_beta_definite(BetaArgs(-1.0, 1.0, 0.25, 0.75))
        assert val == pytest.approx(4.0 - 4.0 / 3.0, abs=1e-9)

    def test_tiny_b_with_upper_limit_one(self):
        # b -> 0: int_f^1 (1-r)^(b-1) dr = (1-f)^b / b for a = 1
        b = 1e-4
        val = incomplete_beta_definite(BetaArgs(1.0, b, 0.3, 1.0))
        assert val == pytest.approx(0.7**b / b, rel=1e-8)

    def test_preconditions(self):
        with pytest.raises(DomainError):
            BetaArgs(0.0, 1.0, 0.0, 0.5)  # a <= 0 needs f1 > 0
        with pytest.raises(DomainError):
            BetaArgs(1.0, -0.5, 0.5, 1.0)  # b <= 0 needs f2 < 1
        with pytest.raises(DomainError):
            BetaArgs(1.0, 1.0, 0.7, 0.3)  # f1 > f2

    @settings(max_examples=60, deadline=None)
    @given(
        a=st.floats(0.3, 4.0),
        b=st.floats(0.3, 4.0),
        cuts=st.tuples(st.floats(0.02, 0.98), st.floats(0.02, 0.98), st.floats(0.02, 0.98)),
    )
    def test_additivity_over_adjacent_intervals(self, a, b, cuts):
        f1, f2, f3 = sorted(cuts)
        q = QuadratureSettings()
        left = incomplete_beta_definite(BetaArgs(a, b, f1, f2), q)
        right = incomplete_beta_definite(BetaArgs(a, b, f2, f3), q)
        whole = incomplete_beta_definite(BetaArgs(a, b, f1, f3), q)
        assert left + right == pytest.approx(whole, abs=2 * q.abs_tol + 2e-12)

    def test_monotone_in_upper_limit(self):
        vals = [
            incomplete_beta_definite(BetaArgs(0.7, 2.0, 0.1, f2))
            for f2 in np.linspace(0.1, 1.0, 12)
        ]
        assert all(b >= a for a, b in zip(vals, vals[1:]))


class TestBisectionRoot:
    def test_linear_root(self):
        assert bisection_root(lambda x: x - 1.0, 0.0, 2.0, 1e-12) == pytest.approx(1.0)

    def test_sqrt_two(self):
        root = bisection_root(lambda x: x * x - 2.0, 0.0, 2.0, 1e-10)
        assert root == pytest.approx(math.sqrt(2.0), abs=1e-9)

    def test_no_sign_change(self):
        with pytest.raises(BracketError):
            bisection_root(lambda x: x * x + 1.0, -1.0, 1.0, 1e-8)

    def test_endpoint_root(self):
        assert bisection_root(lambda x: x, 0.0, 1.0, 1e-8) == 0.0


class TestLogSumExp:
    def test_pair_of_zeros(self):
        assert log_sum_exp([0.0, 0.0]) == pytest.approx(math.log(2.0), abs=1e-14)

    def test_singleton(self):
        assert log_sum_exp([-3.7]) == -3.7

    def test_large_inputs_no_overflow(self):
        assert log_sum_exp([1000.0, 1000.0]) == pytest.approx(1000.0 + math.log(2.0))

    def test_minus_infinities_ignored(self):
        assert log_sum_exp([-math.inf, 0.0]) == pytest.approx(0.0)
        assert log_sum_exp([-math.inf, -math.inf]) == -math.inf

    def test_empty_rejected(self):
        with pytest.raises(DomainError):
            log_sum_exp([])

    @settings(max_examples=80, deadline=None)
    @given(
        vals=st.lists(st.floats(-50, 50), min_size=1, max_size=8),
        shift=st.floats(-500, 500),
    )
    def test_shift_invariance(self, vals, shift):
        base = log_sum_exp(vals)
        shifted = log_sum_exp([v + shift for v in vals]) - shift
        assert shifted == pytest.approx(base, abs=1e-9)
