"""Tests for analytic functions, the F_2 transform and Wick ordering."""

import logging
import math

import numpy as np
import pytest

from percolated_gff.errors import ConfigError
from percolated_gff.wick import (
    AnalyticFunction,
    admissibility_bound,
    analytic_by_name,
    constant_function,
    cos_function,
    cosh_function,
    exp_function,
    f2_transform,
    monomial,
    parse_analytic,
    polynomial,
    sin_function,
    sinh_function,
    wick_analytic,
    wick_exponential,
)


class TestAnalyticFunction:
    """Test power series, their transforms and Fock bounds."""

    def test_by_name(self) -> None:
        """Test the named constructors."""
        assert analytic_by_name("cube").coefficients == (0.0, 0.0, 0.0, 1.0)
        assert analytic_by_name("x^5").terms == 5
        with pytest.raises(ConfigError):
            analytic_by_name("tan")

    def test_centred_f2(self) -> None:
        """Test that H = F_2 - a0^2 drops the constant term only."""
        h = polynomial([2.0, 1.0, 3.0]).centred_f2()
        assert h.coefficients == (0.0, 1.0, 18.0)

    def test_constant_function(self) -> None:
        """Test that a constant has a zero centred transform."""
        constant = constant_function(3.0)
        assert constant.a0 == 3.0
        assert np.allclose(constant.centred_f2().evaluate(np.array([0.5, 2.0])), 0.0)

    def test_f2_of_cos_is_cosh(self) -> None:
        """Test F_2(cos) = cosh."""
        assert np.allclose(cos_function().f2().coefficients, cosh_function().coefficients)

    def test_f2_of_exp_is_exp(self) -> None:
        """Test F_2(exp) = exp."""
        assert np.allclose(exp_function().f2().coefficients, exp_function().coefficients)

    def test_f2_of_sin_is_sinh(self) -> None:
        """Test F_2(sin) = sinh."""
        assert np.allclose(sin_function().f2().coefficients, sinh_function().coefficients)

    def test_f2_of_square(self) -> None:
        """Test F_2(x^2) = 2 x^2."""
        assert monomial(2).f2().coefficients == (0.0, 0.0, 2.0)

    def test_f2_transform_coefficients(self) -> None:
        """Test the coefficients k! a_k^2 and the carried Fock claim."""
        function = polynomial([1.0, 2.0, 3.0])
        transformed = f2_transform(function)
        assert transformed.coefficients == (1.0, 4.0, 18.0)
        assert transformed.beta == function.beta

    def test_fock_check(self) -> None:
        """Test the beta-Fock-entire claims of exp and x^3."""
        assert exp_function().fock_check()
        assert monomial(3).fock_check()
        too_tight = AnalyticFunction("exp", exp_function().coefficients, beta=0.5)
        assert not too_tight.fock_check()

    def test_invalid_truncation(self) -> None:
        """Test that a series needs at least a linear term."""
        with pytest.raises(ConfigError):
            AnalyticFunction("short", (1.0,))

    def test_serialize_keeps_polynomials_exact(self) -> None:
        """Test that an exact polynomial keeps a zero tail after the text round trip."""
        parsed = parse_analytic(polynomial([1.0, 0.5, 2.0]).serialize())
        assert parsed.finite
        assert parsed.tail_bound(10.0) == 0.0
        assert not parse_analytic(exp_function(8).serialize()).finite

    def test_serialize_round_trip(self) -> None:
        """Test the text form name beta M K a0 .. aK."""
        function = sin_function(9)
        parsed = parse_analytic(function.serialize())
        assert parsed.coefficients == function.coefficients
        assert parsed.name == "sin"
        with pytest.raises(ConfigError):
            parse_analytic("sin 1.0 1.0 3 0.0 1.0")

    def test_tail_bound(self) -> None:
        """Test that polynomials have no tail and series tails shrink with K."""
        assert monomial(4).tail_bound(10.0) == 0.0
        assert exp_function(40).tail_bound(2.0) < exp_function(20).tail_bound(2.0)
        assert exp_function(40).tail_bound(2.0) < 1e-10


class TestWickOrdering:
    """Test Wick-ordered analytic functions."""

    def test_admissibility_bound(self) -> None:
        """Test the admissibility threshold and its degenerate cases."""
        assert math.isinf(admissibility_bound(0.0, 1.0, 1.0, 1.0))
        assert admissibility_bound(1.0, 1.0, 2.0, 0.5) == pytest.approx(math.sqrt(0.5))
        with pytest.raises(ConfigError):
            admissibility_bound(1.0, 0.0, 1.0, 1.0)

    def test_exponential_closed_form(self) -> None:
        """Test the Hermite series of exp against exp(gamma x - gamma^2 v / 2)."""
        x = np.array([-1.5, 0.0, 1.2, 2.5])
        v = np.array([0.8, 0.8, 1.3, 0.2])
        series = wick_analytic(exp_function(), 0.5, x, v)
        assert np.allclose(series, wick_exponential(0.5, x, v), rtol=0, atol=1e-10)

    def test_exponential_mean_one(self) -> None:
        """Test that the Wick exponential has mean one."""
        x = np.random.default_rng(1).normal(0.0, 1.0, 200000)
        assert wick_exponential(0.7, x, 1.0).mean() == pytest.approx(1.0, abs=0.02)

    def test_linear(self) -> None:
        """Test that :gamma X: is gamma x for F = x."""
        x = np.array([0.3, -2.0])
        assert np.allclose(wick_analytic(monomial(1), 0.4, x, 5.0), 0.4 * x)

    def test_short_truncation_is_logged(self, caplog: pytest.LogCaptureFixture) -> None:
        """Test that a truncation tail above 1e-10 at the evaluation radius is logged."""
        with caplog.at_level(logging.WARNING, logger="percolated_gff.wick.analytic"):
            wick_analytic(exp_function(2), 1.0, np.array([10.0]), 1.0)
        assert "truncation tail" in caplog.text
        caplog.clear()
        with caplog.at_level(logging.WARNING, logger="percolated_gff.wick.analytic"):
            wick_analytic(exp_function(), 0.5, np.array([1.0]), 1.0)
            wick_analytic(monomial(3), 1.0, np.array([50.0]), 1.0)
        assert caplog.text == ""

    def test_square(self) -> None:
        """Test :(gamma X)^2: = gamma^2 (x^2 - v)."""
        assert float(wick_analytic(monomial(2), 2.0, 3.0, 4.0)) == pytest.approx(20.0)
