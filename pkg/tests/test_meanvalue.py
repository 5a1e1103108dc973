import math

import numpy as np
import pytest

from verifier.errors import EvaluationDomain, NonIntegrable
from verifier.geometry.conformal import ConformalMap, Inversion, map_pair_to_pair
from verifier.geometry.conics import Branch, Side
from verifier.models.schemas import QuadratureSpec
from verifier.services.meanvalue_service import _tail, meanvalue_service
from verifier.services.solution_service import polynomial_solution


def harmonic(x):
    return x[0] * x[2] + 1.0


def not_harmonic(x):
    return x[0] ** 2


class TestCircles:
    def test_standard_pair_with_a_solution(self, unit_pair):
        report = meanvalue_service.verify_pair(harmonic, unit_pair, QuadratureSpec(circle_nodes=64))
        assert report.integral_S == pytest.approx(2.0 * math.pi)
        assert report.integral_Sperp == pytest.approx(2.0 * math.pi)
        assert report.relative_gap < 1e-14
        assert report.quadrature.rule == "periodic-trapezoid"

    def test_control_without_a_solution(self, unit_pair):
        report = meanvalue_service.verify_pair(not_harmonic, unit_pair, QuadratureSpec(circle_nodes=64))
        assert report.integral_S == pytest.approx(math.pi)
        assert report.integral_Sperp == pytest.approx(0.0, abs=1e-14)
        assert report.relative_gap == pytest.approx(1.0)

    def test_conjugate_circles(self, circle_pair, appendix_a):
        report = meanvalue_service.verify_pair(appendix_a, circle_pair)
        assert report.integral_S > 0.0
        assert report.relative_gap <= 1e-6

    def test_integrand_outside_the_domain(self, unit_pair):
        def broken(x):
            raise EvaluationDomain("nowhere")

        with pytest.raises(EvaluationDomain):
            meanvalue_service.integrate_circle(broken, unit_pair, Side.S, 16)

    def test_non_finite_integrand(self, unit_pair):
        with pytest.raises(EvaluationDomain):
            meanvalue_service.integrate_circle(lambda x: math.inf, unit_pair, Side.S, 16)


class TestHyperbolae:
    def test_conjugate_hyperbolae(self, hyperbola_pair, appendix_a):
        report = meanvalue_service.verify_pair(appendix_a, hyperbola_pair)
        assert report.relative_gap <= 1e-4
        # one end of each branch decays like 1000 e^-|t| instead of leaving the support
        assert 0.0 < report.tail_bound < 1e-4 * abs(report.integral_S)
        assert set(report.branches) == {"Plus", "Minus", "both"}
        assert report.quadrature.branch_policy == "both"

    def test_branch_policy_selects_the_branch(self, hyperbola_pair, appendix_a):
        both = meanvalue_service.integrate_hyperbola(appendix_a, hyperbola_pair, Side.S, "both", 12.0, 1024)
        plus = meanvalue_service.integrate_hyperbola(appendix_a, hyperbola_pair, Side.S, "plus", 12.0, 1024)
        assert plus.value == both.branches[Branch.PLUS].value
        assert both.value == pytest.approx(both.both)

    def test_tail_bound_vanishes_with_a_longer_range(self, hyperbola_pair, appendix_a):
        for side in (Side.S, Side.SPERP):
            result = meanvalue_service.integrate_hyperbola(appendix_a, hyperbola_pair, side, "both", 30.0, 8192)
            assert result.tail_bound < 1e-8

    @pytest.mark.parametrize("side", [Side.S, Side.SPERP])
    def test_doubling_the_range_moves_each_branch_by_less_than_its_tail_bound(self, hyperbola_pair, appendix_a, side):
        # both runs share the step 30 / 4096, so the nodes on [-15, 15] coincide
        short = meanvalue_service.integrate_hyperbola(appendix_a, hyperbola_pair, side, "both", 15.0, 4096)
        long = meanvalue_service.integrate_hyperbola(appendix_a, hyperbola_pair, side, "both", 30.0, 8192)
        for branch in (Branch.PLUS, Branch.MINUS):
            change = long.branches[branch].value - short.branches[branch].value
            assert 0.0 < change <= short.branches[branch].tail_bound

    def test_growing_integrand_is_not_integrable(self, hyperbola_pair):
        growing = polynomial_solution([(1.0, (2, 0, 0, 0))])
        with pytest.raises(NonIntegrable):
            meanvalue_service.integrate_hyperbola(growing, hyperbola_pair, Side.S, "both", 4.0, 256)

    def test_hyperbola_integrals_need_a_hyperbolic_pair(self, unit_pair):
        with pytest.raises(ValueError):
            meanvalue_service.integrate_hyperbola(harmonic, unit_pair, Side.S)


class TestTail:
    def test_geometric_tail(self):
        # values run from the end of the range inwards
        values = [0.5 ** k for k in range(8)][::-1]
        last, previous = (0.5 ** 7 + 0.5 ** 6) / 2, (0.5 ** 5 + 0.5 ** 4) / 2
        ratio = last / previous
        assert ratio == pytest.approx(0.25)
        expected = last * 2.0 * ratio / (1.0 - ratio)
        assert _tail(values, 1.0, 2, "+T") == pytest.approx(expected)

    def test_zero_tail(self):
        assert _tail([0.0, 0.0, 1.0, 1.0], 0.1, 2, "+T") == 0.0

    def test_non_decaying_tail(self):
        with pytest.raises(NonIntegrable):
            _tail([1.0, 1.0, 1.0, 1.0], 0.1, 2, "-T")


class TestConformalImages:
    def test_poles_are_located_by_bisection(self, unit_pair):
        f = ConformalMap((Inversion(np.array([1.0, 0.0, 1.0, 0.0]), 1.0),))
        poles = meanvalue_service.find_poles(f, unit_pair.S)
        assert len(poles) == 2
        assert poles[0] == pytest.approx(math.pi / 3.0, abs=1e-12)
        assert poles[1] == pytest.approx(5.0 * math.pi / 3.0, abs=1e-12)

    def test_no_poles_for_a_pair_map(self, unit_pair, circle_pair):
        f = map_pair_to_pair(unit_pair, circle_pair)
        assert meanvalue_service.find_poles(f, unit_pair.S) == []
        assert meanvalue_service.find_poles(f, unit_pair.Sperp) == []

    def test_image_integrals_match_the_target_pair(self, unit_pair, circle_pair, appendix_a):
        f = map_pair_to_pair(unit_pair, circle_pair)
        report = meanvalue_service.verify_conformal_invariance(appendix_a, f, QuadratureSpec())
        direct = meanvalue_service.integrate_circle(appendix_a, circle_pair, Side.S, 2048)
        assert report.integral_S == pytest.approx(direct, rel=1e-6)
        assert report.route_gap < 1e-6
        assert report.relative_gap <= 1e-6


class TestLineSpace:
    def test_line_integrals_agree(self, circle_pair, appendix_a):
        report = meanvalue_service.verify_line_pair(appendix_a.on_line, circle_pair, QuadratureSpec(circle_nodes=512))
        assert report.relative_gap <= 1e-6
        assert report.route_gap < 1e-6

    def test_line_element_is_half_the_flat_one_over_omega(self, circle_pair, appendix_a):
        flat = meanvalue_service.integrate_circle(appendix_a, circle_pair, Side.S, 512)
        report = meanvalue_service.verify_line_pair(appendix_a.on_line, circle_pair, QuadratureSpec(circle_nodes=512))
        # v d tau = (Omega u)(dl / 2 Omega)
        assert report.integral_S == pytest.approx(0.5 * flat, rel=1e-6)


def test_curve_samples(hyperbola_pair, appendix_a):
    rows = meanvalue_service.curve_samples(appendix_a, hyperbola_pair, samples=8)
    assert len(rows) == 2 * 2 * 8
    assert {row["side"] for row in rows} == {"S", "Sperp"}
    assert {row["branch"] for row in rows} == {"Plus", "Minus"}
    assert rows[0]["theta"] == pytest.approx(-12.0)


HARMONIC_POLYNOMIALS = {
    "x1x3": [(1.0, [1, 0, 1, 0])],
    "x1^2+x3^2": [(1.0, [2, 0, 0, 0]), (1.0, [0, 0, 2, 0])],
    "x1^2-x2^2": [(1.0, [2, 0, 0, 0]), (-1.0, [0, 2, 0, 0])],
    "x1x2x3x4": [(1.0, [1, 1, 1, 1])],
    "(x1^2+x3^2)(x2^2+x4^2)": [
        (1.0, [2, 2, 0, 0]),
        (1.0, [2, 0, 0, 2]),
        (1.0, [0, 2, 2, 0]),
        (1.0, [0, 0, 2, 2]),
    ],
}


class TestPolynomialSuite:
    @pytest.mark.parametrize("name", sorted(HARMONIC_POLYNOMIALS))
    def test_harmonic_polynomials_on_random_pairs(self, name, rng, random_pair):
        u = polynomial_solution(HARMONIC_POLYNOMIALS[name])
        for _ in range(5):
            pair = random_pair(rng)
            assert pair.is_circle
            report = meanvalue_service.verify_pair(u, pair, QuadratureSpec(circle_nodes=64))
            assert report.absolute_gap <= 1e-9 * max(1.0, abs(report.integral_S))

    def test_non_harmonic_control_on_random_pairs(self, rng, random_pair):
        u = polynomial_solution([(1.0, [2, 0, 0, 0])])
        for _ in range(5):
            report = meanvalue_service.verify_pair(u, random_pair(rng), QuadratureSpec(circle_nodes=64))
            assert report.integral_S - report.integral_Sperp == pytest.approx(math.pi, rel=1e-9)
