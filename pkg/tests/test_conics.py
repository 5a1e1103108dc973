import math

import numpy as np
import pytest

from verifier.errors import DegeneratePlane, EmptyConic, ZeroRadius
from verifier.geometry.conics import (
    Branch,
    Side,
    build_pair,
    line_element_factor,
    nullity_residual,
    pair_from_three_points,
)
from verifier.geometry.neutral import PlaneFrame, PlaneKind, inner, quadratic_form

E = np.eye(4)
ORIGIN = np.zeros(4)
PARAMETERS = np.linspace(-2.5, 2.5, 11)


def test_standard_pair_is_two_unit_circles(unit_pair):
    assert unit_pair.is_circle
    assert unit_pair.kind == PlaneKind.POSITIVE_DEFINITE
    assert unit_pair.Sperp.plane_kind == PlaneKind.NEGATIVE_DEFINITE
    for t in PARAMETERS:
        assert quadratic_form(unit_pair.S.point(t)) == pytest.approx(1.0, abs=1e-14)
        assert quadratic_form(unit_pair.Sperp.point(t)) == pytest.approx(-1.0, abs=1e-14)


def test_circle_pair_from_three_points(circle_pair, circle_triple):
    assert circle_pair.is_circle
    assert np.allclose(circle_pair.center, [7.0, 0.0, 0.0, 0.0])
    assert circle_pair.square_radius == pytest.approx(1.0)
    assert circle_pair.conic(Side.S) is circle_pair.S
    assert circle_pair.conic(Side.SPERP) is circle_pair.Sperp
    for q in circle_triple:
        assert quadratic_form(q - circle_pair.center) == pytest.approx(circle_pair.square_radius)


def test_circle_through_points_on_the_x1_x2_plane():
    # the plane is spanned by coordinate axes, so its complement is the x3-x4 plane
    pair = pair_from_three_points([8.0, 0.0, 0.0, 0.0], [7.0, 1.0, 0.0, 0.0], [6.0, 0.0, 0.0, 0.0])
    assert pair.Sperp.plane_kind == PlaneKind.NEGATIVE_DEFINITE
    for w in (pair.Sperp.first, pair.Sperp.second):
        assert abs(w[0]) < 1e-12 and abs(w[1]) < 1e-12
    for t in PARAMETERS:
        assert quadratic_form(pair.Sperp.point(t) - pair.center) == pytest.approx(-1.0, abs=1e-12)


@pytest.mark.parametrize("side, expected", [(Side.S, 1.0), (Side.SPERP, -1.0)])
@pytest.mark.parametrize("branch", [Branch.PLUS, Branch.MINUS])
def test_hyperbola_points_lie_on_their_conic(hyperbola_pair, side, expected, branch):
    conic = hyperbola_pair.conic(side)
    assert not conic.is_circle
    assert conic.branches == (Branch.PLUS, Branch.MINUS)
    for t in PARAMETERS:
        assert quadratic_form(conic.point(t, branch) - hyperbola_pair.center) == pytest.approx(expected, abs=1e-10)


def test_conjugate_planes_are_orthogonal(hyperbola_pair):
    for u in hyperbola_pair.frame:
        for v in hyperbola_pair.perp_frame:
            assert abs(inner(u, v)) < 1e-12


@pytest.mark.parametrize("side", [Side.S, Side.SPERP])
def test_tangent_speed_is_the_radius(circle_pair, hyperbola_pair, side):
    for pair in (circle_pair, hyperbola_pair):
        conic = pair.conic(side)
        for branch in conic.branches:
            for t in PARAMETERS:
                speed = math.sqrt(abs(quadratic_form(conic.tangent(t, branch))))
                assert speed == pytest.approx(line_element_factor(pair), rel=1e-12)


@pytest.mark.parametrize("pair_name", ["circle_pair", "hyperbola_pair"])
def test_sample_triple_rebuilds_the_pair(request, pair_name):
    pair = request.getfixturevalue(pair_name)
    rebuilt = pair_from_three_points(*pair.S.sample_triple())
    assert np.allclose(rebuilt.center, pair.center, atol=1e-10)
    assert rebuilt.square_radius == pytest.approx(pair.square_radius, rel=1e-10)
    assert rebuilt.kind == pair.kind


def test_every_perp_point_is_null_separated_from_the_triple(circle_pair, circle_triple):
    for t in PARAMETERS:
        assert nullity_residual(circle_pair.Sperp.point(t), *circle_triple) < 1e-12


def test_definite_plane_with_wrong_sign_is_empty():
    with pytest.raises(EmptyConic):
        build_pair(ORIGIN, PlaneFrame(ORIGIN, E[0], E[1]), -1.0)


def test_zero_radius_is_rejected():
    with pytest.raises(ZeroRadius):
        build_pair(ORIGIN, PlaneFrame(ORIGIN, E[0], E[1]), 0.0)


def test_degenerate_plane_is_rejected():
    with pytest.raises(DegeneratePlane):
        build_pair(ORIGIN, PlaneFrame(ORIGIN, E[0], E[1] + E[2]), 1.0)


def test_negative_square_radius_on_hyperbolic_plane():
    pair = build_pair(ORIGIN, PlaneFrame(ORIGIN, E[0], E[2]), -4.0)
    assert pair.Sperp.square_radius == 4.0
    for t in PARAMETERS:
        assert quadratic_form(pair.S.point(t, Branch.MINUS)) == pytest.approx(-4.0, rel=1e-12)


def _random_points(conic, rng, count):
    points = []
    for t in rng.uniform(-1.5, 1.5, size=count):
        branch = conic.branches[int(rng.integers(len(conic.branches)))]
        points.append(conic.point(t, branch))
    return points


@pytest.mark.parametrize("definite", [True, False])
def test_conjugate_conics_are_dual(rng, random_pair, definite):
    for _ in range(10):
        pair = random_pair(rng, definite)
        for near, far in ((pair.S, pair.Sperp), (pair.Sperp, pair.S)):
            triple = _random_points(near, rng, 3)
            for p in _random_points(far, rng, 8):
                assert nullity_residual(p, *triple) <= 1e-9


@pytest.mark.parametrize("definite", [True, False])
def test_null_points_are_perpendicular_to_the_plane(rng, random_pair, definite):
    for _ in range(5):
        pair = random_pair(rng, definite)
        for p in _random_points(pair.Sperp, rng, 6):
            for d in pair.frame:
                assert abs(inner(p - pair.center, d)) < 1e-10 * max(1.0, float(np.linalg.norm(p - pair.center)))
