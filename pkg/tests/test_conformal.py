import math

import numpy as np
import pytest

from verifier.errors import NotSkew, PoleAt
from verifier.geometry.conformal import (
    INFINITY,
    ConformalMap,
    Dilation,
    Inversion,
    PseudoOrthogonal,
    SpecialConformal,
    Swap,
    Translation,
    conformality_residual,
    identity,
    is_infinity,
    map_pair_to_pair,
    map_triple_to_standard,
)
from verifier.geometry.conics import Branch, build_pair
from verifier.geometry.neutral import PlaneFrame, quadratic_form

E1 = np.array([1.0, 0.0, 0.0, 0.0])
GENERIC = np.array([1.0, 2.0, 0.5, -0.3])


def boost(rapidity: float) -> np.ndarray:
    M = np.eye(4)
    M[0, 0] = M[2, 2] = math.cosh(rapidity)
    M[0, 2] = M[2, 0] = math.sinh(rapidity)
    return M


def test_identity_fixes_points_and_infinity():
    f = identity()
    assert np.array_equal(f(GENERIC), GENERIC)
    assert is_infinity(f(INFINITY))
    assert f.conformal_factor(GENERIC) == 1.0


def test_pseudo_orthogonal_rejects_euclidean_rotations():
    with pytest.raises(ValueError):
        PseudoOrthogonal(np.array([[0.0, 0.0, 1.0, 0.0], [0.0, 1.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 1.0]]))
    PseudoOrthogonal(boost(0.7))


def test_dilation_needs_a_nonzero_factor():
    with pytest.raises(ValueError):
        Dilation(0.0)


def test_swap_flips_the_quadratic_form():
    f = ConformalMap((Swap(),))
    assert f.metric_sign() == -1
    assert quadratic_form(f(GENERIC)) == pytest.approx(-quadratic_form(GENERIC))
    assert np.allclose(f.then(f)(GENERIC), GENERIC)


def test_inversion_exchanges_the_cone_and_infinity():
    center = np.array([1.0, 0.0, 0.0, 0.0])
    g = Inversion(center, 2.0)
    assert is_infinity(g.apply(np.array([2.0, 0.0, 1.0, 0.0])))
    assert np.array_equal(g.apply(INFINITY), center)
    f = ConformalMap((g,))
    with pytest.raises(PoleAt) as info:
        f.conformal_factor(np.array([2.0, 0.0, 1.0, 0.0]))
    assert info.value.stage == 0
    assert info.value.generator == "Inversion"


def test_special_conformal_sends_infinity_to_d_over_q():
    d = np.array([0.5, 0.0, 0.0, 0.25])
    assert np.allclose(SpecialConformal(d).apply(INFINITY), d / quadratic_form(d))


CHAIN = ConformalMap(
    (
        Translation(np.array([0.3, -1.0, 0.2, 0.5])),
        Inversion(np.array([5.0, 1.0, 0.0, 2.0]), -3.0),
        Dilation(1.7),
        PseudoOrthogonal(boost(0.4)),
        SpecialConformal(np.array([0.05, 0.02, -0.03, 0.01])),
        Swap(),
    )
)


def test_inverse_undoes_the_chain():
    image = CHAIN(GENERIC)
    assert np.allclose(CHAIN.inverse()(image), GENERIC, atol=1e-10)


def test_chain_is_conformal():
    assert CHAIN.metric_sign() == -1
    assert conformality_residual(CHAIN, GENERIC) < 1e-6


def test_describe_lists_generators():
    names = [stage["generator"] for stage in CHAIN.describe()]
    assert names == ["Translation", "Inversion", "Dilation", "PseudoOrthogonal", "SpecialConformal", "Swap"]


@pytest.mark.parametrize("triple_name", ["circle_triple", "hyperbola_triple"])
def test_map_triple_to_standard(request, triple_name):
    q, q1, q2 = request.getfixturevalue(triple_name)
    f = map_triple_to_standard(q, q1, q2)
    assert np.allclose(f(q), 0.0, atol=1e-12)
    assert is_infinity(f(q1))
    assert np.allclose(f(q2), E1, atol=1e-10)
    assert conformality_residual(f, q + np.array([0.3, -0.2, 0.4, 0.1])) < 1e-6


def test_map_triple_needs_skew_points():
    with pytest.raises(NotSkew):
        map_triple_to_standard([0, 0, 0, 0], [1, 0, 1, 0], [2, 0, 0, 0])


def test_map_pair_to_pair_carries_circles_onto_circles(unit_pair, circle_pair):
    f = map_pair_to_pair(unit_pair, circle_pair)
    for side_source, side_target in ((unit_pair.S, circle_pair.S), (unit_pair.Sperp, circle_pair.Sperp)):
        for t in np.linspace(0.0, 2.0 * math.pi, 13):
            image = f(side_source.point(t))
            assert not is_infinity(image)
            offset = image - circle_pair.center
            assert quadratic_form(offset) == pytest.approx(side_target.square_radius, abs=1e-9)
            coords, *_ = np.linalg.lstsq(np.column_stack([side_target.first, side_target.second]), offset, rcond=None)
            residual = offset - coords[0] * side_target.first - coords[1] * side_target.second
            assert np.linalg.norm(residual) < 1e-9


def test_pole_indicator_changes_sign_across_a_pole(unit_pair):
    f = ConformalMap((Inversion(np.array([1.0, 0.0, 1.0, 0.0]), 1.0),))
    before = f.pole_indicator(unit_pair.S.point(math.pi / 3.0 - 1e-3))
    after = f.pole_indicator(unit_pair.S.point(math.pi / 3.0 + 1e-3))
    assert before * after < 0.0


def test_pole_indicator_keeps_its_sign_inside_the_null_threshold(unit_pair):
    f = ConformalMap((Inversion(np.array([1.0, 0.0, 1.0, 0.0]), 1.0),))
    before = f.pole_indicator(unit_pair.S.point(math.pi / 3.0 - 1e-11))
    after = f.pole_indicator(unit_pair.S.point(math.pi / 3.0 + 1e-11))
    assert before != 0.0
    assert after != 0.0
    assert before * after < 0.0


def test_inversion_of_a_point_on_the_x1_axis():
    g = Inversion(np.zeros(4), 1.0)
    x = np.array([2.0, 0.0, 0.0, 0.0])
    assert np.allclose(g.apply(x), [0.5, 0.0, 0.0, 0.0])
    assert g.factor(x) == pytest.approx(0.25)


def test_negative_image_of_the_third_point_ends_in_a_swap():
    q, q1, q2 = np.zeros(4), np.array([2.0, 0.0, 0.0, 0.0]), np.array([0.0, 0.0, 1.0, 0.0])
    f = map_triple_to_standard(q, q1, q2)
    assert [stage["generator"] for stage in f.describe()][-1] == "Swap"
    assert f.metric_sign() == -1
    assert np.allclose(f(q), 0.0, atol=1e-12)
    assert is_infinity(f(q1))
    assert np.allclose(f(q2), E1, atol=1e-10)


def test_map_triple_to_standard_on_random_triples(rng):
    checked = 0
    while checked < 100:
        q, q1, q2 = rng.uniform(-3.0, 3.0, size=(3, 4))
        if min(abs(quadratic_form(a - b)) for a, b in ((q, q1), (q, q2), (q1, q2))) < 1.0:
            continue
        f = map_triple_to_standard(q, q1, q2)
        assert np.linalg.norm(f(q)) < 1e-9
        assert is_infinity(f(q1))
        assert np.linalg.norm(f(q2) - E1) < 1e-8
        checked += 1


def test_conformal_maps_preserve_null_separation(rng, random_conformal_map):
    checked = 0
    while checked < 50:
        f = random_conformal_map(rng)
        p = rng.uniform(-2.0, 2.0, size=4)
        a, b = rng.uniform(0.0, 2.0 * math.pi, size=2)
        x = p + rng.uniform(0.5, 2.0) * np.array([math.cos(a), math.sin(a), math.cos(b), math.sin(b)])
        try:
            factors = (f.conformal_factor(p), f.conformal_factor(x))
        except PoleAt:
            continue
        if max(factors) > 1e2 or min(factors) < 1e-2:
            continue
        offset = f(x) - f(p)
        assert abs(quadratic_form(offset)) <= 1e-8 * float(offset @ offset)
        checked += 1


def test_map_pair_to_pair_carries_hyperbolae_onto_hyperbolae(hyperbola_pair):
    origin = np.zeros(4)
    source = build_pair(origin, PlaneFrame(origin, np.eye(4)[0], np.eye(4)[2]), 1.0)
    f = map_pair_to_pair(source, hyperbola_pair)
    checked = 0
    for side_source, side_target in ((source.S, hyperbola_pair.S), (source.Sperp, hyperbola_pair.Sperp)):
        basis = np.column_stack([side_target.first, side_target.second])
        for branch in (Branch.PLUS, Branch.MINUS):
            for t in np.linspace(-3.0, 3.0, 25):
                image = f(side_source.point(t, branch))
                # samples next to a pole land far out on the target
                if is_infinity(image) or np.linalg.norm(image) > 1e4:
                    continue
                offset = image - hyperbola_pair.center
                scale = max(1.0, float(offset @ offset))
                assert abs(quadratic_form(offset) - side_target.square_radius) <= 1e-8 * scale
                coords, *_ = np.linalg.lstsq(basis, offset, rcond=None)
                assert np.linalg.norm(offset - basis @ coords) <= 1e-8 * math.sqrt(scale)
                checked += 1
    assert checked >= 40
