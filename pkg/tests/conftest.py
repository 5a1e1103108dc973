"""
Shared fixtures for the verifier test suite
"""
import math

import numpy as np
import pytest

from verifier.geometry.conformal import ConformalMap, Dilation, Inversion, PseudoOrthogonal, Swap, Translation
from verifier.geometry.conics import build_pair, pair_from_three_points, standard_pair
from verifier.geometry.neutral import PlaneFrame, PlaneKind, classify_plane, gram_matrix
from verifier.services.solution_service import solution_service

SQRT3 = math.sqrt(3.0)

CIRCLE_TRIPLE = (
    np.array([8.0, 0.0, 0.0, 0.0]),
    np.array([7.0, 1.0, 0.0, 0.0]),
    np.array([6.0, 0.0, 0.0, 0.0]),
)
HYPERBOLA_TRIPLE = (
    np.array([8.0, 0.0, 0.0, 0.0]),
    np.array([6.0, 0.0, 0.0, 0.0]),
    np.array([9.0, 0.0, SQRT3, 0.0]),
)


@pytest.fixture
def rng():
    return np.random.default_rng(20240518)


@pytest.fixture
def unit_pair():
    return standard_pair()


@pytest.fixture
def circle_pair():
    return pair_from_three_points(*CIRCLE_TRIPLE)


@pytest.fixture
def hyperbola_pair():
    return pair_from_three_points(*HYPERBOLA_TRIPLE)


@pytest.fixture
def appendix_a():
    return solution_service.appendix_a(extend_by_zero=True)


@pytest.fixture
def write_config(tmp_path):
    """Write a YAML experiment file and return its path"""
    def write(text: str, name: str = "experiment.yaml") -> str:
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return str(path)

    return write


@pytest.fixture
def circle_triple():
    return CIRCLE_TRIPLE


@pytest.fixture
def hyperbola_triple():
    return HYPERBOLA_TRIPLE


def _rotation(i, j, angle):
    m = np.eye(4)
    m[i, i] = m[j, j] = math.cos(angle)
    m[i, j], m[j, i] = -math.sin(angle), math.sin(angle)
    return m


def _boost(i, j, rapidity):
    m = np.eye(4)
    m[i, i] = m[j, j] = math.cosh(rapidity)
    m[i, j] = m[j, i] = math.sinh(rapidity)
    return m


def random_pseudo_orthogonal(rng):
    """Product of rotations and boosts; preserves x1^2 + x2^2 - x3^2 - x4^2"""
    a, b = rng.uniform(0.0, 2.0 * math.pi, size=2)
    s, t, r = rng.uniform(-0.8, 0.8, size=3)
    return _rotation(0, 1, a) @ _rotation(2, 3, b) @ _boost(0, 2, s) @ _boost(1, 3, t) @ _boost(0, 3, r)


@pytest.fixture
def random_pair():
    """Factory for random conjugate pairs: definite=True gives unit circles, False hyperbolae"""
    def make(rng, definite: bool = True):
        center = rng.uniform(-1.0, 1.0, size=4)
        if definite:
            m = random_pseudo_orthogonal(rng)
            return build_pair(center, PlaneFrame(center, m[:, 0], m[:, 1]), 1.0)
        while True:
            u, v = rng.normal(size=4), rng.normal(size=4)
            G = gram_matrix([u, v])
            if abs(np.linalg.det(G)) < 0.1 * float(u @ u) * float(v @ v):
                continue
            if classify_plane(PlaneFrame(center, u, v)) == PlaneKind.HYPERBOLIC:
                c2 = rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 2.0)
                return build_pair(center, PlaneFrame(center, u, v), float(c2))

    return make


@pytest.fixture
def random_conformal_map():
    """Factory for random chains of every generator kind"""
    def make(rng) -> ConformalMap:
        k = rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 2.0)
        chain = [
            Translation(rng.normal(size=4)),
            Inversion(2.0 * rng.normal(size=4), float(k)),
            Dilation(float(rng.uniform(0.5, 2.0))),
            PseudoOrthogonal(random_pseudo_orthogonal(rng)),
        ]
        if rng.uniform() < 0.5:
            chain.append(Swap())
        return ConformalMap(tuple(chain))

    return make
