"""
Conjugate conic pairs: a pseudo-circle S of square-radius c^2 in a
non-degenerate plane through O, and the pseudo-circle S-perp of square-radius
-c^2 in the orthogonal plane through O.
"""
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from ..config import settings
from ..errors import DegeneratePlane, EmptyConic, ZeroRadius
from .neutral import (
    PlaneFrame,
    PlaneKind,
    ThreePointCenter,
    as_vec4,
    canonical_sign,
    center_of_three,
    classify_plane,
    orthocomplement_plane,
    pseudo_orthonormalize,
    quadratic_form,
)


class Side(str, Enum):
    S = "S"
    SPERP = "Sperp"


class Branch(str, Enum):
    PLUS = "Plus"
    MINUS = "Minus"


@dataclass(frozen=True)
class Conic:
    """One pseudo-circle {p in plane : Q(p - O) = square_radius}.

    Circles are O + |c|(cos t first + sin t second); hyperbolae are
    O + |c|(+-cosh t first + sinh t second), where `first` is the unit
    direction whose Q has the sign of the square-radius.
    """
    center: np.ndarray
    square_radius: float
    first: np.ndarray
    second: np.ndarray
    plane_kind: PlaneKind

    @property
    def radius(self) -> float:
        return math.sqrt(abs(self.square_radius))

    @property
    def is_circle(self) -> bool:
        return self.plane_kind.is_definite

    @property
    def branches(self) -> tuple[Optional[Branch], ...]:
        return (None,) if self.is_circle else (Branch.PLUS, Branch.MINUS)

    def point(self, t: float, branch: Optional[Branch] = Branch.PLUS) -> np.ndarray:
        if self.is_circle:
            return self.center + self.radius * (math.cos(t) * self.first + math.sin(t) * self.second)
        s = -1.0 if branch == Branch.MINUS else 1.0
        return self.center + self.radius * (s * math.cosh(t) * self.first + math.sinh(t) * self.second)

    def tangent(self, t: float, branch: Optional[Branch] = Branch.PLUS) -> np.ndarray:
        if self.is_circle:
            return self.radius * (-math.sin(t) * self.first + math.cos(t) * self.second)
        s = -1.0 if branch == Branch.MINUS else 1.0
        return self.radius * (s * math.sinh(t) * self.first + math.cosh(t) * self.second)

    def sample_triple(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Three pairwise skew points spanning the conic's plane"""
        if self.is_circle:
            return tuple(self.point(2.0 * math.pi * k / 3.0) for k in range(3))
        return (
            self.point(0.0, Branch.PLUS),
            self.point(0.0, Branch.MINUS),
            self.point(1.0, Branch.PLUS),
        )


@dataclass(frozen=True)
class ConjugateConicPair:
    center: np.ndarray
    square_radius: float
    plane: PlaneFrame
    kind: PlaneKind
    S: Conic
    Sperp: Conic

    @property
    def is_circle(self) -> bool:
        return self.kind.is_definite

    @property
    def frame(self) -> tuple[np.ndarray, np.ndarray]:
        return self.S.first, self.S.second

    @property
    def perp_frame(self) -> tuple[np.ndarray, np.ndarray]:
        return self.Sperp.first, self.Sperp.second

    def conic(self, side: Side) -> Conic:
        return self.S if side == Side.S else self.Sperp


def _unit_frame(u: np.ndarray, v: np.ndarray) -> list[np.ndarray]:
    frame = [canonical_sign(b) for b in pseudo_orthonormalize([u, v])]
    frame.sort(key=lambda b: -quadratic_form(b))
    return frame


def _conic_in(center: np.ndarray, c2: float, frame: list[np.ndarray], kind: PlaneKind) -> Conic:
    sign = 1.0 if c2 > 0 else -1.0
    if kind.is_definite:
        plane_sign = 1.0 if kind == PlaneKind.POSITIVE_DEFINITE else -1.0
        if plane_sign != sign:
            raise EmptyConic(f"{kind.value} plane has no points at square-radius {c2:g}")
        first, second = frame
    else:
        # cosh runs along the direction whose Q sign matches the square-radius
        first = next(b for b in frame if quadratic_form(b) * sign > 0)
        second = next(b for b in frame if quadratic_form(b) * sign < 0)
    return Conic(center=center, square_radius=c2, first=first, second=second, plane_kind=kind)


def build_pair(O, plane: PlaneFrame, c2: float, eps: Optional[float] = None) -> ConjugateConicPair:
    """Build the conjugate pair centered at O in the plane O + span{u, v}.

    Args:
        O: center
        plane: frame whose directions span the plane of S (its origin is ignored)
        c2: square-radius of S; S-perp gets -c2

    Raises:
        DegeneratePlane: if the plane is parabolic or totally null
        ZeroRadius: if c2 is zero
        EmptyConic: if a definite plane has the wrong sign for c2
    """
    eps = settings.null_tolerance if eps is None else eps
    O = as_vec4(O)
    if not math.isfinite(c2) or abs(c2) <= eps * max(1.0, float(O @ O)):
        raise ZeroRadius(f"Square-radius {c2!r} is zero")

    frame_plane = PlaneFrame(O, plane.u, plane.v)
    kind = classify_plane(frame_plane, eps)
    if kind.is_degenerate:
        raise DegeneratePlane(f"Conics in a {kind.value} plane are not supported")

    perp = orthocomplement_plane(frame_plane, eps)
    perp_kind = classify_plane(perp, eps)

    S = _conic_in(O, float(c2), _unit_frame(plane.u, plane.v), kind)
    Sperp = _conic_in(O, -float(c2), [perp.u, perp.v], perp_kind)
    return ConjugateConicPair(center=O, square_radius=float(c2), plane=frame_plane, kind=kind, S=S, Sperp=Sperp)


def standard_pair() -> ConjugateConicPair:
    """The unit circle in span{e1, e2} and its conjugate in span{e3, e4}"""
    e = np.eye(4)
    return build_pair(np.zeros(4), PlaneFrame(np.zeros(4), e[0], e[1]), 1.0)


def pair_from_three_points(q, q1, q2, eps: Optional[float] = None) -> ConjugateConicPair:
    """The conjugate pair whose S passes through three skew points"""
    center: ThreePointCenter = center_of_three(q, q1, q2, eps)
    return build_pair(center.origin, center.plane, center.square_radius, eps)


def nullity_residual(p, q, q1, q2) -> float:
    """Largest scale-normalized |Q(p - q_i)|; zero iff p lies on all three cones"""
    p = np.asarray(p, dtype=float)
    residuals = []
    for qi in (q, q1, q2):
        qi = np.asarray(qi, dtype=float)
        residuals.append(abs(quadratic_form(p - qi)) / max(1.0, float(p @ p + qi @ qi)))
    return max(residuals)


def line_element_factor(pair: ConjugateConicPair) -> float:
    """|c|: the flat line element of both parametrizations is |c| dt"""
    return math.sqrt(abs(pair.square_radius))
