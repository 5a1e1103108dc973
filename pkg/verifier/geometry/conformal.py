"""
Conformal transformations of R^{2,2} together with the cone at infinity.

A ConformalMap is an ordered list of generators applied left to right.
Infinity is a bare symbol: no coordinates are attached to it, so the only
thing tracked is which stage absorbs a point into infinity and which stage
emits a finite point from it.
"""
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Optional, Union

import numpy as np

from ..config import settings
from ..errors import NotSkew, PoleAt
from ..utils.finite_differences import jacobian
from .conics import ConjugateConicPair
from .neutral import METRIC, are_skew, as_vec4, complete_basis, inner, null_threshold, quadratic_form

SWAP_MATRIX = np.array(
    [
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
    ]
)


@dataclass(frozen=True)
class Infinity:
    """The symbol for a point of the cone at infinity"""

    def __repr__(self) -> str:
        return "Infinity"


INFINITY = Infinity()
ExtendedPoint = Union[np.ndarray, Infinity]


def is_infinity(p: Any) -> bool:
    return isinstance(p, Infinity)


def _vector_params(v: np.ndarray) -> list[float]:
    return [float(x) for x in v]


class ConformalGenerator(ABC):
    """One generator of the conformal group"""

    #: +1 when the generator pulls the flat metric back to a positive multiple of itself
    metric_sign: int = 1

    @property
    def name(self) -> str:
        return type(self).__name__

    @abstractmethod
    def apply_finite(self, x: np.ndarray) -> ExtendedPoint:
        ...

    def apply_infinity(self) -> ExtendedPoint:
        return INFINITY

    def apply(self, p: ExtendedPoint) -> ExtendedPoint:
        return self.apply_infinity() if is_infinity(p) else self.apply_finite(p)

    def factor(self, x: np.ndarray) -> float:
        return 1.0

    def pole_denominator(self, x: np.ndarray) -> Optional[float]:
        """Signed, scale-normalized quantity that vanishes on this stage's pole set"""
        return None

    @abstractmethod
    def inverse(self) -> "ConformalGenerator":
        ...

    @abstractmethod
    def params(self) -> dict[str, Any]:
        ...

    def describe(self) -> dict[str, Any]:
        return {"generator": self.name, "params": self.params()}


@dataclass(frozen=True)
class Translation(ConformalGenerator):
    t: np.ndarray

    def apply_finite(self, x):
        return x + self.t

    def inverse(self):
        return Translation(-self.t)

    def params(self):
        return {"t": _vector_params(self.t)}


@dataclass(frozen=True)
class Dilation(ConformalGenerator):
    scale: float

    def __post_init__(self):
        if self.scale == 0.0 or not math.isfinite(self.scale):
            raise ValueError(f"Dilation factor must be finite and nonzero, got {self.scale!r}")

    def apply_finite(self, x):
        return self.scale * x

    def factor(self, x):
        return abs(self.scale)

    def inverse(self):
        return Dilation(1.0 / self.scale)

    def params(self):
        return {"lambda": float(self.scale)}


@dataclass(frozen=True)
class PseudoOrthogonal(ConformalGenerator):
    """x -> M x with M^T I M = I, I = diag(1, 1, -1, -1)"""
    matrix: np.ndarray

    def __post_init__(self):
        M = np.asarray(self.matrix, dtype=float)
        if M.shape != (4, 4):
            raise ValueError(f"Pseudo-orthogonal matrix must be 4x4, got {M.shape}")
        tol = 1e-10 * max(1.0, float(np.max(np.abs(M))) ** 2)
        if np.max(np.abs(M.T @ METRIC @ M - METRIC)) > tol:
            raise ValueError("Matrix does not preserve the neutral form")

    def apply_finite(self, x):
        return self.matrix @ x

    def inverse(self):
        return PseudoOrthogonal(METRIC @ self.matrix.T @ METRIC)

    def params(self):
        return {"M": [[float(x) for x in row] for row in self.matrix]}


@dataclass(frozen=True)
class Swap(ConformalGenerator):
    """Anti-orthogonal (a, b, c, d) -> (c, d, a, b); flips the sign of Q"""
    metric_sign = -1

    def apply_finite(self, x):
        return SWAP_MATRIX @ x

    def inverse(self):
        return Swap()

    def params(self):
        return {}


@dataclass(frozen=True)
class Inversion(ConformalGenerator):
    """x -> c + k (x - c) / Q(x - c); the cone of c goes to infinity and back"""
    center: np.ndarray
    k: float

    def __post_init__(self):
        if self.k == 0.0 or not math.isfinite(self.k):
            raise ValueError(f"Inversion constant must be finite and nonzero, got {self.k!r}")

    def apply_finite(self, x):
        w = x - self.center
        q = quadratic_form(w)
        if abs(q) <= null_threshold(x, self.center):
            return INFINITY
        return self.center + self.k * w / q

    def apply_infinity(self):
        return self.center.copy()

    def factor(self, x):
        return abs(self.k) / abs(quadratic_form(x - self.center))

    def pole_denominator(self, x):
        return quadratic_form(x - self.center) / max(1.0, float(x @ x + self.center @ self.center))

    def inverse(self):
        return self

    def params(self):
        return {"center": _vector_params(self.center), "k": float(self.k)}


@dataclass(frozen=True)
class SpecialConformal(ConformalGenerator):
    """y -> (y + d Q(y)) / (1 + 2<d, y> + Q(d) Q(y)), the unit inversion conjugate of a translation"""
    d: np.ndarray

    def _denominator(self, y: np.ndarray) -> tuple[float, float]:
        dy = inner(self.d, y)
        qq = quadratic_form(self.d) * quadratic_form(y)
        return 1.0 + 2.0 * dy + qq, 1.0 + 2.0 * abs(dy) + abs(qq)

    def apply_finite(self, x):
        denom, scale = self._denominator(x)
        if abs(denom) <= settings.null_tolerance * scale:
            return INFINITY
        return (x + self.d * quadratic_form(x)) / denom

    def apply_infinity(self):
        qd = quadratic_form(self.d)
        if abs(qd) <= settings.null_tolerance * max(1.0, float(self.d @ self.d)):
            return INFINITY
        return self.d / qd

    def factor(self, x):
        return 1.0 / abs(self._denominator(x)[0])

    def pole_denominator(self, x):
        denom, scale = self._denominator(x)
        return denom / scale

    def inverse(self):
        return SpecialConformal(-self.d)

    def params(self):
        return {"d": _vector_params(self.d)}


@dataclass(frozen=True)
class ConformalMap:
    generators: tuple[ConformalGenerator, ...] = ()

    def __call__(self, p: ExtendedPoint) -> ExtendedPoint:
        return self.apply(p)

    def apply(self, p: ExtendedPoint) -> ExtendedPoint:
        current = p if is_infinity(p) else np.asarray(p, dtype=float)
        for g in self.generators:
            current = g.apply(current)
        return current

    def then(self, other: "ConformalMap") -> "ConformalMap":
        """self first, then other"""
        return ConformalMap(self.generators + other.generators)

    def inverse(self) -> "ConformalMap":
        return ConformalMap(tuple(g.inverse() for g in reversed(self.generators)))

    def metric_sign(self) -> int:
        sign = 1
        for g in self.generators:
            sign *= g.metric_sign
        return sign

    def conformal_factor(self, p) -> float:
        """Product of stage factors at the running image of p.

        Raises:
            PoleAt: if some stage sends the running point to infinity
        """
        current = as_vec4(p)
        omega = 1.0
        for stage, g in enumerate(self.generators):
            image = g.apply_finite(current)
            if is_infinity(image):
                raise PoleAt(stage, g.name)
            omega *= g.factor(current)
            current = image
        return omega

    def pole_indicator(self, p) -> float:
        """Signed product of stage denominators; changes sign across a pole"""
        current = np.asarray(p, dtype=float)
        value = 1.0
        for g in self.generators:
            denom = g.pole_denominator(current)
            if denom is not None:
                value *= denom
            current = g.apply_finite(current)
            if is_infinity(current):
                # inside the null threshold; the stage denominator still carries the sign
                return value
        return value

    def describe(self) -> list[dict[str, Any]]:
        return [g.describe() for g in self.generators]


def identity() -> ConformalMap:
    return ConformalMap()


def apply(f: ConformalMap, p: ExtendedPoint) -> ExtendedPoint:
    return f.apply(p)


def conformal_factor(f: ConformalMap, p) -> float:
    return f.conformal_factor(p)


def conformality_residual(f: ConformalMap, p, step: Optional[float] = None) -> float:
    """Largest entry of |J^T I J - sign * Omega^2 I| / max(1, Omega^2) at p"""
    p = as_vec4(p)
    rel = settings.conformal_fd_step if step is None else step
    h = rel * max(1.0, float(np.max(np.abs(p))))
    J = jacobian(lambda x: f.apply(x), p, np.full(4, h))
    omega = f.conformal_factor(p)
    target = f.metric_sign() * omega * omega * METRIC
    return float(np.max(np.abs(J.T @ METRIC @ J - target))) / max(1.0, omega * omega)


@dataclass(frozen=True)
class _Standardization:
    """Data of the chain q -> 0, q' -> infinity, q'' -> e1"""
    shift: np.ndarray
    pole: np.ndarray
    k: float
    scale: float
    frame: np.ndarray
    swapped: bool

    def generators(self) -> tuple[ConformalGenerator, ...]:
        chain: list[ConformalGenerator] = [
            Translation(-self.shift),
            Inversion(self.pole, self.k),
            Dilation(self.scale),
            PseudoOrthogonal(METRIC @ self.frame.T @ METRIC),
        ]
        if self.swapped:
            chain.append(Swap())
        return tuple(chain)


def _standardize(q, q1, q2, eps: Optional[float] = None) -> _Standardization:
    q, q1, q2 = as_vec4(q), as_vec4(q1), as_vec4(q2)
    for a, b, label in ((q, q1, "q, q'"), (q, q2, "q, q''"), (q1, q2, "q', q''")):
        if not are_skew(a, b, eps):
            raise NotSkew(f"Points {label} are null-separated")

    pole = q1 - q
    k = quadratic_form(pole)
    # the inversion about q' through 0 fixes 0 and sends q' to infinity
    image = Inversion(pole, k).apply_finite(q2 - q)
    if is_infinity(image):
        raise NotSkew("Points q', q'' are null-separated")
    q_image = quadratic_form(image)
    scale = abs(q_image) ** -0.5
    unit = scale * image
    frame = complete_basis(unit, eps)
    return _Standardization(shift=q, pole=pole, k=k, scale=scale, frame=frame, swapped=q_image < 0)


def map_triple_to_standard(q, q1, q2, eps: Optional[float] = None) -> ConformalMap:
    """Conformal map sending q -> 0, q' -> infinity, q'' -> (1, 0, 0, 0).

    Translate q to the origin, invert about the image of q' through the
    origin, dilate the image of q'' to unit |Q|, then rotate it onto e1 (or
    onto e3 followed by the swap when its Q is negative).

    Raises:
        NotSkew: if two of the points are null-separated
        FrameCompletionFailure: if the basis completion breaks down
    """
    return ConformalMap(_standardize(q, q1, q2, eps).generators())


def map_pair_to_pair(source: ConjugateConicPair, target: ConjugateConicPair) -> ConformalMap:
    """Conformal map with f(source.S) = target.S and f(source.Sperp) = target.Sperp.

    Equal to the inverse standardizing chain of a target S-perp triple after
    the standardizing chain of a source S-perp triple. The two inversions and
    the linear middle collapse into one special conformal map, so points of S
    (which lie on the cone of every S-perp point) never pass through infinity.
    """
    s = _standardize(*source.Sperp.sample_triple())
    t = _standardize(*target.Sperp.sample_triple())

    lam = s.scale / t.scale
    source_inverse = METRIC @ s.frame.T @ METRIC
    if s.swapped == t.swapped:
        N, orientation = t.frame @ source_inverse, 1.0
    else:
        N, orientation = t.frame @ SWAP_MATRIX @ source_inverse, -1.0

    mu = lam * s.k
    d = lam * (N @ s.pole) - t.pole
    N_inverse = orientation * (METRIC @ N.T @ METRIC)
    d_prime = (N_inverse @ d) / mu
    rho = t.k * orientation / mu

    chain: list[ConformalGenerator] = [Translation(-(s.shift + s.pole))]
    if np.any(d_prime != 0.0):
        chain.append(SpecialConformal(d_prime))
    chain.append(Dilation(rho))
    if orientation > 0:
        chain.append(PseudoOrthogonal(N))
    else:
        chain.extend([PseudoOrthogonal(SWAP_MATRIX @ N), Swap()])
    chain.append(Translation(t.pole + t.shift))
    return ConformalMap(tuple(chain))
