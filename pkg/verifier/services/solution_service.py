"""
Solution service: the catalogue of ultra-hyperbolic solutions and the
X-ray transforms they come from
"""
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from ..config import settings
from ..errors import EvaluationDomain, OutOfDomain, OverlappingBalls, VerifierError
from ..geometry.line_space import (
    OrientedLine,
    check_in_chart,
    conformal_factor_omega,
    line_direction,
    line_to_vec4,
    phi_map,
    transport_line_field,
)
from ..geometry.neutral import as_vec4, quadratic_form
from ..utils.quadrature import adaptive_simpson, compensated_sum

logger = logging.getLogger(__name__)

APPENDIX_A_RADIUS = 500.0


@dataclass(frozen=True)
class UheSolution:
    """A solution given on the flat chart, on line space, or both.

    Missing evaluators are filled in by transport: u = v / Omega and
    v = Omega * (u o line_to_flat).
    """
    name: str
    flat: Optional[Callable[[np.ndarray], float]] = None
    line: Optional[Callable[[OrientedLine], float]] = None
    domain: Optional[Callable[[np.ndarray], bool]] = None

    def __post_init__(self):
        if self.flat is None and self.line is None:
            raise ValueError(f"Solution '{self.name}' needs a flat or a line evaluator")

    def __call__(self, x) -> float:
        x = as_vec4(x)
        if self.flat is not None:
            return float(self.flat(x))
        return transport_line_field(self.line)(x)

    def on_line(self, l: OrientedLine) -> float:
        if self.line is not None:
            return float(self.line(l))
        return conformal_factor_omega(l) * float(self.flat(line_to_vec4(l)))

    def contains(self, x) -> bool:
        if self.domain is None:
            return True
        return bool(self.domain(as_vec4(x)))


# ---------------------------------------------------------------------------
# densities on R^3


class Density3(ABC):
    """Density on R^3 with known support boundary crossings"""

    @abstractmethod
    def __call__(self, X: np.ndarray) -> float:
        ...

    def breakpoints(self, start: np.ndarray, direction: np.ndarray) -> list[float]:
        """Arc-length parameters where start + t direction crosses the support boundary"""
        return []


def _sphere_crossings(center: np.ndarray, radius: float, start: np.ndarray, direction: np.ndarray) -> list[float]:
    w = start - center
    b = float(direction @ w)
    disc = b * b - (float(w @ w) - radius * radius)
    if disc < 0.0:
        return []
    root = math.sqrt(disc)
    return [-b - root, -b + root]


@dataclass(frozen=True)
class SlabDensity(Density3):
    """Indicator of |X3| <= d0"""
    d0: float

    def __post_init__(self):
        if self.d0 < 0:
            raise ValueError(f"Slab half-thickness must be nonnegative, got {self.d0!r}")

    def __call__(self, X: np.ndarray) -> float:
        return 1.0 if abs(X[2]) <= self.d0 else 0.0

    def breakpoints(self, start: np.ndarray, direction: np.ndarray) -> list[float]:
        if direction[2] == 0.0:
            return []
        return sorted([(self.d0 - start[2]) / direction[2], (-self.d0 - start[2]) / direction[2]])


@dataclass(frozen=True)
class BallDensity(Density3):
    """density * indicator of |X - center| <= radius"""
    radius: float
    center: tuple[float, float, float] = (0.0, 0.0, 0.0)
    density: float = 1.0

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError(f"Ball radius must be nonnegative, got {self.radius!r}")

    @property
    def center_vector(self) -> np.ndarray:
        return np.asarray(self.center, dtype=float)

    def __call__(self, X: np.ndarray) -> float:
        d = X - self.center_vector
        return self.density if float(d @ d) <= self.radius * self.radius else 0.0

    def breakpoints(self, start: np.ndarray, direction: np.ndarray) -> list[float]:
        return _sphere_crossings(self.center_vector, self.radius, start, direction)


@dataclass(frozen=True)
class KBallDensity(Density3):
    balls: tuple[BallDensity, ...] = field(default_factory=tuple)

    def __post_init__(self):
        for i, first in enumerate(self.balls):
            for second in self.balls[i + 1:]:
                gap = float(np.linalg.norm(first.center_vector - second.center_vector))
                if gap <= first.radius + second.radius:
                    raise OverlappingBalls(
                        f"Balls at {first.center} and {second.center} overlap "
                        f"(distance {gap:g} <= {first.radius + second.radius:g})"
                    )

    def __call__(self, X: np.ndarray) -> float:
        return compensated_sum(ball(X) for ball in self.balls)

    def breakpoints(self, start: np.ndarray, direction: np.ndarray) -> list[float]:
        points: list[float] = []
        for ball in self.balls:
            points.extend(ball.breakpoints(start, direction))
        return sorted(points)


@dataclass(frozen=True)
class GaussianDensity(Density3):
    """amplitude * exp(-|X|^2 / (2 sigma^2))"""
    sigma: float
    amplitude: float = 1.0

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError(f"Gaussian width must be positive, got {self.sigma!r}")

    def __call__(self, X: np.ndarray) -> float:
        return self.amplitude * math.exp(-float(X @ X) / (2.0 * self.sigma ** 2))


@dataclass(frozen=True)
class BallSection:
    """Lines through a ball center c: eta_c(xi) = (c1 + i c2 - 2 c3 xi - (c1 - i c2) xi^2) / 2"""
    center: tuple[float, float, float]

    def eta(self, xi: complex) -> complex:
        c1, c2, c3 = self.center
        return 0.5 * (complex(c1, c2) - 2.0 * c3 * xi - complex(c1, -c2) * xi * xi)

    def distance(self, l: OrientedLine) -> float:
        """Euclidean distance from the center to the line"""
        return 2.0 * abs(l.eta - self.eta(l.xi)) / (1.0 + abs(l.xi) ** 2)

    def indicator(self, l: OrientedLine, radius: float) -> bool:
        return self.distance(l) <= radius


# ---------------------------------------------------------------------------
# closed forms


def slab_solution(d0: float, l: OrientedLine, half_chord: bool = False) -> float:
    """Chord length 2 d0 Omega of the slab |X3| <= d0 along l.

    half_chord=True returns d0 Omega, half the chord.
    """
    omega = conformal_factor_omega(l)
    return (1.0 if half_chord else 2.0) * d0 * omega


def ball_solution(r0: float, l: OrientedLine) -> float:
    """Chord length of the ball of radius r0 at the origin; 0 for lines that miss it"""
    check_in_chart(l.xi)
    D = 1.0 + abs(l.xi) ** 2
    radicand = r0 * r0 - 4.0 * abs(l.eta) ** 2 / (D * D)
    return 2.0 * math.sqrt(radicand) if radicand > 0.0 else 0.0


def kball_solution(balls: Sequence[BallDensity], l: OrientedLine, half_chord: bool = False) -> float:
    """Sum of density-weighted chords through pairwise disjoint balls"""
    check_in_chart(l.xi)
    KBallDensity(tuple(balls))
    D = 1.0 + abs(l.xi) ** 2
    factor = 1.0 if half_chord else 2.0
    chords = []
    for ball in balls:
        eta_j = BallSection(tuple(ball.center)).eta(l.xi)
        radicand = ball.radius ** 2 - 4.0 * abs(l.eta - eta_j) ** 2 / (D * D)
        if radicand > 0.0:
            chords.append(factor * ball.density * math.sqrt(radicand))
    return compensated_sum(chords)


def gaussian_solution(sigma: float, l: OrientedLine, amplitude: float = 1.0) -> float:
    check_in_chart(l.xi)
    d = 2.0 * abs(l.eta) / (1.0 + abs(l.xi) ** 2)
    return amplitude * sigma * math.sqrt(2.0 * math.pi) * math.exp(-d * d / (2.0 * sigma * sigma))


def appendix_a_radicand(x) -> tuple[float, float]:
    """(radicand, p) of the closed-form solution at x"""
    x1, x2, x3, x4 = as_vec4(x)
    p = 4.0 + (x1 - x3) ** 2 + (x2 - x4) ** 2
    radicand = 1e6 * p - 4.0 * (x1 + x3) ** 2 - 4.0 * (x2 + x4) ** 2 - quadratic_form((x1, x2, x3, x4)) ** 2
    return radicand, p


def appendixA_solution(x, extend_by_zero: bool = False) -> float:
    """sqrt(1e6 p - 4(x1+x3)^2 - 4(x2+x4)^2 - Q(x)^2) / p with p = 4 + (x1-x3)^2 + (x2-x4)^2.

    This is the X-ray of the radius-500 ball divided by 2 Omega; the radicand
    turns negative exactly where the line of x misses the ball.

    Raises:
        OutOfDomain: off the radicand-positive set unless extend_by_zero
    """
    radicand, p = appendix_a_radicand(x)
    if radicand <= 0.0:
        if extend_by_zero:
            return 0.0
        raise OutOfDomain(f"Radicand {radicand:.6g} is not positive at {as_vec4(x).tolist()}")
    return math.sqrt(radicand) / p


def polynomial_solution(terms: Sequence[tuple[float, Sequence[int]]]) -> Callable[[np.ndarray], float]:
    """x -> sum coeff * prod x_i^k_i"""
    frozen = [(float(c), tuple(int(k) for k in powers)) for c, powers in terms]
    for _, powers in frozen:
        if len(powers) != 4 or any(k < 0 for k in powers):
            raise ValueError(f"Monomial powers must be four nonnegative integers, got {powers}")

    def u(x) -> float:
        x = as_vec4(x)
        return compensated_sum(c * math.prod(x[i] ** k for i, k in enumerate(powers)) for c, powers in frozen)

    return u


# ---------------------------------------------------------------------------
# numerical X-ray transform


def xray_numeric(
    f: Density3,
    l: OrientedLine,
    truncation: Optional[float] = None,
    tol: Optional[float] = None,
) -> float:
    """Integral of f along l over arc length in [-truncation, truncation].

    The range is split at support-boundary crossings so every piece has a
    smooth integrand; piece ends are sampled just inside the piece.

    Raises:
        NonConvergent: if adaptive Simpson stalls on a piece
    """
    T = settings.xray_truncation if truncation is None else truncation
    tol = settings.xray_tolerance if tol is None else tol
    check_in_chart(l.xi)
    start = phi_map(l, 0.0)
    direction = line_direction(l.xi)

    cuts = sorted({t for t in f.breakpoints(start, direction) if -T < t < T})
    edges = [-T, *cuts, T]
    pieces = [(lo, hi) for lo, hi in zip(edges[:-1], edges[1:]) if hi > lo]
    piece_tol = tol / max(1, len(pieces))

    values = []
    for lo, hi in pieces:
        nudge = 1e-12 * max(1.0, abs(lo), abs(hi))
        inner_lo, inner_hi = lo + nudge, hi - nudge

        def integrand(t: float, inner_lo: float = inner_lo, inner_hi: float = inner_hi) -> float:
            s = min(max(t, inner_lo), inner_hi)
            return f(start + s * direction)

        value, _ = adaptive_simpson(integrand, lo, hi, piece_tol)
        values.append(value)
    return compensated_sum(values)


# ---------------------------------------------------------------------------
# service


class SolutionService:
    """Service for building catalogue solutions from experiment selectors"""

    def appendix_a(self, extend_by_zero: bool = True) -> UheSolution:
        def u(x: np.ndarray) -> float:
            return appendixA_solution(x, extend_by_zero=extend_by_zero)

        def inside(x: np.ndarray) -> bool:
            return appendix_a_radicand(x)[0] > 0.0

        return UheSolution(name="appendix-a", flat=u, domain=inside)

    def slab(self, d0: float, half_chord: bool = False) -> UheSolution:
        return UheSolution(name=f"slab({d0:g})", line=lambda l: slab_solution(d0, l, half_chord))

    def ball(self, r0: float) -> UheSolution:
        return UheSolution(name=f"ball({r0:g})", line=lambda l: ball_solution(r0, l))

    def kballs(self, balls: Sequence[BallDensity], half_chord: bool = False) -> UheSolution:
        balls = tuple(balls)
        KBallDensity(balls)
        return UheSolution(name=f"kballs({len(balls)})", line=lambda l: kball_solution(balls, l, half_chord))

    def gaussian(self, sigma: float, amplitude: float = 1.0) -> UheSolution:
        return UheSolution(
            name=f"gaussian({sigma:g})", line=lambda l: gaussian_solution(sigma, l, amplitude)
        )

    def polynomial(self, terms: Sequence[tuple[float, Sequence[int]]], name: str = "polynomial") -> UheSolution:
        return UheSolution(name=name, flat=polynomial_solution(terms))

    def build(self, selector) -> UheSolution:
        """Solution for a models.schemas.SolutionSpec"""
        try:
            kind = selector.kind
            if kind == "appendix-a":
                solution = self.appendix_a(selector.extend_by_zero)
            elif kind == "slab":
                solution = self.slab(selector.d0, selector.half_chord)
            elif kind == "ball":
                solution = self.ball(selector.r0)
            elif kind == "kballs":
                solution = self.kballs(self.balls_from(selector), selector.half_chord)
            elif kind == "gaussian":
                solution = self.gaussian(selector.sigma, selector.amplitude)
            elif kind == "polynomial":
                solution = self.polynomial([(t.coeff, t.powers) for t in selector.terms])
            else:
                raise ValueError(f"Unknown solution kind '{kind}'")
            logger.info(f"✅ Built solution {solution.name}")
            return solution
        except VerifierError as e:
            logger.error(f"❌ Error building solution: {e}")
            raise

    def balls_from(self, selector) -> tuple[BallDensity, ...]:
        return tuple(BallDensity(b.radius, tuple(b.center), b.density) for b in selector.balls)

    def density(self, selector) -> Density3:
        """Density behind an X-ray solution selector"""
        kind = selector.kind
        if kind == "slab":
            return SlabDensity(selector.d0)
        if kind == "ball":
            return BallDensity(selector.r0)
        if kind == "kballs":
            return KBallDensity(self.balls_from(selector))
        if kind == "gaussian":
            return GaussianDensity(selector.sigma, selector.amplitude)
        if kind == "appendix-a":
            return BallDensity(APPENDIX_A_RADIUS)
        raise EvaluationDomain(f"Solution kind '{kind}' has no X-ray density")


solution_service = SolutionService()
