"""
Oriented lines of R^3 as points of the neutral space.

A line is (xi, eta): xi is the stereographic coordinate of its direction
(upper hemisphere |xi| < 1), eta its displacement from the origin. The chart
is conformally flat with flat coordinates Z1 = x1 + i x2, Z2 = x3 + i x4.
"""
import cmath
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from ..config import settings
from ..errors import (
    CoincidentPoints,
    DegeneratePlane,
    EmptyConic,
    EvaluationDomain,
    HorizontalLine,
    IncidenceViolation,
    InvalidPlaneParameters,
    OutOfChart,
    SingularConjugate,
    VerifierError,
)
from ..utils.finite_differences import (
    coordinate_steps,
    derivative5,
    forward_derivative5,
    second_partial,
    ultrahyperbolic,
)
from .neutral import PlaneKind, as_vec4


@dataclass(frozen=True)
class OrientedLine:
    xi: complex
    eta: complex

    @classmethod
    def from_real(cls, x: Sequence[float]) -> "OrientedLine":
        """From (Re xi, Im xi, Re eta, Im eta)"""
        return cls(complex(x[0], x[1]), complex(x[2], x[3]))

    def to_real(self) -> np.ndarray:
        return np.array([self.xi.real, self.xi.imag, self.eta.real, self.eta.imag])


@dataclass(frozen=True)
class FlatCoords:
    Z1: complex
    Z2: complex

    @classmethod
    def from_vec4(cls, x) -> "FlatCoords":
        x = as_vec4(x)
        return cls(complex(x[0], x[1]), complex(x[2], x[3]))

    def to_vec4(self) -> np.ndarray:
        return np.array([self.Z1.real, self.Z1.imag, self.Z2.real, self.Z2.imag])

    def quadratic_form(self) -> float:
        return abs(self.Z1) ** 2 - abs(self.Z2) ** 2


@dataclass(frozen=True)
class PluckerLine:
    """Sextet (p, q) = (s x t, s - t) of the line through s and t"""
    p: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        qn = float(np.linalg.norm(self.q))
        if qn == 0.0:
            raise CoincidentPoints("Plucker direction q must be nonzero")
        pn = float(np.linalg.norm(self.p))
        if abs(float(self.p @ self.q)) > 1e-12 * max(1.0, pn * qn):
            raise IncidenceViolation("Plucker sextet violates the incidence relation p.q = 0")


@dataclass(frozen=True)
class GraphicalPlane:
    """Section eta = (alpha xi + beta conj(xi) - conj(alpha) xi^2 conj(xi) - conj(beta) xi^3) / (1 - |xi|^2)"""
    alpha: complex
    beta: complex

    @classmethod
    def from_ab(cls, a: float, b: float) -> "GraphicalPlane":
        """Normal form alpha = -a i, beta = b"""
        return cls(complex(0.0, -a), complex(b, 0.0))


@dataclass(frozen=True)
class NonGraphicalPlane:
    theta: float
    phi: float
    H: float

    def __post_init__(self):
        if self.H == 0.0 or not math.isfinite(self.H):
            raise InvalidPlaneParameters(f"Non-graphical plane needs a finite nonzero H, got {self.H!r}")
        if not (-math.pi < self.theta <= math.pi):
            raise InvalidPlaneParameters(f"theta must lie in (-pi, pi], got {self.theta!r}")


ConformalPlane = Union[GraphicalPlane, NonGraphicalPlane]


@dataclass(frozen=True)
class Hyperboloid:
    """X3^2 - 4a X1^2 - 4a X2^2 - 8b X1 X2 + a^2 - b^2 = 0"""
    a: float
    b: float

    def evaluate(self, X: np.ndarray) -> float:
        a, b = self.a, self.b
        return X[2] ** 2 - 4 * a * X[0] ** 2 - 4 * a * X[1] ** 2 - 8 * b * X[0] * X[1] + a * a - b * b


@dataclass(frozen=True)
class Paraboloid:
    """sin(theta) X3 + 2(cos theta + cos phi) X1^2 + 4 sin(phi) X1 X2 + 2(cos theta - cos phi) X2^2 = 0"""
    theta: float
    phi: float

    def evaluate(self, X: np.ndarray) -> float:
        ct, st = math.cos(self.theta), math.sin(self.theta)
        cp, sp = math.cos(self.phi), math.sin(self.phi)
        return st * X[2] + 2 * (ct + cp) * X[0] ** 2 + 4 * sp * X[0] * X[1] + 2 * (ct - cp) * X[1] ** 2


# ---------------------------------------------------------------------------
# chart


def check_in_chart(xi: complex, margin: Optional[float] = None) -> None:
    margin = settings.chart_margin if margin is None else margin
    if not abs(xi) < 1.0 - margin:
        raise OutOfChart(f"|xi| = {abs(xi):.12g} is outside the chart (margin {margin:g})")


def line_to_flat(l: OrientedLine, margin: Optional[float] = None) -> FlatCoords:
    """Conformal coordinates (Z1, Z2) of an in-chart line"""
    check_in_chart(l.xi, margin)
    xi, eta = l.xi, l.eta
    R2 = (xi * xi.conjugate()).real
    c = 2.0 / (1.0 - R2 * R2)
    A = eta + xi * xi * eta.conjugate()
    B = 1j * (1.0 + R2) * xi
    return FlatCoords(c * (A - B), c * (A + B))


def line_to_vec4(l: OrientedLine, margin: Optional[float] = None) -> np.ndarray:
    return line_to_flat(l, margin).to_vec4()


def flat_to_line(z: Union[FlatCoords, Sequence[float]], margin: Optional[float] = None) -> OrientedLine:
    """Inverse of line_to_flat.

    xi = i(Z1 - Z2) / (2 + sqrt(4 + |Z1 - Z2|^2)) picks the upper-hemisphere
    root; with a minus sign in the denominator the antipode -1/conj(xi) comes
    out instead. eta then solves eta + xi^2 conj(eta) = (1 - |xi|^4)(Z1 + Z2)/4.
    """
    if not isinstance(z, FlatCoords):
        z = FlatCoords.from_vec4(z)
    diff = z.Z1 - z.Z2
    xi = 1j * diff / (2.0 + math.sqrt(4.0 + abs(diff) ** 2))
    check_in_chart(xi, margin)
    R2 = abs(xi) ** 2
    k = 1.0 - R2 * R2
    W = k * (z.Z1 + z.Z2) / 4.0
    eta = (W - xi * xi * W.conjugate()) / k
    return OrientedLine(xi, eta)


def vec4_to_line(x, margin: Optional[float] = None) -> OrientedLine:
    return flat_to_line(FlatCoords.from_vec4(x), margin)


def conformal_factor_omega(l: OrientedLine, margin: Optional[float] = None) -> float:
    """Omega = (1 + |xi|^2) / (1 - |xi|^2)"""
    check_in_chart(l.xi, margin)
    R2 = abs(l.xi) ** 2
    return (1.0 + R2) / (1.0 - R2)


def omega_from_flat(z: Union[FlatCoords, Sequence[float]]) -> float:
    """Omega = (1 + |Z1 - Z2|^2 / 4)^(1/2)"""
    if not isinstance(z, FlatCoords):
        z = FlatCoords.from_vec4(z)
    return math.sqrt(1.0 + 0.25 * abs(z.Z1 - z.Z2) ** 2)


# ---------------------------------------------------------------------------
# Plucker coordinates and the map to R^3


def plucker_from_points(s, t) -> PluckerLine:
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.allclose(s, t, rtol=0.0, atol=1e-15 * max(1.0, float(np.linalg.norm(s)))):
        raise CoincidentPoints(f"Points {s.tolist()} and {t.tolist()} coincide")
    return PluckerLine(np.cross(s, t), s - t)


def plucker_to_flat(pl: PluckerLine, margin: Optional[float] = None) -> np.ndarray:
    """Flat coordinates of a line from its Plucker sextet; invariant under (p, q) -> k(p, q)"""
    margin = settings.chart_margin if margin is None else margin
    p, q = pl.p, pl.q
    if abs(q[2]) <= margin * float(np.linalg.norm(q)):
        raise HorizontalLine("Line is parallel to the xy-plane (q3 = 0)")
    return np.array(
        [
            (p[1] + q[1]) / q[2],
            (-p[0] - q[0]) / q[2],
            (p[1] - q[1]) / q[2],
            (-p[0] + q[0]) / q[2],
        ]
    )


def line_direction(xi: complex) -> np.ndarray:
    """Unit direction (2 xi, 1 - |xi|^2) / (1 + |xi|^2) in R^3"""
    D = 1.0 + abs(xi) ** 2
    return np.array([2.0 * xi.real / D, 2.0 * xi.imag / D, (1.0 - abs(xi) ** 2) / D])


def phi_map(l: OrientedLine, r: float) -> np.ndarray:
    """Point of R^3 on l at signed distance r from the foot point closest to the origin"""
    xi, eta = l.xi, l.eta
    D = 1.0 + abs(xi) ** 2
    planar = 2.0 * (eta - xi * xi * eta.conjugate()) / (D * D) + 2.0 * r * xi / D
    height = -2.0 * (xi.conjugate() * eta + xi * eta.conjugate()).real / (D * D) + r * (1.0 - abs(xi) ** 2) / D
    return np.array([planar.real, planar.imag, height])


def line_through_points(s, t, margin: Optional[float] = None) -> OrientedLine:
    """Chart coordinates of the line through s and t, oriented into the upper hemisphere"""
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    span = t - s
    length = float(np.linalg.norm(span))
    if length == 0.0:
        raise CoincidentPoints(f"Points {s.tolist()} and {t.tolist()} coincide")
    e = span / length
    if e[2] < 0.0:
        e = -e
    xi = complex(e[0], e[1]) / (1.0 + e[2])
    try:
        check_in_chart(xi, margin)
    except OutOfChart as exc:
        raise HorizontalLine("Line is parallel to the xy-plane") from exc

    foot = s - (s @ e) * e
    # foot point is real-linear in eta: solve on the images of eta = 1 and eta = i
    columns = np.column_stack([phi_map(OrientedLine(xi, 1.0 + 0j), 0.0), phi_map(OrientedLine(xi, 1j), 0.0)])
    (x, y), *_ = np.linalg.lstsq(columns, foot, rcond=None)
    return OrientedLine(xi, complex(x, y))


# ---------------------------------------------------------------------------
# metric and Laplacians


def metric_matrix(l: OrientedLine, margin: Optional[float] = None) -> np.ndarray:
    """Gram matrix of the neutral metric in (Re xi, Im xi, Re eta, Im eta) components"""
    check_in_chart(l.xi, margin)
    D = 1.0 + abs(l.xi) ** 2
    k = 8.0 * (l.xi.conjugate() * l.eta).imag / D ** 3
    m = 2.0 / (D * D)
    return np.array(
        [
            [k, 0.0, 0.0, -m],
            [0.0, k, m, 0.0],
            [0.0, m, 0.0, 0.0],
            [-m, 0.0, 0.0, 0.0],
        ]
    )


def metric_G(l: OrientedLine, v, w, margin: Optional[float] = None) -> float:
    """Neutral metric on two tangent vectors in real components"""
    return float(np.asarray(v, dtype=float) @ metric_matrix(l, margin) @ np.asarray(w, dtype=float))


def _field_on_chart(v: Callable[[OrientedLine], float], margin: Optional[float]) -> Callable[[np.ndarray], float]:
    def f(x: np.ndarray) -> float:
        l = OrientedLine.from_real(x)
        check_in_chart(l.xi, margin)
        try:
            return float(v(l))
        except OutOfChart:
            raise
        except VerifierError as exc:
            raise EvaluationDomain(f"Line field undefined at {x.tolist()}: {exc}") from exc

    return f


def laplacian_G_residual(
    v: Callable[[OrientedLine], float],
    l: OrientedLine,
    h: Optional[float] = None,
    margin: Optional[float] = None,
) -> float:
    """Chart Laplacian of a line field by central differences.

    With coordinates (a, b, c, d) = (Re xi, Im xi, Re eta, Im eta) the
    operator i(1+|xi|^2)^2 (d_xi d_etabar - d_xibar d_eta - 2(xi etabar - xibar eta)/(1+|xi|^2) d_eta d_etabar)
    expands to -(1+|xi|^2)^2 ((v_ad - v_bc)/2 - Im(xi etabar)/(1+|xi|^2) (v_cc + v_dd)).
    """
    check_in_chart(l.xi, margin)
    x = l.to_real()
    steps = coordinate_steps(x, h)
    f = _field_on_chart(v, margin)
    v_ad = second_partial(f, x, 0, 3, steps)
    v_bc = second_partial(f, x, 1, 2, steps)
    v_cc = second_partial(f, x, 2, 2, steps)
    v_dd = second_partial(f, x, 3, 3, steps)
    D = 1.0 + abs(l.xi) ** 2
    twist = (l.xi * l.eta.conjugate()).imag / D
    return -D * D * (0.5 * (v_ad - v_bc) - twist * (v_cc + v_dd))


def uhe_residual_flat(u: Callable[[np.ndarray], float], p, h: Optional[float] = None) -> float:
    """Nine-point estimate of u11 + u22 - u33 - u44 at p.

    Args:
        u: scalar field on R^{2,2}
        p: evaluation point
        h: uniform step; defaults to per-coordinate steps fd_relative_step * max(1, |p_i|)

    Raises:
        EvaluationDomain: if a stencil point lies outside u's domain
    """
    value, _ = uhe_residual_with_scale(u, p, h)
    return value


def uhe_residual_with_scale(u: Callable[[np.ndarray], float], p, h: Optional[float] = None) -> tuple[float, float]:
    p = as_vec4(p)
    steps = coordinate_steps(p) if h is None else np.full(4, float(h))

    def f(x: np.ndarray) -> float:
        try:
            return float(u(x))
        except VerifierError as exc:
            raise EvaluationDomain(f"Solution undefined on stencil point {x.tolist()}: {exc}") from exc

    return ultrahyperbolic(f, p, steps)


def flat_laplacian_expression(
    v: Callable[[OrientedLine], float],
    l: OrientedLine,
    h: Optional[float] = None,
    margin: Optional[float] = None,
) -> float:
    """2 Omega^3 times the ultra-hyperbolic operator of v/Omega in flat coordinates"""
    omega = conformal_factor_omega(l, margin)
    x = line_to_vec4(l, margin)

    def w(y: np.ndarray) -> float:
        line = vec4_to_line(y, margin)
        return float(v(line)) / conformal_factor_omega(line, margin)

    return 2.0 * omega ** 3 * uhe_residual_flat(w, x, h)


def transport_line_field(v: Callable[[OrientedLine], float]) -> Callable[[np.ndarray], float]:
    """x -> v(l(x)) / Omega(l(x)): harmonic line fields become ultra-hyperbolic solutions"""
    def u(x) -> float:
        line = vec4_to_line(x)
        return float(v(line)) / conformal_factor_omega(line)

    return u


def transport_flat_solution(u: Callable[[np.ndarray], float]) -> Callable[[OrientedLine], float]:
    """l -> Omega(l) u(Z(l))"""
    def v(l: OrientedLine) -> float:
        return conformal_factor_omega(l) * float(u(line_to_vec4(l)))

    return v


# ---------------------------------------------------------------------------
# conformal planes


def graphical_section(pl: GraphicalPlane, xi: complex, margin: Optional[float] = None) -> OrientedLine:
    check_in_chart(xi, margin)
    a, b = pl.alpha, pl.beta
    xb = xi.conjugate()
    eta = (a * xi + b * xb - a.conjugate() * xi * xi * xb - b.conjugate() * xi ** 3) / (1.0 - (xi * xb).real)
    return OrientedLine(xi, eta)


def nongraphical_point(pl: NonGraphicalPlane, u: float, v: float, margin: Optional[float] = None) -> OrientedLine:
    margin = settings.chart_margin if margin is None else margin
    if not (0.0 <= u < 1.0 - margin):
        raise OutOfChart(f"u = {u!r} must lie in [0, 1 - {margin:g})")
    xi = 1j * u * cmath.exp(0.5j * (pl.theta + pl.phi))
    eta = (
        2.0 * pl.H * 1j * v * (1.0 - u * u * cmath.exp(2j * pl.theta)) / (1.0 - u ** 4)
        * cmath.exp(-0.5j * (pl.theta - pl.phi))
    )
    return OrientedLine(xi, eta)


def graphical_from_linear(alpha1: complex, beta1: complex, alpha2: complex, beta2: complex) -> GraphicalPlane:
    """Graphical plane through the origin with alpha1 Z1 + beta1 conj(Z1) + alpha2 Z2 + beta2 conj(Z2) = 0.

    Raises:
        DegeneratePlane: if |alpha1 + alpha2| = |beta1 + beta2| (the plane is not graphical)
    """
    A = alpha1 + alpha2
    B = beta1 + beta2
    denom = -abs(A) ** 2 + abs(B) ** 2
    if abs(denom) <= settings.null_tolerance * max(1.0, abs(A) ** 2 + abs(B) ** 2):
        raise DegeneratePlane("Linear coefficients describe a non-graphical plane")
    alpha = 1j * (-(alpha1 - alpha2) * A.conjugate() + B * (beta1 - beta2).conjugate()) / denom
    beta = -2j * (alpha1.conjugate() * beta2 - alpha2.conjugate() * beta1) / denom
    return GraphicalPlane(alpha, beta)


def nongraphical_coefficients(pl: NonGraphicalPlane) -> tuple[complex, complex, complex, complex]:
    """(alpha1, beta1, alpha2, beta2) of the plane's linear equation.

    The flat image is spanned by (p, p) and (-q, q) with p = i e^{-i(theta-phi)/2}
    and q = e^{i(theta+phi)/2}, which forces alpha1 + alpha2 = H e^{i theta},
    alpha1 - alpha2 = H e^{-i theta} and beta2 = H e^{i phi}.
    """
    return (
        pl.H * math.cos(pl.theta) + 0j,
        0j,
        1j * pl.H * math.sin(pl.theta),
        pl.H * cmath.exp(1j * pl.phi),
    )


def linear_plane_residual(coefficients: Sequence[complex], z: FlatCoords) -> float:
    alpha1, beta1, alpha2, beta2 = coefficients
    value = alpha1 * z.Z1 + beta1 * z.Z1.conjugate() + alpha2 * z.Z2 + beta2 * z.Z2.conjugate()
    scale = max(1.0, math.hypot(abs(z.Z1), abs(z.Z2))) * max(1.0, *(abs(c) for c in coefficients))
    return abs(value) / scale


def conjugate_graphical(pl: GraphicalPlane) -> GraphicalPlane:
    return GraphicalPlane(pl.alpha.conjugate(), -pl.beta)


def conjugate_nongraphical(pl: NonGraphicalPlane) -> NonGraphicalPlane:
    """(theta, phi, H) -> (-theta, phi, -H / (1 - 2H cos theta))"""
    denom = 1.0 - 2.0 * pl.H * math.cos(pl.theta)
    if abs(denom) <= 1e-12 * max(1.0, abs(pl.H)):
        raise SingularConjugate(f"1 - 2H cos(theta) vanishes for H={pl.H!r}, theta={pl.theta!r}")
    theta = -pl.theta if pl.theta != math.pi else math.pi
    return NonGraphicalPlane(theta, pl.phi, -pl.H / denom)


def plane_point(pl: ConformalPlane, s: float, t: float, margin: Optional[float] = None) -> OrientedLine:
    """Graphical planes use (Re xi, Im xi); non-graphical planes use (u, v)"""
    if isinstance(pl, GraphicalPlane):
        return graphical_section(pl, complex(s, t), margin)
    return nongraphical_point(pl, s, t, margin)


def plane_tangents(pl: ConformalPlane, s: float, t: float, h: float = 1e-5) -> tuple[np.ndarray, np.ndarray]:
    """Coordinate tangent vectors of a conformal plane in real chart components.

    Non-graphical planes only exist for u >= 0, so near u = 0 the s-derivative
    is taken one-sided.
    """
    def along_s(x: float) -> np.ndarray:
        return plane_point(pl, s + x, t).to_real()

    if isinstance(pl, NonGraphicalPlane) and s - 2.0 * h < 0.0:
        d_s = forward_derivative5(along_s, 0.0, h)
    else:
        d_s = derivative5(along_s, 0.0, h)
    d_t = derivative5(lambda x: plane_point(pl, s, t + x).to_real(), 0.0, h)
    return d_s, d_t


def induced_plane_gram(pl: ConformalPlane, s: float, t: float, h: float = 1e-5) -> np.ndarray:
    """2x2 Gram matrix of the neutral metric on a conformal plane's coordinate tangents"""
    l = plane_point(pl, s, t)
    d_s, d_t = plane_tangents(pl, s, t, h)
    G = metric_matrix(l)
    return np.array([[d_s @ G @ d_s, d_s @ G @ d_t], [d_t @ G @ d_s, d_t @ G @ d_t]])


def plane_metric_determinant(pl: ConformalPlane, s: float, t: float = 0.0, margin: Optional[float] = None) -> float:
    """Closed-form determinant of the induced metric; only its sign is chart independent.

    Graphical planes take s + i t = xi, non-graphical planes take (u, v) = (s, t).
    """
    if isinstance(pl, GraphicalPlane):
        xi = complex(s, t)
        check_in_chart(xi, margin)
        R2 = abs(xi) ** 2
        return (4.0 * pl.alpha.imag ** 2 - 4.0 * abs(pl.beta) ** 2) * (1.0 + R2) ** 2 / (1.0 - R2) ** 2
    u = s
    check_in_chart(complex(u, 0.0), margin)
    return -64.0 * pl.H ** 2 * math.sin(pl.theta) ** 2 / ((1.0 + u * u) ** 2 * (1.0 - u ** 4) ** 2)


def conformal_plane_kind(pl: ConformalPlane, s: float = 0.0, t: float = 0.0) -> PlaneKind:
    det = plane_metric_determinant(pl, s, t)
    tol = 1e-12 * max(1.0, abs(det))
    if det > tol:
        return PlaneKind.POSITIVE_DEFINITE
    if det < -tol:
        return PlaneKind.HYPERBOLIC
    gram = induced_plane_gram(pl, s, t)
    trace = float(np.trace(gram))
    if abs(trace) <= 1e-9:
        return PlaneKind.TOTALLY_NULL
    return PlaneKind.POSITIVE_PARABOLIC if trace > 0 else PlaneKind.NEGATIVE_PARABOLIC


def _plane_samples(pl: ConformalPlane, count: int) -> list[FlatCoords]:
    samples = []
    for k in range(count):
        angle = 2.0 * math.pi * (k + 0.5) / count
        if isinstance(pl, GraphicalPlane):
            radius = 0.15 + 0.7 * ((k * 7) % count) / count
            samples.append(line_to_flat(graphical_section(pl, radius * cmath.exp(1j * angle))))
        else:
            u = 0.1 + 0.8 * ((k * 7) % count) / count
            samples.append(line_to_flat(nongraphical_point(pl, u, 3.0 * math.cos(angle))))
    return samples


def conjugacy_residual(pl: ConformalPlane, other: ConformalPlane, samples: int = 16) -> float:
    """Largest normalized |Re(Z1 conj(Z1') - Z2 conj(Z2'))| over sampled points of both planes"""
    worst = 0.0
    for z in _plane_samples(pl, samples):
        for w in _plane_samples(other, samples):
            value = (z.Z1 * w.Z1.conjugate() - z.Z2 * w.Z2.conjugate()).real
            scale = max(1e-300, np.linalg.norm(z.to_vec4()) * np.linalg.norm(w.to_vec4()))
            worst = max(worst, abs(value) / scale)
    return worst


def tangent_orthogonality(pl: ConformalPlane, other: ConformalPlane) -> float:
    """Largest normalized neutral inner product between the two tangent planes at the origin line"""
    l = plane_point(pl, 0.0, 0.0)
    G = metric_matrix(l)
    mine = plane_tangents(pl, 0.0, 0.0)
    theirs = plane_tangents(other, 0.0, 0.0)
    worst = 0.0
    for x in mine:
        for y in theirs:
            worst = max(worst, abs(x @ G @ y) / max(1e-300, np.linalg.norm(x) * np.linalg.norm(y)))
    return worst


# ---------------------------------------------------------------------------
# pseudo-circles and ruled surfaces


def q_distance(l: OrientedLine) -> float:
    """Flat Q of the line's image: |Z1|^2 - |Z2|^2"""
    return line_to_flat(l).quadratic_form()


def graphical_pseudo_circle(a: float, b: float, angle: float, sign: float = 1.0) -> OrientedLine:
    """Line over direction angle on the Q = sign pseudo-circle of the plane alpha = -a i, beta = b.

    Raises:
        EmptyConic: if the direction does not meet that pseudo-circle
    """
    K = sign * (a + b * math.sin(2.0 * angle))
    # K at round-off level would put the line on the rim of the chart
    if K <= settings.null_tolerance * max(1.0, abs(a) + abs(b)):
        raise EmptyConic(f"Direction angle {angle:g} misses the Q = {sign:+g} pseudo-circle")
    R = -2.0 * math.sqrt(K) + math.sqrt(4.0 * K + 1.0)
    return graphical_section(GraphicalPlane.from_ab(a, b), R * cmath.exp(1j * angle))


def nongraphical_pseudo_circle(pl: NonGraphicalPlane, u: float, sign: float = 1.0) -> OrientedLine:
    """Line at parameter u on the Q = sign pseudo-circle of a non-graphical plane"""
    s = math.sin(pl.theta)
    if s == 0.0 or u <= 0.0:
        raise EmptyConic("Degenerate non-graphical plane or u = 0 has no unit pseudo-circle")
    v = sign * (1.0 + u * u) * (1.0 - u * u) ** 2 / (32.0 * pl.H * u * s)
    return nongraphical_point(pl, u, v)


def ruled_surface_residual(surface: Union[Hyperboloid, Paraboloid], X) -> float:
    """Quadric left-hand side at X normalized by max(1, |X|^2)^2"""
    X = np.asarray(X, dtype=float)
    return abs(surface.evaluate(X)) / max(1.0, float(X @ X)) ** 2
