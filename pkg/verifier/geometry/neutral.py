"""
Linear algebra of the neutral space R^{2,2}: quadratic and bilinear forms,
plane classification, orthogonal complements and the three-point center.

Points and vectors are plain numpy arrays of shape (4,).
"""
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from ..config import settings
from ..errors import (
    CollinearPoints,
    DegeneratePlane,
    DependentSpan,
    FrameCompletionFailure,
    NotSkew,
)

# I^{2,2}
METRIC = np.diag([1.0, 1.0, -1.0, -1.0])
STANDARD_BASIS = np.eye(4)


class PlaneKind(str, Enum):
    """Metric type of a 2-plane"""
    POSITIVE_DEFINITE = "PositiveDefinite"
    NEGATIVE_DEFINITE = "NegativeDefinite"
    HYPERBOLIC = "Hyperbolic"
    POSITIVE_PARABOLIC = "PositiveParabolic"
    NEGATIVE_PARABOLIC = "NegativeParabolic"
    TOTALLY_NULL = "TotallyNull"

    @property
    def is_degenerate(self) -> bool:
        return self in (PlaneKind.POSITIVE_PARABOLIC, PlaneKind.NEGATIVE_PARABOLIC, PlaneKind.TOTALLY_NULL)

    @property
    def is_definite(self) -> bool:
        return self in (PlaneKind.POSITIVE_DEFINITE, PlaneKind.NEGATIVE_DEFINITE)


def as_vec4(x: Sequence[float]) -> np.ndarray:
    """Coerce to a float Vec4, rejecting wrong shapes and non-finite components"""
    arr = np.asarray(x, dtype=float)
    if arr.shape != (4,):
        raise ValueError(f"Vec4 needs exactly 4 components, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"Vec4 components must be finite, got {arr.tolist()}")
    return arr


def quadratic_form(x) -> float:
    """Q(x) = x1^2 + x2^2 - x3^2 - x4^2"""
    x = np.asarray(x, dtype=float)
    return float(x[0] * x[0] + x[1] * x[1] - x[2] * x[2] - x[3] * x[3])


def inner(x, y) -> float:
    """<x, y> = x1 y1 + x2 y2 - x3 y3 - x4 y4"""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return float(x[0] * y[0] + x[1] * y[1] - x[2] * y[2] - x[3] * y[3])


def null_threshold(p, q, eps: Optional[float] = None) -> float:
    """Scale-aware threshold under which Q(q - p) counts as zero"""
    eps = settings.null_tolerance if eps is None else eps
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    return eps * max(1.0, float(p @ p + q @ q))


def are_skew(p, q, eps: Optional[float] = None) -> bool:
    """True when the separation q - p is not null"""
    sep = np.asarray(q, dtype=float) - np.asarray(p, dtype=float)
    return abs(quadratic_form(sep)) > null_threshold(p, q, eps)


def gram_matrix(vectors: Sequence[np.ndarray]) -> np.ndarray:
    """Gram matrix of <,> restricted to the given vectors"""
    V = np.column_stack([np.asarray(v, dtype=float) for v in vectors])
    return V.T @ METRIC @ V


@dataclass(frozen=True)
class PlaneFrame:
    """Affine plane origin + span{u, v}"""
    origin: np.ndarray
    u: np.ndarray
    v: np.ndarray

    @classmethod
    def from_points(cls, origin, u, v) -> "PlaneFrame":
        return cls(as_vec4(origin), as_vec4(u), as_vec4(v))

    @property
    def directions(self) -> tuple[np.ndarray, np.ndarray]:
        return self.u, self.v

    def gram(self) -> np.ndarray:
        return gram_matrix([self.u, self.v])

    def point(self, s: float, t: float) -> np.ndarray:
        return self.origin + s * self.u + t * self.v

    def contains_direction(self, w, tol: float = 1e-9) -> bool:
        """True when w lies in span{u, v} (Euclidean least-squares residual)"""
        A = np.column_stack([self.u, self.v])
        coeffs, *_ = np.linalg.lstsq(A, np.asarray(w, dtype=float), rcond=None)
        residual = np.linalg.norm(A @ coeffs - w)
        return residual <= tol * max(1.0, float(np.linalg.norm(w)))


def _check_independent(u: np.ndarray, v: np.ndarray, eps: float) -> None:
    s = np.linalg.svd(np.column_stack([u, v]), compute_uv=False)
    if s[0] == 0.0 or s[1] <= eps * s[0]:
        raise DependentSpan(f"Plane directions {u.tolist()} and {v.tolist()} are linearly dependent")


def classify_plane(P: PlaneFrame, eps: Optional[float] = None) -> PlaneKind:
    """Classify a plane by the eigen-signs of its 2x2 restricted Gram matrix.

    Args:
        P: plane frame with linearly independent directions
        eps: relative threshold for zero eigenvalues (defaults to settings.null_tolerance)

    Returns:
        PlaneKind: the metric type, independent of the spanning basis

    Raises:
        DependentSpan: if u and v are linearly dependent
    """
    eps = settings.null_tolerance if eps is None else eps
    _check_independent(P.u, P.v, eps)

    # Sylvester's law makes the eigen-signs basis invariant; scale the
    # threshold by the basis so recombinations do not flip rank decisions
    scale = max(float(P.u @ P.u), float(P.v @ P.v))
    eigenvalues = np.linalg.eigvalsh(P.gram())
    tol = eps * scale
    positive = int(np.sum(eigenvalues > tol))
    negative = int(np.sum(eigenvalues < -tol))

    if positive == 2:
        return PlaneKind.POSITIVE_DEFINITE
    if negative == 2:
        return PlaneKind.NEGATIVE_DEFINITE
    if positive == 1 and negative == 1:
        return PlaneKind.HYPERBOLIC
    if positive == 1:
        return PlaneKind.POSITIVE_PARABOLIC
    if negative == 1:
        return PlaneKind.NEGATIVE_PARABOLIC
    return PlaneKind.TOTALLY_NULL


def canonical_sign(w: np.ndarray) -> np.ndarray:
    """Flip w so that its largest-magnitude component is positive"""
    k = int(np.argmax(np.abs(w)))
    return -w if w[k] < 0 else w


def _project_out(w: np.ndarray, basis: list[np.ndarray]) -> np.ndarray:
    # basis vectors have Q = +-1, so the projection coefficient is <w,b> * Q(b)
    for b in basis:
        w = w - inner(w, b) * quadratic_form(b) * b
    return w


def pseudo_orthonormalize(
    vectors: Sequence[np.ndarray],
    eps: Optional[float] = None,
    keep_first: bool = False,
    scales: Optional[Sequence[float]] = None,
) -> list[np.ndarray]:
    """Pseudo-Gram-Schmidt with pivoting.

    Repeatedly takes the remaining candidate with the largest |Q| relative to
    its Euclidean size, normalizes it to Q = +-1 and projects it out of the
    others. When every remaining candidate is null, a sum or difference of two
    of them is used instead (one of them is non-null unless the span is
    totally null).

    Args:
        vectors: spanning vectors
        eps: relative threshold for null / dependent decisions
        keep_first: normalize vectors[0] first instead of pivoting
        scales: reference lengths for the dependence test (defaults to the
            vectors' own norms); pass the pre-projection lengths when the
            vectors were already projected by the caller

    Returns:
        list of mutually orthogonal vectors with Q = +-1 spanning the same space

    Raises:
        FrameCompletionFailure: if the span contains a totally null part
    """
    eps = settings.null_tolerance if eps is None else eps
    originals = [np.asarray(v, dtype=float) for v in vectors]
    norms = [float(np.linalg.norm(v)) for v in originals]
    sizes = norms if scales is None else [max(float(s), n) for s, n in zip(scales, norms)]
    kept = [(v, size) for v, n, size in zip(originals, norms, sizes) if n > 1e-9 * size]
    remaining = [v.copy() for v, _ in kept]
    sizes = [size for _, size in kept]
    basis: list[np.ndarray] = []
    first = keep_first

    def score(w: np.ndarray) -> float:
        return abs(quadratic_form(w)) / float(w @ w)

    while remaining:
        remaining = [_project_out(w, basis) for w in remaining]
        # a candidate that lost almost all of its length is dependent on the basis
        kept = [(w, size) for w, size in zip(remaining, sizes) if np.linalg.norm(w) > 1e-9 * size]
        remaining = [w for w, _ in kept]
        sizes = [size for _, size in kept]
        if not remaining:
            break

        if first:
            idx, candidate = 0, remaining[0]
            first = False
        else:
            idx = max(range(len(remaining)), key=lambda i: score(remaining[i]))
            candidate = remaining[idx]

        if score(candidate) <= eps:
            # every candidate is null: try u + v, u - v pairs
            best, best_score = None, eps
            for i in range(len(remaining)):
                for j in range(i + 1, len(remaining)):
                    for sign in (1.0, -1.0):
                        w = remaining[i] + sign * remaining[j]
                        if float(w @ w) == 0.0:
                            continue
                        s = score(w)
                        if s > best_score:
                            best, best_score, idx = w, s, i
            if best is None:
                raise FrameCompletionFailure("Span is totally null; no pseudo-orthonormal frame exists")
            candidate = best

        basis.append(candidate / np.sqrt(abs(quadratic_form(candidate))))
        remaining.pop(idx)
        sizes.pop(idx)

    return basis


def complete_basis(v: np.ndarray, eps: Optional[float] = None) -> np.ndarray:
    """Complete a unit vector (Q(v) = +-1) to a pseudo-orthonormal basis.

    The returned matrix M has Gram matrix I^{2,2} (columns ordered +, +, -, -),
    with v as the first column when Q(v) = +1 and as the third when Q(v) = -1.
    """
    v = np.asarray(v, dtype=float)
    frame = pseudo_orthonormalize([v, *STANDARD_BASIS], eps=eps, keep_first=True)
    positives = [b for b in frame if quadratic_form(b) > 0]
    negatives = [b for b in frame if quadratic_form(b) < 0]
    if len(frame) != 4 or len(positives) != 2 or len(negatives) != 2:
        raise FrameCompletionFailure(f"Could not complete {v.tolist()} to a basis of R^(2,2)")
    # frame[0] is v itself (normalized) and already sits first in its group
    return np.column_stack(positives + negatives)


def orthocomplement_plane(P: PlaneFrame, eps: Optional[float] = None) -> PlaneFrame:
    """Return origin + (direction of P)^perp as a pseudo-orthonormal frame.

    Raises:
        DegeneratePlane: if P is parabolic or totally null
    """
    kind = classify_plane(P, eps)
    if kind.is_degenerate:
        raise DegeneratePlane(f"{kind.value} plane has no complementary conjugate plane")

    # project the standard basis off the plane; what survives spans the complement
    plane_basis = pseudo_orthonormalize([P.u, P.v], eps=eps)
    candidates = [_project_out(e, plane_basis) for e in STANDARD_BASIS]
    frame = [canonical_sign(b) for b in pseudo_orthonormalize(candidates, eps=eps, scales=[1.0] * 4)]
    if len(frame) != 2:
        raise FrameCompletionFailure("Orthogonal complement is not two-dimensional")
    # positive direction first for hyperbolic complements
    frame.sort(key=lambda b: -quadratic_form(b))
    return PlaneFrame(P.origin.copy(), frame[0], frame[1])


@dataclass(frozen=True)
class ThreePointCenter:
    """Center, square-radius and plane of three skew points"""
    origin: np.ndarray
    square_radius: float
    plane: PlaneFrame


def center_of_three(q, q1, q2, eps: Optional[float] = None) -> ThreePointCenter:
    """Find the unique O in the plane of q, q', q'' equidistant from all three.

    Intersects the bisector lines of (q, q') and (q, q'') inside the plane by
    solving the 2x2 system in plane coordinates:
    <O - (q + q')/2, q' - q> = 0 and <O - (q + q'')/2, q'' - q> = 0.

    Raises:
        NotSkew: if two of the points are null-separated
        CollinearPoints: if the points do not span a plane
        DegeneratePlane: if their plane is parabolic or totally null
    """
    eps = settings.null_tolerance if eps is None else eps
    q, q1, q2 = as_vec4(q), as_vec4(q1), as_vec4(q2)

    for a, b, label in ((q, q1, "q, q'"), (q, q2, "q, q''"), (q1, q2, "q', q''")):
        if not are_skew(a, b, eps):
            raise NotSkew(f"Points {label} are null-separated")

    d1, d2 = q1 - q, q2 - q
    try:
        _check_independent(d1, d2, eps)
    except DependentSpan as exc:
        raise CollinearPoints("Points are collinear and span no plane") from exc

    G = gram_matrix([d1, d2])
    if abs(np.linalg.det(G)) <= eps * float(d1 @ d1) * float(d2 @ d2):
        raise DegeneratePlane("Plane through the three points is degenerate")

    a, b = np.linalg.solve(G, 0.5 * np.diag(G))
    origin = q + a * d1 + b * d2
    return ThreePointCenter(
        origin=origin,
        square_radius=quadratic_form(origin - q),
        plane=PlaneFrame(origin, d1, d2),
    )
