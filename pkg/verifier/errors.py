"""
Exceptions raised by the verifier.

Everything subclasses ValueError so callers can keep catching ValueError for
domain failures, the same way the services always have.
"""
from typing import Optional


class VerifierError(ValueError):
    """Base class for all verifier failures"""


# neutral_geometry / conics
class DependentSpan(VerifierError):
    """Plane directions are linearly dependent"""


class DegeneratePlane(VerifierError):
    """Plane is parabolic or totally null where a non-degenerate one is required"""


class NotSkew(VerifierError):
    """Two points are null-separated"""


class CollinearPoints(VerifierError):
    """Three points do not span an affine plane"""


class ZeroRadius(VerifierError):
    """Conic square-radius is zero"""


class EmptyConic(VerifierError):
    """Square-radius sign cannot be attained on a definite plane"""


# conformal_group
class PoleAt(VerifierError):
    """A generator stage sent the running point to infinity"""

    def __init__(self, stage: int, generator: str):
        self.stage = stage
        self.generator = generator
        super().__init__(f"Point hits a pole at stage {stage} ({generator})")


class PoleOnCurve(VerifierError):
    """A conformal map has a pole on the curve being integrated"""


class FrameCompletionFailure(VerifierError):
    """Pseudo-Gram-Schmidt could not complete a pseudo-orthonormal basis"""


# line_space
class OutOfChart(VerifierError):
    """Line direction is outside the upper-hemisphere chart"""


class CoincidentPoints(VerifierError):
    """Plucker coordinates need two distinct points"""


class HorizontalLine(VerifierError):
    """Line is parallel to the xy-plane (q3 = 0)"""


class SingularConjugate(VerifierError):
    """Conjugate non-graphical plane does not exist (1 - 2H cos(theta) = 0)"""


class InvalidPlaneParameters(VerifierError):
    """Non-graphical plane needs a finite nonzero H and theta in (-pi, pi]"""


class IncidenceViolation(VerifierError):
    """Plucker sextet does not satisfy p.q = 0"""


# solutions / meanvalue
class EvaluationDomain(VerifierError):
    """A field was evaluated outside its domain"""


class OutOfDomain(EvaluationDomain):
    """Closed-form solution radicand is not positive"""


class NonConvergent(VerifierError):
    """Adaptive quadrature could not reach the tolerance"""


class OverlappingBalls(VerifierError):
    """k-ball density needs pairwise disjoint balls"""


class NonIntegrable(VerifierError):
    """Integrand does not decay along the hyperbola"""


# cli
class ConfigError(VerifierError):
    """Experiment configuration is invalid"""

    def __init__(self, message: str, field_errors: Optional[list[dict]] = None):
        self.field_errors = field_errors or []
        super().__init__(message)


class IoError(VerifierError):
    """Report could not be written"""
