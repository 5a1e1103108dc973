"""
Pydantic models for experiment configs and run reports
"""
import math
from typing import Any, Literal, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

from ..config import settings

ExperimentKind = Literal[
    "asgeirsson-circle",
    "asgeirsson-hyperbola",
    "uhe-residual",
    "xray-compare",
    "ruled-surface",
    "map-triple",
    "chart-roundtrip",
]
ExtraCheck = Literal["line_space", "conformal_invariance", "tail_consistency"]
BranchPolicy = Literal["plus", "minus", "both"]
OutputFormat = Literal["json", "csv"]
CheckStatus = Literal["pass", "fail", "error"]


def validate_not_empty_string(v: str) -> str:
    """Shared validation: ensure string is not empty or just whitespace"""
    if not v or not v.strip():
        raise ValueError('Field cannot be empty or whitespace only')
    return v.strip()


def validate_finite_vector(v: list[float], length: int) -> list[float]:
    """Shared validation: a list of `length` finite numbers"""
    if len(v) != length:
        raise ValueError(f'Expected {length} coordinates, got {len(v)}')
    if not all(math.isfinite(x) for x in v):
        raise ValueError('Coordinates must be finite')
    return v


def validate_positive(v: Optional[float]) -> Optional[float]:
    if v is not None and not v > 0:
        raise ValueError('Value must be positive')
    return v


class PolynomialTerm(BaseModel):
    """coeff * x1^k1 x2^k2 x3^k3 x4^k4"""
    coeff: float
    powers: list[int]

    @field_validator('powers')
    @classmethod
    def validate_powers(cls, v: list[int]) -> list[int]:
        if len(v) != 4 or any(k < 0 for k in v):
            raise ValueError('Powers must be four nonnegative integers')
        return v


class BallSpec(BaseModel):
    center: list[float]
    radius: float
    density: float = 1.0

    @field_validator('center')
    @classmethod
    def validate_center(cls, v: list[float]) -> list[float]:
        return validate_finite_vector(v, 3)

    @field_validator('radius')
    @classmethod
    def validate_radius(cls, v: float) -> float:
        return validate_positive(v)


class SolutionSpec(BaseModel):
    """Selector for a catalogue solution"""
    kind: Literal["appendix-a", "slab", "ball", "kballs", "gaussian", "polynomial"]
    d0: Optional[float] = None
    r0: Optional[float] = None
    balls: list[BallSpec] = Field(default_factory=list)
    sigma: Optional[float] = None
    amplitude: float = 1.0
    terms: list[PolynomialTerm] = Field(default_factory=list)
    half_chord: bool = False
    extend_by_zero: bool = True

    @field_validator('r0', 'sigma')
    @classmethod
    def validate_positive_if_provided(cls, v: Optional[float]) -> Optional[float]:
        return validate_positive(v)

    @field_validator('d0')
    @classmethod
    def validate_half_thickness(cls, v: Optional[float]) -> Optional[float]:
        if v is not None and v < 0:
            raise ValueError('Slab half-thickness must be nonnegative')
        return v

    @model_validator(mode='after')
    def validate_parameters(self) -> "SolutionSpec":
        required = {"slab": "d0", "ball": "r0", "gaussian": "sigma"}
        name = required.get(self.kind)
        if name is not None and getattr(self, name) is None:
            raise ValueError(f"Solution kind '{self.kind}' needs '{name}'")
        if self.kind == "polynomial" and not self.terms:
            raise ValueError("Polynomial solutions need at least one term")
        if self.kind == "kballs" and not self.balls:
            raise ValueError("k-ball solutions need at least one ball")
        return self


class ConicSpec(BaseModel):
    """Either three skew points on S or a center, a plane and a square-radius"""
    points: Optional[list[list[float]]] = None
    center: Optional[list[float]] = None
    plane: Optional[list[list[float]]] = None
    square_radius: Optional[float] = None

    @field_validator('points', 'plane')
    @classmethod
    def validate_vectors(cls, v: Optional[list[list[float]]]) -> Optional[list[list[float]]]:
        if v is None:
            return v
        return [validate_finite_vector(p, 4) for p in v]

    @field_validator('center')
    @classmethod
    def validate_center(cls, v: Optional[list[float]]) -> Optional[list[float]]:
        return v if v is None else validate_finite_vector(v, 4)

    @model_validator(mode='after')
    def validate_form(self) -> "ConicSpec":
        explicit = (self.center, self.plane, self.square_radius)
        if self.points is not None:
            if len(self.points) != 3:
                raise ValueError('points must list exactly three 4-vectors')
            if any(x is not None for x in explicit):
                raise ValueError('Give either points or center/plane/square_radius, not both')
            return self
        if any(x is None for x in explicit):
            raise ValueError('Give points, or all of center, plane and square_radius')
        if len(self.plane) != 2:
            raise ValueError('plane must list exactly two direction 4-vectors')
        return self


class QuadratureSpec(BaseModel):
    circle_nodes: int = settings.circle_nodes
    hyperbola_nodes: int = settings.hyperbola_nodes
    truncation: float = settings.hyperbola_truncation
    branch_policy: BranchPolicy = "both"
    gap_tolerance: float = 1e-6
    route_tolerance: float = 1e-6
    residual_tolerance: float = 1e-4
    xray_tolerance: float = 1e-8
    map_tolerance: float = 1e-7
    surface_tolerance: float = 1e-7
    roundtrip_tolerance: float = 1e-10
    plucker_tolerance: float = 1e-8
    fd_step: Optional[float] = None
    gauss_kronrod_tolerance: float = 1e-9
    samples: int = 100
    seed: int = 0

    @field_validator('circle_nodes', 'hyperbola_nodes', 'samples')
    @classmethod
    def validate_counts(cls, v: int) -> int:
        if v < 1:
            raise ValueError('Counts must be at least 1')
        return v

    @field_validator(
        'truncation', 'gap_tolerance', 'route_tolerance', 'residual_tolerance',
        'xray_tolerance', 'map_tolerance', 'surface_tolerance', 'roundtrip_tolerance',
        'plucker_tolerance', 'fd_step', 'gauss_kronrod_tolerance',
    )
    @classmethod
    def validate_positive_values(cls, v: Optional[float]) -> Optional[float]:
        return validate_positive(v)


class GraphicalPlaneSpec(BaseModel):
    a: float
    b: float


class NonGraphicalPlaneSpec(BaseModel):
    theta: float
    phi: float
    H: float = 1.0

    @field_validator('theta')
    @classmethod
    def validate_theta(cls, v: float) -> float:
        if not -math.pi < v <= math.pi:
            raise ValueError('theta must lie in (-pi, pi]')
        return v

    @field_validator('phi')
    @classmethod
    def validate_phi(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError('phi must be finite')
        return v

    @field_validator('H')
    @classmethod
    def validate_H(cls, v: float) -> float:
        if v == 0.0 or not math.isfinite(v):
            raise ValueError('H must be finite and nonzero')
        return v


class RuledSurfaceSpec(BaseModel):
    graphical: list[GraphicalPlaneSpec] = Field(default_factory=list)
    nongraphical: list[NonGraphicalPlaneSpec] = Field(default_factory=list)
    angles: int = 64
    distances: int = 16
    max_distance: float = 5.0

    @model_validator(mode='after')
    def validate_planes(self) -> "RuledSurfaceSpec":
        if not self.graphical and not self.nongraphical:
            raise ValueError('Ruled-surface experiments need at least one plane')
        return self


class OutputSpec(BaseModel):
    path: Optional[str] = None
    format: OutputFormat = "json"
    dump_curves: Optional[str] = None


class ExperimentConfig(BaseModel):
    """One experiment definition, usually loaded from YAML"""
    name: str
    kind: ExperimentKind
    solution: Optional[SolutionSpec] = None
    conic: Optional[ConicSpec] = None
    quadrature: QuadratureSpec = Field(default_factory=QuadratureSpec)
    checks: list[ExtraCheck] = Field(default_factory=list)
    ruled: Optional[RuledSurfaceSpec] = None
    output: OutputSpec = Field(default_factory=OutputSpec)

    @field_validator('name')
    @classmethod
    def validate_not_empty(cls, v: str) -> str:
        """Ensure field is not empty or just whitespace"""
        return validate_not_empty_string(v)

    @model_validator(mode='after')
    def validate_sections(self) -> "ExperimentConfig":
        needs_solution = {"asgeirsson-circle", "asgeirsson-hyperbola", "uhe-residual", "xray-compare"}
        if self.kind in needs_solution and self.solution is None:
            raise ValueError(f"Experiment kind '{self.kind}' needs a 'solution' section")
        if self.kind in {"asgeirsson-circle", "asgeirsson-hyperbola", "map-triple"} and self.conic is None:
            raise ValueError(f"Experiment kind '{self.kind}' needs a 'conic' section")
        if self.kind == "map-triple" and self.conic.points is None:
            raise ValueError("map-triple needs the conic given by three points")
        if self.kind == "ruled-surface" and self.ruled is None:
            raise ValueError("ruled-surface needs a 'ruled' section")
        return self


# ---------------------------------------------------------------------------
# reports


class QuadratureDescriptor(BaseModel):
    rule: str
    nodes: int
    truncation: Optional[float] = None
    branch_policy: Optional[BranchPolicy] = None


class MeanValueReport(BaseModel):
    """Both sides of a mean-value identity and their gap"""
    integral_S: float
    integral_Sperp: float
    absolute_gap: float
    relative_gap: float
    quadrature: QuadratureDescriptor
    tail_bound: Optional[float] = None
    branches: dict[str, dict[str, float]] = Field(default_factory=dict)
    route_gap: Optional[float] = None

    @classmethod
    def from_integrals(cls, integral_S: float, integral_Sperp: float, quadrature: QuadratureDescriptor, **extra) -> "MeanValueReport":
        absolute = abs(integral_S - integral_Sperp)
        return cls(
            integral_S=integral_S,
            integral_Sperp=integral_Sperp,
            absolute_gap=absolute,
            relative_gap=relative_gap(integral_S, integral_Sperp),
            quadrature=quadrature,
            **extra,
        )


def relative_gap(a: float, b: float) -> float:
    """|a - b| / max(|a|, |b|, floor)"""
    return abs(a - b) / max(abs(a), abs(b), settings.relative_gap_floor)


def _flag_for(value: float) -> str:
    if math.isnan(value):
        return "NaN"
    return "Infinity"


class CheckResult(BaseModel):
    """One row of a run report; non-finite numbers become null plus a flag"""
    name: str
    status: CheckStatus
    value_S: Optional[float] = None
    value_Sperp: Optional[float] = None
    gap: Optional[float] = None
    tolerance: Optional[float] = None
    metrics: dict[str, Optional[float]] = Field(default_factory=dict)
    flags: list[str] = Field(default_factory=list)
    error: Optional[str] = None
    details: dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode='after')
    def flag_non_finite(self) -> "CheckResult":
        for name in ('value_S', 'value_Sperp', 'gap', 'tolerance'):
            value = getattr(self, name)
            if value is not None and not math.isfinite(value):
                self.flags.append(f"{name}:{_flag_for(value)}")
                setattr(self, name, None)
        for key in sorted(self.metrics):
            value = self.metrics[key]
            if value is not None and not math.isfinite(value):
                self.flags.append(f"{key}:{_flag_for(value)}")
                self.metrics[key] = None
        return self


class RunReport(BaseModel):
    schema_tag: str = settings.report_schema
    experiment: str
    kind: ExperimentKind
    config: dict[str, Any]
    checks: list[CheckResult] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.status == "pass" for check in self.checks)
