import math

import pytest
from pydantic import ValidationError

from verifier.models.schemas import (
    CheckResult,
    ConicSpec,
    ExperimentConfig,
    MeanValueReport,
    QuadratureDescriptor,
    RunReport,
    SolutionSpec,
    relative_gap,
)

POINTS = [[8.0, 0.0, 0.0, 0.0], [7.0, 1.0, 0.0, 0.0], [6.0, 0.0, 0.0, 0.0]]


def test_minimal_asgeirsson_config():
    config = ExperimentConfig(
        name="  appendix-a  ",
        kind="asgeirsson-circle",
        solution={"kind": "appendix-a"},
        conic={"points": POINTS},
    )
    assert config.name == "appendix-a"
    assert config.quadrature.circle_nodes == 2048
    assert config.quadrature.branch_policy == "both"
    assert config.output.format == "json"
    assert config.solution.extend_by_zero


@pytest.mark.parametrize("name", ["", "   "])
def test_name_cannot_be_blank(name):
    with pytest.raises(ValidationError):
        ExperimentConfig(name=name, kind="chart-roundtrip")


def test_kind_must_be_known():
    with pytest.raises(ValidationError):
        ExperimentConfig(name="x", kind="asgeirsson-sphere")


@pytest.mark.parametrize("kind", ["asgeirsson-circle", "uhe-residual", "xray-compare"])
def test_solution_section_is_required(kind):
    with pytest.raises(ValidationError):
        ExperimentConfig(name="x", kind=kind, conic={"points": POINTS})


def test_ruled_surface_needs_a_plane():
    with pytest.raises(ValidationError):
        ExperimentConfig(name="x", kind="ruled-surface", ruled={})


def test_solution_parameters_are_checked():
    with pytest.raises(ValidationError):
        SolutionSpec(kind="ball")
    with pytest.raises(ValidationError):
        SolutionSpec(kind="ball", r0=-1.0)
    with pytest.raises(ValidationError):
        SolutionSpec(kind="polynomial")
    with pytest.raises(ValidationError):
        SolutionSpec(kind="kballs", balls=[{"center": [0.0, 0.0], "radius": 1.0}])


@pytest.mark.parametrize("solution", [{"kind": "kballs"}, {"kind": "kballs", "balls": []}])
def test_kballs_need_at_least_one_ball(solution):
    with pytest.raises(ValidationError):
        SolutionSpec(**solution)


@pytest.mark.parametrize("plane, field", [
    ({"theta": 1.0, "phi": 0.0, "H": 0.0}, "H"),
    ({"theta": 1.0, "phi": 0.0, "H": float("inf")}, "H"),
    ({"theta": 4.0, "phi": 0.0}, "theta"),
    ({"theta": -math.pi, "phi": 0.0}, "theta"),
    ({"theta": 1.0, "phi": float("nan")}, "phi"),
])
def test_nongraphical_plane_parameters_are_checked(plane, field):
    with pytest.raises(ValidationError) as excinfo:
        ExperimentConfig(name="x", kind="ruled-surface", ruled={"nongraphical": [plane]})
    locs = [err["loc"] for err in excinfo.value.errors()]
    assert ("ruled", "nongraphical", 0, field) in locs


def test_theta_pi_is_allowed():
    config = ExperimentConfig(name="x", kind="ruled-surface", ruled={"nongraphical": [{"theta": math.pi, "phi": 0.5}]})
    assert config.ruled.nongraphical[0].theta == math.pi


def test_conic_needs_one_form():
    with pytest.raises(ValidationError):
        ConicSpec(points=POINTS[:2])
    with pytest.raises(ValidationError):
        ConicSpec(points=POINTS, square_radius=1.0)
    with pytest.raises(ValidationError):
        ConicSpec(center=[0.0, 0.0, 0.0, 0.0], square_radius=1.0)
    with pytest.raises(ValidationError):
        ConicSpec(points=[[1.0, 2.0, float("inf"), 0.0], *POINTS[1:]])


def test_quadrature_values_must_be_positive():
    with pytest.raises(ValidationError):
        ExperimentConfig(name="x", kind="chart-roundtrip", quadrature={"gap_tolerance": 0.0})
    with pytest.raises(ValidationError):
        ExperimentConfig(name="x", kind="chart-roundtrip", quadrature={"circle_nodes": 0})


def test_relative_gap_has_a_floor():
    assert relative_gap(1.0, 0.5) == pytest.approx(0.5)
    assert relative_gap(0.0, 0.0) == 0.0


def test_mean_value_report_from_integrals():
    report = MeanValueReport.from_integrals(2.0, 1.5, QuadratureDescriptor(rule="trapezoid", nodes=8))
    assert report.absolute_gap == pytest.approx(0.5)
    assert report.relative_gap == pytest.approx(0.25)
    assert report.tail_bound is None


def test_non_finite_values_become_flags():
    check = CheckResult(
        name="mean_value",
        status="fail",
        value_S=math.inf,
        gap=math.nan,
        metrics={"route_gap": -math.inf, "tail_bound": 0.5},
    )
    assert check.value_S is None
    assert check.gap is None
    assert check.metrics == {"route_gap": None, "tail_bound": 0.5}
    assert check.flags == ["value_S:Infinity", "gap:NaN", "route_gap:Infinity"]


def test_run_report_passes_only_when_every_check_passes():
    report = RunReport(
        experiment="x",
        kind="chart-roundtrip",
        config={},
        checks=[CheckResult(name="a", status="pass"), CheckResult(name="b", status="error")],
    )
    assert report.schema_tag == "asgeirsson-report/1"
    assert not report.passed
    assert RunReport(experiment="x", kind="chart-roundtrip", config={}, checks=[CheckResult(name="a", status="pass")]).passed
