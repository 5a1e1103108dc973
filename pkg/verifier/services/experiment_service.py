"""
Experiment service: loads experiment configs and runs them into reports
"""
import cmath
import logging
import math
from pathlib import Path
from typing import Callable

import numpy as np
import yaml
from pydantic import ValidationError

from ..errors import (
    ConfigError,
    EmptyConic,
    NonIntegrable,
    PoleAt,
    PoleOnCurve,
    VerifierError,
)
from ..geometry.conformal import (
    conformality_residual,
    is_infinity,
    map_pair_to_pair,
    map_triple_to_standard,
)
from ..geometry.conics import ConjugateConicPair, Side, build_pair, pair_from_three_points, standard_pair
from ..geometry.line_space import (
    GraphicalPlane,
    Hyperboloid,
    NonGraphicalPlane,
    OrientedLine,
    Paraboloid,
    conjugacy_residual,
    conjugate_graphical,
    conjugate_nongraphical,
    flat_to_line,
    graphical_pseudo_circle,
    line_through_points,
    line_to_flat,
    line_to_vec4,
    nongraphical_pseudo_circle,
    phi_map,
    plucker_from_points,
    plucker_to_flat,
    ruled_surface_residual,
    tangent_orthogonality,
    uhe_residual_with_scale,
)
from ..geometry.neutral import PlaneFrame, as_vec4
from ..models.schemas import (
    CheckResult,
    ConicSpec,
    ExperimentConfig,
    MeanValueReport,
    QuadratureSpec,
    RunReport,
    SolutionSpec,
)
from .meanvalue_service import meanvalue_service
from .solution_service import APPENDIX_A_RADIUS, BallSection, UheSolution, solution_service, slab_solution, xray_numeric

logger = logging.getLogger(__name__)

# flags attached to checks that end in these errors
ERROR_FLAGS = {
    PoleAt: "Pole",
    PoleOnCurve: "Pole",
    NonIntegrable: "NonIntegrable",
}

# chart sampling box used by the random-line experiments
LINE_XI_RADIUS = 0.9
LINE_ETA_RADIUS = 10.0


def load_config(path: str) -> ExperimentConfig:
    """Read and validate a YAML experiment file.

    Raises:
        ConfigError: if the file is missing, unreadable, or fails validation
    """
    config_path = Path(path)
    if not config_path.exists():
        raise ConfigError(f"Configuration file not found at {config_path.resolve()}")
    try:
        with config_path.open("r", encoding="utf-8") as f:
            data = yaml.safe_load(f) or {}
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"Failed to read configuration file {config_path}: {exc}") from exc
    return parse_config(data, source=str(config_path))


def parse_config(data: dict, source: str = "<config>") -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        field_errors = [
            {"loc": ".".join(str(part) for part in err["loc"]), "msg": err["msg"], "type": err["type"]}
            for err in exc.errors()
        ]
        raise ConfigError(f"Invalid experiment config in {source}", field_errors) from exc


def _error_check(name: str, exc: Exception) -> CheckResult:
    flags = [flag for cls, flag in ERROR_FLAGS.items() if isinstance(exc, cls)]
    return CheckResult(name=name, status="error", error=f"{type(exc).__name__}: {exc}", flags=flags)


def _status(ok: bool) -> str:
    return "pass" if ok else "fail"


def _random_line(rng: np.random.Generator, xi_radius: float = LINE_XI_RADIUS, eta_radius: float = LINE_ETA_RADIUS) -> OrientedLine:
    """Line with xi and eta uniform in discs"""
    xi = xi_radius * math.sqrt(rng.uniform()) * cmath.exp(2j * math.pi * rng.uniform())
    eta = eta_radius * math.sqrt(rng.uniform()) * cmath.exp(2j * math.pi * rng.uniform())
    return OrientedLine(xi, eta)


class ExperimentService:
    """Service for running experiment configs"""

    def build_pair(self, conic: ConicSpec) -> ConjugateConicPair:
        if conic.points is not None:
            return pair_from_three_points(*conic.points)
        center = as_vec4(conic.center)
        u, v = conic.plane
        return build_pair(center, PlaneFrame(center, as_vec4(u), as_vec4(v)), conic.square_radius)

    def run(self, config: ExperimentConfig) -> RunReport:
        """Execute one experiment; failures become error checks, never aborting siblings"""
        runners: dict[str, Callable[[ExperimentConfig], list[CheckResult]]] = {
            "asgeirsson-circle": self._run_asgeirsson,
            "asgeirsson-hyperbola": self._run_asgeirsson,
            "uhe-residual": self._run_uhe_residual,
            "xray-compare": self._run_xray_compare,
            "ruled-surface": self._run_ruled_surface,
            "map-triple": self._run_map_triple,
            "chart-roundtrip": self._run_chart_roundtrip,
        }
        logger.info(f"Running experiment '{config.name}' ({config.kind})")
        checks = runners[config.kind](config)
        report = RunReport(
            experiment=config.name,
            kind=config.kind,
            config=config.model_dump(mode="json"),
            checks=checks,
        )
        if report.passed:
            logger.info(f"✅ Experiment '{config.name}': all {len(checks)} checks passed")
        else:
            failed = [c.name for c in checks if c.status != "pass"]
            logger.warning(f"Experiment '{config.name}': {len(failed)} checks did not pass: {failed}")
        return report

    # -- asgeirsson ----------------------------------------------------------

    def _run_asgeirsson(self, config: ExperimentConfig) -> list[CheckResult]:
        q = config.quadrature
        try:
            pair = self.build_pair(config.conic)
            u = solution_service.build(config.solution)
        except Exception as e:
            logger.error(f"❌ Error setting up '{config.name}': {type(e).__name__}: {e}")
            return [_error_check("mean_value", e)] + [_error_check(name, e) for name in config.checks]

        expected_circle = config.kind == "asgeirsson-circle"
        checks = [self._mean_value_check(u, pair, q, expected_circle)]
        for name in config.checks:
            if name == "line_space":
                checks.append(self._guard(name, lambda: self._line_space_check(u, pair, q)))
            elif name == "conformal_invariance":
                checks.append(self._guard(name, lambda: self._conformal_check(u, pair, q)))
            elif name == "tail_consistency":
                checks.append(self._guard(name, lambda: self._tail_check(u, pair, q)))
        return checks

    def _guard(self, name: str, check: Callable[[], CheckResult]) -> CheckResult:
        try:
            return check()
        except VerifierError as e:
            logger.error(f"❌ Check '{name}' failed with {type(e).__name__}: {e}")
            return _error_check(name, e)
        except Exception as e:
            # a bug in one check still leaves its siblings running
            logger.exception(f"❌ Check '{name}' crashed with {type(e).__name__}: {e}")
            return _error_check(name, e)

    def _pair_details(self, pair: ConjugateConicPair) -> dict:
        return {
            "center": pair.center.tolist(),
            "square_radius": pair.square_radius,
            "plane_kind": pair.kind.value,
            "conic": "circle" if pair.is_circle else "hyperbola",
            "frame_S": [b.tolist() for b in pair.frame],
            "frame_Sperp": [b.tolist() for b in pair.perp_frame],
        }

    def _from_report(self, name: str, report: MeanValueReport, tolerance: float, extra_ok: bool = True, **details) -> CheckResult:
        metrics = {"absolute_gap": report.absolute_gap, "relative_gap": report.relative_gap}
        if report.tail_bound is not None:
            metrics["tail_bound"] = report.tail_bound
        if report.route_gap is not None:
            metrics["route_gap"] = report.route_gap
        for branch, values in report.branches.items():
            metrics[f"relative_gap_{branch}"] = values["relative_gap"]
        return CheckResult(
            name=name,
            status=_status(report.relative_gap <= tolerance and extra_ok),
            value_S=report.integral_S,
            value_Sperp=report.integral_Sperp,
            gap=report.relative_gap,
            tolerance=tolerance,
            metrics=metrics,
            details={"quadrature": report.quadrature.model_dump(mode="json"), **details},
        )

    def _mean_value_check(self, u: UheSolution, pair: ConjugateConicPair, q: QuadratureSpec, expected_circle: bool) -> CheckResult:
        def check() -> CheckResult:
            if pair.is_circle != expected_circle:
                raise EmptyConic(
                    f"Conic is a {'circle' if pair.is_circle else 'hyperbola'} but the experiment expects the other kind"
                )
            report = meanvalue_service.verify_pair(u, pair, q)
            return self._from_report("mean_value", report, q.gap_tolerance, pair=self._pair_details(pair))

        return self._guard("mean_value", check)

    def _line_space_check(self, u: UheSolution, pair: ConjugateConicPair, q: QuadratureSpec) -> CheckResult:
        report = meanvalue_service.verify_line_pair(u.on_line, pair, q)
        return self._from_report(
            "line_space", report, q.gap_tolerance, extra_ok=report.route_gap <= q.route_tolerance
        )

    def _conformal_check(self, u: UheSolution, pair: ConjugateConicPair, q: QuadratureSpec) -> CheckResult:
        f = map_pair_to_pair(standard_pair(), pair)
        report = meanvalue_service.verify_conformal_invariance(u, f, q)
        return self._from_report(
            "conformal_invariance",
            report,
            q.gap_tolerance,
            extra_ok=report.route_gap <= q.route_tolerance,
            generators=f.describe(),
        )

    def _tail_check(self, u: UheSolution, pair: ConjugateConicPair, q: QuadratureSpec) -> CheckResult:
        """Doubling T (and n, keeping the step) moves each side by less than its tail bound"""
        if pair.is_circle:
            return CheckResult(name="tail_consistency", status="pass", details={"skipped": "circle pair has no tails"})
        changes, bounds = [], []
        for side in (Side.S, Side.SPERP):
            short = meanvalue_service.integrate_hyperbola(u, pair, side, q.branch_policy, q.truncation, q.hyperbola_nodes)
            long = meanvalue_service.integrate_hyperbola(
                u, pair, side, q.branch_policy, 2.0 * q.truncation, 2 * q.hyperbola_nodes
            )
            changes.append(abs(long.value - short.value))
            bounds.append(short.tail_bound + 1e-12 * max(1.0, abs(short.value)))
        ok = all(change <= bound for change, bound in zip(changes, bounds))
        return CheckResult(
            name="tail_consistency",
            status=_status(ok),
            gap=max(changes),
            tolerance=max(bounds),
            metrics={"change_S": changes[0], "change_Sperp": changes[1], "tail_bound_S": bounds[0], "tail_bound_Sperp": bounds[1]},
        )

    def curve_rows(self, config: ExperimentConfig, samples: int = 256) -> list[dict]:
        """Sampled integrands along both conics of a mean-value experiment"""
        if config.conic is None or config.solution is None:
            raise ConfigError(f"Experiment kind '{config.kind}' has no conics to dump")
        pair = self.build_pair(config.conic)
        u = solution_service.build(config.solution)
        return meanvalue_service.curve_samples(u, pair, samples, config.quadrature.truncation)

    # -- uhe residual --------------------------------------------------------

    def _residual_points(self, spec: SolutionSpec, u: UheSolution, rng: np.random.Generator, count: int) -> list[np.ndarray]:
        """Interior sample points; chord solutions stay clear of their support boundary"""
        if spec.kind in ("ball", "kballs"):
            balls = [(0.0, 0.0, 0.0, spec.r0)] if spec.kind == "ball" else [(*b.center, b.radius) for b in spec.balls]
            points = []
            for _ in range(200 * count):
                if len(points) == count:
                    break
                cx, cy, cz, r = balls[int(rng.integers(len(balls)))]
                xi = 0.8 * math.sqrt(rng.uniform()) * cmath.exp(2j * math.pi * rng.uniform())
                offset = 0.45 * r * math.sqrt(rng.uniform()) * cmath.exp(2j * math.pi * rng.uniform())
                line = OrientedLine(xi, BallSection((cx, cy, cz)).eta(xi) + offset * (1.0 + abs(xi) ** 2) / 2.0)
                # every ball is either crossed well inside or missed by a margin
                clear = all(
                    abs(r_j * r_j - BallSection((x, y, z)).distance(line) ** 2) >= 0.1 * r_j * r_j
                    for x, y, z, r_j in balls
                )
                if clear:
                    points.append(line_to_vec4(line))
            return points
        box = 10.0 if spec.kind == "appendix-a" else 3.0
        points = []
        for _ in range(200 * count):
            if len(points) == count:
                break
            x = rng.uniform(-box, box, size=4)
            if u.contains(x):
                points.append(x)
        return points

    def _run_uhe_residual(self, config: ExperimentConfig) -> list[CheckResult]:
        q = config.quadrature

        def check() -> CheckResult:
            u = solution_service.build(config.solution)
            rng = np.random.default_rng(q.seed)
            points = self._residual_points(config.solution, u, rng, q.samples)
            residuals = []
            for p in points:
                value, scale = uhe_residual_with_scale(u, p, q.fd_step)
                residuals.append(abs(value) / max(1.0, scale))
            worst = max(residuals) if residuals else math.nan
            return CheckResult(
                name="uhe_residual",
                status=_status(bool(residuals) and worst <= q.residual_tolerance),
                value_S=worst,
                gap=worst,
                tolerance=q.residual_tolerance,
                metrics={"mean_residual": float(np.mean(residuals)) if residuals else math.nan, "points": float(len(points))},
                details={"solution": u.name},
            )

        return [self._guard("uhe_residual", check)]

    # -- xray ----------------------------------------------------------------

    def _run_xray_compare(self, config: ExperimentConfig) -> list[CheckResult]:
        q = config.quadrature
        spec = config.solution

        def check() -> CheckResult:
            density = solution_service.density(spec)
            if spec.kind == "appendix-a":
                reference = solution_service.ball(APPENDIX_A_RADIUS)
                eta_radius, truncation = APPENDIX_A_RADIUS, 2.0 * APPENDIX_A_RADIUS
            else:
                reference = solution_service.build(spec)
                eta_radius, truncation = self._xray_extent(spec)
            rng = np.random.default_rng(q.seed)
            errors, ratios = [], []
            for _ in range(q.samples):
                line = _random_line(rng, eta_radius=eta_radius)
                numeric = xray_numeric(density, line, truncation=truncation)
                closed = reference.on_line(line)
                errors.append(abs(numeric - closed))
                if spec.kind == "slab":
                    half = slab_solution(spec.d0, line, half_chord=True)
                    if half > 0.0:
                        ratios.append(numeric / half)
            worst = max(errors)
            metrics = {"mean_error": float(np.mean(errors))}
            if ratios:
                metrics["integral_to_half_chord_ratio"] = float(np.mean(ratios))
            return CheckResult(
                name="xray_compare",
                status=_status(worst <= q.xray_tolerance),
                gap=worst,
                tolerance=q.xray_tolerance,
                metrics=metrics,
                details={"solution": reference.name, "lines": q.samples, "half_chord": spec.half_chord},
            )

        return [self._guard("xray_compare", check)]

    def _xray_extent(self, spec: SolutionSpec) -> tuple[float, float]:
        """(eta sampling radius, arc-length truncation) covering the density's support"""
        if spec.kind == "ball":
            return spec.r0, 4.0 * spec.r0 + 1.0
        if spec.kind == "kballs":
            reach = max(float(np.linalg.norm(b.center)) + b.radius for b in spec.balls)
            return reach, 4.0 * reach + 1.0
        if spec.kind == "slab":
            # foot points reach height 2 |eta|; the flattest sampled direction climbs at (1 - 0.81) / 1.81 > 0.1
            return LINE_ETA_RADIUS, 10.0 * (2.0 * LINE_ETA_RADIUS + spec.d0) + 1.0
        if spec.kind == "gaussian":
            return 3.0 * spec.sigma, 40.0 * spec.sigma
        raise ConfigError(f"Solution kind '{spec.kind}' has no X-ray density")

    # -- ruled surfaces ------------------------------------------------------

    def _run_ruled_surface(self, config: ExperimentConfig) -> list[CheckResult]:
        spec = config.ruled
        q = config.quadrature
        distances = np.linspace(-spec.max_distance, spec.max_distance, spec.distances)
        checks = []
        for plane in spec.graphical:
            name = f"hyperboloid(a={plane.a:g},b={plane.b:g})"
            checks.append(self._guard(name, lambda plane=plane, name=name: self._hyperboloid_check(name, plane.a, plane.b, spec.angles, distances, q)))
        for plane in spec.nongraphical:
            name = f"paraboloid(theta={plane.theta:g},phi={plane.phi:g},H={plane.H:g})"
            checks.append(self._guard(name, lambda plane=plane, name=name: self._paraboloid_check(name, plane, spec.angles, distances, q)))
        return checks

    def _hyperboloid_check(self, name: str, a: float, b: float, angles: int, distances: np.ndarray, q: QuadratureSpec) -> CheckResult:
        surface = Hyperboloid(a, b)
        residuals = {"S": [], "Sperp": []}
        for k in range(angles):
            angle = 2.0 * math.pi * k / angles
            for side, (pa, pb, sign) in (("S", (a, b, 1.0)), ("Sperp", (-a, -b, -1.0))):
                try:
                    line = graphical_pseudo_circle(pa, pb, angle, sign)
                except EmptyConic:
                    continue
                residuals[side].extend(ruled_surface_residual(surface, phi_map(line, r)) for r in distances)
        plane = GraphicalPlane.from_ab(a, b)
        return self._surface_result(name, residuals, q, conjugacy_residual(plane, conjugate_graphical(plane)))

    def _paraboloid_check(self, name: str, spec, samples: int, distances: np.ndarray, q: QuadratureSpec) -> CheckResult:
        plane = NonGraphicalPlane(spec.theta, spec.phi, spec.H)
        conjugate = conjugate_nongraphical(plane)
        surface = Paraboloid(spec.theta, spec.phi)
        residuals = {"S": [], "Sperp": []}
        for k in range(samples):
            u = 0.05 + 0.9 * k / max(1, samples - 1)
            for side, (pl, sign) in (("S", (plane, 1.0)), ("Sperp", (conjugate, -1.0))):
                line = nongraphical_pseudo_circle(pl, u, sign)
                residuals[side].extend(ruled_surface_residual(surface, phi_map(line, r)) for r in distances)
        result = self._surface_result(name, residuals, q, conjugacy_residual(plane, conjugate))
        result.metrics["tangent_orthogonality"] = tangent_orthogonality(plane, conjugate)
        return result

    def _surface_result(self, name: str, residuals: dict[str, list[float]], q: QuadratureSpec, conjugacy: float) -> CheckResult:
        worst_s = max(residuals["S"], default=math.nan)
        worst_sp = max(residuals["Sperp"], default=math.nan)
        worst = max(worst_s, worst_sp) if residuals["S"] and residuals["Sperp"] else math.nan
        ok = math.isfinite(worst) and worst <= q.surface_tolerance
        return CheckResult(
            name=name,
            status=_status(ok),
            value_S=worst_s,
            value_Sperp=worst_sp,
            gap=worst,
            tolerance=q.surface_tolerance,
            metrics={
                "conjugacy_residual": conjugacy,
                "samples_S": float(len(residuals["S"])),
                "samples_Sperp": float(len(residuals["Sperp"])),
            },
        )

    # -- conformal triples ---------------------------------------------------

    def _run_map_triple(self, config: ExperimentConfig) -> list[CheckResult]:
        q = config.quadrature

        def check() -> CheckResult:
            points = [as_vec4(p) for p in config.conic.points]
            f = map_triple_to_standard(*points)
            image_q, image_q1, image_q2 = (f(p) for p in points)
            sends_to_infinity = is_infinity(image_q1)
            residual_q = float(np.linalg.norm(image_q)) if not is_infinity(image_q) else math.inf
            residual_q2 = (
                float(np.linalg.norm(image_q2 - np.array([1.0, 0.0, 0.0, 0.0]))) if not is_infinity(image_q2) else math.inf
            )
            worst = max(residual_q, residual_q2)
            rng = np.random.default_rng(q.seed)
            conformality = []
            for _ in range(8):
                p = points[0] + rng.uniform(-1.0, 1.0, size=4)
                try:
                    conformality.append(conformality_residual(f, p))
                except VerifierError:
                    continue
            return CheckResult(
                name="map_triple",
                status=_status(sends_to_infinity and worst <= q.map_tolerance),
                gap=worst,
                tolerance=q.map_tolerance,
                metrics={
                    "residual_q": residual_q,
                    "residual_q2": residual_q2,
                    "conformality_residual": max(conformality) if conformality else math.nan,
                },
                flags=[] if sends_to_infinity else ["q1-not-at-infinity"],
                details={"generators": f.describe(), "metric_sign": f.metric_sign()},
            )

        return [self._guard("map_triple", check)]

    # -- chart ---------------------------------------------------------------

    def _run_chart_roundtrip(self, config: ExperimentConfig) -> list[CheckResult]:
        q = config.quadrature

        def roundtrip() -> CheckResult:
            rng = np.random.default_rng(q.seed)
            worst = 0.0
            for _ in range(q.samples):
                line = _random_line(rng)
                back = flat_to_line(line_to_flat(line))
                worst = max(worst, abs(back.xi - line.xi), abs(back.eta - line.eta))
            return CheckResult(
                name="chart_roundtrip",
                status=_status(worst <= q.roundtrip_tolerance),
                gap=worst,
                tolerance=q.roundtrip_tolerance,
                metrics={"lines": float(q.samples)},
            )

        def plucker() -> CheckResult:
            rng = np.random.default_rng(q.seed + 1)
            worst, used = 0.0, 0
            for _ in range(q.samples):
                s, t = rng.uniform(-5.0, 5.0, size=3), rng.uniform(-5.0, 5.0, size=3)
                # keep directions clear of the chart rim
                if abs(s[2] - t[2]) < 0.2 * float(np.linalg.norm(s - t)):
                    continue
                flat = plucker_to_flat(plucker_from_points(s, t))
                chart = line_to_vec4(line_through_points(s, t))
                worst = max(worst, float(np.max(np.abs(flat - chart))) / max(1.0, float(np.max(np.abs(flat)))))
                used += 1
            return CheckResult(
                name="plucker_consistency",
                status=_status(used > 0 and worst <= q.plucker_tolerance),
                gap=worst,
                tolerance=q.plucker_tolerance,
                metrics={"pairs": float(used)},
            )

        return [self._guard("chart_roundtrip", roundtrip), self._guard("plucker_consistency", plucker)]


experiment_service = ExperimentService()
