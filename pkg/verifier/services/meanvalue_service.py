"""
Mean-value service: line integrals over conjugate conics and the verdicts
comparing S with S-perp
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ..config import settings
from ..errors import EvaluationDomain, NonIntegrable, PoleAt, PoleOnCurve, VerifierError
from ..geometry.conics import Branch, Conic, ConjugateConicPair, Side, line_element_factor, standard_pair
from ..geometry.conformal import ConformalMap, is_infinity
from ..geometry.line_space import (
    OrientedLine,
    conformal_factor_omega,
    metric_G,
    vec4_to_line,
)
from ..geometry.neutral import quadratic_form
from ..models.schemas import MeanValueReport, QuadratureDescriptor, QuadratureSpec, relative_gap
from ..utils.finite_differences import derivative5
from ..utils.quadrature import (
    adaptive_gauss_kronrod,
    compensated_sum,
    periodic_trapezoid,
    trapezoid_samples,
)

logger = logging.getLogger(__name__)

Field4 = Callable[[np.ndarray], float]

# fraction of [0, T] used by each tail-decay segment
TAIL_SEGMENT = 1.0 / 8.0
POLE_SCAN_NODES = 4096


@dataclass(frozen=True)
class BranchIntegral:
    value: float
    tail_bound: float


@dataclass(frozen=True)
class HyperbolaIntegral:
    """Per-branch values and the value selected by the branch policy"""
    value: float
    tail_bound: float
    branches: dict[Branch, BranchIntegral] = field(default_factory=dict)

    @property
    def both(self) -> float:
        return compensated_sum(b.value for b in self.branches.values())


def _guarded(u: Field4) -> Field4:
    def g(x: np.ndarray) -> float:
        try:
            value = float(u(x))
        except VerifierError as exc:
            if isinstance(exc, EvaluationDomain):
                raise
            raise EvaluationDomain(f"Integrand undefined at {np.asarray(x).tolist()}: {exc}") from exc
        if not math.isfinite(value):
            raise EvaluationDomain(f"Integrand is {value} at {np.asarray(x).tolist()}")
        return value

    return g


def _tail(values: list[float], h: float, segment: int, where: str) -> float:
    """Geometric extrapolation of |integrand| beyond the sampled end.

    values run from the end of the range inwards.
    """
    last = compensated_sum(abs(v) for v in values[:segment]) / segment
    previous = compensated_sum(abs(v) for v in values[segment:2 * segment]) / segment
    if last == 0.0:
        return 0.0
    if previous == 0.0 or last >= previous:
        raise NonIntegrable(f"Integrand does not decay towards the {where} end (last {last:.3e}, previous {previous:.3e})")
    ratio = last / previous
    return last * (segment * h) * ratio / (1.0 - ratio)


def _policy_value(branches: dict[Branch, BranchIntegral], policy: str) -> tuple[float, float]:
    if policy == "plus":
        chosen = [branches[Branch.PLUS]]
    elif policy == "minus":
        chosen = [branches[Branch.MINUS]]
    else:
        chosen = list(branches.values())
    return compensated_sum(b.value for b in chosen), compensated_sum(b.tail_bound for b in chosen)


class MeanValueService:
    """Service for mean-value integrals and verdicts"""

    # -- flat integrals ------------------------------------------------------

    def integrate_circle(self, u: Field4, pair: ConjugateConicPair, side: Side, n: Optional[int] = None) -> float:
        """Periodic trapezoid of theta -> u(gamma(theta)) |c| over [0, 2 pi)"""
        conic = pair.conic(side)
        if not conic.is_circle:
            raise ValueError("integrate_circle needs a definite pair")
        n = settings.circle_nodes if n is None else n
        g = _guarded(u)
        c = line_element_factor(pair)
        return periodic_trapezoid(lambda t: g(conic.point(t)) * c, 0.0, 2.0 * math.pi, n)

    def integrate_hyperbola(
        self,
        u: Field4,
        pair: ConjugateConicPair,
        side: Side,
        branch_policy: str = "both",
        T: Optional[float] = None,
        n: Optional[int] = None,
    ) -> HyperbolaIntegral:
        """Trapezoid of theta -> u(gamma(theta)) |c| on [-T, T] for each branch.

        The tail bound doubles the geometric extrapolation of the last
        segment's mean magnitude at both ends.

        Raises:
            NonIntegrable: if the integrand does not decay towards +-T
        """
        conic = pair.conic(side)
        if conic.is_circle:
            raise ValueError("integrate_hyperbola needs a hyperbolic pair")
        T = settings.hyperbola_truncation if T is None else T
        n = settings.hyperbola_nodes if n is None else n
        g = _guarded(u)
        c = line_element_factor(pair)
        h = 2.0 * T / n
        segment = max(2, int(round(TAIL_SEGMENT * n / 2)))

        branches: dict[Branch, BranchIntegral] = {}
        for branch in (Branch.PLUS, Branch.MINUS):
            values = [g(conic.point(-T + k * h, branch)) * c for k in range(n + 1)]
            tail = _tail(values[::-1], h, segment, "+T") + _tail(values, h, segment, "-T")
            branches[branch] = BranchIntegral(trapezoid_samples(values, h), 2.0 * tail)
        value, tail_bound = _policy_value(branches, branch_policy)
        return HyperbolaIntegral(value=value, tail_bound=tail_bound, branches=branches)

    def verify_pair(
        self,
        u: Field4,
        pair: ConjugateConicPair,
        quadrature: Optional[QuadratureSpec] = None,
    ) -> MeanValueReport:
        """Integrate u over S and S-perp and compare"""
        q = quadrature or QuadratureSpec()
        try:
            if pair.is_circle:
                s = self.integrate_circle(u, pair, Side.S, q.circle_nodes)
                sp = self.integrate_circle(u, pair, Side.SPERP, q.circle_nodes)
                report = MeanValueReport.from_integrals(
                    s, sp, QuadratureDescriptor(rule="periodic-trapezoid", nodes=q.circle_nodes)
                )
            else:
                s = self.integrate_hyperbola(u, pair, Side.S, q.branch_policy, q.truncation, q.hyperbola_nodes)
                sp = self.integrate_hyperbola(u, pair, Side.SPERP, q.branch_policy, q.truncation, q.hyperbola_nodes)
                branches = {}
                for branch in (Branch.PLUS, Branch.MINUS):
                    a, b = s.branches[branch].value, sp.branches[branch].value
                    branches[branch.value] = {"S": a, "Sperp": b, "relative_gap": relative_gap(a, b)}
                branches["both"] = {"S": s.both, "Sperp": sp.both, "relative_gap": relative_gap(s.both, sp.both)}
                report = MeanValueReport.from_integrals(
                    s.value,
                    sp.value,
                    QuadratureDescriptor(
                        rule="trapezoid",
                        nodes=q.hyperbola_nodes,
                        truncation=q.truncation,
                        branch_policy=q.branch_policy,
                    ),
                    tail_bound=max(s.tail_bound, sp.tail_bound),
                    branches=branches,
                )
            logger.info(f"✅ Mean-value gap {report.relative_gap:.3e} ({report.quadrature.rule})")
            return report
        except VerifierError as e:
            logger.error(f"❌ Error verifying pair: {e}")
            raise

    # -- line space ----------------------------------------------------------

    def _line_samples(self, conic: Conic, branch: Optional[Branch], t: float, h: float) -> tuple[OrientedLine, float]:
        """Chart line at gamma(t) and d tau / dt from the neutral metric"""
        line = vec4_to_line(conic.point(t, branch))
        velocity = derivative5(lambda s: vec4_to_line(conic.point(s, branch)).to_real(), t, h)
        return line, math.sqrt(abs(metric_G(line, velocity, velocity)))

    def verify_line_pair(
        self,
        v: Callable[[OrientedLine], float],
        pair: ConjugateConicPair,
        quadrature: Optional[QuadratureSpec] = None,
    ) -> MeanValueReport:
        """Line-space identity: integrals of v against d tau over both conics.

        d tau is measured with the neutral metric on chart tangents; the
        analytic route uses d tau = dl / (2 Omega) and route_gap compares the two.
        """
        q = quadrature or QuadratureSpec()
        h = settings.conformal_fd_step
        c = line_element_factor(pair)

        def metric_route(conic: Conic, branch: Optional[Branch]) -> Callable[[float], float]:
            def g(t: float) -> float:
                line, speed = self._line_samples(conic, branch, t, h)
                return float(v(line)) * speed
            return g

        def analytic_route(conic: Conic, branch: Optional[Branch]) -> Callable[[float], float]:
            def g(t: float) -> float:
                line = vec4_to_line(conic.point(t, branch))
                return float(v(line)) * c / (2.0 * conformal_factor_omega(line))
            return g

        def integrate(route, conic: Conic) -> float:
            if conic.is_circle:
                return periodic_trapezoid(route(conic, None), 0.0, 2.0 * math.pi, q.circle_nodes)
            step = 2.0 * q.truncation / q.hyperbola_nodes
            branches = [Branch.PLUS, Branch.MINUS]
            if q.branch_policy != "both":
                branches = [Branch(q.branch_policy.capitalize())]
            values = []
            for branch in branches:
                g = route(conic, branch)
                samples = [g(-q.truncation + k * step) for k in range(q.hyperbola_nodes + 1)]
                values.append(trapezoid_samples(samples, step))
            return compensated_sum(values)

        try:
            s = integrate(metric_route, pair.S)
            sp = integrate(metric_route, pair.Sperp)
            s_analytic = integrate(analytic_route, pair.S)
            sp_analytic = integrate(analytic_route, pair.Sperp)
        except VerifierError as e:
            logger.error(f"❌ Error in line-space integral: {e}")
            raise
        nodes = q.circle_nodes if pair.is_circle else q.hyperbola_nodes
        descriptor = QuadratureDescriptor(
            rule="line-element",
            nodes=nodes,
            truncation=None if pair.is_circle else q.truncation,
            branch_policy=None if pair.is_circle else q.branch_policy,
        )
        route_gap = max(relative_gap(s, s_analytic), relative_gap(sp, sp_analytic))
        report = MeanValueReport.from_integrals(s, sp, descriptor, route_gap=route_gap)
        logger.info(f"✅ Line-space gap {report.relative_gap:.3e}, route gap {route_gap:.3e}")
        return report

    # -- conformal images ----------------------------------------------------

    def find_poles(self, f: ConformalMap, conic: Conic, branch: Optional[Branch] = None, span: Optional[float] = None) -> list[float]:
        """Parameters where f sends the conic through infinity.

        Sign changes of the stage denominators on a uniform scan are refined
        by bisection.
        """
        if conic.is_circle:
            lo, hi, closed = 0.0, 2.0 * math.pi, True
        else:
            span = settings.hyperbola_truncation if span is None else span
            lo, hi, closed = -span, span, False
        grid = [lo + (hi - lo) * k / POLE_SCAN_NODES for k in range(POLE_SCAN_NODES + (0 if closed else 1))]
        indicator = [f.pole_indicator(conic.point(t, branch)) for t in grid]
        if closed:
            grid.append(hi)
            indicator.append(indicator[0])

        poles = []
        for a, b, fa, fb in zip(grid[:-1], grid[1:], indicator[:-1], indicator[1:]):
            if fa == 0.0:
                poles.append(a)
                continue
            if fa * fb > 0.0 or fb == 0.0:
                continue
            for _ in range(200):
                mid = 0.5 * (a + b)
                fm = f.pole_indicator(conic.point(mid, branch))
                if fm == 0.0 or b - a <= 4e-16 * max(1.0, abs(mid)):
                    break
                if fa * fm < 0.0:
                    b, fb = mid, fm
                else:
                    a, fa = mid, fm
            poles.append(0.5 * (a + b))
        return poles

    def _image_integrands(
        self,
        u: Field4,
        f: ConformalMap,
        conic: Conic,
        branch: Optional[Branch],
        poles: list[float],
        period: Optional[float],
    ) -> tuple[Callable[[float], float], Callable[[float], float]]:
        g = _guarded(u)
        c = conic.radius

        def distance_to_pole(t: float) -> float:
            if not poles:
                return math.inf
            if period is None:
                return min(abs(t - p) for p in poles)
            return min(min(abs(t - p) % period, period - abs(t - p) % period) for p in poles)

        def image(t: float) -> np.ndarray:
            point = f(conic.point(t, branch))
            if is_infinity(point):
                raise PoleOnCurve(f"Image of the conic passes through infinity at t={t:.12g}")
            return point

        def image_curve(t: float) -> float:
            """u on f(gamma) against the image line element |Q(d(f o gamma)/dt)|^(1/2)"""
            h = min(settings.conformal_fd_step, 0.25 * distance_to_pole(t))
            velocity = derivative5(image, t, h)
            return g(image(t)) * math.sqrt(abs(quadratic_form(velocity)))

        def pullback(t: float) -> float:
            """Omega (u o f) against the source line element"""
            x = conic.point(t, branch)
            try:
                omega = f.conformal_factor(x)
            except PoleAt as exc:
                raise PoleOnCurve(str(exc)) from exc
            return omega * c * g(image(t))

        return image_curve, pullback

    def _integrate_image(
        self,
        integrand: Callable[[float], float],
        conic: Conic,
        poles: list[float],
        n: int,
        T: float,
        tol: float,
    ) -> float:
        if conic.is_circle:
            if not poles:
                return periodic_trapezoid(integrand, 0.0, 2.0 * math.pi, n)
            cuts = sorted(poles)
            arcs = list(zip(cuts, cuts[1:] + [cuts[0] + 2.0 * math.pi]))
        else:
            if not poles:
                h = 2.0 * T / n
                return trapezoid_samples([integrand(-T + k * h) for k in range(n + 1)], h)
            edges = [-T, *sorted(p for p in poles if -T < p < T), T]
            arcs = list(zip(edges[:-1], edges[1:]))
        pieces = [adaptive_gauss_kronrod(integrand, a, b, tol / len(arcs))[0] for a, b in arcs if b > a]
        return compensated_sum(pieces)

    def verify_conformal_invariance(
        self,
        u: Field4,
        f: ConformalMap,
        quadrature: Optional[QuadratureSpec] = None,
        source: Optional[ConjugateConicPair] = None,
    ) -> MeanValueReport:
        """Compare the integrals of u over f(S) and f(S-perp) for a source pair (default the standard pair).

        Two routes are computed per side: u on the image curve with its own
        line element, and Omega (u o f) on the source curve. route_gap is
        their largest relative difference.
        """
        q = quadrature or QuadratureSpec()
        source = source or standard_pair()
        n = q.circle_nodes if source.is_circle else q.hyperbola_nodes
        totals: dict[str, list[float]] = {}
        pole_count = 0
        try:
            for side in (Side.S, Side.SPERP):
                conic = source.conic(side)
                image_total, pullback_total = [], []
                for branch in conic.branches:
                    poles = self.find_poles(f, conic, branch, q.truncation)
                    pole_count += len(poles)
                    period = 2.0 * math.pi if conic.is_circle else None
                    image_curve, pullback = self._image_integrands(u, f, conic, branch, poles, period)
                    image_total.append(self._integrate_image(image_curve, conic, poles, n, q.truncation, q.gauss_kronrod_tolerance))
                    pullback_total.append(self._integrate_image(pullback, conic, poles, n, q.truncation, q.gauss_kronrod_tolerance))
                totals[side.value] = [compensated_sum(image_total), compensated_sum(pullback_total)]
        except VerifierError as e:
            logger.error(f"❌ Error verifying conformal invariance: {e}")
            raise

        s_image, s_pullback = totals[Side.S.value]
        sp_image, sp_pullback = totals[Side.SPERP.value]
        route_gap = max(relative_gap(s_image, s_pullback), relative_gap(sp_image, sp_pullback))
        descriptor = QuadratureDescriptor(
            rule="trapezoid" if pole_count == 0 else "gauss-kronrod-15",
            nodes=n,
            truncation=None if source.is_circle else q.truncation,
        )
        report = MeanValueReport.from_integrals(s_pullback, sp_pullback, descriptor, route_gap=route_gap)
        logger.info(f"✅ Conformal image gap {report.relative_gap:.3e}, route gap {route_gap:.3e}, {pole_count} poles")
        return report

    # -- curve dumps ---------------------------------------------------------

    def curve_samples(self, u: Field4, pair: ConjugateConicPair, samples: int = 256, T: Optional[float] = None) -> list[dict]:
        """Rows (side, branch, theta, x1..x4, integrand) for external plotting"""
        T = settings.hyperbola_truncation if T is None else T
        c = line_element_factor(pair)
        rows = []
        for side in (Side.S, Side.SPERP):
            conic = pair.conic(side)
            for branch in conic.branches:
                for k in range(samples):
                    if conic.is_circle:
                        t = 2.0 * math.pi * k / samples
                    else:
                        t = -T + 2.0 * T * k / (samples - 1)
                    x = conic.point(t, branch)
                    try:
                        value = float(u(x)) * c
                    except VerifierError:
                        value = math.nan
                    rows.append({
                        "side": side.value,
                        "branch": branch.value if branch else "",
                        "theta": t,
                        "x1": x[0], "x2": x[1], "x3": x[2], "x4": x[3],
                        "integrand": value,
                    })
        return rows


meanvalue_service = MeanValueService()
