"""
Quadrature rules: periodic trapezoid, adaptive Simpson with point reuse and
adaptive Gauss-Kronrod with interior-only nodes.

All accumulations go through math.fsum in a fixed left-to-right order so
repeated runs produce identical bits.
"""
import math
from typing import Callable, Iterable, Optional, Sequence

from ..config import settings
from ..errors import NonConvergent

# (node, Gauss-7 weight, Kronrod-15 weight)
GAUSS_KRONROD_15 = (
    (0.991455371120812639, 0.0, 0.022935322010529225),
    (0.949107912342758525, 0.129484966168869693, 0.063092092629978553),
    (0.864864423359769073, 0.0, 0.104790010322250184),
    (0.741531185599394440, 0.279705391489276668, 0.140653259715525919),
    (0.586087235467691130, 0.0, 0.169004726639267903),
    (0.405845151377397167, 0.381830050505118945, 0.190350578064785410),
    (0.207784955007898468, 0.0, 0.204432940075298892),
    (0.0, 0.417959183673469388, 0.209482141084727828),
)


def compensated_sum(values: Iterable[float]) -> float:
    return math.fsum(values)


def periodic_trapezoid(f: Callable[[float], float], start: float, period: float, nodes: int) -> float:
    """Composite trapezoid over one period; spectrally accurate for smooth periodic f"""
    if nodes < 1:
        raise ValueError("Trapezoid rule needs at least one node")
    h = period / nodes
    return h * compensated_sum(f(start + k * h) for k in range(nodes))


def trapezoid_samples(values: Sequence[float], h: float) -> float:
    """Trapezoid rule on equally spaced samples (endpoints included)"""
    if len(values) < 2:
        return 0.0
    return h * compensated_sum([0.5 * values[0], *values[1:-1], 0.5 * values[-1]])


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float,
    max_depth: Optional[int] = None,
) -> tuple[float, float]:
    """Adaptive Simpson on [a, b] with five-point panels and Richardson correction.

    Each panel compares the 3-point and 5-point Simpson estimates; panels
    whose difference exceeds their share of the tolerance are halved, reusing
    the three already evaluated points.

    Args:
        f: integrand
        a, b: interval, a <= b
        tol: absolute error target for the whole interval
        max_depth: bisection limit (defaults to settings.xray_max_depth)

    Returns:
        (integral, error estimate)

    Raises:
        NonConvergent: if a panel still misses its tolerance at max_depth
    """
    max_depth = settings.xray_max_depth if max_depth is None else max_depth
    if a == b:
        return 0.0, 0.0

    ya, ym, yb = f(a), f(0.5 * (a + b)), f(b)
    pieces: list[float] = []
    errors: list[float] = []
    # explicit stack keeps left-to-right order; entries carry cached samples
    stack = [(a, b, ya, ym, yb, tol, 0)]
    while stack:
        lo, hi, y0, y2, y4, panel_tol, depth = stack.pop()
        width = hi - lo
        y1 = f(lo + 0.25 * width)
        y3 = f(lo + 0.75 * width)
        coarse = (y0 + 4.0 * y2 + y4) * width / 6.0
        fine = (y0 + 4.0 * y1 + 2.0 * y2 + 4.0 * y3 + y4) * width / 12.0
        err = abs(fine - coarse)
        if err <= panel_tol:
            pieces.append((16.0 * fine - coarse) / 15.0)
            errors.append(err)
            continue
        if depth >= max_depth:
            raise NonConvergent(
                f"Adaptive Simpson stalled on [{lo:.6g}, {hi:.6g}] with error {err:.3e} > {panel_tol:.3e}"
            )
        mid = 0.5 * (lo + hi)
        # right half pushed first so the left half is finished first
        stack.append((mid, hi, y2, y3, y4, 0.5 * panel_tol, depth + 1))
        stack.append((lo, mid, y0, y1, y2, 0.5 * panel_tol, depth + 1))

    return compensated_sum(pieces), compensated_sum(errors)


def gauss_kronrod_panel(f: Callable[[float], float], a: float, b: float) -> tuple[float, float]:
    """Kronrod-15 estimate on [a, b] and its distance from the embedded Gauss-7"""
    half = 0.5 * (b - a)
    center = 0.5 * (a + b)
    gauss, kronrod = [], []
    for node, wg, wk in GAUSS_KRONROD_15:
        if node == 0.0:
            y = f(center)
            gauss.append(wg * y)
            kronrod.append(wk * y)
            continue
        y = f(center - half * node) + f(center + half * node)
        gauss.append(wg * y)
        kronrod.append(wk * y)
    k = compensated_sum(kronrod) * half
    g = compensated_sum(gauss) * half
    return k, abs(k - g)


def adaptive_gauss_kronrod(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float,
    limit: int = 4000,
    initial_panels: int = 8,
) -> tuple[float, float]:
    """Globally adaptive Gauss-Kronrod on [a, b].

    Nodes never touch the endpoints, so f may be undefined (a pole) at a or b
    as long as it stays integrable. The panel with the largest error estimate
    is bisected until the summed estimate falls under tol.

    Raises:
        NonConvergent: if the panel count reaches limit first
    """
    if a == b:
        return 0.0, 0.0
    edges = [a + (b - a) * i / initial_panels for i in range(initial_panels + 1)]
    panels = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        value, err = gauss_kronrod_panel(f, lo, hi)
        panels.append([lo, hi, value, err])

    while True:
        total_err = compensated_sum(p[3] for p in panels)
        if total_err <= tol:
            break
        if len(panels) >= limit:
            raise NonConvergent(f"Gauss-Kronrod reached {limit} panels with error {total_err:.3e} > {tol:.3e}")
        worst = max(range(len(panels)), key=lambda i: panels[i][3])
        lo, hi, _, _ = panels[worst]
        mid = 0.5 * (lo + hi)
        left = gauss_kronrod_panel(f, lo, mid)
        right = gauss_kronrod_panel(f, mid, hi)
        panels[worst:worst + 1] = [[lo, mid, *left], [mid, hi, *right]]

    return compensated_sum(p[2] for p in panels), compensated_sum(p[3] for p in panels)
