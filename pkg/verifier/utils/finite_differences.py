"""
Finite-difference stencils shared by the residual checkers, the plane
tangents and the conformality oracle.
"""
from typing import Callable, Optional, Sequence

import numpy as np

from ..config import settings

# signs of the ultra-hyperbolic operator d11 + d22 - d33 - d44
ULTRAHYPERBOLIC_SIGNS = (1.0, 1.0, -1.0, -1.0)


def coordinate_steps(x: Sequence[float], relative_step: Optional[float] = None) -> np.ndarray:
    """Per-coordinate steps h_i = rel * max(1, |x_i|)"""
    rel = settings.fd_relative_step if relative_step is None else relative_step
    x = np.asarray(x, dtype=float)
    return rel * np.maximum(1.0, np.abs(x))


def second_partial(f: Callable[[np.ndarray], float], x: np.ndarray, i: int, j: int, steps: np.ndarray) -> float:
    """Second-order central estimate of d^2 f / dx_i dx_j"""
    x = np.asarray(x, dtype=float)
    hi, hj = steps[i], steps[j]
    ei = np.zeros_like(x)
    ei[i] = hi
    if i == j:
        return (f(x + ei) - 2.0 * f(x) + f(x - ei)) / (hi * hi)
    ej = np.zeros_like(x)
    ej[j] = hj
    return (f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)) / (4.0 * hi * hj)


def ultrahyperbolic(f: Callable[[np.ndarray], float], p: np.ndarray, steps: np.ndarray) -> tuple[float, float]:
    """Nine-point estimate of the ultra-hyperbolic operator at p.

    Returns:
        (value, scale) where scale is the largest |d_ii f| on the stencil,
        used by callers to normalize residuals.
    """
    p = np.asarray(p, dtype=float)
    f0 = f(p)
    value, scale = 0.0, 0.0
    for i, sign in enumerate(ULTRAHYPERBOLIC_SIGNS):
        e = np.zeros(4)
        e[i] = steps[i]
        d2 = (f(p + e) - 2.0 * f0 + f(p - e)) / (steps[i] * steps[i])
        value += sign * d2
        scale = max(scale, abs(d2))
    return value, scale


def jacobian(F: Callable[[np.ndarray], np.ndarray], x: np.ndarray, steps: np.ndarray) -> np.ndarray:
    """Fourth-order central Jacobian of a vector map; columns are d F / d x_j"""
    x = np.asarray(x, dtype=float)
    columns = []
    for j in range(len(x)):
        unit = np.zeros_like(x)
        unit[j] = 1.0

        def along(t: float, unit: np.ndarray = unit) -> np.ndarray:
            return np.asarray(F(x + t * unit), dtype=float)

        columns.append(derivative5(along, 0.0, steps[j]))
    return np.column_stack(columns)


def derivative5(g: Callable[[float], np.ndarray], t: float, h: float) -> np.ndarray:
    """Five-point first derivative of a scalar or vector valued curve"""
    return (-g(t + 2 * h) + 8.0 * g(t + h) - 8.0 * g(t - h) + g(t - 2 * h)) / (12.0 * h)


def forward_derivative5(g: Callable[[float], np.ndarray], t: float, h: float) -> np.ndarray:
    """Fourth-order one-sided first derivative; samples only t, t + h, ..., t + 4h"""
    return (
        -25.0 * g(t) + 48.0 * g(t + h) - 36.0 * g(t + 2 * h) + 16.0 * g(t + 3 * h) - 3.0 * g(t + 4 * h)
    ) / (12.0 * h)
