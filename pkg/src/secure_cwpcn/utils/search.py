"""
One-dimensional search helpers.

Both helpers start from a coarse uniform grid so that neither relies on the
searched function being unimodal. ``maximize_bounded`` then refines the best
grid point with scipy's bounded scalar minimizer inside the neighbouring
bracket; ``upper_boundary`` brackets the last sign change and hands it to
``brentq``.
"""

from typing import Callable, Optional, Tuple

import numpy as np
from scipy.optimize import brentq, minimize_scalar

VectorFunction = Callable[[np.ndarray], np.ndarray]


def maximize_bounded(
    fun: VectorFunction,
    lower: float,
    upper: float,
    grid_points: int = 100,
    tol: float = 1e-6,
) -> Tuple[float, float]:
    """
    Maximize a scalar function over [lower, upper].

    Args:
        fun: Vectorized function, maps an array of points to an array of values
        lower: Left end of the interval
        upper: Right end of the interval
        grid_points: Size of the seeding grid
        tol: Absolute tolerance of the refinement in x

    Returns:
        Tuple of (argmax, max value)
    """
    if upper <= lower:
        return lower, float(fun(np.asarray(lower)))

    grid = np.linspace(lower, upper, grid_points)
    values = np.asarray(fun(grid), dtype=float)
    best = int(np.argmax(values))
    x_best, f_best = float(grid[best]), float(values[best])

    left = grid[max(best - 1, 0)]
    right = grid[min(best + 1, grid_points - 1)]
    result = minimize_scalar(
        lambda x: -float(fun(np.asarray(x))),
        bounds=(left, right),
        method="bounded",
        options={"xatol": tol},
    )
    if result.success and -result.fun > f_best:
        return float(result.x), float(-result.fun)
    return x_best, f_best


def upper_boundary(
    fun: VectorFunction,
    lower: float,
    upper: float,
    grid_points: int = 100,
    xtol: float = 1e-14,
) -> Optional[Tuple[float, float]]:
    """
    Locate the largest x in [lower, upper] with ``fun(x) >= 0``.

    Returns:
        ``None`` if no grid point is nonnegative; otherwise a pair
        ``(safe, root)`` where ``safe`` is a grid point known to satisfy the
        condition and ``root`` the refined crossing just past it. Both equal
        ``upper`` when the condition holds at the right end.
    """
    grid = np.linspace(lower, upper, grid_points) if upper > lower else np.array([lower])
    values = np.asarray(fun(grid), dtype=float)
    nonnegative = np.flatnonzero(values >= 0)
    if nonnegative.size == 0:
        return None

    last = int(nonnegative[-1])
    if last == grid.size - 1:
        return float(grid[-1]), float(grid[-1])

    root = brentq(
        lambda x: float(fun(np.asarray(x))), grid[last], grid[last + 1], xtol=xtol
    )
    return float(grid[last]), float(root)
