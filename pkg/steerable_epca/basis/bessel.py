"""Bessel functions of the first kind, their roots, and Gauss-Legendre rules.

Everything here is a pure function of its arguments. Root tables are built
once per threshold and cached as read-only arrays so they can be shared by
any number of workers.
"""

from dataclasses import dataclass
from functools import lru_cache
import logging
import math

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import brentq
from scipy.special import jv

from steerable_epca.classes.errors import InvalidArgumentError

logger = logging.getLogger(__name__)

ROOT_TOLERANCE = 1e-12
# Consecutive roots of J_k are more than pi apart, so a quarter of pi never
# steps over a pair of sign changes.
SCAN_STEP = min(1.0, math.pi / 4)


@dataclass(frozen=True)
class BesselRootTable:
    """Ascending positive roots of J_k for k = 0..max_order up to a threshold."""

    max_order: int
    roots: tuple
    threshold: float

    def count(self, order: int) -> int:
        """Number of roots of J_order at or below the threshold."""
        if order > self.max_order:
            return 0
        return len(self.roots[order])


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Legendre nodes and weights on the interval (a, b)."""

    nodes: np.ndarray
    weights: np.ndarray
    interval: tuple

    def integrate(self, values) -> float:
        """Apply the rule to function values sampled at the nodes."""
        return float(np.dot(self.weights, values))


def _readonly(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


def bessel_j(order: int, x):
    """Evaluate J_order(x) for a non-negative integer order.

    Accepts a scalar or an array for ``x``; a scalar returns a float.
    """
    if int(order) != order or order < 0:
        raise InvalidArgumentError(f"order must be a non-negative integer, got {order}")
    values = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(values)):
        raise InvalidArgumentError("x must be finite")
    result = jv(int(order), values)
    if result.ndim == 0:
        return float(result)
    return result


def bessel_roots(order: int, upper_bound: float) -> np.ndarray:
    """Return all roots of J_order in (0, upper_bound], ascending.

    Sign changes are located on a grid of step ``SCAN_STEP`` and each bracket
    is refined with Brent's method to ``ROOT_TOLERANCE``.
    """
    if int(order) != order or order < 0:
        raise InvalidArgumentError(f"order must be a non-negative integer, got {order}")
    if not math.isfinite(upper_bound):
        raise InvalidArgumentError("upper_bound must be finite")
    order = int(order)
    # J_k has no root below k for k >= 1, and J_k(k) > 0.
    start = float(order)
    if upper_bound <= start:
        return _readonly(np.zeros(0))

    grid = np.arange(start, upper_bound, SCAN_STEP)
    grid = np.append(grid, upper_bound)
    values = jv(order, grid)

    roots = []
    if values[0] == 0.0 and grid[0] > 0.0:
        roots.append(grid[0])
    for left, right, f_left, f_right in zip(
        grid[:-1], grid[1:], values[:-1], values[1:]
    ):
        if f_right == 0.0:
            roots.append(float(right))
        elif f_left * f_right < 0.0:
            roots.append(
                brentq(
                    lambda t: jv(order, t),
                    left,
                    right,
                    xtol=ROOT_TOLERANCE,
                    rtol=4 * np.finfo(float).eps,
                )
            )
    return _readonly(np.asarray(roots, dtype=float))


@lru_cache(maxsize=32)
def root_table(threshold: float) -> BesselRootTable:
    """Build (or fetch from cache) the root table for a threshold.

    Orders are enumerated from 0 upwards until J_k has no root at or below
    the threshold.
    """
    if not threshold > 0:
        raise InvalidArgumentError(f"threshold must be positive, got {threshold}")
    roots = []
    order = 0
    while True:
        order_roots = bessel_roots(order, threshold)
        if len(order_roots) == 0:
            break
        roots.append(order_roots)
        order += 1
    logger.debug(
        "Root table for threshold %.4f: orders 0..%s", threshold, len(roots) - 1
    )
    return BesselRootTable(
        max_order=len(roots) - 1, roots=tuple(roots), threshold=threshold
    )


def gauss_legendre(n_points: int, a: float, b: float) -> QuadratureRule:
    """Gauss-Legendre rule with ``n_points`` nodes mapped onto [a, b]."""
    if int(n_points) != n_points or n_points < 1:
        raise InvalidArgumentError(f"n_points must be a positive integer, got {n_points}")
    if not a < b:
        raise InvalidArgumentError(f"interval must satisfy a < b, got ({a}, {b})")
    nodes, weights = leggauss(int(n_points))
    half = 0.5 * (b - a)
    mapped = half * nodes + 0.5 * (a + b)
    return QuadratureRule(
        nodes=_readonly(mapped),
        weights=_readonly(half * weights),
        interval=(float(a), float(b)),
    )
