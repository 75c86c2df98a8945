"""Spiked-model maps: spike forward map, eigenvalue shrinker and cosine map.

All three accept scalars or arrays; a scalar argument returns a float.
"""

import numpy as np

from steerable_epca.classes.errors import InvalidArgumentError


def _check(ell_or_lambda, gamma):
    values = np.asarray(ell_or_lambda, dtype=float)
    if np.any(gamma <= 0) or not np.all(np.isfinite(gamma)):
        raise InvalidArgumentError(f"gamma must be positive, got {gamma}")
    if not np.all(np.isfinite(values)):
        raise InvalidArgumentError("eigenvalues must be finite")
    return values, np.asarray(gamma, dtype=float)


def _as_output(values: np.ndarray):
    return float(values) if values.ndim == 0 else values


def mp_edge(gamma) -> float:
    """Right edge (1 + sqrt(gamma))^2 of the Marchenko-Pastur bulk."""
    return (1 + np.sqrt(gamma)) ** 2


def spike_forward(ell, gamma):
    """Limiting sample eigenvalue of a population spike ell."""
    ell, gamma = _check(ell, gamma)
    above = ell > np.sqrt(gamma)
    safe = np.where(above, ell, 1.0)
    values = np.where(above, (1 + safe) * (1 + gamma / safe), mp_edge(gamma))
    return _as_output(values)


def shrink_eigenvalue(lam, gamma):
    """Invert the spike forward map above the bulk edge, 0 at or below it."""
    lam, gamma = _check(lam, gamma)
    above = lam > mp_edge(gamma)
    shifted = lam - 1 - gamma
    discriminant = np.where(above, shifted**2 - 4 * gamma, 0.0)
    values = np.where(above, 0.5 * (shifted + np.sqrt(np.maximum(discriminant, 0.0))), 0.0)
    return _as_output(values)


def cosine_sq(ell, gamma):
    """Limiting squared cosine between sample and population eigenvectors."""
    ell, gamma = _check(ell, gamma)
    above = ell > np.sqrt(gamma)
    safe = np.where(above, ell, 1.0)
    values = np.where(above, (1 - gamma / safe**2) / (1 + gamma / safe), 0.0)
    return _as_output(values)
