"""Rank module for steerable ePCA.

Component-count selection: a permutation null for Cartesian data matrices
and the Marchenko-Pastur edge for whitened steerable blocks.
"""

from dataclasses import dataclass
import logging
import math

import numpy as np
from scipy.linalg import svdvals
from scipy.sparse.linalg import svds

from steerable_epca.classes.errors import InvalidArgumentError
from steerable_epca.estimator.shrinkage import mp_edge
from steerable_epca.helper.threads import map_on_threads
from steerable_epca.settings import DEFAULT_PERMUTATIONS, DEFAULT_RHO

logger = logging.getLogger(__name__)

MIN_PERMUTATIONS = 10
# Above this many rows and columns the top singular value comes from ARPACK.
DENSE_SVD_LIMIT = 256


@dataclass(frozen=True)
class RankEstimate:
    rank: int
    threshold: float
    rho: float
    n_permutations: int


def _top_singular_value(matrix: np.ndarray, rng: np.random.Generator) -> float:
    if min(matrix.shape) <= DENSE_SVD_LIMIT:
        return float(svdvals(matrix)[0])
    start = rng.standard_normal(min(matrix.shape))
    return float(svds(matrix, k=1, v0=start, return_singular_vectors=False)[0])


def permutation_rank(
    data: np.ndarray,
    rho: float = DEFAULT_RHO,
    n_perm: int = DEFAULT_PERMUTATIONS,
    seed: int | np.random.SeedSequence = 0,
    threads: int | None = None,
) -> RankEstimate:
    """Count singular values above the permutation null at confidence rho.

    Each replicate shuffles every column independently, which keeps the
    marginal distribution of each image and destroys pixel correlations.
    The threshold is the ceil((1 - rho) * (n_perm + 1))-th smallest of the
    replicates' top singular values (capped at the largest), so pure noise
    beats it with probability at most rho.
    """
    if int(n_perm) != n_perm or n_perm < MIN_PERMUTATIONS:
        raise InvalidArgumentError(
            f"n_perm must be an integer >= {MIN_PERMUTATIONS}, got {n_perm}"
        )
    if not 0 < rho <= 1:
        raise InvalidArgumentError(f"rho must lie in (0, 1], got {rho}")
    data = np.asarray(data, dtype=float)
    if data.ndim != 2:
        raise InvalidArgumentError(f"data must be a matrix, got shape {data.shape}")
    if data.size == 0 or not np.any(data):
        return RankEstimate(rank=0, threshold=0.0, rho=rho, n_permutations=int(n_perm))

    sequence = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    children = sequence.spawn(int(n_perm))

    def replicate(child):
        rng = np.random.default_rng(child)
        return _top_singular_value(rng.permuted(data, axis=0), rng)

    top_values = np.sort(map_on_threads(replicate, children, threads))
    order = min(max(math.ceil((1 - rho) * (n_perm + 1)), 1), int(n_perm))
    threshold = float(top_values[order - 1])
    singular_values = svdvals(data)
    rank = int(np.count_nonzero(singular_values > threshold))
    logger.debug(
        "Permutation rank %s (threshold %.4g over %s replicates)", rank, threshold, n_perm
    )
    return RankEstimate(
        rank=rank, threshold=threshold, rho=rho, n_permutations=int(n_perm)
    )


def mp_edge_rank(eigenvalues, gamma: float) -> int:
    """Number of eigenvalues strictly above (1 + sqrt(gamma))^2."""
    if not gamma > 0:
        raise InvalidArgumentError(f"gamma must be positive, got {gamma}")
    values = np.asarray(eigenvalues, dtype=float)
    return int(np.count_nonzero(values > mp_edge(gamma)))
