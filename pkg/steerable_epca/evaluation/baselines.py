"""Baseline estimators the steerable pipeline is compared against.

Every baseline returns its pixel-domain covariance estimate, its denoised
stack and its rank, so the comparison driver can score them uniformly.
"""

from dataclasses import dataclass
import logging

import numpy as np
from scipy.linalg import eigh, svd

from steerable_epca.basis.fourier_bessel import FbBasis
from steerable_epca.classes.covariance import BlockCovariance, RecolorMatrices
from steerable_epca.classes.errors import InvalidArgumentError
from steerable_epca.classes.imagestack import ImageStack
from steerable_epca.classes.sepcamodel import SepcaModel
from steerable_epca.denoise import (
    denoise_stack,
    eblp_denoise_cartesian,
    pca_project_denoise,
)
from steerable_epca.estimator import (
    block_covariance,
    covariance_kernel,
    center_zero_frequency,
    rotinv_mean,
    shrink_block,
)
from steerable_epca.estimator.shrinkage import cosine_sq, shrink_eigenvalue
from steerable_epca.rank import permutation_rank
from steerable_epca.settings import (
    DEFAULT_EPSILON,
    DEFAULT_PERMUTATIONS,
    DEFAULT_RHO,
    EPCA_MAX_SIDE,
)
from steerable_epca.transform import expand, grid_points

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BaselineResult:
    covariance: np.ndarray
    denoised: ImageStack
    rank: int


def sample_covariance(stack: ImageStack) -> tuple:
    """(mean vector, centered data, sample covariance) over flattened pixels."""
    data = stack.flattened()
    mean = data.mean(axis=1)
    centered = data - mean[:, None]
    return mean, centered, centered @ centered.T / stack.n


def run_raw(stack: ImageStack) -> BaselineResult:
    """Sample covariance of the counts; the counts are their own estimate."""
    _, _, covariance = sample_covariance(stack)
    rank = min(stack.image_size**2, max(stack.n - 1, 0))
    return BaselineResult(covariance=covariance, denoised=stack, rank=rank)


def run_pca(
    stack: ImageStack,
    rho: float = DEFAULT_RHO,
    n_perm: int = DEFAULT_PERMUTATIONS,
    seed=0,
    threads: int | None = None,
) -> BaselineResult:
    """Sample covariance truncated to the permutation rank, projection denoising."""
    _, centered, covariance = sample_covariance(stack)
    rank = permutation_rank(centered, rho, n_perm, seed, threads).rank
    values, vectors = eigh(covariance)
    top = vectors[:, ::-1][:, :rank]
    truncated = (top * values[::-1][:rank]) @ top.T
    return BaselineResult(
        covariance=truncated, denoised=pca_project_denoise(stack, rank), rank=rank
    )


def fit_spca(stack: ImageStack, basis: FbBasis, threads: int | None = None) -> SepcaModel:
    """Steerable PCA under white noise, sigma^2 the disk average of the mean."""
    mean = rotinv_mean(stack, basis)
    sigma_sq = float(mean.image[basis.grid.mask].mean())
    if sigma_sq <= 0:
        raise InvalidArgumentError("white-noise variance must be positive")
    coeffs = center_zero_frequency(expand(stack, basis, threads=threads))
    raw = block_covariance(coeffs)
    whitened = BlockCovariance.from_blocks(
        [block / sigma_sq for block in raw.blocks], raw.gammas
    )
    shrunken = shrink_block(whitened)
    final = BlockCovariance.from_blocks(
        [sigma_sq * block for block in shrunken.blocks], raw.gammas, shrunken.ranks
    )
    identity = tuple(np.eye(p) for p in basis.p_k)
    rm = RecolorMatrices(b=identity, d=tuple(sigma_sq * eye for eye in identity))
    return SepcaModel(
        basis=basis,
        mean=mean,
        recolor=rm,
        covariance=final,
        shrunken_ranks=shrunken.ranks,
        homogenized=False,
    )


def run_epca(
    stack: ImageStack,
    rho: float = DEFAULT_RHO,
    n_perm: int = DEFAULT_PERMUTATIONS,
    epsilon: float = DEFAULT_EPSILON,
    seed=0,
    threads: int | None = None,
) -> BaselineResult:
    """Cartesian ePCA: homogenize, shrink, recolor, scale, EBLP denoise."""
    if stack.image_size > EPCA_MAX_SIDE:
        raise InvalidArgumentError(
            f"Cartesian ePCA is limited to L <= {EPCA_MAX_SIDE}, got {stack.image_size}"
        )
    mean, centered, _ = sample_covariance(stack)
    positive = mean > 0
    scale = np.zeros_like(mean)
    scale[positive] = 1.0 / np.sqrt(mean[positive])
    whitened = centered * scale[:, None]
    active = int(positive.sum())
    gamma = active / stack.n

    rank = permutation_rank(whitened[positive], rho, n_perm, seed, threads).rank
    values, vectors = eigh(whitened @ whitened.T / stack.n)
    values = values[::-1][:rank]
    vectors = vectors[:, ::-1][:, :rank]
    ell = np.atleast_1d(shrink_eigenvalue(values, gamma)) if rank else np.zeros(0)
    kept = ell > 0
    ell = ell[kept]
    vectors = vectors[:, kept]

    root = np.sqrt(mean)
    if ell.size:
        recolored = (root[:, None] * vectors) * np.sqrt(ell)
        directions, singular, _ = svd(recolored, full_matrices=False)
        norm_sq = singular**2
    else:
        directions = np.zeros((mean.size, 0))
        norm_sq = np.zeros(0)

    cos = np.atleast_1d(cosine_sq(ell, gamma)) if ell.size else np.zeros(0)
    trace_ratio = mean.sum() / max(active, 1)
    alpha = np.zeros(ell.size)
    for i in range(ell.size):
        if cos[i] > 0 and norm_sq[i] > 0:
            tau = trace_ratio * ell[i] / norm_sq[i]
            alpha[i] = max((1 - (1 - cos[i]) * tau) / cos[i], 0.0)
    keep = alpha > 0
    covariance = (directions[:, keep] * (alpha[keep] * norm_sq[keep])) @ directions[:, keep].T
    denoised = eblp_denoise_cartesian(stack, covariance, mean, epsilon)
    return BaselineResult(covariance=covariance, denoised=denoised, rank=int(keep.sum()))


def run_spca(
    stack: ImageStack, basis: FbBasis, threads: int | None = None
) -> BaselineResult:
    """Steerable PCA scored in the pixel domain."""
    model = fit_spca(stack, basis, threads)
    covariance = covariance_kernel(
        model.covariance, basis, grid_points(stack.image_size)
    )
    return BaselineResult(
        covariance=covariance,
        denoised=denoise_stack(stack, model, threads),
        rank=model.covariance.total_rank,
    )
