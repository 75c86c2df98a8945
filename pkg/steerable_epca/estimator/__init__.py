"""Estimator module for steerable ePCA.

Rotationally invariant mean, homogenization, per-frequency sample covariance,
eigenvalue shrinkage, recoloring, scaling and the covariance kernel.
"""

import logging
import math

import numpy as np

from steerable_epca.basis.fourier_bessel import BasisParams, FbBasis, build_basis
from steerable_epca.classes.coeffblocks import CoeffBlocks
from steerable_epca.classes.covariance import (
    BlockCovariance,
    RecolorMatrices,
    RotInvMean,
    ShrinkageComponents,
)
from steerable_epca.classes.errors import DegenerateInputError, InvalidArgumentError
from steerable_epca.classes.imagestack import ImageStack
from steerable_epca.classes.sepcamodel import SepcaModel
from steerable_epca.estimator.shrinkage import (
    cosine_sq,
    mp_edge,
    shrink_eigenvalue,
    spike_forward,
)
from steerable_epca.transform import (
    estimate_band_limit,
    estimate_support_radius,
    expand,
)

logger = logging.getLogger(__name__)

# fewer images than this leave nothing to compare against the bulk edge
MIN_IMAGES = 2

__all__ = [
    "block_covariance",
    "center_zero_frequency",
    "cosine_sq",
    "covariance_kernel",
    "fit_sepca",
    "homogenize",
    "mp_edge",
    "recolor_block",
    "recolor_matrices",
    "resolve_geometry",
    "rotinv_mean",
    "scale_block",
    "shrink_block",
    "shrink_eigenvalue",
    "shrinkage_components",
    "spike_forward",
]


def mean_from_coeffs(coeffs: np.ndarray, basis: FbBasis) -> RotInvMean:
    """Radial profile of k = 0 coefficients, clamped at zero."""
    coeffs = np.real(np.asarray(coeffs)).astype(float)
    node_profile = np.clip(coeffs @ basis.real_profiles[0], 0.0, None)
    side = basis.params.image_size
    image = np.zeros((side, side))
    image[basis.grid.mask] = np.clip(coeffs @ basis.grid_profiles[0], 0.0, None)
    return RotInvMean(coeffs=coeffs, node_profile=node_profile, image=image)


def rotinv_mean(stack: ImageStack, basis: FbBasis) -> RotInvMean:
    """k = 0 expansion of the sample mean and its non-negative radial profile."""
    if stack.n < 1:
        raise InvalidArgumentError("the rotationally invariant mean needs at least one image")
    mean_stack = ImageStack(stack.mean_image()[None], kind="intensity")
    coeffs = expand(mean_stack, basis, threads=1).blocks[0][:, 0].real
    return mean_from_coeffs(coeffs, basis)


def homogenize(stack: ImageStack, mean: RotInvMean) -> ImageStack:
    """Z = Y / sqrt(f) where f > 0 and 0 elsewhere."""
    profile = mean.image
    if profile.shape != stack.pixels.shape[1:]:
        raise InvalidArgumentError(
            f"mean image {profile.shape} does not match the stack {stack.pixels.shape[1:]}"
        )
    positive = profile > 0
    if not np.any(positive):
        raise DegenerateInputError("the rotationally invariant mean is identically zero")
    scale = np.zeros_like(profile)
    scale[positive] = 1.0 / np.sqrt(profile[positive])
    return ImageStack(stack.pixels * scale[None], kind="intensity")


def center_zero_frequency(coeffs: CoeffBlocks) -> CoeffBlocks:
    """Subtract the sample mean from the k = 0 block only."""
    blocks = list(coeffs.blocks)
    zero = blocks[0]
    blocks[0] = zero - zero.mean(axis=1, keepdims=True)
    return coeffs.with_blocks(blocks)


def block_covariance(
    coeffs: CoeffBlocks, include_reflections: bool = True
) -> BlockCovariance:
    """S^(k) = Re(A A*) / n with reflections, A A* / n without."""
    n = coeffs.n
    if n < 1:
        raise InvalidArgumentError("covariance estimation needs at least one image")
    blocks = []
    gammas = []
    for k, block in enumerate(coeffs.blocks):
        gram = block @ block.conj().T / n
        if include_reflections or k == 0:
            gram = gram.real
        blocks.append(gram)
        p_k = block.shape[0]
        if k == 0 or not include_reflections:
            gammas.append(p_k / n)
        else:
            gammas.append(p_k / (2 * n))
    return BlockCovariance.from_blocks(blocks, gammas)


def shrink_block(cov: BlockCovariance) -> BlockCovariance:
    """Replace every eigenvalue by its shrunken value; r_k counts the survivors."""
    blocks = []
    values = []
    ranks = []
    for lam, vectors, gamma in zip(cov.eigenvalues, cov.eigenvectors, cov.gammas):
        shrunk = np.atleast_1d(shrink_eigenvalue(lam, gamma)) if lam.size else lam
        rank = int(np.count_nonzero(shrunk > 0))
        kept = vectors[:, :rank]
        blocks.append((kept * shrunk[:rank]) @ kept.conj().T)
        values.append(shrunk)
        ranks.append(rank)
    logger.info("Ranks above the bulk edge per k: %s", ranks)
    return BlockCovariance(
        blocks=tuple(blocks),
        eigenvalues=tuple(values),
        eigenvectors=cov.eigenvectors,
        gammas=cov.gammas,
        ranks=tuple(ranks),
    )


def _discard_components(cov: BlockCovariance) -> BlockCovariance:
    return BlockCovariance(
        blocks=tuple(np.zeros_like(block) for block in cov.blocks),
        eigenvalues=tuple(np.zeros_like(values) for values in cov.eigenvalues),
        eigenvectors=cov.eigenvectors,
        gammas=cov.gammas,
        ranks=(0,) * len(cov.blocks),
    )


def shrinkage_components(shrunken: BlockCovariance) -> ShrinkageComponents:
    """Shrunken eigenvalues of the retained components and their cosine maps."""
    ell = []
    cos = []
    sin = []
    for values, gamma, rank in zip(
        shrunken.eigenvalues, shrunken.gammas, shrunken.ranks
    ):
        kept = values[:rank]
        squared = np.atleast_1d(cosine_sq(kept, gamma)) if rank else np.zeros(0)
        ell.append(kept)
        cos.append(squared)
        sin.append(1.0 - squared)
    return ShrinkageComponents(ell=tuple(ell), cos_sq=tuple(cos), sin_sq=tuple(sin))


def recolor_matrices(mean: RotInvMean, basis: FbBasis) -> RecolorMatrices:
    """B^(k) and D^(k) by radial quadrature against sqrt(f) and f."""
    rule = basis.real_rule
    weights = 2 * math.pi * rule.nodes * rule.weights
    root = np.sqrt(mean.node_profile) * weights
    full = mean.node_profile * weights
    b_blocks = []
    d_blocks = []
    for profiles in basis.real_profiles:
        b_blocks.append((profiles * root) @ profiles.T)
        d_blocks.append((profiles * full) @ profiles.T)
    return RecolorMatrices(b=tuple(b_blocks), d=tuple(d_blocks))


def recolor_block(shrunken: BlockCovariance, rm: RecolorMatrices) -> BlockCovariance:
    """S_he^(k) = B^(k)* S^(k) B^(k), with the shrunken ranks carried over."""
    blocks = [b.conj().T @ block @ b for block, b in zip(shrunken.blocks, rm.b)]
    return BlockCovariance.from_blocks(blocks, shrunken.gammas, shrunken.ranks)


def scale_block(
    recolored: BlockCovariance,
    rm: RecolorMatrices,
    components: ShrinkageComponents,
) -> tuple:
    """Final S_s^(k) = sum of alpha v v* over components with alpha > 0.

    The i-th recolored eigenvector, carrying its eigenvalue t as squared
    norm, is paired with the i-th shrunken eigenvalue. Returns the final
    blocks and the per-k scaling factors of the kept components.
    """
    blocks = []
    ranks = []
    alphas = []
    for k, (values, vectors, d) in enumerate(
        zip(recolored.eigenvalues, recolored.eigenvectors, rm.d)
    ):
        ell = components.ell[k]
        cos = components.cos_sq[k]
        sin = components.sin_sq[k]
        count = len(ell)
        p_k = d.shape[0]
        norm_sq = values[:count]
        alpha = np.zeros(count)
        for i in range(count):
            if cos[i] <= 0 or norm_sq[i] <= 0:
                continue
            tau = (np.trace(d) / p_k) * (ell[i] / norm_sq[i])
            alpha[i] = max((1.0 - sin[i] * tau) / cos[i], 0.0)
        kept = alpha > 0
        dropped = count - int(kept.sum())
        if dropped:
            logger.info("Dropped %s component(s) with non-positive scaling at k=%s", dropped, k)
        scaled = vectors[:, :count][:, kept]
        blocks.append((scaled * (alpha[kept] * norm_sq[kept])) @ scaled.conj().T)
        ranks.append(int(kept.sum()))
        alphas.append(alpha[kept])
    final = BlockCovariance.from_blocks(blocks, recolored.gammas, ranks)
    return final, tuple(alphas)


def covariance_kernel(
    final: BlockCovariance, basis: FbBasis, points, other_points=None
) -> np.ndarray:
    """Covariance between Cartesian points: G0 S0 G0* + 2 Re sum_k Gk Sk Gk*."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    other = points if other_points is None else np.atleast_2d(np.asarray(other_points, dtype=float))
    kernel = np.zeros((points.shape[0], other.shape[0]))
    for k, block in enumerate(final.blocks):
        if block.shape[0] == 0:
            continue
        left = basis.point_functions(k, points)
        right = basis.point_functions(k, other)
        term = (left @ block @ right.conj().T).real
        kernel += term if k == 0 else 2 * term
    return kernel


def _ring_average(image: np.ndarray, support_radius: int) -> np.ndarray:
    """Rotational average of an image over unit-width rings inside the disk."""
    side = image.shape[0]
    coords = np.arange(side) - side // 2
    x, y = np.meshgrid(coords, coords, indexing="ij")
    radii = np.hypot(x, y)
    rings = np.rint(radii).astype(int)
    inside = radii < support_radius
    sums = np.bincount(rings[inside], weights=image[inside])
    counts = np.bincount(rings[inside])
    averages = np.where(counts > 0, sums / np.maximum(counts, 1), 0.0)
    ring_image = np.zeros_like(image)
    ring_image[inside] = averages[rings[inside]]
    return np.clip(ring_image, 0.0, None)


def _pilot_whiten(stack: ImageStack, support_radius: int) -> tuple:
    """Counts scaled by the ring-averaged mean, and the number of scaled pixels."""
    pilot = _ring_average(stack.mean_image(), support_radius)
    positive = pilot > 0
    if not np.any(positive):
        raise DegenerateInputError("the mean image is identically zero inside the support")
    scale = np.zeros_like(pilot)
    scale[positive] = 1.0 / np.sqrt(pilot[positive])
    whitened = ImageStack(stack.pixels * scale[None], kind="intensity")
    return whitened, int(np.count_nonzero(positive))


def resolve_geometry(
    stack: ImageStack,
    support_radius: int | None = None,
    band_limit: float | None = None,
) -> tuple:
    """(R, c, warnings) with the missing values estimated from the stack."""
    warnings = []
    if support_radius is None:
        support_radius = estimate_support_radius(stack)
    if band_limit is None:
        whitened, noise_pixels = _pilot_whiten(stack, support_radius)
        estimate = estimate_band_limit(
            whitened, support_radius=support_radius, noise_pixels=noise_pixels
        )
        band_limit = estimate.band_limit
        if estimate.flat_spectrum:
            warnings.append("flat_spectrum")
    return support_radius, band_limit, tuple(warnings)


def fit_sepca(
    stack: ImageStack,
    support_radius: int | None = None,
    band_limit: float | None = None,
    include_reflections: bool = True,
    threads: int | None = None,
) -> SepcaModel:
    """Estimate mean, recoloring matrices and the final block covariance."""
    support_radius, band_limit, warnings = resolve_geometry(
        stack, support_radius, band_limit
    )
    basis = build_basis(BasisParams(band_limit, support_radius, stack.image_size))
    mean = rotinv_mean(stack, basis)
    whitened = homogenize(stack, mean)
    coeffs = center_zero_frequency(expand(whitened, basis, threads=threads))
    cov = block_covariance(coeffs, include_reflections)
    if stack.n < MIN_IMAGES:
        logger.warning("A single image has no spread about the mean; keeping no components")
        shrunken = _discard_components(cov)
    else:
        shrunken = shrink_block(cov)
    rm = recolor_matrices(mean, basis)
    recolored = recolor_block(shrunken, rm)
    final, alphas = scale_block(recolored, rm, shrinkage_components(shrunken))
    logger.info(
        "Fitted model on %s images: R=%s c=%.4f ranks=%s total=%s",
        stack.n,
        support_radius,
        band_limit,
        list(final.ranks),
        final.total_rank,
    )
    return SepcaModel(
        basis=basis,
        mean=mean,
        recolor=rm,
        covariance=final,
        shrunken_ranks=shrunken.ranks,
        alphas=alphas,
        include_reflections=include_reflections,
        warnings=warnings,
    )
