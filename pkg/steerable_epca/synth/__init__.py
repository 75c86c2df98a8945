"""Synth module for steerable ePCA.

Synthetic data with known ground truth: clean images drawn as random
combinations of basis functions around a circular mean, uniformly rotated,
then observed through Poisson photon counting.
"""

import logging
import math

import numpy as np

from steerable_epca.basis.fourier_bessel import BasisParams, FbBasis, build_basis
from steerable_epca.classes.coeffblocks import CoeffBlocks
from steerable_epca.classes.covariance import BlockCovariance
from steerable_epca.classes.errors import GroundTruthError, InvalidArgumentError
from steerable_epca.classes.groundtruth import GroundTruthModel
from steerable_epca.classes.imagestack import ImageStack
from steerable_epca.estimator import covariance_kernel
from steerable_epca.settings import PRESETS
from steerable_epca.transform import expand, grid_points, reconstruct

logger = logging.getLogger(__name__)

MAX_CLIP_RATE = 0.01
PILOT_SIZE = 2000
# pixel std over mean inside 0.8 R, and on the rim between 0.8 R and R; a
# Gaussian pixel at 0.7 loses under 2.5% of its mass to clipping
SIGNAL_RATIO = 0.5
RIM_RATIO = 0.7
RIM_FRACTION = 0.8
# rim pixels dimmer than this share of the peak mean are not constrained
RIM_FLOOR = 0.01
MEAN_WIDTH = 2.5
# eigenvectors live on the lowest radial indices only
LOW_Q_SPAN = 3
EIGENVALUE_DECAY = 0.8


def _blob_coeffs(basis: FbBasis) -> np.ndarray:
    """k = 0 coefficients of a centered Gaussian blob of width R / MEAN_WIDTH."""
    side = basis.params.image_size
    coords = np.arange(side) - side // 2
    x, y = np.meshgrid(coords, coords, indexing="ij")
    width = basis.params.support_radius / MEAN_WIDTH
    blob = np.exp(-(x**2 + y**2) / (2 * width**2))
    return expand(ImageStack(blob[None]), basis, threads=1).blocks[0][:, 0].real


def _signal_blocks(basis: FbBasis, ranks: dict, rng: np.random.Generator) -> list:
    """Unit-scale PSD blocks with orthonormal low-q eigenvectors."""
    blocks = [np.zeros((p, p)) for p in basis.p_k]
    component = 0
    for k in sorted(ranks):
        rank = ranks[k]
        if k > basis.k_max or rank == 0:
            continue
        p_k = basis.p_k[k]
        span = min(p_k, max(rank, LOW_Q_SPAN))
        if rank > span:
            raise InvalidArgumentError(
                f"rank {rank} at k={k} exceeds the {p_k} radial functions available"
            )
        raw = rng.standard_normal((span, rank))
        vectors, _ = np.linalg.qr(raw)
        values = EIGENVALUE_DECAY ** np.arange(component, component + rank)
        component += rank
        block = np.zeros((p_k, p_k))
        block[:span, :span] = (vectors * values) @ vectors.T
        blocks[k] = block
    return blocks


def _pixel_variance(basis: FbBasis, blocks) -> np.ndarray:
    """Diagonal of the clean covariance on the disk pixels."""
    variance = np.zeros(basis.grid.n_pixels)
    for k, block in enumerate(blocks):
        if not np.any(block):
            continue
        functions = basis.grid_functions(k)
        term = np.real(np.einsum("iq,qr,ir->i", functions, block, functions.conj()))
        variance += term if k == 0 else 2 * term
    return variance


def _signal_scale(basis: FbBasis, mean_disk: np.ndarray, blocks) -> float:
    """Largest factor on Sigma keeping pixel std / mean within the ratios."""
    std = np.sqrt(np.maximum(_pixel_variance(basis, blocks), 0.0))
    if not np.any(std > 0):
        return 1.0
    radii = basis.grid.radii
    inner = radii <= RIM_FRACTION * basis.params.support_radius
    rim = ~inner & (mean_disk > RIM_FLOOR * mean_disk.max())
    limits = []
    for region, ratio in ((inner, SIGNAL_RATIO), (rim, RIM_RATIO)):
        active = region & (std > 0)
        if np.any(active):
            limits.append(np.min(ratio * mean_disk[active] / std[active]))
    return float(min(limits)) ** 2


def _draw_coeffs(model: GroundTruthModel, n: int, rng: np.random.Generator) -> CoeffBlocks:
    basis = model.basis
    angles = rng.uniform(0.0, 2 * math.pi, size=n)
    blocks = []
    for k, sigma in enumerate(model.signal_cov_blocks):
        p_k = basis.p_k[k]
        values, vectors = np.linalg.eigh(sigma)
        factor = vectors * np.sqrt(np.clip(values, 0.0, None))
        if k == 0:
            block = factor @ rng.standard_normal((p_k, n)) + model.mean_coeffs[:, None]
            blocks.append(block.astype(complex))
        else:
            noise = rng.standard_normal((p_k, n)) + 1j * rng.standard_normal((p_k, n))
            blocks.append(factor @ noise / math.sqrt(2))
    return CoeffBlocks(basis, tuple(blocks)).rotated(angles)


def clip_mass(pixels: np.ndarray) -> float:
    """Share of absolute pixel mass carried by negative values."""
    total = np.abs(pixels).sum()
    if total == 0:
        return 0.0
    return float(-pixels[pixels < 0].sum() / total)


def build_ground_truth(
    params: BasisParams,
    ranks: dict,
    intensity_scale: float,
    seed: int = 0,
) -> GroundTruthModel:
    """Blob mean plus low-rank signal, scaled and checked for clipping."""
    if intensity_scale <= 0:
        raise InvalidArgumentError(f"intensity scale must be positive, got {intensity_scale}")
    basis = build_basis(params)
    model_seed, pilot_seed = np.random.SeedSequence(seed).spawn(2)

    mean_coeffs = _blob_coeffs(basis)
    mean_disk = mean_coeffs @ basis.grid_profiles[0]
    side = params.image_size
    mean_coeffs = mean_coeffs * intensity_scale * side * side / mean_disk.sum()
    mean_disk = mean_coeffs @ basis.grid_profiles[0]

    blocks = _signal_blocks(basis, ranks, np.random.default_rng(model_seed))
    scale = _signal_scale(basis, mean_disk, blocks)
    blocks = [scale * block for block in blocks]

    model = GroundTruthModel(
        basis=basis,
        mean_coeffs=mean_coeffs,
        signal_cov_blocks=tuple(blocks),
        intensity_scale=intensity_scale,
        seed=seed,
    )
    pilot = reconstruct(_draw_coeffs(model, PILOT_SIZE, np.random.default_rng(pilot_seed)))
    rate = clip_mass(pilot.pixels)
    if rate > MAX_CLIP_RATE:
        raise GroundTruthError(
            f"clean images lose {rate:.2%} of their mass to clipping (limit {MAX_CLIP_RATE:.0%})"
        )
    logger.info(
        "Ground truth: L=%s R=%s c=%s ranks=%s clip rate %.4f",
        side,
        params.support_radius,
        params.band_limit,
        model.signal_ranks,
        rate,
    )
    return GroundTruthModel(
        basis=basis,
        mean_coeffs=mean_coeffs,
        signal_cov_blocks=tuple(blocks),
        intensity_scale=intensity_scale,
        seed=seed,
        clip_rate=rate,
    )


def preset_model(name: str, seed: int = 0) -> GroundTruthModel:
    """Ground truth for one of the named presets."""
    if name not in PRESETS:
        raise InvalidArgumentError(f"unknown preset {name!r}, expected one of {sorted(PRESETS)}")
    preset = PRESETS[name]
    params = BasisParams(
        preset["band_limit"], preset["support_radius"], preset["image_size"]
    )
    return build_ground_truth(params, preset["ranks"], preset["intensity_scale"], seed)


def draw_clean_coeffs(
    model: GroundTruthModel, n: int, seed: int | np.random.SeedSequence | None = None
) -> CoeffBlocks:
    """Coefficients of n clean, uniformly rotated images."""
    if n < 0:
        raise InvalidArgumentError(f"n must be non-negative, got {n}")
    rng = np.random.default_rng(model.seed if seed is None else seed)
    return _draw_coeffs(model, n, rng)


def draw_clean_stack(
    model: GroundTruthModel, n: int, seed: int | np.random.SeedSequence | None = None
) -> ImageStack:
    """n clean images with negative pixels clipped at zero."""
    clean = reconstruct(draw_clean_coeffs(model, n, seed))
    rate = clip_mass(clean.pixels)
    if rate > 0:
        logger.debug("Clipped %.4f of the clean mass", rate)
    return ImageStack(np.clip(clean.pixels, 0.0, None), kind="intensity")


def poisson_observe(
    clean: ImageStack, seed: int | np.random.SeedSequence = 0
) -> ImageStack:
    """Independent Poisson photon counts with the clean pixels as rates."""
    if np.any(clean.pixels < 0):
        raise InvalidArgumentError("Poisson rates must be non-negative")
    rng = np.random.default_rng(seed)
    counts = rng.poisson(clean.pixels).astype(float)
    return ImageStack(counts, kind="counts")


def true_block_covariance(model: GroundTruthModel) -> BlockCovariance:
    return BlockCovariance.from_blocks(
        model.signal_cov_blocks, [0.0] * len(model.signal_cov_blocks)
    )


def true_covariance(model: GroundTruthModel, points=None) -> np.ndarray:
    """Clean-image covariance at Cartesian points, or over the full pixel grid.

    The full grid is flattened in row-major order, matching
    ``ImageStack.flattened``.
    """
    if points is None:
        points = grid_points(model.basis.params.image_size)
    return covariance_kernel(true_block_covariance(model), model.basis, points)
