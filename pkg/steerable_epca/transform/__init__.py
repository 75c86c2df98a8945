"""Transform module for steerable ePCA.

Maps image stacks to Fourier-Bessel coefficient blocks and back. The
nonuniform Fourier samples on the polar grid are evaluated exactly, either
as a dense double sum or as a separable row-then-column product.
"""

from dataclasses import dataclass
from functools import lru_cache
import logging
import math

import numpy as np

from steerable_epca.basis.bessel import bessel_roots, gauss_legendre
from steerable_epca.basis.fourier_bessel import BasisParams, FbBasis
from steerable_epca.classes.coeffblocks import CoeffBlocks
from steerable_epca.classes.errors import DegenerateInputError, InvalidArgumentError
from steerable_epca.classes.imagestack import ImageStack
from steerable_epca.helper.threads import map_on_threads
from steerable_epca.settings import DEFAULT_BAND_FRACTION, DEFAULT_SUPPORT_FRACTION

logger = logging.getLogger(__name__)

EXPAND_CHUNK = 32
RECONSTRUCT_CHUNK = 256
POLAR_METHODS = ("separable", "direct")
# Radial power bins count only when they clear the noise floor by this many
# standard errors.
NOISE_FLOOR_SIGMAS = 3.0
# Two bins in a row back at the floor end the signal band.
LEVEL_OFF_BINS = 2


@dataclass(frozen=True)
class BandLimitEstimate:
    band_limit: float
    flat_spectrum: bool


@lru_cache(maxsize=8)
def _polar_factors(params: BasisParams) -> tuple:
    """Row and column exponentials E1[m, i1], E2[m, i2] over the polar nodes."""
    rule = gauss_legendre(params.n_xi, 0.0, params.band_limit)
    theta = 2 * math.pi * np.arange(params.n_theta) / params.n_theta
    kx = np.outer(rule.nodes, np.cos(theta)).ravel()
    ky = np.outer(rule.nodes, np.sin(theta)).ravel()
    offsets = np.arange(-params.support_radius, params.support_radius)
    row = np.exp(-2j * math.pi * np.outer(kx, offsets))
    col = np.exp(-2j * math.pi * np.outer(ky, offsets))
    row.setflags(write=False)
    col.setflags(write=False)
    return row, col


def _window(pixels: np.ndarray, params: BasisParams) -> np.ndarray:
    """Pixels with coordinates in [-R, R-1] along both axes."""
    half = params.image_size // 2
    radius = params.support_radius
    return pixels[..., half - radius : half + radius, half - radius : half + radius]


def _check_geometry(image_size: int, basis: FbBasis):
    if image_size != basis.params.image_size:
        raise InvalidArgumentError(
            f"image side {image_size} does not match the basis (L={basis.params.image_size})"
        )


def _polar_samples(pixels: np.ndarray, params: BasisParams, method: str) -> np.ndarray:
    """(n, n_xi, n_theta) samples of the windowed DTFT with the 1/(2R) prefactor."""
    if method not in POLAR_METHODS:
        raise InvalidArgumentError(f"unknown polar sampling method {method!r}")
    row, col = _polar_factors(params)
    window = _window(pixels, params)
    if method == "separable":
        values = np.einsum("ma,nab,mb->nm", row, window, col, optimize=True)
    else:
        dense = (row[:, :, None] * col[:, None, :]).reshape(row.shape[0], -1)
        values = window.reshape(window.shape[0], -1) @ dense.T
    values /= 2 * params.support_radius
    return values.reshape(-1, params.n_xi, params.n_theta)


def polar_fourier_samples(
    image: np.ndarray, basis: FbBasis, method: str = "separable"
) -> np.ndarray:
    """F(I)(xi_j, theta_l) on the n_xi x n_theta polar grid of the basis."""
    image = np.asarray(image, dtype=float)
    if image.ndim != 2 or image.shape[0] != image.shape[1]:
        raise InvalidArgumentError(f"expected a square image, got shape {image.shape}")
    _check_geometry(image.shape[0], basis)
    return _polar_samples(image[None], basis.params, method)[0]


def _expand_chunk(pixels: np.ndarray, basis: FbBasis, method: str) -> list:
    params = basis.params
    samples = _polar_samples(pixels, params, method)
    harmonics = np.fft.fft(samples, axis=2)[:, :, : basis.k_max + 1]
    harmonics *= 2 * math.pi / params.n_theta * 2 * params.support_radius
    blocks = [
        weights @ harmonics[:, :, k].T
        for k, weights in enumerate(basis.fourier_weights)
    ]
    # k = 0 coefficients of real images are real
    blocks[0] = blocks[0].real.astype(complex)
    return blocks


def _chunks(n: int, size: int) -> list:
    return [slice(start, min(start + size, n)) for start in range(0, n, size)]


def expand(
    stack: ImageStack,
    basis: FbBasis,
    method: str = "separable",
    threads: int | None = None,
) -> CoeffBlocks:
    """Fourier-Bessel coefficients a_{k,q} for k >= 0 of every image."""
    _check_geometry(stack.image_size, basis)
    parts = map_on_threads(
        lambda part: _expand_chunk(stack.pixels[part], basis, method),
        _chunks(stack.n, EXPAND_CHUNK),
        threads,
    )
    if not parts:
        blocks = [np.zeros((p, 0), dtype=complex) for p in basis.p_k]
    else:
        blocks = [
            np.concatenate([part[k] for part in parts], axis=1)
            for k in basis.frequencies
        ]
    return CoeffBlocks(basis, tuple(blocks))


def _disk_values(coeffs: CoeffBlocks, part: slice) -> np.ndarray:
    basis = coeffs.basis
    values = np.zeros((basis.grid.n_pixels, part.stop - part.start))
    for k, block in enumerate(coeffs.blocks):
        contribution = (basis.grid_functions(k) @ block[:, part]).real
        values += contribution if k == 0 else 2 * contribution
    return values


def reconstruct(coeffs: CoeffBlocks, threads: int | None = None) -> ImageStack:
    """Images on the Cartesian grid; pixels outside the support disk are 0."""
    basis = coeffs.basis
    side = basis.params.image_size
    pixels = np.zeros((coeffs.n, side, side))
    parts = _chunks(coeffs.n, RECONSTRUCT_CHUNK)
    for part, values in zip(
        parts,
        map_on_threads(lambda part: _disk_values(coeffs, part), parts, threads),
    ):
        pixels[part][:, basis.grid.mask] = values.T
    return ImageStack(pixels, kind="intensity")


def grid_points(side: int) -> np.ndarray:
    """(L*L, 2) pixel coordinates in row-major order, axis 0 first."""
    coords = np.arange(side) - side // 2
    x, y = np.meshgrid(coords, coords, indexing="ij")
    return np.column_stack([x.ravel(), y.ravel()]).astype(float)


def _pixel_radii(side: int) -> np.ndarray:
    coords = np.arange(side) - side // 2
    x, y = np.meshgrid(coords, coords, indexing="ij")
    return np.hypot(x, y)


def estimate_support_radius(
    stack: ImageStack, fraction: float = DEFAULT_SUPPORT_FRACTION
) -> int:
    """Smallest R whose disk r < R holds ``fraction`` of the mean image's mass."""
    if not 0 < fraction < 1:
        raise InvalidArgumentError(f"fraction must lie in (0, 1), got {fraction}")
    if stack.n < 1:
        raise InvalidArgumentError("cannot estimate a support radius from an empty stack")
    mean = np.clip(stack.mean_image(), 0.0, None)
    total = mean.sum()
    if total <= 0:
        raise DegenerateInputError("the mean image is identically zero")
    # a pixel at radius r lies inside every disk r < R with R >= floor(r) + 1
    bins = np.floor(_pixel_radii(stack.image_size)).astype(int) + 1
    cumulative = np.cumsum(np.bincount(bins.ravel(), weights=mean.ravel()))
    radius = int(np.argmax(cumulative >= fraction * total))
    limit = stack.image_size // 2
    if radius > limit:
        logger.warning(
            "Support radius %s exceeds half the image side, using %s", radius, limit
        )
        radius = limit
    logger.info("Estimated support radius R=%s", radius)
    return radius


def minimum_band_limit(support_radius: int | None, image_size: int) -> float:
    """Smallest c for which the basis keeps at least one radial function."""
    if support_radius is None:
        return 1.0 / image_size
    second_root = bessel_roots(0, 10.0)[1]
    return second_root * (1 + 1e-9) / (2 * math.pi * support_radius)


def estimate_band_limit(
    whitened_stack: ImageStack,
    fraction: float = DEFAULT_BAND_FRACTION,
    support_radius: int | None = None,
    noise_pixels: int | None = None,
) -> BandLimitEstimate:
    """Band limit from the mean radial power spectrum of prewhitened images.

    The stack mean is removed and power is divided by the number of pixels
    carrying unit-variance noise (``noise_pixels``, by default the pixels that
    are nonzero in some image), so pure noise sits at 1 in every bin. Bins
    whose excess clears the floor are accumulated outwards until the
    spectrum levels off.
    """
    if not 0 < fraction < 1:
        raise InvalidArgumentError(f"fraction must lie in (0, 1), got {fraction}")
    side = whitened_stack.image_size
    n = whitened_stack.n
    pixels = whitened_stack.pixels
    if noise_pixels is None:
        noise_pixels = int(np.count_nonzero(np.any(pixels != 0, axis=0)))
    floor = max(minimum_band_limit(support_radius, side), 1.0 / side)
    if noise_pixels == 0 or n < 2:
        logger.warning(
            "Whitened stack carries no noise estimate; using the minimum band limit %.4f",
            floor,
        )
        return BandLimitEstimate(band_limit=floor, flat_spectrum=True)

    centered = pixels - pixels.mean(axis=0)
    spectra = np.abs(np.fft.fft2(centered, axes=(1, 2))) ** 2
    power = spectra.sum(axis=0) / ((n - 1) * noise_pixels)
    freqs = np.fft.fftfreq(side)
    fx, fy = np.meshgrid(freqs, freqs, indexing="ij")
    bins = np.rint(np.hypot(fx, fy) * side).astype(int).ravel()
    counts = np.maximum(np.bincount(bins), 1)
    radial = np.bincount(bins, weights=power.ravel()) / counts
    # f and -f carry the same power for real images
    standard_error = np.sqrt(2.0 / ((n - 1) * counts))
    significant = radial - 1.0 > NOISE_FLOOR_SIGMAS * standard_error
    # the DC bin only holds what is left of the mean
    significant[0] = False
    significant[_level_off_index(significant) :] = False
    mass = np.where(significant, radial - 1.0, 0.0) * counts
    total = mass.sum()
    if total <= 0:
        logger.warning(
            "Radial power spectrum is flat; using the minimum band limit %.4f", floor
        )
        return BandLimitEstimate(band_limit=floor, flat_spectrum=True)

    cumulative = np.cumsum(mass)
    index = int(np.argmax(cumulative >= fraction * total))
    band_limit = float(np.clip(index / side, floor, 0.5))
    logger.info("Estimated band limit c=%.4f", band_limit)
    return BandLimitEstimate(band_limit=band_limit, flat_spectrum=False)


def _level_off_index(significant: np.ndarray) -> int:
    """First bin of the first LEVEL_OFF_BINS-long run at the floor after the signal."""
    hits = np.flatnonzero(significant)
    if hits.size == 0:
        return significant.size
    quiet = 0
    for index in range(hits[0] + 1, significant.size):
        quiet = 0 if significant[index] else quiet + 1
        if quiet == LEVEL_OFF_BINS:
            return index - LEVEL_OFF_BINS + 1
    return significant.size
