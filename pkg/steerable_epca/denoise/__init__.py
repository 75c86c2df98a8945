"""Denoise module for steerable ePCA.

Wiener-type filtering of coefficient blocks, stack-level denoising with a
fitted model, and the Cartesian baselines (EBLP and PCA projection).
"""

from dataclasses import dataclass
import logging
import warnings

import numpy as np
from scipy.linalg import LinAlgError, LinAlgWarning, solve, svd

from steerable_epca.classes.coeffblocks import CoeffBlocks
from steerable_epca.classes.covariance import BlockCovariance, RecolorMatrices, RotInvMean
from steerable_epca.classes.errors import InvalidArgumentError
from steerable_epca.classes.imagestack import ImageStack
from steerable_epca.classes.sepcamodel import SepcaModel
from steerable_epca.estimator import homogenize
from steerable_epca.settings import DEFAULT_EPSILON
from steerable_epca.transform import expand, reconstruct

logger = logging.getLogger(__name__)

RIDGE_SCALE = 1e-12


@dataclass(frozen=True)
class WienerFilter:
    """Per-k gains S (D + S)^-1 B and the k = 0 offset D (D + S)^-1 A_bar."""

    gains: tuple
    offset: np.ndarray
    ridge_applied: bool


def _hermitian_solve(matrix: np.ndarray, rhs: np.ndarray) -> tuple:
    """Solve matrix @ x = rhs, adding a relative ridge when matrix is singular."""
    with warnings.catch_warnings():
        warnings.simplefilter("error", LinAlgWarning)
        try:
            return solve(matrix, rhs, assume_a="her"), False
        except (LinAlgError, LinAlgWarning):
            pass
    size = matrix.shape[0]
    trace = float(np.real(np.trace(matrix)))
    ridge = RIDGE_SCALE * (trace / size if trace > 0 else 1.0)
    regularized = matrix + ridge * np.eye(size)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LinAlgWarning)
        return solve(regularized, rhs, assume_a="her"), True


def wiener_filter(
    final_cov: BlockCovariance, rm: RecolorMatrices, mean: RotInvMean
) -> WienerFilter:
    """Filter matrices of the affine denoiser, computed once per model."""
    gains = []
    offset = None
    ridge_applied = False
    for k, (signal, b, d) in enumerate(zip(final_cov.blocks, rm.b, rm.d)):
        total = d + signal
        # total and signal are Hermitian: S M^-1 = (M^-1 S)*
        left, ridged = _hermitian_solve(total, signal)
        ridge_applied |= ridged
        gains.append(left.conj().T @ b)
        if k == 0:
            right, ridged = _hermitian_solve(total, d)
            ridge_applied |= ridged
            offset = right.conj().T @ mean.coeffs
    if ridge_applied:
        logger.warning("Singular Wiener system; solved with a relative ridge")
    return WienerFilter(gains=tuple(gains), offset=offset, ridge_applied=ridge_applied)


def apply_filter(coeffs: CoeffBlocks, wiener: WienerFilter) -> CoeffBlocks:
    blocks = [gain @ block for gain, block in zip(wiener.gains, coeffs.blocks)]
    blocks[0] = blocks[0] + wiener.offset[:, None]
    return coeffs.with_blocks(blocks)


def wiener_denoise(
    coeffs: CoeffBlocks,
    final_cov: BlockCovariance,
    rm: RecolorMatrices,
    mean: RotInvMean,
) -> CoeffBlocks:
    """Denoised, recolored coefficients of the prewhitened images."""
    return apply_filter(coeffs, wiener_filter(final_cov, rm, mean))


def denoise_stack(
    stack: ImageStack, model: SepcaModel, threads: int | None = None
) -> ImageStack:
    """Homogenize, expand, filter and reconstruct every image."""
    source = homogenize(stack, model.mean) if model.homogenized else stack
    coeffs = expand(source, model.basis, threads=threads)
    denoised = wiener_denoise(coeffs, model.covariance, model.recolor, model.mean)
    return reconstruct(denoised, threads=threads)


def regularized_noise(mean: np.ndarray, epsilon: float = DEFAULT_EPSILON) -> tuple:
    """(1 - eps) diag(mean) + eps m I with m the average of the mean, and m."""
    if not 0 <= epsilon <= 1:
        raise InvalidArgumentError(f"epsilon must lie in [0, 1], got {epsilon}")
    mean = np.asarray(mean, dtype=float).ravel()
    level = float(mean.mean())
    return (1 - epsilon) * np.diag(mean) + epsilon * level * np.eye(mean.size), level


def eblp_denoise_cartesian(
    stack: ImageStack,
    signal_cov: np.ndarray,
    mean: np.ndarray,
    epsilon: float = DEFAULT_EPSILON,
) -> ImageStack:
    """Pixel-space EBLP: mean + S (S + regularized noise)^-1 (Y - mean)."""
    side = stack.image_size
    mean = np.asarray(mean, dtype=float).ravel()
    if signal_cov.shape != (side * side, side * side) or mean.size != side * side:
        raise InvalidArgumentError("covariance and mean must match the image grid")
    noise, _ = regularized_noise(mean, epsilon)
    residuals = stack.flattened() - mean[:, None]
    weights, ridged = _hermitian_solve(signal_cov + noise, residuals)
    if ridged:
        logger.warning("Singular EBLP system; solved with a relative ridge")
    denoised = mean[:, None] + signal_cov @ weights
    return ImageStack(denoised.T.reshape(stack.n, side, side), kind="intensity")


def pca_project_denoise(stack: ImageStack, n_components: int) -> ImageStack:
    """Project centered images onto the top sample principal components."""
    if n_components < 0:
        raise InvalidArgumentError(f"n_components must be non-negative, got {n_components}")
    data = stack.flattened()
    mean = data.mean(axis=1, keepdims=True)
    centered = data - mean
    basis, _, _ = svd(centered, full_matrices=False)
    top = basis[:, : min(n_components, basis.shape[1])]
    projected = mean + top @ (top.T @ centered)
    side = stack.image_size
    return ImageStack(projected.T.reshape(stack.n, side, side), kind="intensity")
