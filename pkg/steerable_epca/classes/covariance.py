"""Data types passed between the steps of the covariance estimator."""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh

EIGENVALUE_CLAMP = 1e-12


@dataclass(frozen=True)
class RotInvMean:
    """Rotationally invariant mean: k = 0 coefficients and its radial profile.

    ``node_profile`` holds f(r_j) at the real-domain quadrature nodes and
    ``image`` the profile on the full Cartesian grid, zero outside the disk.
    Both are clamped at zero.
    """

    coeffs: np.ndarray
    node_profile: np.ndarray
    image: np.ndarray


def _hermitian_eig(block: np.ndarray) -> tuple:
    if block.shape[0] == 0:
        return np.zeros(0), np.zeros((0, 0), dtype=block.dtype)
    values, vectors = eigh(block)
    order = np.argsort(values)[::-1]
    values = values[order]
    vectors = vectors[:, order]
    values[(values < 0) & (values > -EIGENVALUE_CLAMP)] = 0.0
    return values, vectors


@dataclass(frozen=True)
class BlockCovariance:
    """Per-frequency Hermitian blocks S^(k) with their descending eigenpairs."""

    blocks: tuple
    eigenvalues: tuple
    eigenvectors: tuple
    gammas: tuple
    ranks: tuple = field(default=())

    @classmethod
    def from_blocks(cls, blocks, gammas, ranks=()) -> "BlockCovariance":
        hermitian = []
        values = []
        vectors = []
        for block in blocks:
            block = np.asarray(block)
            block = 0.5 * (block + block.conj().T)
            block_values, block_vectors = _hermitian_eig(block)
            hermitian.append(block)
            values.append(block_values)
            vectors.append(block_vectors)
        return cls(
            blocks=tuple(hermitian),
            eigenvalues=tuple(values),
            eigenvectors=tuple(vectors),
            gammas=tuple(gammas),
            ranks=tuple(ranks),
        )

    @property
    def k_max(self) -> int:
        return len(self.blocks) - 1

    @property
    def total_rank(self) -> int:
        """Rank summed over k = -k_max..k_max."""
        if not self.ranks:
            return 0
        return int(self.ranks[0] + 2 * sum(self.ranks[1:]))


@dataclass(frozen=True)
class RecolorMatrices:
    """B^(k) weighted by sqrt(f) and D^(k) weighted by f, both real symmetric."""

    b: tuple
    d: tuple


@dataclass(frozen=True)
class ShrinkageComponents:
    """Shrunken eigenvalues with their cosine and sine forward maps, per k."""

    ell: tuple
    cos_sq: tuple
    sin_sq: tuple
