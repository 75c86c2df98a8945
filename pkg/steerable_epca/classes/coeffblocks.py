"""Fourier-Bessel coefficient blocks, one p_k x n complex matrix per k >= 0."""

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from steerable_epca.classes.errors import InvalidArgumentError

if TYPE_CHECKING:
    from steerable_epca.basis.fourier_bessel import FbBasis


@dataclass(frozen=True)
class CoeffBlocks:
    """Coefficients A^(k) for k = 0..k_max; negative k follow by conjugation.

    Rows are ordered by the radial index q ascending.
    """

    basis: "FbBasis"
    blocks: tuple

    def __post_init__(self):
        if len(self.blocks) != self.basis.k_max + 1:
            raise InvalidArgumentError(
                f"expected {self.basis.k_max + 1} blocks, got {len(self.blocks)}"
            )
        widths = set()
        for k, block in enumerate(self.blocks):
            if block.ndim != 2 or block.shape[0] != self.basis.p_k[k]:
                raise InvalidArgumentError(
                    f"block {k} has shape {block.shape}, expected ({self.basis.p_k[k]}, n)"
                )
            widths.add(block.shape[1])
        if len(widths) > 1:
            raise InvalidArgumentError("all blocks must hold the same number of images")

    @property
    def n(self) -> int:
        return self.blocks[0].shape[1]

    def with_blocks(self, blocks) -> "CoeffBlocks":
        return CoeffBlocks(self.basis, tuple(blocks))

    def rotated(self, angles) -> "CoeffBlocks":
        """Coefficients of the images rotated counter-clockwise by ``angles``."""
        angles = np.broadcast_to(np.asarray(angles, dtype=float), (self.n,))
        return self.with_blocks(
            block * np.exp(-1j * k * angles)[None, :]
            for k, block in enumerate(self.blocks)
        )

    def reflected(self) -> "CoeffBlocks":
        """Coefficients of the images mirrored through x -> -x."""
        return self.with_blocks(np.conj(block) for block in self.blocks)

    def scaled(self, factor: float) -> "CoeffBlocks":
        return self.with_blocks(factor * block for block in self.blocks)
