"""Fitted steerable ePCA model."""

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from steerable_epca.classes.covariance import BlockCovariance, RecolorMatrices, RotInvMean
from steerable_epca.classes.errors import InvalidArgumentError

if TYPE_CHECKING:
    from steerable_epca.basis.fourier_bessel import FbBasis


@dataclass(frozen=True)
class SepcaModel:
    """Everything the denoiser needs, plus the bookkeeping of the fit."""

    basis: "FbBasis"
    mean: RotInvMean
    recolor: RecolorMatrices
    covariance: BlockCovariance
    shrunken_ranks: tuple = ()
    alphas: tuple = ()
    include_reflections: bool = True
    # False for models fitted on raw coefficients under white noise
    homogenized: bool = True
    warnings: tuple = field(default=())

    @property
    def ranks(self) -> tuple:
        return self.covariance.ranks

    @property
    def support_radius(self) -> int:
        return self.basis.params.support_radius

    @property
    def band_limit(self) -> float:
        return self.basis.params.band_limit

    def eigenimages(self, count: int) -> tuple:
        """Top ``count`` principal images of the estimated covariance.

        A k = 0 component gives one image; a k > 0 component gives the pair
        sqrt(2) Re(G u) and sqrt(2) Im(G u) sharing its eigenvalue. Returns
        (eigenvalues, images of shape (count, L, L)), eigenvalues descending.
        """
        if count < 0:
            raise InvalidArgumentError(f"count must be non-negative, got {count}")
        side = self.basis.params.image_size
        mask = self.basis.grid.mask
        found = []
        for k, (values, vectors) in enumerate(
            zip(self.covariance.eigenvalues, self.covariance.eigenvectors)
        ):
            kept = self.ranks[k] if self.ranks else int(np.count_nonzero(values > 0))
            if kept == 0:
                continue
            images = self.basis.grid_functions(k) @ vectors[:, :kept]
            for value, column in zip(values[:kept], images.T):
                if k == 0:
                    found.append((value, column.real))
                else:
                    found.append((value, np.sqrt(2) * column.real))
                    found.append((value, np.sqrt(2) * column.imag))
        found.sort(key=lambda pair: -pair[0])
        found = found[:count]
        eigenvalues = np.array([value for value, _ in found])
        images = np.zeros((len(found), side, side))
        for i, (_, column) in enumerate(found):
            images[i][mask] = column
        return eigenvalues, images
