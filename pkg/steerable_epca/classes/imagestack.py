"""Image stack container shared by the transform, synth and file layers."""

from dataclasses import dataclass

import numpy as np

from steerable_epca.classes.errors import InvalidArgumentError

STACK_KINDS = ("counts", "intensity")


@dataclass(frozen=True)
class ImageStack:
    """n images of side L, axis 0 is x and axis 1 is y."""

    pixels: np.ndarray
    kind: str = "intensity"

    def __post_init__(self):
        pixels = np.asarray(self.pixels, dtype=float)
        if pixels.ndim != 3 or pixels.shape[1] != pixels.shape[2]:
            raise InvalidArgumentError(
                f"an image stack must have shape (n, L, L), got {pixels.shape}"
            )
        if self.kind not in STACK_KINDS:
            raise InvalidArgumentError(f"unknown stack kind {self.kind!r}")
        if not np.all(np.isfinite(pixels)):
            raise InvalidArgumentError("image stack contains non-finite values")
        if self.kind == "counts" and np.any(pixels < 0):
            raise InvalidArgumentError("count stacks must be non-negative")
        object.__setattr__(self, "pixels", pixels)

    @property
    def n(self) -> int:
        return self.pixels.shape[0]

    @property
    def image_size(self) -> int:
        return self.pixels.shape[1]

    def mean_image(self) -> np.ndarray:
        return self.pixels.mean(axis=0)

    def flattened(self) -> np.ndarray:
        """(L*L, n) data matrix, one column per image."""
        return self.pixels.reshape(self.n, -1).T
