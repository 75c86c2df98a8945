import numpy as np
import pytest

from steerable_epca.basis.fourier_bessel import BasisParams, build_basis
from steerable_epca.classes.coeffblocks import CoeffBlocks
from steerable_epca.synth import preset_model


@pytest.fixture(scope="session")
def desk_params():
    return BasisParams(band_limit=0.15, support_radius=14, image_size=32)


@pytest.fixture(scope="session")
def desk_basis(desk_params):
    return build_basis(desk_params)


@pytest.fixture(scope="session")
def desk_truth():
    return preset_model("desk", seed=0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def damped_coeffs():
    """Random coefficients with a spectrum decaying in the Bessel root."""

    def make(basis, n, rng):
        blocks = []
        for k in basis.frequencies:
            decay = np.exp(-4 * (basis.roots[k] / basis.params.threshold) ** 2)
            shape = (basis.p_k[k], n)
            block = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
            if k == 0:
                block = block.real.astype(complex)
            blocks.append(decay[:, None] * block)
        return CoeffBlocks(basis, tuple(blocks))

    return make


@pytest.fixture
def rotate_quarter():
    """Counter-clockwise rotation by 90 degrees about pixel (L/2, L/2)."""

    def rotate(images):
        rotated = np.zeros_like(images)
        side = images.shape[-1]
        rotated[..., 1:, :] = np.swapaxes(images[..., :, side - 1 : 0 : -1], -1, -2)
        return rotated

    return rotate


@pytest.fixture
def reflect_x():
    """Mirror x -> -x about pixel L/2."""

    def reflect(images):
        reflected = np.zeros_like(images)
        reflected[..., 1:, :] = images[..., :0:-1, :]
        return reflected

    return reflect
