import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from steerable_epca.basis.bessel import bessel_j, gauss_legendre, root_table
from steerable_epca.basis.fourier_bessel import (
    BasisParams,
    build_basis,
    radial_function,
    radial_profiles,
)
from steerable_epca.classes.errors import (
    BasisIndexError,
    EmptyBasisError,
    InvalidArgumentError,
)


def test_desk_basis_sizes(desk_basis):
    assert desk_basis.p_k == (3, 2, 2, 2, 1, 1)
    assert desk_basis.k_max == 5
    assert desk_basis.total_dim == 19
    assert desk_basis.params.n_xi == 9
    assert desk_basis.params.n_theta == 34
    assert desk_basis.n_theta == 34


def test_wide_disk_geometry_sizes():
    params = BasisParams(band_limit=0.08, support_radius=61, image_size=128)
    assert params.n_xi == 20
    assert params.n_theta == 79
    assert root_table(params.threshold).count(0) - 1 == 9


def test_every_kept_function_satisfies_the_sampling_criterion(desk_basis):
    threshold = desk_basis.params.threshold
    table = root_table(threshold)
    for k in desk_basis.frequencies:
        p_k = desk_basis.p_k[k]
        assert table.roots[k][p_k] <= threshold
        assert_allclose(desk_basis.roots[k], table.roots[k][:p_k])


def test_too_small_a_band_limit_leaves_no_basis():
    with pytest.raises(EmptyBasisError):
        build_basis(BasisParams(band_limit=0.05, support_radius=10, image_size=32))


@pytest.mark.parametrize(
    "band_limit, support_radius, image_size",
    [(0.0, 10, 32), (0.6, 10, 32), (0.1, 17, 32), (0.1, 10, 31), (0.1, 2.5, 32)],
)
def test_invalid_parameters(band_limit, support_radius, image_size):
    with pytest.raises(InvalidArgumentError):
        BasisParams(band_limit, support_radius, image_size)


def test_fourier_functions_are_orthonormal_on_the_disk(desk_basis):
    c = desk_basis.params.band_limit
    rule = gauss_legendre(200, 0.0, c)
    for k in desk_basis.frequencies:
        samples = (
            desk_basis.normalizers[k][:, None]
            * bessel_j(k, np.outer(desk_basis.roots[k], rule.nodes / c))
        )
        gram = 2 * math.pi * (samples * rule.nodes * rule.weights) @ samples.T
        assert_allclose(gram, np.eye(desk_basis.p_k[k]), atol=1e-10)


def test_negative_frequency_is_the_conjugate(desk_basis):
    for k in range(1, desk_basis.k_max + 1):
        value = radial_function(desk_basis, k, 1, 3.7)
        assert_allclose(radial_function(desk_basis, -k, 1, 3.7), np.conj(value))


def test_phase_convention(desk_basis):
    profile = radial_profiles(desk_basis, 2, [4.2])[0, 0]
    assert_allclose(radial_function(desk_basis, 2, 1, 4.2), -profile)
    profile = radial_profiles(desk_basis, 1, [4.2])[0, 0]
    assert_allclose(radial_function(desk_basis, 1, 1, 4.2), 1j * profile)


def test_profile_is_continuous_across_the_removable_singularity(desk_basis):
    c = desk_basis.params.band_limit
    root = desk_basis.roots[0][1]
    r0 = root / (2 * math.pi * c)
    values = radial_profiles(desk_basis, 0, [r0 - 1e-3, r0, r0 + 1e-3])[1]
    assert np.all(np.isfinite(values))
    assert_allclose(values[1], 0.5 * (values[0] + values[2]), rtol=1e-4)


@pytest.mark.parametrize("k, q", [(6, 1), (0, 0), (0, 4), (-6, 1)])
def test_index_outside_the_basis(desk_basis, k, q):
    with pytest.raises(BasisIndexError):
        radial_function(desk_basis, k, q, 1.0)


def test_negative_radius_is_rejected(desk_basis):
    with pytest.raises(InvalidArgumentError):
        radial_function(desk_basis, 0, 1, -1.0)


def test_disk_grid(desk_basis):
    coords = np.arange(32) - 16
    x, y = np.meshgrid(coords, coords, indexing="ij")
    inside = np.hypot(x, y) < 14
    assert desk_basis.grid.n_pixels == int(inside.sum())
    assert np.array_equal(desk_basis.grid.mask, inside)
    assert desk_basis.grid_functions(3).shape == (desk_basis.grid.n_pixels, 2)


def test_point_functions_vanish_outside_the_support(desk_basis):
    points = np.array([[14.0, 0.0], [10.0, 11.0], [3.0, -2.0]])
    values = desk_basis.point_functions(1, points)
    assert_allclose(values[:2], 0.0)
    assert np.any(values[2] != 0)


def test_point_functions_match_grid_functions(desk_basis):
    coords = np.arange(32) - 16
    x, y = np.meshgrid(coords, coords, indexing="ij")
    mask = desk_basis.grid.mask
    points = np.column_stack([x[mask], y[mask]]).astype(float)
    for k in desk_basis.frequencies:
        assert_allclose(
            desk_basis.point_functions(k, points),
            desk_basis.grid_functions(k),
            atol=1e-13,
        )
