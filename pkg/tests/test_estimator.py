import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from steerable_epca.classes.covariance import BlockCovariance, RotInvMean
from steerable_epca.classes.errors import DegenerateInputError, InvalidArgumentError
from steerable_epca.classes.imagestack import ImageStack
from steerable_epca.estimator import (
    block_covariance,
    center_zero_frequency,
    covariance_kernel,
    fit_sepca,
    homogenize,
    recolor_block,
    recolor_matrices,
    rotinv_mean,
    scale_block,
    shrink_block,
    shrinkage_components,
)
from steerable_epca.estimator.shrinkage import (
    cosine_sq,
    mp_edge,
    shrink_eigenvalue,
    spike_forward,
)
from steerable_epca.evaluation import covariance_error
from steerable_epca.evaluation.baselines import run_raw
from steerable_epca.synth import (
    build_ground_truth,
    draw_clean_stack,
    poisson_observe,
    preset_model,
    true_covariance,
)
from steerable_epca.transform import expand, grid_points


def _random_psd_blocks(basis, rng, complex_valued=True):
    blocks = []
    for k, p in enumerate(basis.p_k):
        factor = rng.standard_normal((p, p))
        if complex_valued and k > 0:
            factor = factor + 1j * rng.standard_normal((p, p))
        blocks.append(factor @ factor.conj().T)
    return BlockCovariance.from_blocks(blocks, [0.1] * len(blocks))


def _constant_mean(basis, level=1.0):
    side = basis.params.image_size
    image = np.zeros((side, side))
    image[basis.grid.mask] = level
    return RotInvMean(
        coeffs=np.zeros(basis.p_k[0]),
        node_profile=np.full(basis.real_rule.nodes.size, level),
        image=image,
    )


class TestShrinkage:
    def test_spike_forward_map(self):
        assert_allclose(spike_forward(2.618034, 1.0), 5.0, rtol=1e-6)

    def test_shrinker_inverts_the_forward_map_at_five(self):
        assert_allclose(shrink_eigenvalue(5.0, 1.0), (3 + math.sqrt(5)) / 2, rtol=1e-14)

    def test_cosine_map(self):
        assert_allclose(cosine_sq(3.0, 1.0), 2.0 / 3.0, rtol=1e-14)

    def test_below_the_edge_shrinks_to_zero(self):
        assert mp_edge(1.0) == 4.0
        assert shrink_eigenvalue(4.0, 1.0) == 0.0
        assert shrink_eigenvalue(3.9, 1.0) == 0.0
        assert cosine_sq(0.5, 1.0) == 0.0

    def test_round_trip_above_the_edge(self):
        rng = np.random.default_rng(5)
        gamma = rng.uniform(0.01, 3.0, size=10_000)
        lam = mp_edge(gamma) + rng.uniform(1e-2, 50.0, size=10_000)
        assert_allclose(spike_forward(shrink_eigenvalue(lam, gamma), gamma), lam, rtol=1e-10)

    def test_scalar_input_returns_a_float(self):
        assert isinstance(shrink_eigenvalue(10.0, 0.5), float)
        assert isinstance(cosine_sq(10.0, 0.5), float)
        assert shrink_eigenvalue(np.array([10.0, 1.0]), 0.5).shape == (2,)

    @pytest.mark.parametrize("gamma", [0.0, -1.0, float("inf")])
    def test_gamma_must_be_positive(self, gamma):
        with pytest.raises(InvalidArgumentError):
            shrink_eigenvalue(3.0, gamma)


class TestMeanAndHomogenization:
    def test_circular_blob_is_reproduced(self, desk_basis):
        coords = np.arange(32) - 16
        x, y = np.meshgrid(coords, coords, indexing="ij")
        blob = np.exp(-(x**2 + y**2) / (2 * 4.0**2))
        stack = ImageStack(np.repeat(blob[None], 3, axis=0))
        mean = rotinv_mean(stack, desk_basis)
        mask = desk_basis.grid.mask
        assert np.max(np.abs(mean.image[mask] - blob[mask])) <= 3e-2
        assert np.all(mean.image >= 0)
        assert np.all(mean.node_profile >= 0)

    def test_zero_stack_gives_a_zero_profile(self, desk_basis):
        mean = rotinv_mean(ImageStack(np.zeros((2, 32, 32))), desk_basis)
        assert not np.any(mean.image)
        with pytest.raises(DegenerateInputError):
            homogenize(ImageStack(np.ones((2, 32, 32))), mean)

    def test_homogenize_divides_by_the_root_of_the_mean(self, desk_basis):
        mean = _constant_mean(desk_basis, 4.0)
        stack = ImageStack(np.full((2, 32, 32), 3.0))
        whitened = homogenize(stack, mean)
        mask = desk_basis.grid.mask
        assert_allclose(whitened.pixels[:, mask], 1.5)
        assert np.all(whitened.pixels[:, ~mask] == 0)

    def test_centering_touches_only_the_zero_frequency(self, desk_basis, damped_coeffs, rng):
        coeffs = damped_coeffs(desk_basis, 30, rng)
        centered = center_zero_frequency(coeffs)
        assert_allclose(centered.blocks[0].mean(axis=1), 0.0, atol=1e-14)
        for before, after in zip(coeffs.blocks[1:], centered.blocks[1:]):
            assert np.array_equal(before, after)


class TestBlockCovariance:
    def test_reflections_match_the_augmented_sample(self, desk_basis, damped_coeffs, rng):
        coeffs = damped_coeffs(desk_basis, 40, rng)
        cov = block_covariance(coeffs)
        for k, block in enumerate(coeffs.blocks):
            augmented = np.concatenate([block, block.conj()], axis=1)
            oracle = augmented @ augmented.conj().T / augmented.shape[1]
            assert_allclose(cov.blocks[k], oracle, rtol=1e-10, atol=1e-12)
            assert np.isrealobj(cov.blocks[k])
        assert_allclose(cov.gammas[0], 3 / 40)
        assert_allclose(cov.gammas[1], 2 / 80)

    def test_without_reflections_blocks_are_hermitian(self, desk_basis, damped_coeffs, rng):
        coeffs = damped_coeffs(desk_basis, 40, rng)
        cov = block_covariance(coeffs, include_reflections=False)
        block = coeffs.blocks[2]
        assert_allclose(cov.blocks[2], block @ block.conj().T / 40, rtol=1e-10, atol=1e-12)
        assert_allclose(cov.gammas[2], 2 / 40)

    def test_eigenvalues_are_sorted_descending(self, desk_basis, rng):
        cov = _random_psd_blocks(desk_basis, rng)
        for values in cov.eigenvalues:
            assert np.all(np.diff(values) <= 0)

    def test_empty_coefficients(self, desk_basis):
        coeffs = expand(ImageStack(np.zeros((0, 32, 32))), desk_basis)
        with pytest.raises(InvalidArgumentError):
            block_covariance(coeffs)


class TestRecoloring:
    def test_unit_profile_gives_equal_b_and_d(self, desk_basis):
        rm = recolor_matrices(_constant_mean(desk_basis), desk_basis)
        for b, d in zip(rm.b, rm.d):
            assert_allclose(b, d, rtol=1e-14)
            assert_allclose(b, b.T, rtol=1e-12, atol=1e-14)
            assert np.isrealobj(b)

    def test_profile_scaling(self, desk_basis):
        unit = recolor_matrices(_constant_mean(desk_basis, 1.0), desk_basis)
        four = recolor_matrices(_constant_mean(desk_basis, 4.0), desk_basis)
        for k in desk_basis.frequencies:
            assert_allclose(four.b[k], 2 * unit.b[k], rtol=1e-13, atol=1e-15)
            assert_allclose(four.d[k], 4 * unit.d[k], rtol=1e-13, atol=1e-15)

    def test_recolor_block_matches_triple_product(self, desk_basis, rng):
        shrunken = _random_psd_blocks(desk_basis, rng)
        rm = recolor_matrices(_constant_mean(desk_basis, 2.5), desk_basis)
        recolored = recolor_block(shrunken, rm)
        for k in desk_basis.frequencies:
            oracle = rm.b[k].T @ shrunken.blocks[k] @ rm.b[k]
            assert_allclose(recolored.blocks[k], oracle, rtol=1e-10, atol=1e-12)

    def test_nothing_to_scale_gives_zero_blocks(self, desk_basis):
        zero = BlockCovariance.from_blocks(
            [np.zeros((p, p)) for p in desk_basis.p_k], [0.1] * len(desk_basis.p_k)
        )
        shrunken = shrink_block(zero)
        assert shrunken.ranks == (0,) * len(desk_basis.p_k)
        rm = recolor_matrices(_constant_mean(desk_basis), desk_basis)
        final, alphas = scale_block(
            recolor_block(shrunken, rm), rm, shrinkage_components(shrunken)
        )
        assert final.total_rank == 0
        assert all(not np.any(block) for block in final.blocks)
        assert all(alpha.size == 0 for alpha in alphas)


class TestKernel:
    def test_kernel_is_rotation_invariant(self, desk_basis, rng):
        final = _random_psd_blocks(desk_basis, rng)
        radii = rng.uniform(0, 13.5, size=(100, 2))
        phis = rng.uniform(0, 2 * math.pi, size=(100, 2))
        x = np.column_stack([radii[:, 0] * np.cos(phis[:, 0]), radii[:, 0] * np.sin(phis[:, 0])])
        y = np.column_stack([radii[:, 1] * np.cos(phis[:, 1]), radii[:, 1] * np.sin(phis[:, 1])])
        angles = rng.uniform(0, 2 * math.pi, size=100)
        for i in range(100):
            c, s = math.cos(angles[i]), math.sin(angles[i])
            rotation = np.array([[c, -s], [s, c]])
            before = covariance_kernel(final, desk_basis, x[i], y[i])
            after = covariance_kernel(final, desk_basis, rotation @ x[i], rotation @ y[i])
            assert_allclose(after, before, rtol=1e-8, atol=1e-10)

    def test_kernel_on_the_grid_is_symmetric_psd(self, desk_basis, rng):
        final = _random_psd_blocks(desk_basis, rng)
        kernel = covariance_kernel(final, desk_basis, grid_points(32))
        assert kernel.shape == (1024, 1024)
        assert_allclose(kernel, kernel.T, atol=1e-10)
        assert np.linalg.eigvalsh(kernel).min() > -1e-8 * np.abs(kernel).max()


class TestFit:
    def test_single_image_fit_keeps_no_components(self, desk_truth):
        for seed in range(20):
            clean = draw_clean_stack(desk_truth, 1, seed=seed)
            counts = poisson_observe(clean, seed=seed + 50)
            model = fit_sepca(counts, support_radius=14, band_limit=0.15)
            assert all(rank == 0 for rank in model.ranks)
            assert all(rank == 0 for rank in model.shrunken_ranks)
            assert model.covariance.total_rank == 0
            assert all(not np.any(block) for block in model.covariance.blocks)

    def test_single_image_with_automatic_geometry(self, desk_truth):
        counts = poisson_observe(draw_clean_stack(desk_truth, 1, seed=2), seed=3)
        model = fit_sepca(counts)
        assert model.covariance.total_rank == 0
        assert "flat_spectrum" in model.warnings

    def test_model_bookkeeping(self, desk_truth):
        clean = draw_clean_stack(desk_truth, 300, seed=11)
        counts = poisson_observe(clean, seed=12)
        model = fit_sepca(counts, support_radius=14, band_limit=0.15, threads=2)
        assert model.support_radius == 14
        assert model.band_limit == 0.15
        assert len(model.ranks) == model.basis.k_max + 1
        assert all(len(alpha) == rank for alpha, rank in zip(model.alphas, model.ranks))
        assert all(np.all(alpha > 0) for alpha in model.alphas)
        values, images = model.eigenimages(3)
        assert images.shape == (min(3, model.covariance.total_rank), 32, 32)
        assert np.all(np.diff(values) <= 0)

    @pytest.mark.slow
    def test_beats_the_raw_sample_covariance(self, desk_truth):
        truth = true_covariance(desk_truth)
        wins = 0
        for seed in range(10):
            clean = draw_clean_stack(desk_truth, 5000, seed=2 * seed)
            counts = poisson_observe(clean, seed=2 * seed + 1)
            model = fit_sepca(counts, support_radius=14, band_limit=0.15)
            estimate = covariance_kernel(model.covariance, model.basis, grid_points(32))
            sepca_error = covariance_error(estimate, truth)["frobenius_err"]
            raw_error = covariance_error(run_raw(counts).covariance, truth)["frobenius_err"]
            wins += sepca_error <= 0.5 * raw_error
        assert wins >= 8

    @pytest.mark.slow
    def test_recovers_the_ranks_of_the_bright_preset(self):
        truth = preset_model("bright", seed=0)
        assert sum(truth.signal_ranks) == 5
        recovered = 0
        for seed in range(10):
            clean = draw_clean_stack(truth, 5000, seed=40 + seed)
            counts = poisson_observe(clean, seed=60 + seed)
            model = fit_sepca(counts, support_radius=14, band_limit=0.15)
            recovered += 4 <= sum(model.ranks) <= 8
        assert recovered >= 8

    @pytest.mark.slow
    def test_zero_signal_keeps_no_components(self, desk_params):
        truth = build_ground_truth(desk_params, {}, intensity_scale=0.05, seed=4)
        empty = 0
        for seed in range(10):
            clean = draw_clean_stack(truth, 2000, seed=80 + seed)
            counts = poisson_observe(clean, seed=90 + seed)
            model = fit_sepca(counts, support_radius=14, band_limit=0.15)
            empty += sum(model.ranks) == 0
        assert empty >= 9
