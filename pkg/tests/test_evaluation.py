import json
import math
import os

import numpy as np
import pytest
from numpy.testing import assert_allclose

from steerable_epca.classes.errors import InvalidArgumentError
from steerable_epca.classes.imagestack import ImageStack
from steerable_epca.evaluation import (
    CSV_COLUMNS,
    ComparisonConfig,
    bench,
    bench_csv_text,
    covariance_error,
    mse,
    run_comparison,
)


def test_identical_covariances():
    matrix = np.diag([3.0, 1.0])
    assert covariance_error(matrix, matrix) == {"operator_norm_err": 0.0, "frobenius_err": 0.0}


def test_zero_against_identity():
    errors = covariance_error(np.zeros((5, 5)), np.eye(5))
    assert_allclose(errors["operator_norm_err"], 1.0)
    assert_allclose(errors["frobenius_err"], math.sqrt(5))


def test_norms_match_the_singular_values(rng):
    a = rng.standard_normal((6, 6))
    b = rng.standard_normal((6, 6))
    singular = np.linalg.svd(a - b, compute_uv=False)
    errors = covariance_error(a, b)
    assert_allclose(errors["operator_norm_err"], singular[0], rtol=1e-12)
    assert_allclose(errors["frobenius_err"], np.sqrt(np.sum(singular**2)), rtol=1e-12)


def test_shape_mismatch():
    with pytest.raises(InvalidArgumentError):
        covariance_error(np.eye(2), np.eye(3))


def test_mse():
    clean = ImageStack(np.zeros((2, 2, 2)))
    assert mse(clean, clean) == 0.0
    assert mse(ImageStack(np.full((2, 2, 2), 3.0)), clean) == 9.0
    with pytest.raises(InvalidArgumentError):
        mse(ImageStack(np.zeros((1, 2, 2))), clean)
    with pytest.raises(InvalidArgumentError):
        mse(ImageStack(np.zeros((0, 2, 2))), ImageStack(np.zeros((0, 2, 2))))


def test_config_validation(desk_truth):
    with pytest.raises(InvalidArgumentError):
        ComparisonConfig(truth=desk_truth, methods=("sepca", "ppca"))
    with pytest.raises(InvalidArgumentError):
        ComparisonConfig(truth=desk_truth, methods=())
    with pytest.raises(InvalidArgumentError):
        ComparisonConfig(truth=desk_truth, n_grid=(0,))
    with pytest.raises(InvalidArgumentError):
        ComparisonConfig(truth=desk_truth, seeds=())


def test_single_cell_comparison(desk_truth):
    config = ComparisonConfig(truth=desk_truth, methods=("raw", "sepca"), n_grid=(100,))
    report = run_comparison(config)
    assert [row["method"] for row in report.rows] == ["raw", "sepca"]
    for row in report.rows:
        assert row["n"] == 100
        assert row["seed"] == 0
        assert row["op_err"] <= row["fro_err"]
        assert row["mse"] > 0
    assert report.rows[0]["rank_total"] == 100 - 1


def test_comparison_is_reproducible_without_timings(desk_truth):
    config = ComparisonConfig(
        truth=desk_truth, methods=("sepca",), n_grid=(60, 80), seeds=(0, 1), timings=False
    )
    first = run_comparison(config)
    again = run_comparison(ComparisonConfig(**{**config.__dict__, "threads": 3}))
    assert first.csv_text() == again.csv_text()
    assert [(row["n"], row["seed"]) for row in first.rows] == [(60, 0), (60, 1), (80, 0), (80, 1)]
    assert all(row["wall_ms"] == 0.0 for row in first.rows)


def test_report_files(desk_truth, tmp_path):
    config = ComparisonConfig(truth=desk_truth, n_grid=(80,), seeds=(0, 1), timings=False)
    report = run_comparison(config)
    paths = report.write(str(tmp_path / "out"))
    with open(paths["csv"], encoding="utf-8") as f:
        lines = f.read().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 3
    with open(paths["summary"], encoding="utf-8") as f:
        summary = json.load(f)
    assert summary["columns"] == list(CSV_COLUMNS)
    (group,) = summary["groups"]
    assert group["method"] == "sepca"
    assert group["seeds"] == 2
    low, high = group["fro_err"]["range"]
    assert low <= group["fro_err"]["median"] <= high
    assert os.path.basename(paths["summary"]) == "summary.json"


def test_bench_rows(desk_truth):
    result = bench(desk_truth, [40, 20], seed=1, threads=1)
    assert [row["n"] for row in result["rows"]] == [20, 40]
    assert result["linearity"] > 0
    assert bench_csv_text(result).splitlines()[0] == "n,wall_ms,ms_per_image"
    with pytest.raises(InvalidArgumentError):
        bench(desk_truth, [])


@pytest.mark.slow
def test_every_method_runs(desk_truth):
    config = ComparisonConfig(
        truth=desk_truth,
        methods=("raw", "pca", "spca", "epca", "sepca"),
        n_grid=(200,),
        n_perm=10,
        timings=False,
    )
    report = run_comparison(config)
    rows = {row["method"]: row for row in report.rows}
    assert set(rows) == {"raw", "pca", "spca", "epca", "sepca"}
    assert rows["sepca"]["fro_err"] < rows["raw"]["fro_err"]
    assert rows["sepca"]["mse"] < rows["raw"]["mse"]


@pytest.mark.slow
def test_sepca_denoises_at_least_as_well_as_epca(desk_truth):
    config = ComparisonConfig(
        truth=desk_truth,
        methods=("raw", "epca", "sepca"),
        n_grid=(1000,),
        seeds=tuple(range(10)),
        timings=False,
    )
    report = run_comparison(config)
    wins = 0
    for seed in config.seeds:
        rows = {row["method"]: row["mse"] for row in report.rows if row["seed"] == seed}
        wins += rows["sepca"] < rows["raw"] and rows["sepca"] <= rows["epca"]
    assert wins >= 8


@pytest.mark.slow
def test_sepca_mse_does_not_grow_with_n(desk_truth):
    config = ComparisonConfig(
        truth=desk_truth,
        methods=("sepca",),
        n_grid=(100, 1000, 10000),
        seeds=(0, 1, 2),
        timings=False,
    )
    groups = {group["n"]: group for group in run_comparison(config).summary()["groups"]}
    medians = [groups[n]["mse"]["median"] for n in config.n_grid]
    for smaller, larger in zip(medians, medians[1:]):
        assert larger <= 1.05 * smaller


@pytest.mark.slow
def test_estimate_time_grows_linearly(desk_truth):
    result = bench(desk_truth, [1000, 10000], seed=3)
    assert result["linearity"] <= 1.3
