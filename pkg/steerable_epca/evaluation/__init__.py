"""Evaluation module for steerable ePCA.

Error metrics and the paired comparison driver: every (n, seed) cell draws
one clean stack and one count stack, and every method is scored on those
same stacks against the ground truth.
"""

import csv
from dataclasses import dataclass, field
import io
import json
import logging
import os
import time

import numpy as np
from scipy.linalg import norm

from steerable_epca.basis.fourier_bessel import BasisParams, build_basis
from steerable_epca.classes.errors import InvalidArgumentError
from steerable_epca.classes.groundtruth import GroundTruthModel
from steerable_epca.classes.imagestack import ImageStack
from steerable_epca.converter.lib.noindent import CustomEncoder, NoIndent
from steerable_epca.denoise import denoise_stack
from steerable_epca.estimator import covariance_kernel, fit_sepca, resolve_geometry
from steerable_epca.evaluation.baselines import run_epca, run_pca, run_raw, run_spca
from steerable_epca.helper.threads import map_on_threads
from steerable_epca.settings import (
    DEFAULT_EPSILON,
    DEFAULT_PERMUTATIONS,
    DEFAULT_RHO,
    EPCA_MAX_SIDE,
    METHODS,
)
from steerable_epca.synth import draw_clean_stack, poisson_observe, true_covariance
from steerable_epca.transform import grid_points

logger = logging.getLogger(__name__)

CSV_COLUMNS = ("method", "n", "seed", "op_err", "fro_err", "mse", "rank_total", "wall_ms")
SUMMARY_METRICS = ("op_err", "fro_err", "mse", "rank_total", "wall_ms")
REPORT_CSV = "report.csv"
REPORT_SUMMARY = "summary.json"
BENCH_COLUMNS = ("n", "wall_ms", "ms_per_image")


def covariance_error(estimate, truth) -> dict:
    """Operator-norm and Frobenius-norm distance between two covariances."""
    estimate = np.asarray(estimate)
    truth = np.asarray(truth)
    if estimate.shape != truth.shape or estimate.ndim != 2:
        raise InvalidArgumentError(
            f"covariances must be matrices of equal shape, got {estimate.shape} and {truth.shape}"
        )
    difference = estimate - truth
    if difference.size == 0:
        return {"operator_norm_err": 0.0, "frobenius_err": 0.0}
    return {
        "operator_norm_err": float(norm(difference, 2)),
        "frobenius_err": float(norm(difference, "fro")),
    }


def mse(denoised: ImageStack, clean: ImageStack) -> float:
    """Squared error per pixel and image."""
    if denoised.pixels.shape != clean.pixels.shape:
        raise InvalidArgumentError(
            f"stacks differ in shape: {denoised.pixels.shape} and {clean.pixels.shape}"
        )
    if clean.n == 0:
        raise InvalidArgumentError("mean squared error of an empty stack")
    return float(np.mean((denoised.pixels - clean.pixels) ** 2))


@dataclass(frozen=True)
class ComparisonConfig:
    truth: GroundTruthModel
    methods: tuple = ("sepca",)
    n_grid: tuple = (100,)
    seeds: tuple = (0,)
    base_seed: int = 0
    threads: int | None = None
    timings: bool = True
    rho: float = DEFAULT_RHO
    n_perm: int = DEFAULT_PERMUTATIONS
    epsilon: float = DEFAULT_EPSILON
    # estimate R and c from the counts instead of taking the truth's
    auto_params: bool = False

    def __post_init__(self):
        unknown = [method for method in self.methods if method not in METHODS]
        if unknown or not self.methods:
            raise InvalidArgumentError(
                f"methods must be a non-empty subset of {METHODS}, got {list(self.methods)}"
            )
        if not self.n_grid or any(int(n) != n or n < 1 for n in self.n_grid):
            raise InvalidArgumentError(f"n grid must hold positive integers, got {self.n_grid}")
        if not self.seeds:
            raise InvalidArgumentError("at least one seed is required")
        side = self.truth.basis.params.image_size
        if "epca" in self.methods and side > EPCA_MAX_SIDE:
            raise InvalidArgumentError(
                f"the epca baseline is limited to L <= {EPCA_MAX_SIDE}, truth has L={side}"
            )


@dataclass
class PipelineReport:
    """One row per (method, n, seed), ordered by n, then seed, then method."""

    rows: list
    methods: tuple
    n_grid: tuple
    seeds: tuple
    warnings: list = field(default_factory=list)

    def csv_text(self) -> str:
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in self.rows:
            writer.writerow({column: row[column] for column in CSV_COLUMNS})
        return buffer.getvalue()

    def summary(self) -> dict:
        """Medians and inter-seed ranges per method and n."""
        groups = []
        for method in self.methods:
            for n in self.n_grid:
                cell = [row for row in self.rows if row["method"] == method and row["n"] == n]
                if not cell:
                    continue
                entry = {"method": method, "n": n, "seeds": len(cell)}
                for metric in SUMMARY_METRICS:
                    values = np.array([row[metric] for row in cell], dtype=float)
                    entry[metric] = {
                        "median": float(np.median(values)),
                        "range": NoIndent([float(values.min()), float(values.max())]),
                    }
                groups.append(entry)
        return {
            "columns": NoIndent(list(CSV_COLUMNS)),
            "methods": NoIndent(list(self.methods)),
            "n_grid": NoIndent(list(self.n_grid)),
            "seeds": NoIndent(list(self.seeds)),
            "warnings": NoIndent(sorted(set(self.warnings))),
            "groups": groups,
        }

    def write(self, directory: str) -> dict:
        """Write the CSV and the JSON summary; returns their paths."""
        os.makedirs(directory, exist_ok=True)
        paths = {
            "csv": os.path.join(directory, REPORT_CSV),
            "summary": os.path.join(directory, REPORT_SUMMARY),
        }
        with open(paths["csv"], "w", encoding="utf-8", newline="") as f:
            f.write(self.csv_text())
        with open(paths["summary"], "w", encoding="utf-8") as f:
            f.write(json.dumps(self.summary(), indent=2, cls=CustomEncoder))
            f.write("\n")
        logger.info("Wrote report to %s", directory)
        return paths


def _geometry(config: ComparisonConfig, counts: ImageStack) -> tuple:
    if config.auto_params:
        return resolve_geometry(counts)
    params = config.truth.basis.params
    return params.support_radius, params.band_limit, ()


def _run_sepca(counts: ImageStack, support_radius, band_limit) -> tuple:
    model = fit_sepca(counts, support_radius, band_limit, threads=1)
    covariance = covariance_kernel(
        model.covariance, model.basis, grid_points(counts.image_size)
    )
    return covariance, denoise_stack(counts, model, threads=1), model.covariance.total_rank


def _run_method(method: str, counts: ImageStack, config: ComparisonConfig, geometry, seeds):
    support_radius, band_limit, _ = geometry
    if method == "raw":
        result = run_raw(counts)
    elif method == "pca":
        result = run_pca(counts, config.rho, config.n_perm, seeds["pca"], threads=1)
    elif method == "epca":
        result = run_epca(
            counts, config.rho, config.n_perm, config.epsilon, seeds["epca"], threads=1
        )
    elif method == "spca":
        basis = build_basis(BasisParams(band_limit, support_radius, counts.image_size))
        result = run_spca(counts, basis, threads=1)
    else:
        return _run_sepca(counts, support_radius, band_limit)
    return result.covariance, result.denoised, result.rank


def _run_cell(config: ComparisonConfig, truth_cov: np.ndarray, n: int, seed: int) -> tuple:
    sequence = np.random.SeedSequence([config.base_seed, seed, n])
    clean_seed, noise_seed, pca_seed, epca_seed = sequence.spawn(4)
    clean = draw_clean_stack(config.truth, n, clean_seed)
    counts = poisson_observe(clean, noise_seed)
    geometry = _geometry(config, counts)
    seeds = {"pca": pca_seed, "epca": epca_seed}

    rows = []
    for method in config.methods:
        start = time.perf_counter()
        covariance, denoised, rank = _run_method(method, counts, config, geometry, seeds)
        elapsed = (time.perf_counter() - start) * 1000.0
        errors = covariance_error(covariance, truth_cov)
        rows.append(
            {
                "method": method,
                "n": n,
                "seed": seed,
                "op_err": errors["operator_norm_err"],
                "fro_err": errors["frobenius_err"],
                "mse": mse(denoised, clean),
                "rank_total": int(rank),
                "wall_ms": round(elapsed, 3) if config.timings else 0.0,
            }
        )
        logger.debug("%s n=%s seed=%s took %.1f ms", method, n, seed, elapsed)
    return rows, list(geometry[2])


def run_comparison(config: ComparisonConfig) -> PipelineReport:
    """Score every method on paired stacks over the n grid and the seeds."""
    truth_cov = true_covariance(config.truth)
    cells = [(int(n), int(seed)) for n in config.n_grid for seed in config.seeds]
    logger.info(
        "Comparing %s over n=%s with %s seed(s): %s cells",
        ",".join(config.methods),
        list(config.n_grid),
        len(config.seeds),
        len(cells),
    )
    results = map_on_threads(
        lambda cell: _run_cell(config, truth_cov, *cell), cells, config.threads
    )
    rows = [row for cell_rows, _ in results for row in cell_rows]
    warnings = [warning for _, cell_warnings in results for warning in cell_warnings]
    return PipelineReport(
        rows=rows,
        methods=tuple(config.methods),
        n_grid=tuple(int(n) for n in config.n_grid),
        seeds=tuple(int(seed) for seed in config.seeds),
        warnings=warnings,
    )


def bench(
    truth: GroundTruthModel,
    n_grid,
    seed: int = 0,
    threads: int | None = None,
) -> dict:
    """Estimate wall time over an n grid at the truth's image size.

    ``linearity`` is the growth of the time per image from the smallest to
    the largest n; 1 means exactly linear.
    """
    n_grid = sorted(int(n) for n in n_grid)
    if not n_grid or n_grid[0] < 1:
        raise InvalidArgumentError(f"n grid must hold positive integers, got {n_grid}")
    params = truth.basis.params
    rows = []
    for n, child in zip(n_grid, np.random.SeedSequence(seed).spawn(len(n_grid))):
        clean_seed, noise_seed = child.spawn(2)
        counts = poisson_observe(draw_clean_stack(truth, n, clean_seed), noise_seed)
        start = time.perf_counter()
        fit_sepca(counts, params.support_radius, params.band_limit, threads=threads)
        elapsed = (time.perf_counter() - start) * 1000.0
        rows.append({"n": n, "wall_ms": elapsed, "ms_per_image": elapsed / n})
        logger.info("Estimate on n=%s took %.1f ms", n, elapsed)
    linearity = rows[-1]["ms_per_image"] / rows[0]["ms_per_image"]
    return {"rows": rows, "linearity": float(linearity)}


def bench_csv_text(result: dict) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=BENCH_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in result["rows"]:
        writer.writerow(row)
    return buffer.getvalue()
