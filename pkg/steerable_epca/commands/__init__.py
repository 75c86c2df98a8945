"""Commands module for steerable ePCA.

Each command reads its files, calls the library and writes its outputs.
Commands return result dicts ``{"success", "message", "exit_code"}``;
``run_command`` maps library exceptions onto exit codes.
"""

import logging
import os

import numpy as np
from numpy.linalg import LinAlgError

from steerable_epca.classes.errors import (
    DataFormatError,
    DegenerateInputError,
    EmptyBasisError,
    GroundTruthError,
    InvalidArgumentError,
    NumericalError,
)
from steerable_epca.converter.convert import (
    format_inspection,
    inspect_container,
    load_model,
    load_truth,
    save_model,
    save_truth,
)
from steerable_epca.denoise import denoise_stack
from steerable_epca.estimator import fit_sepca
from steerable_epca.evaluation import (
    ComparisonConfig,
    bench,
    bench_csv_text,
    run_comparison,
)
from steerable_epca.helper.fileprocessing import read_stack, write_stack
from steerable_epca.settings import (
    CLEAN_FILE,
    COUNTS_FILE,
    EXIT_DATA,
    EXIT_NUMERICAL,
    EXIT_SUCCESS,
    EXIT_USAGE,
    TRUTH_FILE,
    Settings,
)
from steerable_epca.synth import draw_clean_stack, poisson_observe, preset_model

DATA_ERRORS = (DataFormatError, DegenerateInputError, GroundTruthError, OSError)
NUMERICAL_ERRORS = (NumericalError, EmptyBasisError, LinAlgError)


def _success(message: str) -> dict:
    logging.info(message)
    return {"success": True, "message": message, "exit_code": EXIT_SUCCESS}


def _failure(message: str, exit_code: int) -> dict:
    logging.error(message)
    return {"success": False, "message": message, "exit_code": exit_code}


def _load_stack(path: str):
    loaded = read_stack(path)
    if not loaded["success"]:
        raise DataFormatError(f"{path}: {loaded['message']}")
    return loaded["stack"]


def _save_stack(stack, path: str):
    written = write_stack(stack, path)
    if not written["success"]:
        raise OSError(f"{path}: {written['message']}")


def cmd_generate(args: dict, settings: Settings) -> dict:
    """Clean stack, count stack and ground-truth file of a preset."""
    truth = preset_model(args["Preset"], settings.seed)
    clean_seed, noise_seed = np.random.SeedSequence(settings.seed).spawn(2)
    clean = draw_clean_stack(truth, args["N"], clean_seed)
    counts = poisson_observe(clean, noise_seed)
    out = args["Out"]
    os.makedirs(out, exist_ok=True)
    _save_stack(clean, os.path.join(out, CLEAN_FILE))
    _save_stack(counts, os.path.join(out, COUNTS_FILE))
    save_truth(truth, os.path.join(out, TRUTH_FILE))
    return _success(
        f"Generated {args['N']} images of preset {args['Preset']} in {out} "
        f"(mean count {counts.pixels.mean():.4f})"
    )


def cmd_estimate(args: dict, settings: Settings) -> dict:
    stack = _load_stack(args["In"])
    model = fit_sepca(
        stack,
        support_radius=args["SupportRadius"],
        band_limit=args["BandLimit"],
        include_reflections=args["IncludeReflections"],
        threads=settings.threads,
    )
    save_model(model, args["Out"])
    return _success(
        f"Model written to {args['Out']}: R={model.support_radius} "
        f"c={model.band_limit:.4f} ranks={list(model.ranks)}"
    )


def cmd_denoise(args: dict, settings: Settings) -> dict:
    model = load_model(args["Model"])
    stack = _load_stack(args["In"])
    if stack.image_size != model.basis.params.image_size:
        raise DataFormatError(
            f"model was fitted on L={model.basis.params.image_size}, stack has L={stack.image_size}"
        )
    denoised = denoise_stack(stack, model, threads=settings.threads)
    _save_stack(denoised, args["Out"])
    return _success(f"Denoised {stack.n} images into {args['Out']}")


def cmd_evaluate(args: dict, settings: Settings) -> dict:
    truth = load_truth(os.path.join(args["Truth"], TRUTH_FILE))
    config = ComparisonConfig(
        truth=truth,
        methods=tuple(args["Methods"]),
        n_grid=tuple(args["NGrid"]),
        seeds=tuple(range(args["Seeds"])),
        base_seed=settings.seed,
        threads=settings.threads,
        timings=args["Timings"],
        rho=args["Rho"],
        n_perm=args["Permutations"],
        epsilon=args["Epsilon"],
        auto_params=args["AutoParams"],
    )
    report = run_comparison(config)
    paths = report.write(args["Out"])
    return _success(f"Wrote {len(report.rows)} rows to {paths['csv']} and {paths['summary']}")


def cmd_bench(args: dict, settings: Settings) -> dict:
    if args["Truth"]:
        truth = load_truth(os.path.join(args["Truth"], TRUTH_FILE))
    else:
        truth = preset_model(args["Preset"], settings.seed)
    result = bench(truth, args["NGrid"], settings.seed, settings.threads)
    text = bench_csv_text(result)
    if args["Out"]:
        with open(args["Out"], "w", encoding="utf-8", newline="") as f:
            f.write(text)
    else:
        print(text, end="")
    return _success(f"Time per image grew {result['linearity']:.3f}x over the n grid")


def cmd_inspect(args: dict, settings: Settings) -> dict:
    print(format_inspection(inspect_container(args["In"])))
    return _success(f"Inspected {args['In']}")


COMMANDS = {
    "generate": cmd_generate,
    "estimate": cmd_estimate,
    "denoise": cmd_denoise,
    "evaluate": cmd_evaluate,
    "bench": cmd_bench,
    "inspect": cmd_inspect,
}


def run_command(args: dict, settings: Settings) -> dict:
    """Run the parsed command, turning library failures into exit codes."""
    command = COMMANDS[args["Command"]]
    try:
        return command(args, settings)
    except InvalidArgumentError as e:
        return _failure(f"Invalid argument: {e}", EXIT_USAGE)
    except DATA_ERRORS as e:
        return _failure(f"Data error: {e}", EXIT_DATA)
    except NUMERICAL_ERRORS as e:
        return _failure(f"Numerical failure: {e}", EXIT_NUMERICAL)
