"""Command line interface for the application."""

import argparse
import sys

from steerable_epca.settings import (
    DEFAULT_EPSILON,
    DEFAULT_PERMUTATIONS,
    DEFAULT_RHO,
    DEFAULT_SEED,
    EXIT_USAGE,
    METHODS,
    PRESETS,
    VERSION,
)

COMMANDS = ("generate", "estimate", "denoise", "evaluate", "bench", "inspect")
MIN_PERMUTATIONS = 10


def _auto_int(value):
    """'auto' or a positive integer."""
    if value == "auto":
        return None
    try:
        number = int(value)
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected 'auto' or an integer, got {value!r}") from e
    if number < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {number}")
    return number


def _auto_float(value):
    """'auto' or a real in (0, 0.5]."""
    if value == "auto":
        return None
    try:
        number = float(value)
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected 'auto' or a number, got {value!r}") from e
    if not 0 < number <= 0.5:
        raise argparse.ArgumentTypeError(f"band limit must lie in (0, 0.5], got {number}")
    return number


def _int_list(value):
    try:
        return [int(item) for item in value.split(",") if item.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {value!r}") from e


def _common_options():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "-v",
        "--verbose",
        action="store_true",
        default=False,
        help="Log at debug level.",
    )
    common.add_argument(
        "-t",
        "--threads",
        type=int,
        default=None,
        help="Cap worker threads (default: SEPCA_THREADS, then all cores).",
    )
    common.add_argument(
        "-s",
        "--seed",
        type=int,
        default=DEFAULT_SEED,
        help="Seed for every random draw of the command.",
    )
    common.add_argument(
        "--log-file",
        type=str,
        default=None,
        help="Also write the log to this file.",
    )
    return common


def build_parser():
    """The top-level parser with one subparser per command."""
    common = _common_options()
    parser = argparse.ArgumentParser(
        prog="steerable-epca",
        description="Steerable ePCA: covariance estimation and denoising of Poisson images.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {VERSION}")
    commands = parser.add_subparsers(dest="command", required=True)

    generate = commands.add_parser(
        "generate", parents=[common], help="Write a synthetic clean stack, count stack and truth."
    )
    generate.add_argument("--preset", choices=sorted(PRESETS), default="desk")
    generate.add_argument("--n", type=int, required=True, help="Number of images.")
    generate.add_argument("--out", type=str, required=True, help="Output directory.")

    estimate = commands.add_parser(
        "estimate", parents=[common], help="Fit a steerable ePCA model to a count stack."
    )
    estimate.add_argument("--in", dest="input", type=str, required=True)
    estimate.add_argument("--out", type=str, required=True, help="Model file to write.")
    estimate.add_argument("--R", dest="support_radius", type=_auto_int, default=None)
    estimate.add_argument("--c", dest="band_limit", type=_auto_float, default=None)
    estimate.add_argument(
        "--no-reflections",
        action="store_true",
        default=False,
        help="Do not augment the data with reflected images.",
    )

    denoise = commands.add_parser(
        "denoise", parents=[common], help="Denoise a count stack with a fitted model."
    )
    denoise.add_argument("--in", dest="input", type=str, required=True)
    denoise.add_argument("--model", type=str, required=True)
    denoise.add_argument("--out", type=str, required=True)

    evaluate = commands.add_parser(
        "evaluate", parents=[common], help="Compare methods against a ground truth."
    )
    evaluate.add_argument("--truth", type=str, required=True, help="Directory written by generate.")
    evaluate.add_argument("--methods", type=str, default="pca,spca,epca,sepca")
    evaluate.add_argument("--n-grid", type=_int_list, default=[100, 1000, 10000])
    evaluate.add_argument("--seeds", type=int, default=5, help="Number of seeds per n.")
    evaluate.add_argument("--out", type=str, required=True, help="Report directory.")
    evaluate.add_argument("--rho", type=float, default=DEFAULT_RHO)
    evaluate.add_argument("--permutations", type=int, default=DEFAULT_PERMUTATIONS)
    evaluate.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    evaluate.add_argument(
        "--auto-params",
        action="store_true",
        default=False,
        help="Estimate R and c from the counts instead of using the truth's.",
    )
    evaluate.add_argument(
        "--no-timings",
        action="store_true",
        default=False,
        help="Write 0 in the wall_ms column so reports are byte-reproducible.",
    )

    bench = commands.add_parser(
        "bench", parents=[common], help="Time the estimator over an n grid."
    )
    source = bench.add_mutually_exclusive_group()
    source.add_argument("--truth", type=str, default=None)
    source.add_argument("--preset", choices=sorted(PRESETS), default=None)
    bench.add_argument("--n-grid", type=_int_list, default=[1000, 10000])
    bench.add_argument("--out", type=str, default=None, help="CSV file (default: stdout).")

    inspect = commands.add_parser(
        "inspect", parents=[common], help="Print the index of a model or truth file."
    )
    inspect.add_argument("--in", dest="input", type=str, required=True)
    return parser


def parse_arguments(argv=None):
    """Parse command line arguments."""
    result = {}
    args = build_parser().parse_args(argv)
    if args.threads is not None and args.threads < 1:
        raise ValueError("--threads must be a positive integer.")

    result["Command"] = args.command
    result["Verbose"] = args.verbose
    result["Threads"] = args.threads
    result["Seed"] = args.seed
    result["LogFile"] = args.log_file

    if args.command == "generate":
        if args.n < 1:
            raise ValueError(f"--n must be at least 1, got {args.n}.")
        result["Preset"] = args.preset
        result["N"] = args.n
        result["Out"] = args.out
    elif args.command == "estimate":
        result["In"] = args.input
        result["Out"] = args.out
        result["SupportRadius"] = args.support_radius
        result["BandLimit"] = args.band_limit
        result["IncludeReflections"] = not args.no_reflections
    elif args.command == "denoise":
        result["In"] = args.input
        result["Model"] = args.model
        result["Out"] = args.out
    elif args.command == "evaluate":
        methods = [method.strip() for method in args.methods.split(",") if method.strip()]
        unknown = [method for method in methods if method not in METHODS]
        if not methods or unknown:
            raise ValueError(f"--methods must name some of {', '.join(METHODS)}.")
        if not args.n_grid or min(args.n_grid) < 1:
            raise ValueError("--n-grid must hold positive integers.")
        if args.seeds < 1:
            raise ValueError("--seeds must be at least 1.")
        if not 0 < args.rho <= 1:
            raise ValueError("--rho must lie in (0, 1].")
        if args.permutations < MIN_PERMUTATIONS:
            raise ValueError(f"--permutations must be at least {MIN_PERMUTATIONS}.")
        if not 0 <= args.epsilon <= 1:
            raise ValueError("--epsilon must lie in [0, 1].")
        result["Truth"] = args.truth
        result["Methods"] = methods
        result["NGrid"] = args.n_grid
        result["Seeds"] = args.seeds
        result["Out"] = args.out
        result["Rho"] = args.rho
        result["Permutations"] = args.permutations
        result["Epsilon"] = args.epsilon
        result["AutoParams"] = args.auto_params
        result["Timings"] = not args.no_timings
    elif args.command == "bench":
        if not args.n_grid or min(args.n_grid) < 1:
            raise ValueError("--n-grid must hold positive integers.")
        result["Truth"] = args.truth
        result["Preset"] = args.preset or ("desk" if args.truth is None else None)
        result["NGrid"] = args.n_grid
        result["Out"] = args.out
    elif args.command == "inspect":
        result["In"] = args.input
    return result


def parse_cli(argv=None):
    """Parse command line arguments."""
    try:
        parsed_args = parse_arguments(argv)
        return parsed_args
    except ValueError as e:
        print(f"Error: {e}")
        print("Use -h for help.")
        # argparse exits with the same status on its own usage errors
        sys.exit(EXIT_USAGE)
