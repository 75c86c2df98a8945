""" This module contains the default values, presets and runtime settings. """

import logging

from steerable_epca.helper.threads import resolve_thread_count

VERSION = "0.1.0"

LOG_FORMAT = "%(asctime)s - %(levelname)s - %(message)s"
FILE_LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

STACK_SUFFIX = ".stack"
STACK_BLOB_SUFFIX = ".bin"
TRUTH_FILE = "truth.gt"
CLEAN_FILE = "clean" + STACK_SUFFIX
COUNTS_FILE = "counts" + STACK_SUFFIX

DEFAULT_SEED = 0
DEFAULT_RHO = 0.1
DEFAULT_PERMUTATIONS = 30
DEFAULT_EPSILON = 0.1
DEFAULT_SUPPORT_FRACTION = 0.999
DEFAULT_BAND_FRACTION = 0.999
EPCA_MAX_SIDE = 32

METHODS = ("raw", "pca", "spca", "epca", "sepca")

EXIT_SUCCESS = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4

PRESETS = {
    "desk": {
        "image_size": 32,
        "support_radius": 14,
        "band_limit": 0.15,
        "intensity_scale": 0.05,
        "ranks": {0: 2, 1: 1, 2: 1, 3: 1},
    },
    "bright": {
        "image_size": 32,
        "support_radius": 14,
        "band_limit": 0.15,
        "intensity_scale": 1.0,
        "ranks": {0: 2, 1: 1, 2: 1, 3: 1},
    },
    "paper": {
        "image_size": 128,
        "support_radius": 61,
        "band_limit": 0.08,
        "intensity_scale": 0.01,
        "ranks": {0: 3, 1: 2, 2: 2, 3: 1, 4: 1, 5: 1},
    },
}


class Settings:
    """Runtime settings, populated from the parsed command line."""

    def __init__(self, args: dict | None = None):
        self.dev: bool = False
        self.version: str = VERSION
        self.threads: int = resolve_thread_count()
        self.seed: int = DEFAULT_SEED
        self.log_file: str | None = None

        if args:
            self._parse_cli(args)
        self.set_logging()

    def set_logging(self):
        """Set the logging configuration."""
        if self.dev:
            logging.basicConfig(level=logging.DEBUG, format=LOG_FORMAT)
        else:
            logging.basicConfig(level=logging.INFO, format=LOG_FORMAT)
        if self.log_file:
            file_handler = logging.FileHandler(self.log_file)
            file_handler.setLevel(logging.DEBUG if self.dev else logging.INFO)
            file_handler.setFormatter(logging.Formatter(FILE_LOG_FORMAT))
            logging.getLogger().addHandler(file_handler)

    def _parse_cli(self, args: dict):
        """Copy the CLI options that drive every command."""
        self.dev = args.get("Verbose", False)
        self.threads = resolve_thread_count(args.get("Threads"))
        self.seed = args.get("Seed", DEFAULT_SEED)
        self.log_file = args.get("LogFile")
        logging.debug("Worker threads: %s", self.threads)
