""" This file is the entry point for the application.
It parses the command line, configures logging and runs one command. """

import sys

from steerable_epca.commands import run_command
from steerable_epca.helper.cli import parse_cli
from steerable_epca.settings import Settings


def main(argv=None) -> int:
    """Run the command named on the command line and return its exit code."""
    args = parse_cli(argv)
    settings = Settings(args)
    return run_command(args, settings)["exit_code"]


# Run the app
if __name__ == "__main__":
    sys.exit(main())
