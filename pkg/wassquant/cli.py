"""
Command Line Interface for wassquant
"""

import argparse
import logging
import sys
from typing import Dict, List, Optional, Type

from wassquant.commands import COMMANDS, BaseCommand, get_command_class

LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"


class CLI:
    """Command Line Interface for wassquant"""

    def __init__(self) -> None:
        self.commands: Dict[str, Type[BaseCommand]] = {}
        self._load_commands()

    def _load_commands(self) -> None:
        """Load all available commands."""
        self.commands = {name: get_command_class(name) for name in COMMANDS}

    def _create_parser(self) -> argparse.ArgumentParser:
        """Create and configure the argument parser."""
        parser = argparse.ArgumentParser(
            prog="wassquant",
            description=(
                "wassquant - Wasserstein distances, k-means measure learning "
                "and rate experiments"
            ),
        )
        parser.add_argument(
            "--version", action="store_true", help="Show version and exit"
        )
        parser.add_argument(
            "--verbose", action="store_true", help="Log debug output to stderr"
        )

        subparsers = parser.add_subparsers(
            dest="command", help="Command to run", metavar="command"
        )
        for cmd_name, cmd_class in self.commands.items():
            cmd_parser = subparsers.add_parser(cmd_name, help=cmd_class.help)
            cmd_class.add_arguments(cmd_parser)
            cmd_parser.set_defaults(func=cmd_class.execute)
        return parser

    def run(self, argv: Optional[List[str]] = None) -> int:
        """Run the CLI.

        Args:
            argv: Arguments without the program name (default: sys.argv[1:])

        Returns:
            int: Exit code (0 ok, 2 parse, 3 dimension, 4 parameter)
        """
        parser = self._create_parser()
        try:
            args = parser.parse_args(argv)
        except SystemExit as e:
            # argparse exits 2 on bad usage and 0 on --help
            return int(e.code or 0)

        if args.version:
            from wassquant import __version__

            print(f"wassquant v{__version__}")
            return 0

        logging.basicConfig(
            level=logging.DEBUG if args.verbose else logging.WARNING,
            format=LOG_FORMAT,
            stream=sys.stderr,
        )

        if not hasattr(args, "func"):
            parser.print_help()
            return 0
        return args.func(args)


def main() -> None:
    """Main entry point for CLI."""
    cli = CLI()
    try:
        code = cli.run()
    except KeyboardInterrupt:
        print("\n👋 Interrupted by user", file=sys.stderr)
        code = 130
    sys.exit(code)


if __name__ == "__main__":
    main()
