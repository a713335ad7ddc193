"""Base command class for wassquant CLI commands."""
import argparse
import logging
import sys

from wassquant.errors import WassquantError

logger = logging.getLogger(__name__)


def status(message: str) -> None:
    """Print a user-facing status line; stdout is kept for results."""
    print(message, file=sys.stderr)


class BaseCommand:
    """Base class for all wassquant commands.

    Subclasses implement run() and set the following class attributes:
    - name: str - The command name (used in CLI)
    - help: str - Help text for the command
    """

    name: str = ""
    help: str = ""

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser) -> None:
        """Add command-specific arguments to the parser.

        Args:
            parser: Argument parser to add arguments to
        """

    @classmethod
    def run(cls, args: argparse.Namespace) -> int:
        raise NotImplementedError("Subclasses must implement run()")

    @classmethod
    def execute(cls, args: argparse.Namespace) -> int:
        """Execute the command and translate failures into exit codes.

        Args:
            args: Parsed command line arguments

        Returns:
            int: 0 on success, the error's exit code otherwise
        """
        try:
            return cls.run(args)
        except WassquantError as e:
            status(f"❌ {e}")
            return e.exit_code
        except Exception as e:
            logger.debug("Unexpected failure in %s", cls.name, exc_info=True)
            status(f"❌ Error in {cls.name}: {e}")
            return 1
