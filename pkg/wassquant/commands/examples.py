"""Examples command for wassquant CLI."""
import argparse

from wassquant.core.examples import create_example_files
from .base import BaseCommand, status

USAGE = """
wassquant usage examples:
=========================

  wassquant examples demo              # write the files below into demo/
  wassquant ot demo/mu.json demo/nu.json --plan plan.json
  wassquant quantize demo/sample.json 5 --seed 1 --out-dir quantized
  wassquant rates demo/rates_uniform_d1.json --out-dir out --svg out/rates.svg
  wassquant decompose demo/decompose_circle.json --k 8
"""


class ExamplesCommand(BaseCommand):
    """Create example inputs and show usage examples."""

    name = "examples"
    help = "Write example measure, sample and config files"

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser) -> None:
        parser.add_argument(
            "directory", nargs="?", default=".", help="Target directory (default: .)"
        )

    @classmethod
    def run(cls, args: argparse.Namespace) -> int:
        for path in create_example_files(args.directory):
            status(f"✅ Created example file: {path}")
        status(USAGE)
        return 0
