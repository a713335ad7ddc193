"""Ot command for wassquant CLI."""
import argparse

from wassquant.core.parsers import read_measure, write_plan
from wassquant.core.transport import METHODS, wasserstein
from .base import BaseCommand, status


def format_cost(value: float) -> str:
    """12 significant digits, trailing zeros kept."""
    return f"{value:#.12g}"


class OtCommand(BaseCommand):
    """Exact p-Wasserstein distance between two measure files."""

    name = "ot"
    help = "Compute W_p between two measure files"

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("mu", help="First measure file (JSON)")
        parser.add_argument("nu", help="Second measure file (JSON)")
        parser.add_argument(
            "--p", type=float, default=2.0, help="Order p >= 1 (default: 2)"
        )
        parser.add_argument(
            "--method", choices=METHODS, default="auto", help="Solver (default: auto)"
        )
        parser.add_argument(
            "--plan", help="Write the optimal coupling to this JSON file"
        )

    @classmethod
    def run(cls, args: argparse.Namespace) -> int:
        mu = read_measure(args.mu)
        nu = read_measure(args.nu)
        result = wasserstein(mu, nu, args.p, method=args.method)
        print(format_cost(result.cost))
        if args.plan:
            path = write_plan(args.plan, result.plan, result.cost, result.p)
            status(f"✅ Wrote plan ({result.plan.nnz} entries) to {path}")
        return 0
