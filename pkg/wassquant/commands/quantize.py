"""Quantize command for wassquant CLI."""
import argparse
from pathlib import Path

from wassquant.core.parsers import (
    read_sample,
    write_codebook,
    write_labels,
    write_measure,
)
from wassquant.core.quantization import LloydConfig, decode, encode, lloyd
from wassquant.errors import check_dims
from .base import BaseCommand, status
from .ot import format_cost


class QuantizeCommand(BaseCommand):
    """Learn a k-point measure from a sample with k-means."""

    name = "quantize"
    help = "Fit k-means to a sample and write codebook, measure and labels"

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("sample", help="Sample file (JSON)")
        parser.add_argument("k", type=int, help="Number of centers")
        parser.add_argument(
            "--seed", type=int, default=0, help="Seed of the k-means++ restarts"
        )
        parser.add_argument(
            "--restarts", type=int, default=10, help="Lloyd restarts (default: 10)"
        )
        parser.add_argument(
            "--max-iters",
            type=int,
            default=200,
            help="Lloyd iteration cap (default: 200)",
        )
        parser.add_argument("--dim", type=int, help="Expected dimension of the sample")
        parser.add_argument(
            "--out-dir", default=".", help="Directory for the output files"
        )

    @classmethod
    def run(cls, args: argparse.Namespace) -> int:
        sample = read_sample(args.sample)
        if args.dim is not None:
            check_dims(sample.shape[1], args.dim, "sample and --dim")
        cfg = LloydConfig(
            k=args.k, seed=args.seed, restarts=args.restarts, max_iters=args.max_iters
        )
        result = lloyd(sample, cfg)
        labels = encode(sample, result.codebook)
        measure = decode(labels, result.codebook)

        out_dir = Path(args.out_dir)
        for path in (
            write_codebook(out_dir / "codebook.json", result.codebook),
            write_measure(out_dir / "measure.json", measure),
            write_labels(out_dir / "labels.json", labels, result.codebook.k),
        ):
            status(f"✅ Wrote {path}")
        print(format_cost(result.empirical_cost))
        return 0
