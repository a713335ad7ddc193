"""Decompose command for wassquant CLI."""
import argparse
import json
from dataclasses import replace
from pathlib import Path

from wassquant.config import load_config
from wassquant.core.parsers import write_summary
from wassquant.core.quantization import LloydConfig
from wassquant.core.rates import decomposition_terms
from wassquant.errors import ConfigError
from .base import BaseCommand, status


class DecomposeCommand(BaseCommand):
    """Print the distance decomposition terms for one (n, k)."""

    name = "decompose"
    help = "Evaluate the decomposition terms a-f for a config's sampler"

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser) -> None:
        parser.add_argument(
            "config", help="Experiment config with a 'decomposition' section"
        )
        parser.add_argument("--n", type=int, help="Override the sample size")
        parser.add_argument("--k", type=int, help="Override the codebook size")
        parser.add_argument("--seed", type=int, help="Override the seed")
        parser.add_argument("--out-dir", help="Also write decomposition.json here")

    @classmethod
    def run(cls, args: argparse.Namespace) -> int:
        cfg = load_config(args.config)
        if cfg.decomposition is None:
            raise ConfigError(f"{args.config} has no 'decomposition' section")
        overrides = {
            key: getattr(args, key)
            for key in ("n", "k", "seed")
            if getattr(args, key) is not None
        }
        dec = replace(cfg.decomposition, **overrides)
        terms = decomposition_terms(
            cfg.sampler,
            dec.n,
            dec.k,
            dec.seed,
            ref_multiplier=dec.ref_multiplier,
            quantizer_factor=dec.quantizer_factor,
            quantizer_restarts=dec.quantizer_restarts,
            lloyd_cfg=LloydConfig(
                k=dec.k,
                restarts=cfg.lloyd.restarts,
                max_iters=cfg.lloyd.max_iters,
                rel_tol=cfg.lloyd.rel_tol,
            ),
        )
        record = dict(terms.as_dict(), sampler=cfg.sampler.name, seed=dec.seed)
        if args.out_dir:
            path = write_summary(Path(args.out_dir) / "decomposition.json", record)
            status(f"✅ Wrote {path}")
        print(json.dumps(record, sort_keys=True))
        return 0
