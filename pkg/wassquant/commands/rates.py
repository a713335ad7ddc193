"""Rates command for wassquant CLI."""
import argparse
import json
from dataclasses import replace
from pathlib import Path

from wassquant.config import load_config
from wassquant.core.parsers import write_rate_csv, write_summary
from wassquant.core.plotting import render_loglog_svg
from wassquant.core.rates import run_rate_experiment
from wassquant.errors import ConfigError
from .base import BaseCommand, status


class RatesCommand(BaseCommand):
    """Run a convergence-rate experiment from a config file."""

    name = "rates"
    help = "Run a rate experiment and write CSV, summary JSON and an optional SVG"

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("config", help="Experiment config (JSON, schema v1)")
        parser.add_argument("--seed", type=int, help="Override the experiment seed")
        parser.add_argument(
            "--out-dir", default=".", help="Directory for rates.csv and summary.json"
        )
        parser.add_argument("--svg", help="Also write a log-log plot to this file")

    @classmethod
    def run(cls, args: argparse.Namespace) -> int:
        cfg = load_config(args.config)
        if cfg.rates is None:
            raise ConfigError(f"{args.config} has no 'rates' section")
        rate_cfg = cfg.rates
        if args.seed is not None:
            rate_cfg = replace(rate_cfg, seed=args.seed)
        result = run_rate_experiment(rate_cfg)

        out_dir = Path(args.out_dir)
        summary = result.summary()
        status(f"✅ Wrote {write_rate_csv(out_dir / 'rates.csv', result.records)}")
        status(f"✅ Wrote {write_summary(out_dir / 'summary.json', summary)}")
        if args.svg:
            status(f"✅ Wrote {render_loglog_svg(args.svg, result)}")
        if not result.passed:
            status(f"⚠️  Slope {result.slope:.4f} outside band {list(result.band)}")
        headline = ("slope", "stderr", "band", "passed")
        print(json.dumps({key: summary[key] for key in headline}))
        return 0
