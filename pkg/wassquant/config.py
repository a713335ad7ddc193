"""
Experiment configuration files for the wassquant CLI.

A config is a JSON document with ``"schema": "v1"`` and the sections
``sampler``, ``rates``, ``lloyd`` and ``decomposition``. Unknown keys are
rejected at every level.
"""

import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

from wassquant.core.quantization import LloydConfig
from wassquant.core.rates import DEFAULT_MAX_COST_ENTRIES, RateConfig, RateMode
from wassquant.core.samplers import Sampler, as_int, sampler_from_dict, sampler_to_dict
from wassquant.errors import ConfigError, WassquantError

SCHEMA_VERSION = "v1"
THREADS_ENV = "WASSQUANT_THREADS"

TOP_LEVEL_KEYS = {"schema", "sampler", "rates", "lloyd", "decomposition"}
RATE_KEYS = {
    "n_grid", "trials", "ref_multiplier", "mode", "kmeans_constant",
    "scale_k_by_m", "seed", "max_cost_entries",
}
LLOYD_KEYS = {"restarts", "max_iters", "rel_tol"}
DECOMPOSITION_KEYS = {
    "n", "k", "seed", "ref_multiplier", "quantizer_factor", "quantizer_restarts",
}


@dataclass(frozen=True)
class DecompositionConfig:
    """Sample size, codebook size and seed of one decomposition run."""

    n: int
    k: int
    seed: int = 0
    ref_multiplier: int = 16
    quantizer_factor: int = 50
    quantizer_restarts: int = 10

    def __post_init__(self) -> None:
        for name in DECOMPOSITION_KEYS:
            object.__setattr__(self, name, as_int(getattr(self, name), name))


@dataclass(frozen=True)
class ExperimentConfig:
    """Parsed config document."""

    sampler: Sampler
    lloyd: LloydConfig
    rates: Optional[RateConfig] = None
    decomposition: Optional[DecompositionConfig] = None
    schema: str = SCHEMA_VERSION


def _section(data: Mapping[str, Any], name: str, allowed: set) -> Dict[str, Any]:
    section = data.get(name) or {}
    if not isinstance(section, Mapping):
        raise ConfigError(f"Section {name!r} must be an object")
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"Unknown keys in {name!r}: {sorted(unknown)}")
    return dict(section)


def threads_from_env(environ: Optional[Mapping[str, str]] = None) -> int:
    """Worker cap from WASSQUANT_THREADS; 0 (or unset) means one per CPU.

    Raises:
        ConfigError: If the variable is not a nonnegative integer
    """
    raw = (os.environ if environ is None else environ).get(THREADS_ENV, "").strip()
    if not raw:
        return 0
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if value < 0:
        raise ConfigError(f"{THREADS_ENV} must be >= 0, got {value}")
    return value


def parse_config(data: Any, workers: int = 0) -> ExperimentConfig:
    """Validate a config document and build the typed configuration.

    Args:
        data: Decoded JSON document
        workers: Worker cap passed on to the rate experiment

    Raises:
        ConfigError: On a schema violation or an invalid value
    """
    if not isinstance(data, Mapping):
        raise ConfigError("Config must be a JSON object")
    unknown = set(data) - TOP_LEVEL_KEYS
    if unknown:
        raise ConfigError(f"Unknown top-level keys: {sorted(unknown)}")
    if data.get("schema") != SCHEMA_VERSION:
        raise ConfigError(
            f"Unsupported schema {data.get('schema')!r}, expected {SCHEMA_VERSION!r}"
        )
    if "sampler" not in data:
        raise ConfigError("Config is missing the 'sampler' section")
    if "rates" not in data and "decomposition" not in data:
        raise ConfigError("Config needs a 'rates' or a 'decomposition' section")

    try:
        sampler = sampler_from_dict(data["sampler"])
        lloyd = LloydConfig(k=1, **_section(data, "lloyd", LLOYD_KEYS))
        rates = None
        if "rates" in data:
            section = _section(data, "rates", RATE_KEYS)
            if "n_grid" not in section:
                raise ConfigError("Section 'rates' is missing 'n_grid'")
            if "mode" in section and section["mode"] not in {m.value for m in RateMode}:
                raise ConfigError(f"Unknown rate mode {section['mode']!r}")
            section.setdefault("max_cost_entries", DEFAULT_MAX_COST_ENTRIES)
            rates = RateConfig(sampler=sampler, lloyd=lloyd, workers=workers, **section)
        decomposition = None
        if "decomposition" in data:
            section = _section(data, "decomposition", DECOMPOSITION_KEYS)
            if "n" not in section or "k" not in section:
                raise ConfigError("Section 'decomposition' needs 'n' and 'k'")
            decomposition = DecompositionConfig(**section)
    except ConfigError:
        raise
    except (WassquantError, TypeError, ValueError) as e:
        raise ConfigError(f"Invalid config value: {e}") from e
    return ExperimentConfig(
        sampler=sampler, lloyd=lloyd, rates=rates, decomposition=decomposition
    )


def load_config(
    path: Union[str, Path], workers: Optional[int] = None
) -> ExperimentConfig:
    """Read and parse a config file; ``workers`` defaults to WASSQUANT_THREADS."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except OSError as e:
        raise ConfigError(f"Cannot read config {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"Config {path} is not valid JSON: {e}") from e
    return parse_config(data, threads_from_env() if workers is None else workers)


def config_to_dict(cfg: ExperimentConfig) -> Dict[str, Any]:
    """Serialize a config back into its v1 document."""
    out: Dict[str, Any] = {
        "schema": cfg.schema,
        "sampler": sampler_to_dict(cfg.sampler),
        "lloyd": {
            "restarts": cfg.lloyd.restarts,
            "max_iters": cfg.lloyd.max_iters,
            "rel_tol": cfg.lloyd.rel_tol,
        },
    }
    if cfg.rates is not None:
        r = cfg.rates
        out["rates"] = {
            "n_grid": list(r.n_grid),
            "trials": r.trials,
            "ref_multiplier": r.ref_multiplier,
            "mode": r.mode.value,
            "kmeans_constant": r.kmeans_constant,
            "scale_k_by_m": r.scale_k_by_m,
            "seed": r.seed,
            "max_cost_entries": r.max_cost_entries,
        }
    if cfg.decomposition is not None:
        d = cfg.decomposition
        out["decomposition"] = {
            "n": d.n,
            "k": d.k,
            "seed": d.seed,
            "ref_multiplier": d.ref_multiplier,
            "quantizer_factor": d.quantizer_factor,
            "quantizer_restarts": d.quantizer_restarts,
        }
    return out
