"""
Core functionality for the wassquant package.

Discrete measures and codebooks, exact Wasserstein distances, k-means
quantization, population samplers and the rate-experiment harness, plus the
file readers and writers the CLI uses.
"""

from .examples import create_example_files
from .measures import Codebook, DiscreteMeasure, empirical_measure, pushforward
from .quantization import LloydConfig, kmeans_measure, lloyd
from .rates import RateConfig, RateResult, run_rate_experiment
from .samplers import Sampler, draw, make_sampler
from .transport import TransportPlan, wasserstein

__all__ = [
    "Codebook",
    "DiscreteMeasure",
    "LloydConfig",
    "RateConfig",
    "RateResult",
    "Sampler",
    "TransportPlan",
    "create_example_files",
    "draw",
    "empirical_measure",
    "kmeans_measure",
    "lloyd",
    "make_sampler",
    "pushforward",
    "run_rate_experiment",
    "wasserstein",
]
