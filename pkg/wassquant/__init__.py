"""
wassquant - exact Wasserstein distances, k-means as measure learning and
convergence-rate experiments for manifold-supported distributions.
"""

from .core.measures import Codebook, DiscreteMeasure
from .core.rates import RateConfig, run_rate_experiment
from .core.samplers import make_sampler
from .core.transport import wasserstein

__version__ = "0.1.0"

# Define public API
__all__ = [
    "Codebook",
    "DiscreteMeasure",
    "RateConfig",
    "make_sampler",
    "run_rate_experiment",
    "wasserstein",
]
