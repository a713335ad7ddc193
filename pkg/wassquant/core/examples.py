"""
Example file generation for wassquant.

Writes a pair of small measures for ``ot``, a sample for ``quantize`` and
ready-to-run configs for ``rates`` and ``decompose``.
"""

import json
from pathlib import Path
from typing import List, Optional

from wassquant.core.measures import DiscreteMeasure
from wassquant.core.parsers import write_measure, write_sample
from wassquant.core.samplers import draw, make_sampler

EXAMPLE_CONFIGS = {
    "rates_uniform_d1.json": {
        "schema": "v1",
        "sampler": {
            "name": "uniform-interval",
            "form": "uniform-cube",
            "intrinsic_dim": 1,
            "seed": 1,
        },
        "rates": {
            "n_grid": [64, 128, 256, 512, 1024],
            "trials": 5,
            "mode": "empirical",
            "seed": 7,
        },
        "lloyd": {"restarts": 3},
    },
    "rates_kmeans_square.json": {
        "schema": "v1",
        "sampler": {
            "name": "square-in-r3",
            "form": "uniform-cube",
            "intrinsic_dim": 2,
            "seed": 2,
            "embed": {"ambient_dim": 3, "seed": 11},
        },
        "rates": {
            "n_grid": [64, 128, 256],
            "trials": 3,
            "mode": "kmeans",
            "kmeans_constant": 1.0,
            "seed": 7,
        },
        "lloyd": {"restarts": 3},
    },
    "decompose_circle.json": {
        "schema": "v1",
        "sampler": {
            "name": "circle",
            "form": "uniform-sphere-surface",
            "intrinsic_dim": 1,
            "seed": 3,
        },
        "decomposition": {"n": 128, "k": 4, "seed": 5, "quantizer_restarts": 3},
        "lloyd": {"restarts": 3},
    },
}


def create_example_files(directory: Optional[str] = None) -> List[Path]:
    """Create example inputs for every sub-command.

    Args:
        directory: Target directory; defaults to the current working directory

    Returns:
        Paths of the files written
    """
    target_dir = Path(directory) if directory else Path.cwd()
    target_dir.mkdir(parents=True, exist_ok=True)

    mu = DiscreteMeasure([[0.0], [1.0]], [0.5, 0.5])
    nu = DiscreteMeasure([[0.0], [2.0]], [0.5, 0.5])
    sample = draw(make_sampler("uniform-cube", 2, seed=4), 40)
    written = [
        write_measure(target_dir / "mu.json", mu),
        write_measure(target_dir / "nu.json", nu),
        write_sample(target_dir / "sample.json", sample),
    ]
    for filename, content in EXAMPLE_CONFIGS.items():
        path = target_dir / filename
        with open(path, "w", encoding="utf-8") as f:
            json.dump(content, f, indent=2)
            f.write("\n")
        written.append(path)
    return written
