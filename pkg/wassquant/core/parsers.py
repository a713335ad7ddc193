"""
Reading and writing wassquant files.

Measures, codebooks, samples and label vectors are JSON documents; trial
records are CSV. Floats go through ``repr`` (shortest round-trip form), so a
value written and read back is the same double.
"""

import csv
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Union

import numpy as np
from numpy.typing import NDArray

from wassquant.core.measures import Codebook, DiscreteMeasure, as_points
from wassquant.core.transport import TransportPlan
from wassquant.errors import MeasureFormatError, WassquantError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

CSV_COLUMNS = ("mode", "sampler", "d", "D", "n", "k", "trial", "distance", "seed")


def _is_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _read_json(path: PathLike) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except OSError as e:
        raise MeasureFormatError(f"Cannot read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise MeasureFormatError(f"{path} is not valid JSON: {e}") from e


def _write_json(path: PathLike, data: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2)
        f.write("\n")
    logger.info("Wrote %s", path)
    return path


def _rows(points: NDArray[np.float64]) -> List[List[float]]:
    # json.dump writes floats with repr, which is exact
    return [[float(v) for v in row] for row in points]


def _points_field(
    data: Mapping[str, Any], key: str, path: PathLike
) -> NDArray[np.float64]:
    if key not in data:
        raise MeasureFormatError(f"{path}: missing {key!r}")
    raw = data[key]
    if not isinstance(raw, list) or not raw:
        raise MeasureFormatError(f"{path}: {key!r} must be a nonempty list of points")
    dim = data.get("dim")
    if dim is not None and (not _is_int(dim) or dim < 1):
        raise MeasureFormatError(f"{path}: 'dim' must be a positive integer")
    try:
        pts = as_points(raw)
    except WassquantError as e:
        raise MeasureFormatError(f"{path}: {e}") from e
    except (TypeError, ValueError) as e:
        raise MeasureFormatError(f"{path}: points must be numeric: {e}") from e
    if dim is not None and pts.shape[1] != dim:
        raise MeasureFormatError(
            f"{path}: points have dimension {pts.shape[1]}, header says {dim}"
        )
    return pts


def _expect_object(
    data: Any, path: PathLike, allowed: Iterable[str]
) -> Mapping[str, Any]:
    if not isinstance(data, dict):
        raise MeasureFormatError(f"{path}: top level must be an object")
    unknown = set(data) - set(allowed)
    if unknown:
        raise MeasureFormatError(f"{path}: unknown fields {sorted(unknown)}")
    return data


def measure_to_dict(mu: DiscreteMeasure) -> Dict[str, Any]:
    return {
        "dim": mu.dim,
        "points": _rows(mu.support),
        "weights": [float(w) for w in mu.weights],
    }


def read_measure(path: PathLike) -> DiscreteMeasure:
    """Load ``{"dim": D, "points": [[...], ...], "weights": [...]}``.

    ``weights`` may be omitted for a uniform measure.

    Raises:
        MeasureFormatError: On unreadable JSON or a malformed document
    """
    data = _expect_object(_read_json(path), path, ("dim", "points", "weights"))
    pts = _points_field(data, "points", path)
    weights = data.get("weights")
    if weights is not None:
        if not isinstance(weights, list) or not all(
            isinstance(w, (int, float)) and not isinstance(w, bool) for w in weights
        ):
            raise MeasureFormatError(f"{path}: 'weights' must be a list of numbers")
        if len(weights) != pts.shape[0]:
            raise MeasureFormatError(
                f"{path}: {pts.shape[0]} points but {len(weights)} weights"
            )
    try:
        return DiscreteMeasure(pts, weights)
    except WassquantError as e:
        raise MeasureFormatError(f"{path}: {e}") from e


def write_measure(path: PathLike, mu: DiscreteMeasure) -> Path:
    return _write_json(path, measure_to_dict(mu))


def read_sample(path: PathLike) -> NDArray[np.float64]:
    """Load a sample file ``{"dim": D, "points": [...]}`` (repeats allowed)."""
    data = _expect_object(_read_json(path), path, ("dim", "points"))
    return _points_field(data, "points", path)


def write_sample(path: PathLike, points: NDArray[np.float64]) -> Path:
    pts = as_points(points)
    return _write_json(path, {"dim": int(pts.shape[1]), "points": _rows(pts)})


def read_codebook(path: PathLike) -> Codebook:
    data = _expect_object(_read_json(path), path, ("dim", "centers"))
    pts = _points_field(data, "centers", path)
    try:
        return Codebook(pts)
    except WassquantError as e:
        raise MeasureFormatError(f"{path}: {e}") from e


def write_codebook(path: PathLike, S: Codebook) -> Path:
    return _write_json(path, {"dim": S.dim, "centers": _rows(S.centers)})


def read_labels(path: PathLike) -> NDArray[np.intp]:
    data = _expect_object(_read_json(path), path, ("k", "labels"))
    labels = data.get("labels")
    if not isinstance(labels, list) or not all(_is_int(v) for v in labels):
        raise MeasureFormatError(f"{path}: 'labels' must be a list of integers")
    return np.asarray(labels, dtype=np.intp)


def write_labels(path: PathLike, labels: NDArray[np.intp], k: int) -> Path:
    """Write the n-vector of center indices produced by ``encode``."""
    return _write_json(path, {"k": int(k), "labels": [int(v) for v in labels]})


def write_plan(path: PathLike, plan: TransportPlan, cost: float, p: float) -> Path:
    """Write a coupling as a sparse list of (source, target, mass) entries."""
    entries = [
        [int(i), int(j), float(m)] for i, j, m in zip(plan.rows, plan.cols, plan.mass)
    ]
    document = {
        "p": float(p),
        "cost": float(cost),
        "shape": list(plan.shape),
        "entries": entries,
    }
    return _write_json(path, document)


def write_rate_csv(path: PathLike, records: Iterable[Any]) -> Path:
    """Write trial records with the columns of CSV_COLUMNS, one row per trial."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for rec in records:
            writer.writerow([_cell(getattr(rec, col)) for col in CSV_COLUMNS])
    logger.info("Wrote %s", path)
    return path


def _cell(value: Any) -> str:
    return repr(float(value)) if isinstance(value, float) else str(value)


def read_rate_csv(path: PathLike) -> List[Dict[str, str]]:
    with open(path, "r", encoding="utf-8", newline="") as f:
        return list(csv.DictReader(f))


def write_summary(path: PathLike, summary: Mapping[str, Any]) -> Path:
    return _write_json(path, dict(summary))
