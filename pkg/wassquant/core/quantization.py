"""
k-means quantizers seen as measure learners.

``lloyd`` runs seeded k-means++ restarts followed by Lloyd iterations and
keeps the cheapest codebook. ``kmeans_measure`` turns that codebook into the
measure pi_S rho_n, whose W_2 distance to the empirical measure equals the
square root of the k-means cost. The remaining helpers estimate optimal
quantization errors of a population measure.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.spatial.distance import cdist

from wassquant.core.measures import (
    ASSIGN_CHUNK,
    Codebook,
    DiscreteMeasure,
    PointsLike,
    as_points,
    assign,
    empirical_measure,
    expected_distance_power,
    pushforward,
)
from wassquant.core.samplers import Sampler, as_int, derive_seed, draw
from wassquant.errors import ParameterError, SolverError, check_dims

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]

# Slack allowed on the per-iteration Lloyd cost before it counts as an increase.
MONOTONE_RTOL = 1e-9

# Stream keys keeping the draws of estimate_vnp apart from other experiments.
_TRAIN_STREAM = 0x51
_EVAL_STREAM = 0x52


@dataclass(frozen=True)
class LloydConfig:
    """Approximation contract for the k-means solver."""

    k: int
    seed: int = 0
    restarts: int = 10
    max_iters: int = 200
    rel_tol: float = 1e-7

    def __post_init__(self) -> None:
        for name in ("k", "seed", "restarts", "max_iters"):
            object.__setattr__(self, name, as_int(getattr(self, name), name))
        if self.k < 1:
            raise ParameterError(f"k must be >= 1, got {self.k}")
        if self.restarts < 1:
            raise ParameterError(f"restarts must be >= 1, got {self.restarts}")
        if self.max_iters < 0:
            raise ParameterError(f"max_iters must be >= 0, got {self.max_iters}")
        if not self.rel_tol > 0:
            raise ParameterError(f"rel_tol must be > 0, got {self.rel_tol}")

    def with_k(self, k: int) -> "LloydConfig":
        return replace(self, k=k)


@dataclass(frozen=True)
class QuantizerResult:
    """Best Lloyd run over all restarts."""

    codebook: Codebook
    empirical_cost: float
    iterations: int
    restart_index: int
    history: Tuple[float, ...] = field(default=(), repr=False)


def _distinct(points: FloatArray) -> Tuple[FloatArray, FloatArray]:
    """Distinct rows in first-occurrence order with their multiplicities."""
    measure = empirical_measure(points)
    return measure.support, measure.weights * points.shape[0]


def _check_k(points: FloatArray, k: int) -> Tuple[FloatArray, FloatArray]:
    if points.shape[0] == 0:
        raise ParameterError("Cannot quantize an empty sample")
    distinct, mult = _distinct(points)
    if k > distinct.shape[0]:
        raise ParameterError(
            f"k = {k} exceeds the {distinct.shape[0]} distinct points of the sample"
        )
    return distinct, mult


def kmeanspp_init(sample: PointsLike, k: int, seed: int) -> Codebook:
    """k-means++ seeding: k distinct sample points drawn proportionally to D^2.

    Seeding runs on the distinct sample points weighted by multiplicity, so
    the first center is a uniform sample draw and no point is picked twice.
    """
    pts = as_points(sample)
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    distinct, mult = _check_k(pts, k)
    rng = np.random.default_rng(seed)
    chosen = [int(rng.choice(distinct.shape[0], p=mult / mult.sum()))]
    d2 = cdist(distinct, distinct[chosen], "sqeuclidean")[:, 0]
    for _ in range(1, k):
        score = mult * d2
        nxt = int(rng.choice(distinct.shape[0], p=score / score.sum()))
        chosen.append(nxt)
        d2 = np.minimum(d2, cdist(distinct, distinct[[nxt]], "sqeuclidean")[:, 0])
    return Codebook(distinct[chosen])


def _nearest(
    points: FloatArray, centers: FloatArray
) -> Tuple[NDArray[np.intp], FloatArray]:
    """Closest-center labels (lowest index on ties) and squared distances."""
    labels = np.empty(points.shape[0], dtype=np.intp)
    d2 = np.empty(points.shape[0])
    for start in range(0, points.shape[0], ASSIGN_CHUNK):
        block = cdist(points[start:start + ASSIGN_CHUNK], centers, "sqeuclidean")
        labels[start:start + ASSIGN_CHUNK] = np.argmin(block, axis=1)
        d2[start:start + ASSIGN_CHUNK] = block.min(axis=1)
    return labels, d2


def _lloyd_run(
    points: FloatArray, centers: FloatArray, max_iters: int, rel_tol: float
) -> Tuple[FloatArray, List[float]]:
    """Lloyd iterations from the given centers; returns centers and cost history."""
    k = centers.shape[0]
    centers = centers.copy()
    labels, d2 = _nearest(points, centers)
    history = [float(d2.mean())]
    for it in range(max_iters):
        counts = np.bincount(labels, minlength=k)
        sums = np.zeros_like(centers)
        np.add.at(sums, labels, points)
        live = counts > 0
        centers[live] = sums[live] / counts[live, None]
        for j in np.flatnonzero(~live):
            # re-seed at the point currently worst served
            far = int(np.argmax(_nearest(points, centers[live])[1]))
            centers[j] = points[far]
            live[j] = True
            logger.debug("Re-seeded empty cluster %d at point %d", j, far)
        labels, d2 = _nearest(points, centers)
        cost = float(d2.mean())
        prev = history[-1]
        if cost > prev * (1 + MONOTONE_RTOL):
            raise SolverError(
                f"Lloyd cost increased at iteration {it}: {prev!r} -> {cost!r}"
            )
        history.append(cost)
        if cost == 0.0 or prev - cost <= rel_tol * prev:
            break
    else:
        if max_iters > 0:
            logger.warning(
                "Lloyd stopped at max_iters=%d before reaching rel_tol", max_iters
            )
    return centers, history


def lloyd(
    sample: PointsLike, cfg: LloydConfig, warm_starts: Sequence[FloatArray] = ()
) -> QuantizerResult:
    """Multi-restart k-means on a sample.

    Each restart seeds with k-means++ (seed derived from ``cfg.seed`` and the
    restart index) and iterates until the relative cost improvement drops
    below ``cfg.rel_tol`` or ``cfg.max_iters`` is hit. The cheapest restart
    wins, ties going to the lowest restart index.

    Args:
        sample: Points of shape (n, D)
        cfg: Solver configuration
        warm_starts: Extra initial codebooks tried after the k-means++ restarts

    Raises:
        ParameterError: If k exceeds the number of distinct sample points
    """
    pts = as_points(sample)
    _check_k(pts, cfg.k)
    inits = [
        kmeanspp_init(pts, cfg.k, derive_seed(cfg.seed, r)).centers
        for r in range(cfg.restarts)
    ]
    for start in warm_starts:
        start = as_points(start)
        check_dims(start.shape[1], pts.shape[1], "warm start and sample")
        if start.shape[0] != cfg.k:
            raise ParameterError(
                f"Warm start has {start.shape[0]} centers, expected {cfg.k}"
            )
        inits.append(start)

    best: Optional[QuantizerResult] = None
    for r, init in enumerate(inits):
        centers, history = _lloyd_run(pts, init, cfg.max_iters, cfg.rel_tol)
        codebook = Codebook.from_points(centers)
        cost = expected_distance_power(empirical_measure(pts), codebook, 2)
        if best is None or cost < best.empirical_cost:
            best = QuantizerResult(codebook, cost, len(history) - 1, r, tuple(history))
    assert best is not None
    logger.debug(
        "lloyd k=%d: restart %d won with cost %.6g",
        cfg.k,
        best.restart_index,
        best.empirical_cost,
    )
    return best


def kmeans_path(
    sample: PointsLike, k_max: int, cfg: LloydConfig
) -> List[QuantizerResult]:
    """Quantizers for k = 1..k_max whose costs never increase with k.

    Besides its own restarts, each k warm-starts from the previous codebook
    plus the worst-served sample point, which cannot cost more than the
    previous solution.
    """
    pts = as_points(sample)
    _check_k(pts, k_max)
    path: List[QuantizerResult] = []
    for k in range(1, k_max + 1):
        warm: List[FloatArray] = []
        prev = path[-1].codebook.centers if path else None
        if prev is not None and prev.shape[0] == k - 1:
            far = int(np.argmax(_nearest(pts, prev)[1]))
            warm.append(np.vstack([prev, pts[far]]))
        path.append(lloyd(pts, cfg.with_k(k), warm_starts=warm))
    return path


def encode(sample: PointsLike, S: Codebook) -> NDArray[np.intp]:
    """The n-vector of center indices pi_S(x_i); ``decode`` rebuilds the measure."""
    return assign(sample, S)


def decode(labels: ArrayLike, S: Codebook) -> DiscreteMeasure:
    """(1/n) sum delta at S[labels[i]]."""
    idx = np.asarray(labels, dtype=np.intp).reshape(-1)
    if idx.size == 0:
        raise ParameterError("Cannot decode an empty label vector")
    if idx.min() < 0 or idx.max() >= S.k:
        raise ParameterError(f"Labels must lie in [0, {S.k})")
    mass = np.bincount(idx, minlength=S.k) / idx.size
    hit = mass > 0
    return DiscreteMeasure(S.centers[hit], mass[hit])


def kmeans_measure(sample: PointsLike, cfg: LloydConfig) -> DiscreteMeasure:
    """Measure learned by k-means: the sample pushed onto the Lloyd codebook."""
    return learn_measure(sample, cfg)[0]


def learn_measure(
    sample: PointsLike, cfg: LloydConfig
) -> Tuple[DiscreteMeasure, QuantizerResult]:
    """kmeans_measure together with the quantizer that produced it."""
    pts = as_points(sample)
    result = lloyd(pts, cfg)
    return pushforward(empirical_measure(pts), result.codebook), result


def optimal_quantizer_1d_uniform(k: int) -> Tuple[Codebook, float]:
    """Optimal k-point quantizer of the uniform law on [0, 1], cost 1/(12 k^2)."""
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    centers = (2 * np.arange(1, k + 1) - 1) / (2.0 * k)
    return Codebook(centers.reshape(-1, 1)), 1.0 / (12.0 * k * k)


def estimate_vnp(
    sampler: Sampler,
    k: int,
    p: float,
    n_mc: int,
    cfg: Optional[LloydConfig] = None,
) -> float:
    """Upper estimate of V_{k,2}(rho)^(1/2).

    Lloyd is fit on one size-n_mc sample and its codebook is scored on an
    independent size-n_mc sample, so the value estimates the population cost
    of a near-optimal codebook rather than its optimistic in-sample cost.

    Raises:
        ParameterError: If p != 2 or n_mc < k
    """
    if p != 2:
        raise ParameterError(
            f"Quantization error estimates support p = 2 only, got {p}"
        )
    if n_mc < k:
        raise ParameterError(f"n_mc = {n_mc} must be at least k = {k}")
    cfg = (cfg or LloydConfig(k=k)).with_k(k)
    train = draw(sampler, n_mc, stream=(_TRAIN_STREAM, k))
    result = lloyd(train, cfg)
    held_out = draw(sampler, n_mc, stream=(_EVAL_STREAM, k))
    cost = expected_distance_power(empirical_measure(held_out), result.codebook, 2)
    return math.sqrt(cost)


@dataclass(frozen=True)
class QuantizationGap:
    """In-sample versus population cost of a fitted codebook."""

    empirical_cost: float
    population_cost: float

    @property
    def gap(self) -> float:
        return self.population_cost - self.empirical_cost


def quantization_gap(
    sampler: Sampler, result: QuantizerResult, n_mc: int, seed: int
) -> QuantizationGap:
    """Compare E_{rho_n} d(x, S)^2 with a Monte Carlo estimate of E_rho d(x, S)^2."""
    if n_mc < 1:
        raise ParameterError(f"n_mc must be >= 1, got {n_mc}")
    rng_key = derive_seed(seed, _EVAL_STREAM)
    held_out = draw(sampler.with_seed(rng_key), n_mc)
    held_out_measure = empirical_measure(held_out)
    population = expected_distance_power(held_out_measure, result.codebook, 2)
    return QuantizationGap(result.empirical_cost, population)

