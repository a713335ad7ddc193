"""
Monte Carlo harness for convergence-rate experiments.

W_2(rho, .) has no closed form for a general population, so it is proxied by
the distance to an independent reference empirical measure of size
N = ref_multiplier * max(n). By the triangle inequality the proxy is off by
at most W_2(rho, rho_N), which shrinks at the very rates being measured.

Every trial derives its own seed from (experiment seed, sampler seed, n,
trial); samples and references are separate streams of that seed. Results are
therefore independent of scheduling and of how many workers run them.
"""

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from wassquant.core.measures import (
    Codebook,
    empirical_measure,
    projection_distance,
    pushforward,
    sample_codebook,
)
from wassquant.core.quantization import (
    LloydConfig,
    estimate_vnp,
    kmeanspp_init,
    learn_measure,
    lloyd,
    optimal_quantizer_1d_uniform,
)
from wassquant.core.samplers import (
    DensityForm,
    Sampler,
    analytic_m,
    analytic_vnp,
    as_int,
    derive_seed,
    draw,
    embed_points,
)
from wassquant.core.transport import obm_cost, wasserstein
from wassquant.errors import ParameterError

logger = logging.getLogger(__name__)

SAMPLE_STREAM = 1
REFERENCE_STREAM = 2
QUANTIZER_STREAM = 3

MIN_REF_RATIO = 4
BAND_LOW_WIDTH = 0.15
BAND_HIGH_WIDTH = 0.10
DEFAULT_MAX_COST_ENTRIES = 2**25

DELTA_NOTE = (
    "Distances are reported in expectation (medians over trials); no confidence "
    "level delta enters the rates or the acceptance bands."
)


class RateMode(str, Enum):
    EMPIRICAL = "empirical"
    KMEANS = "kmeans"


@dataclass(frozen=True)
class RateConfig:
    """One rate experiment: a sampler, a grid of sample sizes and a mode."""

    sampler: Sampler
    n_grid: Tuple[int, ...]
    trials: int = 10
    ref_multiplier: int = 16
    mode: RateMode = RateMode.EMPIRICAL
    kmeans_constant: float = 1.0
    scale_k_by_m: bool = False
    seed: int = 0
    lloyd: LloydConfig = field(default_factory=lambda: LloydConfig(k=1))
    max_cost_entries: int = DEFAULT_MAX_COST_ENTRIES
    workers: int = 0

    def __post_init__(self) -> None:
        grid = tuple(as_int(n, "n_grid entry") for n in self.n_grid)
        object.__setattr__(self, "n_grid", grid)
        object.__setattr__(self, "mode", RateMode(self.mode))
        for name in ("trials", "ref_multiplier", "seed", "max_cost_entries", "workers"):
            object.__setattr__(self, name, as_int(getattr(self, name), name))
        if len(grid) < 3:
            raise ParameterError("n_grid needs at least 3 sizes to fit a slope")
        if grid[0] < 1 or any(b <= a for a, b in zip(grid, grid[1:])):
            raise ParameterError(
                f"n_grid must be strictly increasing positive sizes, got {list(grid)}"
            )
        if self.trials < 3:
            raise ParameterError(f"trials must be >= 3, got {self.trials}")
        if self.ref_multiplier < MIN_REF_RATIO:
            raise ParameterError(
                f"ref_multiplier must be >= {MIN_REF_RATIO}, got {self.ref_multiplier}"
            )
        if self.kmeans_constant <= 0:
            raise ParameterError("kmeans_constant must be positive")
        if self.max_cost_entries < 1 or self.workers < 0:
            raise ParameterError(
                "max_cost_entries must be positive and workers nonnegative"
            )
        if self.mode is RateMode.KMEANS and self.sampler.form is DensityForm.POINT_MASS:
            # a single distinct point admits only k = 1
            raise ParameterError(
                "kmeans mode needs a sampler with more than one support point"
            )

    @property
    def reference_size(self) -> int:
        return self.ref_multiplier * self.n_grid[-1]


@dataclass(frozen=True)
class TrialRecord:
    """One row of the rate CSV."""

    mode: str
    sampler: str
    d: int
    D: int
    n: int
    k: int
    trial: int
    distance: float
    seed: int


@dataclass(frozen=True)
class RateResult:
    """Per-trial distances plus the log-log fit of the per-n medians."""

    config: RateConfig
    records: Tuple[TrialRecord, ...]
    slope: float
    intercept: float
    stderr: float
    band: Tuple[float, float]
    reference_sizes: Dict[int, int]

    @property
    def passed(self) -> bool:
        return self.band[0] <= self.slope <= self.band[1]

    def medians(self) -> Dict[int, float]:
        return _medians(self.records)

    def summary(self) -> Dict[str, Any]:
        """Content of the summary JSON file."""
        sampler = self.config.sampler
        return {
            "mode": self.config.mode.value,
            "sampler": sampler.name,
            "d": sampler.intrinsic_dim,
            "D": sampler.ambient_dim,
            "n_grid": list(self.config.n_grid),
            "trials": self.config.trials,
            "seed": self.config.seed,
            "medians": {str(n): v for n, v in self.medians().items()},
            "slope": self.slope,
            "intercept": self.intercept,
            "stderr": self.stderr,
            "band": list(self.band),
            "passed": self.passed,
            "ambient_lower_exponent": -1.0 / sampler.ambient_dim,
            "reference_sizes": {str(n): v for n, v in self.reference_sizes.items()},
            "approximate_quantizer": self.config.mode is RateMode.KMEANS,
            "notes": [DELTA_NOTE],
        }


def slope_band(d: int) -> Tuple[float, float]:
    """Acceptance band for the fitted exponent: lower/upper rate exponents widened."""
    return (-1.0 / d - BAND_LOW_WIDTH, -1.0 / (2 * d + 4) + BAND_HIGH_WIDTH)


def fit_loglog_slope(
    pairs: Sequence[Tuple[float, float]]
) -> Tuple[float, float, float]:
    """Least-squares line through (log n, log value).

    Returns:
        Tuple of (slope, intercept, slope standard error)

    Raises:
        ParameterError: On fewer than 3 pairs or a nonpositive n or value
    """
    if len(pairs) < 3:
        raise ParameterError(f"Need at least 3 pairs to fit a slope, got {len(pairs)}")
    xs = np.array([float(n) for n, _ in pairs])
    ys = np.array([float(v) for _, v in pairs])
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise ParameterError("Log-log fit needs positive sizes and values")
    fit = stats.linregress(np.log(xs), np.log(ys))
    return float(fit.slope), float(fit.intercept), float(fit.stderr)


def kmeans_k(n: int, d: int, constant: float = 1.0, m: float = 1.0) -> int:
    """Codebook size ceil(C * m * n^(d/(2d+4))), clipped to [1, n]."""
    raw = constant * m * n ** (d / (2.0 * d + 4.0))
    # guard against n**(1/6) landing one ulp above an integer
    return int(min(n, max(1, math.ceil(raw - 1e-9))))


def resolve_workers(workers: int) -> int:
    return workers if workers > 0 else (os.cpu_count() or 1)


def trial_seed(seed: int, sampler: Sampler, n: int, trial: int) -> int:
    return derive_seed(seed, sampler.seed & (2**32 - 1), n, trial)


def effective_reference_size(
    sampler: Sampler, size: int, ref_N: int, max_cost_entries: int
) -> int:
    """Reference size actually used against a support of ``size`` atoms.

    One-dimensional problems use the monotone coupling and are never capped;
    otherwise the dense cost matrix is kept under ``max_cost_entries``.
    """
    if sampler.ambient_dim == 1 or size * ref_N <= max_cost_entries:
        return ref_N
    capped = max(MIN_REF_RATIO * size, max_cost_entries // size)
    if capped < ref_N:
        logger.warning(
            "Reference size for n=%d capped from %d to %d by max_cost_entries=%d",
            size, ref_N, capped, max_cost_entries,
        )
    return min(ref_N, capped)


def _draw_pair(sampler: Sampler, n: int, ref_N: int, seed: int):
    trial_sampler = sampler.with_seed(seed)
    sample = draw(trial_sampler, n, stream=(SAMPLE_STREAM,))
    reference = draw(trial_sampler, ref_N, stream=(REFERENCE_STREAM,))
    return sample, reference


def estimate_w2_to_population(
    sampler: Sampler,
    n: int,
    ref_N: int,
    seed: int,
    max_cost_entries: Optional[int] = None,
) -> float:
    """W_2(rho_n, rho_ref) for independent samples of sizes n and ref_N.

    An upward-biased proxy for W_2(rho, rho_n): the bias is at most
    W_2(rho, rho_ref) by the triangle inequality.

    Raises:
        ParameterError: If ref_N < 4 n
    """
    if ref_N < MIN_REF_RATIO * n:
        raise ParameterError(
            f"ref_N = {ref_N} must be at least "
            f"{MIN_REF_RATIO} * n = {MIN_REF_RATIO * n}"
        )
    if max_cost_entries is not None:
        ref_N = effective_reference_size(sampler, n, ref_N, max_cost_entries)
    sample, reference = _draw_pair(sampler, n, ref_N, seed)
    return wasserstein(empirical_measure(sample), empirical_measure(reference), 2).cost


def two_sample_distance(sampler: Sampler, n: int, seed: int) -> float:
    """W_2 between two independent size-n empirical measures, via optimal matching."""
    trial_sampler = sampler.with_seed(seed)
    X = draw(trial_sampler, n, stream=(SAMPLE_STREAM,))
    Y = draw(trial_sampler, n, stream=(REFERENCE_STREAM,))
    return math.sqrt(obm_cost(X, Y, 2))


def _k_for(cfg: RateConfig, n: int) -> int:
    if cfg.mode is RateMode.EMPIRICAL:
        return n
    m = analytic_m(cfg.sampler).value if cfg.scale_k_by_m else 1.0
    return kmeans_k(n, cfg.sampler.intrinsic_dim, cfg.kmeans_constant, m)


def _run_trial(cfg: RateConfig, n: int, trial: int) -> Tuple[TrialRecord, int]:
    sampler = cfg.sampler
    seed = trial_seed(cfg.seed, sampler, n, trial)
    k = _k_for(cfg, n)
    ref_N = effective_reference_size(
        sampler, k, cfg.reference_size, cfg.max_cost_entries
    )
    sample, reference = _draw_pair(sampler, n, ref_N, seed)
    if cfg.mode is RateMode.EMPIRICAL:
        estimate = empirical_measure(sample)
    else:
        lloyd_cfg = LloydConfig(
            k=k,
            seed=seed,
            restarts=cfg.lloyd.restarts,
            max_iters=cfg.lloyd.max_iters,
            rel_tol=cfg.lloyd.rel_tol,
        )
        estimate, _ = learn_measure(sample, lloyd_cfg)
    distance = wasserstein(empirical_measure(reference), estimate, 2).cost
    record = TrialRecord(
        mode=cfg.mode.value,
        sampler=sampler.name,
        d=sampler.intrinsic_dim,
        D=sampler.ambient_dim,
        n=n,
        k=k,
        trial=trial,
        distance=distance,
        seed=seed,
    )
    return record, ref_N


def _medians(records: Sequence[TrialRecord]) -> Dict[int, float]:
    by_n: Dict[int, List[float]] = {}
    for rec in records:
        by_n.setdefault(rec.n, []).append(rec.distance)
    return {n: float(np.median(sorted(v))) for n, v in sorted(by_n.items())}


def run_rate_experiment(cfg: RateConfig) -> RateResult:
    """Run every (n, trial) pair of the grid and fit the rate exponent.

    Empirical mode measures W_2(rho_ref, rho_n); k-means mode measures
    W_2(rho_ref, pi_{S_k} rho_n) with k = kmeans_k(n). The slope is fitted on
    per-n medians.
    """
    tasks = [(n, t) for n in cfg.n_grid for t in range(cfg.trials)]
    workers = min(resolve_workers(cfg.workers), len(tasks))
    logger.info(
        "Rate experiment %s/%s: %d trials on %d workers",
        cfg.sampler.name,
        cfg.mode.value,
        len(tasks),
        workers,
    )
    if workers == 1:
        outcomes = [_run_trial(cfg, n, t) for n, t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(lambda task: _run_trial(cfg, *task), tasks))
    records = tuple(sorted((rec for rec, _ in outcomes), key=lambda r: (r.n, r.trial)))
    reference_sizes = {rec.n: ref for rec, ref in outcomes}
    medians = _medians(records)
    slope, intercept, stderr = fit_loglog_slope(list(medians.items()))
    band = slope_band(cfg.sampler.intrinsic_dim)
    logger.info(
        "Fitted slope %.4f (stderr %.4f), band [%.4f, %.4f]", slope, stderr, *band
    )
    refs = dict(sorted(reference_sizes.items()))
    return RateResult(cfg, records, slope, intercept, stderr, band, refs)


@dataclass(frozen=True)
class EqualRateRow:
    n: int
    k: int
    empirical_median: float
    kmeans_median: float

    @property
    def ratio(self) -> float:
        return self.kmeans_median / self.empirical_median


@dataclass(frozen=True)
class EqualRateReport:
    rows: Tuple[EqualRateRow, ...]
    factor: float

    @property
    def passed(self) -> bool:
        return all(1.0 / self.factor <= row.ratio <= self.factor for row in self.rows)


def equal_rate_check(cfg: RateConfig, factor: float = 3.0) -> EqualRateReport:
    """Compare k-means and empirical medians on matched seeds at every grid n."""
    empirical = run_rate_experiment(replace(cfg, mode=RateMode.EMPIRICAL))
    kmeans = run_rate_experiment(replace(cfg, mode=RateMode.KMEANS))
    em, km = empirical.medians(), kmeans.medians()
    ks = {rec.n: rec.k for rec in kmeans.records}
    rows = tuple(EqualRateRow(n, ks[n], em[n], km[n]) for n in cfg.n_grid)
    return EqualRateReport(rows, factor)


@dataclass(frozen=True)
class DecompositionTerms:
    """Distances along both paths from rho to the learned measures.

    a = W2(rho, pi_{S_k} rho), b = W2(pi_{S_k} rho, pi_{S_k} rho_n),
    c = W2(pi_{S_k} rho_n, rho_n), d = W2(pi_{S^_k} rho_n, rho_n),
    e = W2(rho, pi_{S^_k} rho), f = W2(pi_{S^_k} rho, pi_{S^_k} rho_n),
    where S_k approximates an optimal quantizer of rho and S^_k is k-means
    on the sample. Population measures are represented by the reference
    sample, so every term is approximate.
    """

    n: int
    k: int
    a: float
    b: float
    c: float
    d: float
    e: float
    f: float
    empirical_distance: float
    kmeans_distance: float
    approximate_quantizer: bool = True

    @property
    def empirical_bound(self) -> float:
        """3 (a^2 + b^2 + c^2), the upper-arrow bound on W2(rho, rho_n)^2."""
        return 3.0 * (self.a**2 + self.b**2 + self.c**2)

    @property
    def kmeans_population_cost(self) -> float:
        """E_rho d(x, S^_k)^2, the set-approximation error (= e^2)."""
        return self.e**2

    def as_dict(self) -> Dict[str, Any]:
        out = asdict(self)
        out["empirical_bound"] = self.empirical_bound
        out["kmeans_population_cost"] = self.kmeans_population_cost
        return out


def decomposition_terms(
    sampler: Sampler,
    n: int,
    k: int,
    seed: int,
    ref_multiplier: int = 16,
    quantizer_factor: int = 50,
    quantizer_restarts: int = 10,
    lloyd_cfg: Optional[LloydConfig] = None,
    max_cost_entries: int = DEFAULT_MAX_COST_ENTRIES,
) -> DecompositionTerms:
    """Evaluate the terms a-f for one sample of size n and codebook size k.

    S_k is Lloyd on an independent sample of size quantizer_factor * k. The
    k-means codebook S^_k is Lloyd on the sample, also warm-started from S_k,
    so its in-sample cost never exceeds that of S_k (d <= c).

    Raises:
        ParameterError: If k > n
    """
    if k > n:
        raise ParameterError(f"k = {k} must not exceed n = {n}")
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    ref_N = effective_reference_size(sampler, n, ref_multiplier * n, max_cost_entries)
    sample, reference = _draw_pair(sampler, n, ref_N, seed)
    rho_n = empirical_measure(sample)
    rho_ref = empirical_measure(reference)

    base = lloyd_cfg or LloydConfig(k=k)
    q_train = draw(
        sampler.with_seed(seed), quantizer_factor * k, stream=(QUANTIZER_STREAM,)
    )
    optimal_cfg = LloydConfig(
        k=k,
        seed=derive_seed(seed, QUANTIZER_STREAM),
        restarts=quantizer_restarts,
        max_iters=base.max_iters,
        rel_tol=base.rel_tol,
    )
    optimal = lloyd(q_train, optimal_cfg).codebook
    warm = [optimal.centers] if optimal.k == k else []
    fitted_cfg = replace(base, k=k, seed=seed)
    fitted = lloyd(sample, fitted_cfg, warm_starts=warm).codebook
    logger.info(
        "Decomposition n=%d k=%d uses an approximate optimal quantizer (Lloyd)", n, k
    )

    def path(S: Codebook) -> Tuple[float, float, float]:
        proj_n = pushforward(rho_n, S)
        population_term = projection_distance(rho_ref, S, 2)
        middle = wasserstein(pushforward(rho_ref, S), proj_n, 2).cost
        last = wasserstein(proj_n, rho_n, 2).cost
        return population_term, middle, last

    a, b, c = path(optimal)
    e, f, d = path(fitted)
    return DecompositionTerms(
        n=n,
        k=k,
        a=a,
        b=b,
        c=c,
        d=d,
        e=e,
        f=f,
        empirical_distance=wasserstein(rho_ref, rho_n, 2).cost,
        kmeans_distance=wasserstein(rho_ref, pushforward(rho_n, fitted), 2).cost,
    )


@dataclass(frozen=True)
class LowerBoundRow:
    """Floor and observed distances for one sample size."""

    n: int
    floor: float
    floor_exact: bool
    iid: Tuple[float, ...]
    adversarial: Dict[str, Tuple[float, ...]]
    slack: float

    @property
    def threshold(self) -> float:
        return (1.0 - self.slack) * self.floor

    @property
    def passed(self) -> bool:
        values = list(self.iid) + [v for vs in self.adversarial.values() for v in vs]
        return all(v >= self.threshold for v in values)


@dataclass(frozen=True)
class LowerBoundReport:
    sampler: str
    rows: Tuple[LowerBoundRow, ...]

    @property
    def passed(self) -> bool:
        return all(row.passed for row in self.rows)


def _adversaries(
    sampler: Sampler,
    n: int,
    sample: np.ndarray,
    reference: np.ndarray,
    seed: int,
) -> Dict[str, Codebook]:
    """Point sets X_n, i.i.d. or not, against which the floor must hold."""
    sets = {
        "sample": sample_codebook(sample),
        "kmeanspp": kmeanspp_init(reference, n, derive_seed(seed, QUANTIZER_STREAM)),
        "collapsed": Codebook(sample[:1]),
    }
    if analytic_vnp(sampler, n) is not None:
        # the optimal quantizer itself, in the sampler's coordinates
        unit, _ = optimal_quantizer_1d_uniform(n)
        length = sampler.param_dict.get("length", 1.0) * sampler.scale
        sets["optimal"] = Codebook(embed_points(sampler, unit.centers * length))
    return sets


def lower_bound_check(
    sampler: Sampler,
    n_grid: Sequence[int],
    seed: int,
    trials: int = 20,
    slack: float = 0.15,
    ref_multiplier: int = 16,
    n_mc_factor: int = 20,
    lloyd_cfg: Optional[LloydConfig] = None,
    max_cost_entries: int = DEFAULT_MAX_COST_ENTRIES,
) -> LowerBoundReport:
    """Check W2(rho, X_n) against the optimal quantization floor V_{n,2}^(1/2).

    The floor is analytic where the sampler has one, otherwise estimate_vnp.
    For i.i.d. samples the population distance proxy is used; for every other
    point set X_n the distance W2(rho_ref, pi_{X_n} rho_ref) is computed
    through the quantization identity.
    """
    grid = [as_int(n, "n_grid entry") for n in n_grid]
    if not grid or any(n < 1 for n in grid):
        raise ParameterError("n_grid must hold positive sizes")
    if not 0 <= slack < 1:
        raise ParameterError(f"slack must lie in [0, 1), got {slack}")
    ref_N = ref_multiplier * max(grid)
    rows = []
    for n in grid:
        exact = analytic_vnp(sampler, n)
        if exact is not None:
            floor = exact
        else:
            floor = estimate_vnp(sampler, n, 2, n_mc_factor * n, lloyd_cfg)
        iid: List[float] = []
        adversarial: Dict[str, List[float]] = {}
        for t in range(trials):
            seed_t = trial_seed(seed, sampler, n, t)
            iid.append(
                estimate_w2_to_population(sampler, n, ref_N, seed_t, max_cost_entries)
            )
            sample, reference = _draw_pair(sampler, n, ref_N, seed_t)
            rho_ref = empirical_measure(reference)
            for name, S in _adversaries(sampler, n, sample, reference, seed_t).items():
                dist = projection_distance(rho_ref, S, 2)
                adversarial.setdefault(name, []).append(dist)
        row = LowerBoundRow(
            n=n,
            floor=float(floor),
            floor_exact=exact is not None,
            iid=tuple(iid),
            adversarial={k: tuple(v) for k, v in adversarial.items()},
            slack=slack,
        )
        logger.info("Lower bound n=%d floor=%.6g passed=%s", n, row.floor, row.passed)
        rows.append(row)
    return LowerBoundReport(sampler.name, tuple(rows))
