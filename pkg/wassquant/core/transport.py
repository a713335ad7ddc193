"""
Exact p-Wasserstein distances between discrete measures.

The general solver is the network simplex of POT (``ot.emd``) on a dense
cost matrix. On the line the monotone (quantile) coupling is optimal and is
built directly. Two independent oracles, quantile integration and exhaustive
permutation search, plus the optimal bipartite matching cost are provided for
cross-checking.
"""

import itertools
import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
import ot
from numpy.typing import ArrayLike, NDArray
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist

from wassquant.core.measures import DiscreteMeasure, PointsLike, as_points
from wassquant.errors import (
    DimensionMismatchError,
    ParameterError,
    SolverError,
    check_dims,
)

logger = logging.getLogger(__name__)

METHODS = ("auto", "network_simplex", "monotone")
BRUTE_FORCE_MAX = 8

# Residual mass below this is treated as exhausted when walking the monotone coupling.
_MASS_EPS = 1e-15


@dataclass(frozen=True)
class TransportPlan:
    """Sparse coupling between a source and a target support.

    Entry ``t`` moves ``mass[t]`` from source atom ``rows[t]`` to target atom
    ``cols[t]``.
    """

    rows: NDArray[np.intp]
    cols: NDArray[np.intp]
    mass: NDArray[np.float64]
    shape: Tuple[int, int]

    @property
    def nnz(self) -> int:
        return int(self.mass.shape[0])

    def to_dense(self) -> NDArray[np.float64]:
        dense = np.zeros(self.shape)
        np.add.at(dense, (self.rows, self.cols), self.mass)
        return dense

    def row_marginal(self) -> NDArray[np.float64]:
        return np.bincount(self.rows, weights=self.mass, minlength=self.shape[0])

    def col_marginal(self) -> NDArray[np.float64]:
        return np.bincount(self.cols, weights=self.mass, minlength=self.shape[1])


@dataclass(frozen=True)
class OTResult:
    """W_p value together with the optimal plan that realizes it."""

    cost: float
    plan: TransportPlan
    p: float


def _check_order(p: float) -> None:
    if not np.isfinite(p) or p < 1:
        raise ParameterError(f"Order p must be a finite real >= 1, got {p}")


def cost_matrix(X: ArrayLike, Y: ArrayLike, p: float) -> NDArray[np.float64]:
    """Pairwise ||x - y||^p, using the squared-Euclidean kernel when p = 2."""
    X, Y = as_points(X), as_points(Y)
    check_dims(X.shape[1], Y.shape[1])
    if p == 2:
        return cdist(X, Y, "sqeuclidean")
    return cdist(X, Y, "euclidean") ** p


def plan_cost(
    plan: TransportPlan, mu: DiscreteMeasure, nu: DiscreteMeasure, p: float
) -> float:
    """Recompute (sum mass * ||x_i - y_j||^p)^(1/p) from a plan."""
    diff = mu.support[plan.rows] - nu.support[plan.cols]
    sq = np.einsum("ij,ij->i", diff, diff)
    powered = sq if p == 2 else np.sqrt(sq) ** p
    return float(plan.mass @ powered) ** (1.0 / p)


def _trivial_plan(mu: DiscreteMeasure, nu: DiscreteMeasure) -> TransportPlan:
    # one side is a single atom: the product coupling is the only coupling
    if mu.size == 1:
        rows = np.zeros(nu.size, dtype=np.intp)
        cols = np.arange(nu.size, dtype=np.intp)
        return TransportPlan(rows, cols, nu.weights.copy(), (1, nu.size))
    rows = np.arange(mu.size, dtype=np.intp)
    cols = np.zeros(mu.size, dtype=np.intp)
    return TransportPlan(rows, cols, mu.weights.copy(), (mu.size, 1))


def _monotone_plan(mu: DiscreteMeasure, nu: DiscreteMeasure) -> TransportPlan:
    """North-west-corner coupling on sorted supports (optimal in one dimension)."""
    src = np.argsort(mu.support[:, 0], kind="stable")
    dst = np.argsort(nu.support[:, 0], kind="stable")
    a = mu.weights[src].copy()
    b = nu.weights[dst].copy()
    rows, cols, mass = [], [], []
    i = j = 0
    while i < a.size and j < b.size:
        m = min(a[i], b[j])
        if m > 0:
            rows.append(src[i])
            cols.append(dst[j])
            mass.append(m)
        # one of the two residues is exactly zero after the subtraction
        a[i] -= m
        b[j] -= m
        if a[i] <= _MASS_EPS:
            i += 1
        if b[j] <= _MASS_EPS:
            j += 1
    return TransportPlan(
        np.asarray(rows, dtype=np.intp),
        np.asarray(cols, dtype=np.intp),
        np.asarray(mass, dtype=np.float64),
        (mu.size, nu.size),
    )


def _network_simplex_plan(
    mu: DiscreteMeasure, nu: DiscreteMeasure, M: NDArray[np.float64]
) -> TransportPlan:
    budget = max(100_000, 50 * (mu.size + nu.size) ** 2)
    G, log = ot.emd(mu.weights, nu.weights, M, numItermax=budget, log=True)
    if log.get("result_code", 1) != 1:
        raise SolverError(
            "Network simplex did not reach optimality on a "
            f"{mu.size}x{nu.size} problem: {log.get('warning')}"
        )
    rows, cols = np.nonzero(G > 0)
    return TransportPlan(
        rows.astype(np.intp), cols.astype(np.intp), G[rows, cols], (mu.size, nu.size)
    )


def wasserstein(
    mu: DiscreteMeasure, nu: DiscreteMeasure, p: float = 2.0, method: str = "auto"
) -> OTResult:
    """Exact W_p between two discrete measures.

    Args:
        mu: Source measure
        nu: Target measure
        p: Order, p >= 1
        method: "network_simplex", "monotone" (one dimension only) or "auto",
            which picks the monotone coupling on the line

    Returns:
        OTResult with the cost and an optimal vertex plan

    Raises:
        DimensionMismatchError: If the measures live in different dimensions
        ParameterError: On p < 1 or an unknown method
        SolverError: If the network simplex stops before optimality
    """
    _check_order(p)
    check_dims(mu.dim, nu.dim, "measures")
    if method not in METHODS:
        raise ParameterError(f"Unknown method {method!r}; expected one of {METHODS}")
    if method == "monotone" and mu.dim != 1:
        raise DimensionMismatchError(
            "The monotone coupling is only optimal in one dimension"
        )

    if mu.size == 1 or nu.size == 1:
        plan = _trivial_plan(mu, nu)
    elif method == "monotone" or (method == "auto" and mu.dim == 1):
        plan = _monotone_plan(mu, nu)
    else:
        logger.debug("Network simplex on %dx%d supports", mu.size, nu.size)
        plan = _network_simplex_plan(mu, nu, cost_matrix(mu.support, nu.support, p))
    return OTResult(cost=plan_cost(plan, mu, nu, p), plan=plan, p=float(p))


def wasserstein_1d(mu: DiscreteMeasure, nu: DiscreteMeasure, p: float = 2.0) -> float:
    """W_p on the line by integrating |F_mu^-1 - F_nu^-1|^p over (0, 1).

    Both quantile functions are piecewise constant, so the integral is a finite
    sum over the merged breakpoints of the two cumulative distributions.
    """
    _check_order(p)
    if mu.dim != 1 or nu.dim != 1:
        raise DimensionMismatchError("wasserstein_1d needs one-dimensional measures")
    xo = np.argsort(mu.support[:, 0])
    yo = np.argsort(nu.support[:, 0])
    xs, ys = mu.support[xo, 0], nu.support[yo, 0]
    fx, fy = np.cumsum(mu.weights[xo]), np.cumsum(nu.weights[yo])
    levels = np.unique(np.concatenate([[0.0], fx[:-1], fy[:-1], [1.0]]))
    levels = levels[(levels >= 0.0) & (levels <= 1.0)]
    mids = 0.5 * (levels[:-1] + levels[1:])
    qx = xs[np.minimum(np.searchsorted(fx, mids, side="left"), xs.size - 1)]
    qy = ys[np.minimum(np.searchsorted(fy, mids, side="left"), ys.size - 1)]
    total = float(np.diff(levels) @ (np.abs(qx - qy) ** p))
    return total ** (1.0 / p)


def _uniform_pair_points(mu: DiscreteMeasure, nu: DiscreteMeasure):
    if not (mu.is_uniform and nu.is_uniform):
        raise ParameterError("Brute force needs uniform-weight measures")
    if mu.size != nu.size:
        raise ParameterError(
            f"Brute force needs equal sizes, got {mu.size} and {nu.size}"
        )
    return mu.support, nu.support


def brute_force_wasserstein(
    mu: DiscreteMeasure, nu: DiscreteMeasure, p: float = 2.0
) -> float:
    """W_p by enumerating all n! permutations (uniform weights, n <= 8)."""
    _check_order(p)
    check_dims(mu.dim, nu.dim, "measures")
    X, Y = _uniform_pair_points(mu, nu)
    n = X.shape[0]
    if n > BRUTE_FORCE_MAX:
        raise ParameterError(
            f"Brute force is limited to n <= {BRUTE_FORCE_MAX}, got {n}"
        )
    M = cost_matrix(X, Y, p)
    rows = np.arange(n)
    best = min(
        float(M[rows, list(perm)].sum()) for perm in itertools.permutations(range(n))
    )
    return (best / n) ** (1.0 / p)


def optimal_matching(
    X: PointsLike, Y: PointsLike, p: float = 2.0
) -> Tuple[float, NDArray[np.intp]]:
    """Optimal bipartite matching between two equal-size point sets.

    Returns:
        Tuple of (n^-1 sum ||x_i - y_sigma(i)||^p, sigma)
    """
    _check_order(p)
    X, Y = as_points(X), as_points(Y)
    if X.shape[0] != Y.shape[0] or X.shape[0] == 0:
        raise ParameterError(
            "Matching needs two nonempty sets of equal size, "
            f"got {X.shape[0]} and {Y.shape[0]}"
        )
    M = cost_matrix(X, Y, p)
    rows, sigma = linear_sum_assignment(M)
    return float(M[rows, sigma].sum()) / X.shape[0], sigma.astype(np.intp)


def obm_cost(X: PointsLike, Y: PointsLike, p: float = 2.0) -> float:
    """Minimum matching cost n^-1 sum ||x_i - y_sigma(i)||^p (equals W_p(X, Y)^p)."""
    return optimal_matching(X, Y, p)[0]
