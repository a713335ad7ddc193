"""
Discrete measures, codebooks, nearest-neighbor projection and pushforwards.

A DiscreteMeasure is a finite set of atoms in R^D with nonnegative weights
summing to one. A Codebook is a finite set of distinct centers. Projecting a
measure onto a codebook moves every atom to its closest center (ties go to the
lowest center index), which yields the pushforward measure pi_S mu.
"""

import logging
from typing import Iterable, Optional, Sequence, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.spatial.distance import cdist, pdist

from wassquant.errors import DimensionMismatchError, ParameterError, check_dims

logger = logging.getLogger(__name__)

Point = NDArray[np.float64]
PointsLike = Union[ArrayLike, Sequence[Point]]

WEIGHT_INPUT_TOL = 1e-9
WEIGHT_SUM_TOL = 1e-12
CENTER_DISTINCT_TOL = 1e-12
RENORMALIZE_TOL = 1e-14

# Rows of the distance matrix evaluated per block in assign().
ASSIGN_CHUNK = 2048


def as_points(points: PointsLike, dim: Optional[int] = None) -> NDArray[np.float64]:
    """Coerce a point collection to a finite float array of shape (n, D).

    One-dimensional inputs are read as n points on the line.

    Raises:
        DimensionMismatchError: If rows have differing lengths or ``dim`` disagrees
        ParameterError: If a coordinate is not finite
    """
    try:
        arr = np.asarray(points, dtype=np.float64)
    except ValueError as e:
        raise DimensionMismatchError(f"Points do not share a dimension: {e}") from e
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    elif arr.ndim != 2:
        raise DimensionMismatchError(
            f"Expected a 2-D point array, got shape {arr.shape}"
        )
    if arr.size and not np.all(np.isfinite(arr)):
        raise ParameterError("All point coordinates must be finite")
    if dim is not None and arr.shape[0] > 0:
        check_dims(arr.shape[1], dim)
    # -0.0 and 0.0 must compare equal when atoms are merged
    return arr + 0.0


def _merge_rows(points: NDArray[np.float64], weights: NDArray[np.float64]):
    """Merge identical rows, summing their weights, in first-occurrence order."""
    _, first, inverse = np.unique(
        points, axis=0, return_index=True, return_inverse=True
    )
    inverse = np.asarray(inverse).reshape(-1)
    order = np.argsort(first, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(order.size)
    merged = np.bincount(rank[inverse], weights=weights, minlength=order.size)
    return points[first[order]], merged


def _frozen(arr: NDArray[np.float64]) -> NDArray[np.float64]:
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


class DiscreteMeasure:
    """Finitely supported probability measure on R^D.

    Zero-weight atoms are dropped and repeated atoms are merged on
    construction, so ``support`` holds distinct points and every weight is
    strictly positive. Instances are immutable.
    """

    __slots__ = ("support", "weights")

    def __init__(self, points: PointsLike, weights: Optional[ArrayLike] = None) -> None:
        """Build a measure from atoms and weights.

        Args:
            points: Atom locations, shape (m, D) (or (m,) on the line)
            weights: Atom masses; omitted means uniform

        Raises:
            DimensionMismatchError: If points and weights disagree in length
            ParameterError: On empty input, negative or all-zero weights, or a
                total mass further than 1e-9 from one
        """
        pts = as_points(points)
        if pts.shape[0] == 0:
            raise ParameterError("A measure needs at least one atom")
        if weights is None:
            w = np.full(pts.shape[0], 1.0 / pts.shape[0])
        else:
            w = np.asarray(weights, dtype=np.float64).reshape(-1)
            if w.shape[0] != pts.shape[0]:
                raise DimensionMismatchError(
                    f"Got {pts.shape[0]} points but {w.shape[0]} weights"
                )
            if not np.all(np.isfinite(w)):
                raise ParameterError("Weights must be finite")
            if np.any(w < 0):
                raise ParameterError("Weights must be nonnegative")
            total = float(w.sum())
            if total <= 0:
                raise ParameterError("Weights must not all be zero")
            if abs(total - 1.0) > WEIGHT_INPUT_TOL:
                raise ParameterError(f"Weights sum to {total!r}, expected 1")

        keep = w > 0
        pts, w = _merge_rows(pts[keep], w[keep])
        # already-normalized weights pass through untouched so that
        # rebuilding a measure from its own atoms reproduces it bit for bit
        if abs(float(w.sum()) - 1.0) > RENORMALIZE_TOL:
            w = w / w.sum()
        self.support = _frozen(pts)
        self.weights = _frozen(w)

    def __setattr__(self, name: str, value: object) -> None:
        if hasattr(self, name):
            raise AttributeError(f"{type(self).__name__} is immutable")
        object.__setattr__(self, name, value)

    def __repr__(self) -> str:
        return f"DiscreteMeasure(size={self.size}, dim={self.dim})"

    @property
    def dim(self) -> int:
        return int(self.support.shape[1])

    @property
    def size(self) -> int:
        return int(self.support.shape[0])

    @property
    def is_uniform(self) -> bool:
        return bool(np.allclose(self.weights, 1.0 / self.size, rtol=0.0, atol=1e-12))

    def mean(self) -> NDArray[np.float64]:
        return self.weights @ self.support

    def sorted(self) -> "DiscreteMeasure":
        """Return the same measure with atoms in lexicographic order."""
        order = np.lexsort(self.support.T[::-1])
        return DiscreteMeasure(self.support[order], self.weights[order])

    def equals(self, other: "DiscreteMeasure", tol: float = 1e-12) -> bool:
        """Compare two measures atom by atom, independent of atom order."""
        if self.dim != other.dim or self.size != other.size:
            return False
        a, b = self.sorted(), other.sorted()
        return bool(
            np.allclose(a.support, b.support, rtol=0.0, atol=tol)
            and np.allclose(a.weights, b.weights, rtol=0.0, atol=tol)
        )


class Codebook:
    """Finite set of pairwise distinct centers (a quantizer's support)."""

    __slots__ = ("centers",)

    def __init__(self, centers: PointsLike) -> None:
        pts = as_points(centers)
        if pts.shape[0] == 0:
            raise ParameterError("A codebook needs at least one center")
        if pts.shape[0] > 1 and float(pdist(pts).min()) <= CENTER_DISTINCT_TOL:
            raise ParameterError("Codebook centers must be pairwise distinct")
        object.__setattr__(self, "centers", _frozen(pts))

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("Codebook is immutable")

    def __repr__(self) -> str:
        return f"Codebook(k={self.k}, dim={self.dim})"

    def __len__(self) -> int:
        return self.k

    @property
    def k(self) -> int:
        return int(self.centers.shape[0])

    @property
    def dim(self) -> int:
        return int(self.centers.shape[1])

    @classmethod
    def from_points(cls, points: PointsLike, dedupe: bool = True) -> "Codebook":
        """Build a codebook, dropping centers within 1e-12 of an earlier one."""
        pts = as_points(points)
        if dedupe and pts.shape[0] > 1:
            kept = [0]
            for i in range(1, pts.shape[0]):
                gaps = np.linalg.norm(pts[kept] - pts[i], axis=1)
                if float(gaps.min()) > CENTER_DISTINCT_TOL:
                    kept.append(i)
            if len(kept) < pts.shape[0]:
                logger.debug("Dropped %d coincident centers", pts.shape[0] - len(kept))
            pts = pts[kept]
        return cls(pts)


def make_discrete_measure(points: PointsLike, weights: ArrayLike) -> DiscreteMeasure:
    """Construct a DiscreteMeasure, renormalizing weights exactly.

    Args:
        points: Atom locations, all of the same dimension
        weights: Nonnegative masses summing to one within 1e-9

    Returns:
        Measure with duplicates merged and zero-weight atoms dropped
    """
    return DiscreteMeasure(points, weights)


def empirical_measure(sample: PointsLike) -> DiscreteMeasure:
    """Uniform measure (1/n) sum delta_{x_i} over a sample.

    Repeated sample points end up as one atom carrying their combined mass.
    """
    pts = as_points(sample)
    if pts.shape[0] == 0:
        raise ParameterError("Cannot build an empirical measure from an empty sample")
    return DiscreteMeasure(pts)


def assign(points: PointsLike, S: Codebook) -> NDArray[np.intp]:
    """Index of the closest center for every point, ties to the lowest index."""
    pts = as_points(points)
    check_dims(pts.shape[1], S.dim, "points and codebook")
    labels = np.empty(pts.shape[0], dtype=np.intp)
    for start in range(0, pts.shape[0], ASSIGN_CHUNK):
        block = cdist(pts[start:start + ASSIGN_CHUNK], S.centers, "sqeuclidean")
        # argmin returns the first minimizer, which is the tie rule
        labels[start:start + ASSIGN_CHUNK] = np.argmin(block, axis=1)
    return labels


def nearest_projection(x: Union[ArrayLike, Point], S: Codebook) -> int:
    """Index of a center of S closest to x (lowest index among ties)."""
    pt = np.asarray(x, dtype=np.float64).reshape(-1)
    check_dims(pt.shape[0], S.dim, "point and codebook")
    return int(assign(pt.reshape(1, -1), S)[0])


def pushforward(mu: DiscreteMeasure, S: Codebook) -> DiscreteMeasure:
    """Image of mu under the nearest-neighbor projection onto S.

    The mass of each center is the total mu-mass of its Voronoi cell; centers
    receiving no mass are omitted and atoms come out in center order.
    """
    check_dims(mu.dim, S.dim, "measure and codebook")
    labels = assign(mu.support, S)
    mass = np.bincount(labels, weights=mu.weights, minlength=S.k)
    hit = mass > 0
    return DiscreteMeasure(S.centers[hit], mass[hit])


def _nearest_distance_power(
    points: NDArray[np.float64], S: Codebook, p: float
) -> NDArray[np.float64]:
    out = np.empty(points.shape[0])
    for start in range(0, points.shape[0], ASSIGN_CHUNK):
        block = points[start:start + ASSIGN_CHUNK]
        sq = cdist(block, S.centers, "sqeuclidean").min(axis=1)
        out[start:start + ASSIGN_CHUNK] = sq if p == 2 else np.sqrt(sq) ** p
    return out


def expected_distance_power(mu: DiscreteMeasure, S: Codebook, p: float) -> float:
    """Exact E_{x~mu} d(x, S)^p for a discrete measure."""
    if p < 1:
        raise ParameterError(f"Order p must be >= 1, got {p}")
    check_dims(mu.dim, S.dim, "measure and codebook")
    return float(mu.weights @ _nearest_distance_power(mu.support, S, p))


def projection_distance(mu: DiscreteMeasure, S: Codebook, p: float) -> float:
    """W_p(mu, pi_S mu), obtained through the quantization identity.

    For discrete mu the expected p-th power distance to S equals the optimal
    transport cost to the pushforward, so no transport problem is solved.
    """
    return expected_distance_power(mu, S, p) ** (1.0 / p)


def sample_codebook(points: Iterable[Point]) -> Codebook:
    """Codebook made of the distinct points of a sample (pi_{X_n})."""
    pts = np.asarray(list(points), dtype=np.float64)
    return Codebook(empirical_measure(pts).support)
