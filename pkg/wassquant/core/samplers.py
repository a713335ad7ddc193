"""
Population measures with known intrinsic dimension.

A Sampler is an immutable description of a measure rho: its density form,
intrinsic dimension d, ambient dimension D and seed. Draws are produced by a
counter-based Philox generator keyed by (seed, stream), so any stream can be
regenerated independently of the others. Supports are rescaled into the unit
ball; ``scale`` reports the factor and analytic quantities are stated both
before (``analytic_m``) and after (moments, ``analytic_vnp``) that rescaling.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Dict, Mapping, Optional, Tuple

import numpy as np
from numpy.typing import NDArray
from scipy import integrate, stats
from scipy.linalg import qr
from scipy.special import gamma

from wassquant.errors import ConfigError, ParameterError

logger = logging.getLogger(__name__)

QUAD_ABS_TOL = 1e-10


class DensityForm(str, Enum):
    """Closed-form population densities known to the toolkit."""

    UNIFORM_CUBE = "uniform-cube"
    UNIFORM_BALL = "uniform-ball"
    UNIFORM_SPHERE = "uniform-sphere-surface"
    SCALED_INTERVAL = "scaled-uniform-interval"
    TRUNCATED_GAUSSIAN_CUBE = "truncated-gaussian-cube"
    POINT_MASS = "point-mass"


# Parameters each form accepts, with defaults.
FORM_PARAMS: Dict[DensityForm, Dict[str, Any]] = {
    DensityForm.UNIFORM_CUBE: {},
    DensityForm.UNIFORM_BALL: {},
    DensityForm.UNIFORM_SPHERE: {},
    DensityForm.SCALED_INTERVAL: {"length": 1.0},
    DensityForm.TRUNCATED_GAUSSIAN_CUBE: {"sigma": 0.25},
    DensityForm.POINT_MASS: {"location": None},
}

SAMPLER_FIELDS = {
    "name",
    "form",
    "intrinsic_dim",
    "ambient_dim",
    "seed",
    "params",
    "embed",
    "embedding",
}


def as_int(value: Any, name: str) -> int:
    """Integer value of ``value``; integral floats pass, anything else fails.

    Raises:
        ParameterError: On booleans, strings and non-integral numbers
    """
    if isinstance(value, (bool, np.bool_)):
        raise ParameterError(f"{name} must be an integer, got {value!r}")
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)) and float(value).is_integer():
        return int(value)
    raise ParameterError(f"{name} must be an integer, got {value!r}")


@dataclass(frozen=True)
class MomentDescriptor:
    """Value of m(rho_A) = integral of rho_A^(d/(d+2)) over the support."""

    value: float
    exact: bool


@dataclass(frozen=True)
class Sampler:
    """Immutable description of a population measure.

    ``embedding`` is None for the canonical coordinates (zero-padded up to
    ``ambient_dim``) or a (D, native_dim) matrix with orthonormal columns.
    """

    name: str
    form: DensityForm
    intrinsic_dim: int
    ambient_dim: int
    seed: int = 0
    params: Tuple[Tuple[str, Any], ...] = ()
    embedding: Optional[NDArray[np.float64]] = field(
        default=None, compare=False, repr=False
    )

    @property
    def param_dict(self) -> Dict[str, Any]:
        return dict(self.params)

    @property
    def native_dim(self) -> int:
        """Dimension of the canonical coordinates the density is written in."""
        if self.form is DensityForm.UNIFORM_SPHERE:
            return self.intrinsic_dim + 1
        return self.intrinsic_dim

    @property
    def scale(self) -> float:
        """Factor applied to canonical draws so the support fits the unit ball."""
        bound = _raw_norm_bound(self)
        return 1.0 / bound if bound > 1.0 else 1.0

    @property
    def norm_bound(self) -> float:
        """Upper bound on ||x|| for every draw, after rescaling."""
        return _raw_norm_bound(self) * self.scale

    def with_seed(self, seed: int) -> "Sampler":
        return replace(self, seed=int(seed))


def _raw_norm_bound(sampler: Sampler) -> float:
    form, d = sampler.form, sampler.intrinsic_dim
    if form in (DensityForm.UNIFORM_CUBE, DensityForm.TRUNCATED_GAUSSIAN_CUBE):
        return math.sqrt(d)
    if form in (DensityForm.UNIFORM_BALL, DensityForm.UNIFORM_SPHERE):
        return 1.0
    if form is DensityForm.SCALED_INTERVAL:
        return float(sampler.param_dict["length"])
    location = np.asarray(sampler.param_dict["location"], dtype=np.float64)
    return float(np.linalg.norm(location))


def make_sampler(
    form: str,
    intrinsic_dim: int,
    ambient_dim: Optional[int] = None,
    seed: int = 0,
    name: Optional[str] = None,
    **params: Any,
) -> Sampler:
    """Create a Sampler for one of the enumerated density forms.

    Args:
        form: Density form name, e.g. "uniform-cube"
        intrinsic_dim: Manifold dimension d
        ambient_dim: Ambient dimension D (defaults to the native dimension)
        seed: Base seed of every draw
        name: Identifier used in reports (defaults to the form name)
        **params: Form parameters ("length" for the interval, "sigma" for the
            truncated Gaussian, "location" for the point mass)

    Raises:
        ConfigError: On an unknown form or parameter
        ParameterError: On inadmissible dimensions or parameter values
    """
    try:
        density = DensityForm(form)
    except ValueError as e:
        raise ConfigError(f"Unknown density form {form!r}") from e
    d = as_int(intrinsic_dim, "intrinsic_dim")
    if d < 1:
        raise ParameterError(f"Intrinsic dimension must be >= 1, got {d}")
    unknown = set(params) - set(FORM_PARAMS[density])
    if unknown:
        raise ConfigError(f"Unknown parameters for {density.value}: {sorted(unknown)}")
    merged = {**FORM_PARAMS[density], **params}

    if density is DensityForm.SCALED_INTERVAL:
        if d != 1:
            raise ParameterError("scaled-uniform-interval is one-dimensional")
        merged["length"] = float(merged["length"])
        if merged["length"] <= 0:
            raise ParameterError("Interval length must be positive")
    elif density is DensityForm.TRUNCATED_GAUSSIAN_CUBE:
        merged["sigma"] = float(merged["sigma"])
        if merged["sigma"] <= 0:
            raise ParameterError("sigma must be positive")
    elif density is DensityForm.POINT_MASS:
        location = merged["location"]
        if location is None:
            loc = np.zeros(d)
        else:
            loc = np.asarray(location, dtype=np.float64).reshape(-1)
        if loc.shape[0] != d or not np.all(np.isfinite(loc)):
            raise ParameterError(f"Point-mass location must be a finite {d}-vector")
        merged["location"] = tuple(float(v) for v in loc)

    sampler = Sampler(
        name=name or density.value,
        form=density,
        intrinsic_dim=d,
        ambient_dim=0,
        seed=as_int(seed, "seed"),
        params=tuple(sorted(merged.items())),
    )
    native = sampler.native_dim
    D = native if ambient_dim is None else as_int(ambient_dim, "ambient_dim")
    if D < native:
        raise ParameterError(
            f"Ambient dimension {D} is below the native dimension {native}"
        )
    return replace(sampler, ambient_dim=D)


def _seed_sequence(seed: int, stream: Tuple[int, ...]) -> np.random.SeedSequence:
    spawn_key = tuple(int(s) for s in stream)
    return np.random.SeedSequence(entropy=int(seed) & (2**64 - 1), spawn_key=spawn_key)


def stream_rng(seed: int, *stream: int) -> np.random.Generator:
    """Philox generator for the sub-stream ``stream`` of ``seed``."""
    return np.random.Generator(np.random.Philox(_seed_sequence(seed, stream)))


def derive_seed(seed: int, *stream: int) -> int:
    """Deterministic 63-bit seed for a sub-stream, suitable for reporting."""
    seq = _seed_sequence(seed, stream)
    hi, lo = (int(v) for v in seq.generate_state(2, np.uint32))
    return ((hi << 32) | lo) & (2**63 - 1)


def _canonical_draws(
    sampler: Sampler, n: int, rng: np.random.Generator
) -> NDArray[np.float64]:
    form, d = sampler.form, sampler.intrinsic_dim
    if form is DensityForm.UNIFORM_CUBE:
        return rng.random((n, d))
    if form is DensityForm.UNIFORM_BALL:
        g = rng.standard_normal((n, d))
        radius = rng.random(n) ** (1.0 / d)
        return g / np.linalg.norm(g, axis=1, keepdims=True) * radius[:, None]
    if form is DensityForm.UNIFORM_SPHERE:
        g = rng.standard_normal((n, d + 1))
        return g / np.linalg.norm(g, axis=1, keepdims=True)
    if form is DensityForm.SCALED_INTERVAL:
        return rng.random((n, 1)) * sampler.param_dict["length"]
    if form is DensityForm.TRUNCATED_GAUSSIAN_CUBE:
        return _truncnorm(sampler).rvs(size=(n, d), random_state=rng)
    location = np.asarray(sampler.param_dict["location"], dtype=np.float64)
    return np.tile(location, (n, 1))


def _truncnorm(sampler: Sampler):
    # N(1/2, sigma^2) restricted to [0, 1] in every coordinate
    sigma = sampler.param_dict["sigma"]
    return stats.truncnorm(-0.5 / sigma, 0.5 / sigma, loc=0.5, scale=sigma)


def embed_points(sampler: Sampler, points: NDArray[np.float64]) -> NDArray[np.float64]:
    """Map canonical (already rescaled) coordinates into the ambient space."""
    if sampler.embedding is not None:
        return points @ sampler.embedding.T
    if sampler.ambient_dim == points.shape[1]:
        return points
    padded = np.zeros((points.shape[0], sampler.ambient_dim))
    padded[:, : points.shape[1]] = points
    return padded


def draw(sampler: Sampler, n: int, stream: Tuple[int, ...] = ()) -> NDArray[np.float64]:
    """Draw n i.i.d. points from the sampler's population measure.

    Args:
        sampler: Population description
        n: Number of points, n >= 1
        stream: Sub-stream key; equal (seed, stream) pairs give equal draws

    Returns:
        Array of shape (n, ambient_dim), inside the ball of radius ``norm_bound``
    """
    if int(n) < 1:
        raise ParameterError(f"Number of draws must be >= 1, got {n}")
    rng = stream_rng(sampler.seed, *stream)
    raw = _canonical_draws(sampler, int(n), rng) * sampler.scale
    return embed_points(sampler, raw)


def random_orthonormal(rows: int, cols: int, seed: int) -> NDArray[np.float64]:
    """Haar-distributed (rows, cols) matrix with orthonormal columns.

    A seeded Gaussian matrix is orthonormalized column by column (QR), with
    the signs fixed by the diagonal of R so the result is Haar distributed.
    """
    if cols > rows:
        raise ParameterError(
            f"Cannot fit {cols} orthonormal columns in dimension {rows}"
        )
    g = stream_rng(seed, 0x0E).standard_normal((rows, cols))
    q, r = qr(g, mode="economic")
    return q * np.sign(np.where(np.diag(r) == 0, 1.0, np.diag(r)))


def embed_isometric(sampler: Sampler, new_ambient_dim: int, seed: int) -> Sampler:
    """Compose the draws with a fixed random isometry into R^new_ambient_dim."""
    D = as_int(new_ambient_dim, "ambient_dim")
    if D < sampler.ambient_dim:
        raise ParameterError(
            f"Cannot embed a {sampler.ambient_dim}-dimensional sampler "
            f"into dimension {D}"
        )
    current = sampler.embedding
    if current is None:
        current = np.eye(sampler.ambient_dim, sampler.native_dim)
    Q = random_orthonormal(D, sampler.ambient_dim, as_int(seed, "embedding seed"))
    embedding = Q @ current
    embedding.setflags(write=False)
    logger.debug(
        "Embedded %s from D=%d into D=%d", sampler.name, sampler.ambient_dim, D
    )
    return replace(sampler, ambient_dim=D, embedding=embedding)


def ball_volume(d: int) -> float:
    return math.pi ** (d / 2) / float(gamma(d / 2 + 1))


def sphere_area(d: int) -> float:
    """Surface area of the unit d-sphere in R^(d+1)."""
    return 2 * math.pi ** ((d + 1) / 2) / float(gamma((d + 1) / 2))


def analytic_m(sampler: Sampler) -> MomentDescriptor:
    """m(rho_A) in the canonical (pre-scale) coordinates.

    Constant densities use the closed form volume * density^(d/(d+2)); the
    truncated Gaussian is a product density, so m is a one-dimensional
    quadrature raised to the power d.
    """
    d = sampler.intrinsic_dim
    expo = d / (d + 2)
    form = sampler.form
    if form is DensityForm.UNIFORM_CUBE:
        return MomentDescriptor(1.0, True)
    if form is DensityForm.UNIFORM_BALL:
        vol = ball_volume(d)
        return MomentDescriptor(vol * vol ** (-expo), True)
    if form is DensityForm.UNIFORM_SPHERE:
        area = sphere_area(d)
        return MomentDescriptor(area ** (2.0 / (d + 2)), True)
    if form is DensityForm.SCALED_INTERVAL:
        length = sampler.param_dict["length"]
        return MomentDescriptor(length * length ** (-expo), True)
    if form is DensityForm.TRUNCATED_GAUSSIAN_CUBE:
        dist = _truncnorm(sampler)
        one_d, _ = integrate.quad(
            lambda t: dist.pdf(t) ** expo, 0.0, 1.0, epsabs=QUAD_ABS_TOL, limit=200
        )
        return MomentDescriptor(one_d**d, False)
    if form is DensityForm.POINT_MASS:
        return MomentDescriptor(0.0, True)
    raise ParameterError(f"No analytic m(rho_A) for {form}")


def _canonical_mean(sampler: Sampler) -> NDArray[np.float64]:
    form, n = sampler.form, sampler.native_dim
    if form is DensityForm.UNIFORM_CUBE:
        return np.full(n, 0.5)
    if form in (DensityForm.UNIFORM_BALL, DensityForm.UNIFORM_SPHERE):
        return np.zeros(n)
    if form is DensityForm.SCALED_INTERVAL:
        return np.array([sampler.param_dict["length"] / 2])
    if form is DensityForm.TRUNCATED_GAUSSIAN_CUBE:
        return np.full(n, float(_truncnorm(sampler).mean()))
    return np.asarray(sampler.param_dict["location"], dtype=np.float64)


def analytic_mean(sampler: Sampler) -> NDArray[np.float64]:
    """Population mean in ambient coordinates (after scaling and embedding)."""
    return embed_points(sampler, (_canonical_mean(sampler) * sampler.scale)[None, :])[0]


def analytic_second_moment(sampler: Sampler) -> float:
    """E ||x||^2 under the population measure, after scaling."""
    form, d = sampler.form, sampler.intrinsic_dim
    if form is DensityForm.UNIFORM_CUBE:
        raw = d / 3.0
    elif form is DensityForm.UNIFORM_BALL:
        raw = d / (d + 2.0)
    elif form is DensityForm.UNIFORM_SPHERE:
        raw = 1.0
    elif form is DensityForm.SCALED_INTERVAL:
        raw = sampler.param_dict["length"] ** 2 / 3.0
    elif form is DensityForm.TRUNCATED_GAUSSIAN_CUBE:
        dist = _truncnorm(sampler)
        raw = d * float(dist.var() + dist.mean() ** 2)
    else:
        raw = float(np.sum(np.square(sampler.param_dict["location"])))
    return raw * sampler.scale**2


def analytic_vnp(sampler: Sampler, k: int) -> Optional[float]:
    """Closed-form V_{k,2}^(1/2) for one-dimensional uniform samplers, else None.

    Uniform on an interval of length L has optimal k-point cost L^2/(12 k^2);
    the value returned is in the rescaled coordinates the draws live in.
    """
    uniform_line = (DensityForm.UNIFORM_CUBE, DensityForm.SCALED_INTERVAL)
    if sampler.intrinsic_dim != 1 or sampler.form not in uniform_line:
        return None
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    length = sampler.param_dict.get("length", 1.0) * sampler.scale
    return length / (math.sqrt(12.0) * k)


def sampler_to_dict(sampler: Sampler) -> Dict[str, Any]:
    """Descriptor used in config and summary files."""
    out: Dict[str, Any] = {
        "name": sampler.name,
        "form": sampler.form.value,
        "intrinsic_dim": sampler.intrinsic_dim,
        "ambient_dim": sampler.ambient_dim,
        "seed": sampler.seed,
    }
    params = {k: (list(v) if isinstance(v, tuple) else v) for k, v in sampler.params}
    if params:
        out["params"] = params
    if sampler.embedding is not None:
        out["embedding"] = [[float(v) for v in row] for row in sampler.embedding]
    return out


def sampler_from_dict(data: Mapping[str, Any]) -> Sampler:
    """Inverse of sampler_to_dict, plus an optional ``embed`` section.

    ``embed`` = {"ambient_dim": D, "seed": s} applies embed_isometric after
    construction, so configs can describe a manifold inside a larger space.
    """
    unknown = set(data) - SAMPLER_FIELDS
    if unknown:
        raise ConfigError(f"Unknown sampler fields: {sorted(unknown)}")
    for key in ("form", "intrinsic_dim"):
        if key not in data:
            raise ConfigError(f"Sampler is missing {key!r}")
    params = data.get("params") or {}
    if not isinstance(params, Mapping):
        raise ConfigError("Sampler params must be an object")
    sampler = make_sampler(
        data["form"],
        data["intrinsic_dim"],
        ambient_dim=data.get("ambient_dim"),
        seed=data.get("seed", 0),
        name=data.get("name"),
        **params,
    )
    if "embedding" in data:
        if "embed" in data:
            raise ConfigError("Sampler takes either 'embed' or 'embedding', not both")
        try:
            matrix = np.asarray(data["embedding"], dtype=np.float64)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"Sampler embedding must be a numeric matrix: {e}") from e
        expected = (sampler.ambient_dim, sampler.native_dim)
        if matrix.shape != expected:
            raise ConfigError(
                f"Sampler embedding must have shape {expected}, got {matrix.shape}"
            )
        if not np.allclose(matrix.T @ matrix, np.eye(sampler.native_dim), atol=1e-9):
            raise ConfigError("Sampler embedding columns must be orthonormal")
        matrix.setflags(write=False)
        return replace(sampler, embedding=matrix)
    embed = data.get("embed")
    if embed is not None:
        if (
            not isinstance(embed, Mapping)
            or set(embed) - {"ambient_dim", "seed"}
            or "ambient_dim" not in embed
        ):
            raise ConfigError("Sampler embed must be {'ambient_dim': D, 'seed': s}")
        sampler = embed_isometric(sampler, embed["ambient_dim"], embed.get("seed", 0))
    return sampler
