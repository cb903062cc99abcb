"""Spatial geometry of the three FLRW slice types and the scale-factor models.

Points on S³ are stored as unit 4-vectors and points on ℍ³ as unit vectors of
the Minkowski hyperboloid in ℝ^{1,3}, so distances are branch-free dot
products. Scale factors carry prefactor 1; ``ScaleFactorModel.custom`` lets a
user rescale or supply any other continuous profile.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy import integrate

from .errors import DomainError, ModelError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, Sequence[float], np.ndarray]

# Round-off allowance before a point is rejected as off the manifold.
CLAMP_TOL = 1e-9
NOT_TIMELIKE = None


class Topology(str, Enum):
    MINKOWSKI = "minkowski"
    FLAT = "flat"
    OPEN = "open"
    CLOSED = "closed"


@dataclass(frozen=True)
class SpacetimeKind:
    topology: Topology
    d: int = 3

    def __post_init__(self) -> None:
        topology = Topology(self.topology)
        object.__setattr__(self, "topology", topology)
        if topology in (Topology.MINKOWSKI, Topology.FLAT):
            if self.d not in (1, 2, 3):
                raise ModelError(f"{topology.value} spacetimes need d in {{1,2,3}}, got d={self.d}")
        elif self.d != 3:
            raise ModelError(f"{topology.value} FLRW spacetimes are d=3 only, got d={self.d}")

    @classmethod
    def minkowski(cls, d: int) -> "SpacetimeKind":
        return cls(Topology.MINKOWSKI, d)

    @classmethod
    def flat(cls, d: int) -> "SpacetimeKind":
        return cls(Topology.FLAT, d)

    @classmethod
    def open(cls) -> "SpacetimeKind":
        return cls(Topology.OPEN, 3)

    @classmethod
    def closed(cls) -> "SpacetimeKind":
        return cls(Topology.CLOSED, 3)

    @property
    def is_flat(self) -> bool:
        return self.topology in (Topology.MINKOWSKI, Topology.FLAT)

    @property
    def curvature(self) -> int:
        return {Topology.OPEN: -1, Topology.CLOSED: 1}.get(self.topology, 0)

    @property
    def coordinate_dim(self) -> int:
        """Length of the stored spatial coordinate vector on a grid."""

        if self.topology is Topology.CLOSED:
            return 4
        return self.d

    def __str__(self) -> str:
        return f"{self.topology.value}-{self.d}d"


def _dust(k: int) -> Callable[[np.ndarray], np.ndarray]:
    if k == 1:
        return lambda eta: 1.0 - np.cos(eta)
    if k == 0:
        return lambda eta: eta**2
    return lambda eta: np.cosh(eta) - 1.0


def _radiation(k: int) -> Callable[[np.ndarray], np.ndarray]:
    if k == 1:
        return np.sin
    if k == 0:
        return np.abs
    return np.sinh


_DEFAULT_HORIZON = {("dust", 1): 2.0 * math.pi, ("radiation", 1): math.pi}


@dataclass(frozen=True)
class ScaleFactorModel:
    """Scale factor a(η) on the conformal-time window [0, T]."""

    kind: str
    curvature: int
    T: float
    callback: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, repr=False)
    label: str = ""

    def __post_init__(self) -> None:
        if self.kind not in ("dust", "radiation", "custom"):
            raise ModelError(f"unknown scale-factor kind '{self.kind}'")
        if self.curvature not in (-1, 0, 1):
            raise ModelError(f"curvature must be -1, 0 or 1, got {self.curvature}")
        if not (self.T > 0 and math.isfinite(self.T)):
            raise ModelError(f"horizon T must be positive and finite, got {self.T}")
        if self.kind == "custom" and self.callback is None:
            raise ModelError("custom scale factor needs a callback")

    @classmethod
    def dust(cls, k: int, T: Optional[float] = None) -> "ScaleFactorModel":
        return cls("dust", k, _horizon("dust", k, T))

    @classmethod
    def radiation(cls, k: int, T: Optional[float] = None) -> "ScaleFactorModel":
        return cls("radiation", k, _horizon("radiation", k, T))

    @classmethod
    def custom(cls, func: Callable[[np.ndarray], np.ndarray], T: float, *, curvature: int = 0, label: str = "custom") -> "ScaleFactorModel":
        return cls("custom", curvature, float(T), func, label)

    @classmethod
    def constant(cls, T: float, value: float = 1.0, *, curvature: int = 0) -> "ScaleFactorModel":
        return cls.custom(_Constant(float(value)), T, curvature=curvature, label=f"constant:{value!r}")

    @property
    def name(self) -> str:
        if self.kind == "custom":
            return self.label or "custom"
        return f"{self.kind}:k={self.curvature}"

    def _profile(self) -> Callable[[np.ndarray], np.ndarray]:
        if self.kind == "dust":
            return _dust(self.curvature)
        if self.kind == "radiation":
            return _radiation(self.curvature)
        return self.callback  # type: ignore[return-value]

    def __call__(self, eta: ArrayLike) -> Union[float, np.ndarray]:
        arr = np.asarray(eta, dtype=float)
        slack = 1e-12 * max(1.0, self.T)
        if np.any(arr < -slack) or np.any(arr > self.T + slack) or np.any(~np.isfinite(arr)):
            raise DomainError(f"eta outside [0, {self.T}] for scale factor {self.name}")
        clipped = np.clip(arr, 0.0, self.T)
        values = np.broadcast_to(np.asarray(self._profile()(clipped), dtype=float), clipped.shape)
        if values.ndim == 0:
            return float(values)
        return np.array(values)


class _Constant:
    """Picklable, hashable constant profile."""

    def __init__(self, value: float) -> None:
        self.value = value

    def __call__(self, eta: np.ndarray) -> np.ndarray:
        return np.full(np.shape(eta), self.value)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, _Constant) and other.value == self.value

    def __hash__(self) -> int:
        return hash(("constant", self.value))


def _horizon(kind: str, k: int, T: Optional[float]) -> float:
    if T is not None:
        return float(T)
    if (kind, k) in _DEFAULT_HORIZON:
        return _DEFAULT_HORIZON[(kind, k)]
    raise ModelError(f"{kind} model with k={k} needs an explicit horizon T")


def scale_factor(model: ScaleFactorModel, eta: ArrayLike) -> Union[float, np.ndarray]:
    return model(eta)


def sup_norm(model: ScaleFactorModel, n: int = 4096) -> float:
    samples = np.linspace(0.0, model.T, n)
    return float(np.max(np.abs(model(samples))))


def check_roots(model: ScaleFactorModel, *, closed: bool = False, tol: float = 1e-12, samples: int = 1025) -> None:
    """Raise ``ModelError`` unless a(0) = 0 (and a(T) = 0 for closed slices).

    a must also stay positive on (0, T), checked at ``samples`` evenly spaced
    times; a(T) itself counts as interior for open and flat slices.
    """

    if abs(model(0.0)) > tol:
        raise ModelError(f"scale factor {model.name} must vanish at eta=0 (Big Bang), got a(0)={model(0.0):.3g}")
    if closed and abs(model(model.T)) > tol:
        raise ModelError(f"closed FLRW needs a(T)=0 (Big Crunch), got a({model.T:.6g})={model(model.T):.3g}")
    interior = np.linspace(0.0, model.T, samples)[1:]
    if closed:
        interior = interior[:-1]
    values = np.asarray(model(interior), dtype=float)
    bad = np.nonzero(~(values > tol))[0]
    if bad.size:
        eta = float(interior[bad[0]])
        raise ModelError(f"scale factor {model.name} must be positive inside the window, got a({eta:.6g})={values[bad[0]]:.3g}")


# ---------------------------------------------------------------------------
# points


@dataclass(frozen=True, eq=False)
class SpacetimePoint:
    eta: float
    spatial: np.ndarray
    chart: str = "flat"

    def __post_init__(self) -> None:
        vec = np.atleast_1d(np.array(self.spatial, dtype=float))
        if self.chart == "sphere":
            _require_unit_sphere(vec)
        elif self.chart == "hyperboloid":
            _require_hyperboloid(vec)
        elif self.chart != "flat":
            raise DomainError(f"unknown chart '{self.chart}'")
        vec.setflags(write=False)
        object.__setattr__(self, "spatial", vec)


def sphere_point(alpha: float, beta: float, phi: float) -> np.ndarray:
    """Unit 4-vector from hyperspherical angles (α, β ∈ [0,π], φ ∈ [0,2π))."""

    sa = math.sin(alpha)
    sb = math.sin(beta)
    return np.array([math.cos(alpha), sa * math.cos(beta), sa * sb * math.cos(phi), sa * sb * math.sin(phi)])


def hyperboloid_point(r: float, direction: Sequence[float]) -> np.ndarray:
    n = np.asarray(direction, dtype=float)
    norm = np.linalg.norm(n)
    if norm == 0.0:
        if r != 0.0:
            raise DomainError("zero direction with non-zero radius")
        return np.array([1.0, 0.0, 0.0, 0.0])
    return np.concatenate([[math.cosh(r)], math.sinh(r) * n / norm])


def hyperboloid_from_u(u: np.ndarray) -> np.ndarray:
    """Embed spatial hyperboloid coordinates u ∈ ℝ³ as (√(1+|u|²), u)."""

    u = np.asarray(u, dtype=float)
    x0 = np.sqrt(1.0 + np.sum(u * u, axis=-1, keepdims=True))
    return np.concatenate([x0, u], axis=-1)


def boost_to(x: np.ndarray) -> np.ndarray:
    """Lorentz boost taking the hyperboloid origin (1,0,0,0) to ``x``."""

    x = np.asarray(x, dtype=float)
    x0, u = x[0], x[1:]
    boost = np.empty((4, 4))
    boost[0, 0] = x0
    boost[0, 1:] = u
    boost[1:, 0] = u
    boost[1:, 1:] = np.eye(3) + np.outer(u, u) / (1.0 + x0)
    return boost


def exp_map_h3(x: np.ndarray, directions: np.ndarray, s: ArrayLike) -> np.ndarray:
    """Points at geodesic distance ``s`` from ``x`` along unit ``directions``.

    ``directions`` are unit 3-vectors in the tangent frame obtained by boosting
    the origin onto ``x``; ``s`` broadcasts against the leading axes.
    """

    n = np.asarray(directions, dtype=float)
    s = np.asarray(s, dtype=float)
    lead = np.broadcast_shapes(s.shape, n.shape[:-1])
    s_b = np.broadcast_to(s, lead)[..., None]
    n_b = np.broadcast_to(n, lead + (3,))
    local = np.concatenate([np.cosh(s_b), np.sinh(s_b) * n_b], axis=-1)
    return local @ boost_to(x).T


def _require_unit_sphere(q: np.ndarray) -> None:
    norms = np.linalg.norm(q, axis=-1)
    if np.any(np.abs(norms - 1.0) > CLAMP_TOL):
        raise DomainError("sphere points must be unit vectors in R^4")


def _minkowski_dot(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return x[..., 0] * y[..., 0] - np.sum(x[..., 1:] * y[..., 1:], axis=-1)


def _require_hyperboloid(x: np.ndarray) -> None:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != 4:
        raise DomainError("hyperboloid points are 4-vectors")
    norms = _minkowski_dot(x, x)
    scale = np.maximum(1.0, x[..., 0] ** 2)
    if np.any(np.abs(norms - 1.0) > CLAMP_TOL * scale) or np.any(x[..., 0] <= 0):
        raise DomainError("points must lie on the upper unit hyperboloid")


def geodesic_distance_s3(q: ArrayLike, q_prime: ArrayLike) -> Union[float, np.ndarray]:
    """Great-circle angle between unit 4-vectors, in [0, π].

    Evaluated as 2·atan2(|q−q'|, |q+q'|), which equals arccos of the clamped
    dot product but stays exact at the coincident and antipodal ends.
    """

    a = np.asarray(q, dtype=float)
    b = np.asarray(q_prime, dtype=float)
    _require_unit_sphere(a)
    _require_unit_sphere(b)
    minus = np.linalg.norm(a - b, axis=-1)
    plus = np.linalg.norm(a + b, axis=-1)
    angle = 2.0 * np.arctan2(minus, plus)
    return float(angle) if np.ndim(angle) == 0 else angle


def geodesic_distance_h3(x: ArrayLike, x_prime: ArrayLike) -> Union[float, np.ndarray]:
    """Hyperbolic distance arcosh⟨x,x'⟩, computed through the Minkowski chord."""

    a = np.asarray(x, dtype=float)
    b = np.asarray(x_prime, dtype=float)
    _require_hyperboloid(a)
    _require_hyperboloid(b)
    diff = a - b
    chord_sq = np.maximum(-_minkowski_dot(diff, diff), 0.0)
    distance = 2.0 * np.arcsinh(np.sqrt(chord_sq) / 2.0)
    return float(distance) if np.ndim(distance) == 0 else distance


# ---------------------------------------------------------------------------
# covariant quantities


@lru_cache(maxsize=65536)
def _mean_scale_pair(model: ScaleFactorModel, lo: float, hi: float) -> float:
    if hi - lo <= 1e-15 * max(1.0, abs(hi)):
        return float(model(0.5 * (lo + hi)))
    value, _err = integrate.quad(lambda t: float(model(t)), lo, hi, epsabs=1e-14, epsrel=1e-10, limit=200)
    return value / (hi - lo)


def mean_scale(model: Optional[ScaleFactorModel], eta1: ArrayLike, eta2: ArrayLike) -> Union[float, np.ndarray]:
    """∫₀¹ a(τη₁ + (1−τ)η₂) dτ, broadcast over the inputs.

    The pair is ordered before integrating, so the result is exactly symmetric.
    ``model=None`` stands for a ≡ 1.
    """

    e1, e2 = np.broadcast_arrays(np.asarray(eta1, dtype=float), np.asarray(eta2, dtype=float))
    if model is None:
        out = np.ones(e1.shape)
    else:
        lo = np.minimum(e1, e2).ravel()
        hi = np.maximum(e1, e2).ravel()
        pairs, inverse = np.unique(np.stack([lo, hi], axis=1), axis=0, return_inverse=True)
        values = np.array([_mean_scale_pair(model, float(a), float(b)) for a, b in pairs])
        out = values[np.asarray(inverse).reshape(-1)].reshape(e1.shape)
    return float(out) if out.ndim == 0 else out


def timelike_distances(eta1: ArrayLike, x1: np.ndarray, eta2: ArrayLike, x2: np.ndarray, model: Optional[ScaleFactorModel]) -> np.ndarray:
    """Vectorised timelike distance; NaN marks pairs that are not timelike.

    Spatial arrays carry the coordinate vector on their last axis.
    """

    deta = np.abs(np.asarray(eta1, dtype=float) - np.asarray(eta2, dtype=float))
    dx = np.linalg.norm(np.asarray(x1, dtype=float) - np.asarray(x2, dtype=float), axis=-1)
    weight = np.asarray(mean_scale(model, eta1, eta2))
    deta, dx, weight = np.broadcast_arrays(deta, dx, weight)
    out = np.full(deta.shape, np.nan)
    timelike = deta > dx
    out[timelike] = (deta[timelike] - dx[timelike]) * weight[timelike]
    out[(deta == 0.0) & (dx == 0.0)] = 0.0
    return out


def timelike_distance(x1: SpacetimePoint, x2: SpacetimePoint, model: Optional[ScaleFactorModel] = None) -> Optional[float]:
    """d(x₁,x₂) = (|Δη| − |Δx|)·∫₀¹ a dτ for timelike pairs, else ``NOT_TIMELIKE``."""

    if x1.chart != "flat" or x2.chart != "flat":
        raise DomainError("timelike_distance is defined for flat FLRW points")
    if model is not None:
        model(x1.eta)
        model(x2.eta)
    value = timelike_distances(x1.eta, x1.spatial, x2.eta, x2.spatial, model)
    return NOT_TIMELIKE if np.isnan(value) else float(value)


def conformal_weight(d: int, eta1: ArrayLike, eta2: ArrayLike, model: Optional[ScaleFactorModel]) -> Union[float, np.ndarray]:
    """a(η₁)^{(d−1)/2} · a(η₂)^{(d−1)/2}; exactly 1 for d=1 or a ≡ 1."""

    shape = np.broadcast(np.asarray(eta1), np.asarray(eta2)).shape
    if d == 1 or model is None:
        ones = np.ones(shape)
        return float(ones) if ones.ndim == 0 else ones
    power = (d - 1) / 2.0
    weight = np.asarray(model(eta1)) ** power * np.asarray(model(eta2)) ** power
    return float(weight) if np.ndim(weight) == 0 else weight


__all__ = [
    "CLAMP_TOL",
    "NOT_TIMELIKE",
    "ScaleFactorModel",
    "SpacetimeKind",
    "SpacetimePoint",
    "Topology",
    "boost_to",
    "check_roots",
    "conformal_weight",
    "exp_map_h3",
    "geodesic_distance_h3",
    "geodesic_distance_s3",
    "hyperboloid_from_u",
    "hyperboloid_point",
    "mean_scale",
    "scale_factor",
    "sphere_point",
    "sup_norm",
    "timelike_distance",
    "timelike_distances",
]
