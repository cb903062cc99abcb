"""Grids, multi-time fields, free-solution factories and the B-norm.

Fields carry a symbolic weight exponent ``e``: the represented function is
a(η₁)^e · a(η₂)^e · values (a single-particle field: a(η)^e · values). Moving
between ψ and the reduced unknown χ only shifts ``e``, so nothing is ever
divided by a vanishing scale factor.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize

from .errors import DomainError, GridMismatchError, ModelError
from .geometry import ScaleFactorModel, SpacetimeKind, Topology, hyperboloid_from_u
from .quadrature import s3_nodes, trapezoid_weights

logger = logging.getLogger(__name__)

S3_VOLUME = 2.0 * math.pi**2


@dataclass(frozen=True, eq=False)
class TimeAxis:
    nodes: np.ndarray
    weights: np.ndarray

    @classmethod
    def uniform(cls, T: float, count: int) -> "TimeAxis":
        if count < 2:
            raise ModelError("time axes need at least 2 nodes")
        nodes = np.linspace(0.0, float(T), int(count))
        return cls(_frozen(nodes), _frozen(trapezoid_weights(nodes)))

    @property
    def count(self) -> int:
        return int(self.nodes.size)

    @property
    def spacing(self) -> float:
        return float(self.nodes[1] - self.nodes[0])

    @property
    def T(self) -> float:
        return float(self.nodes[-1])

    def snap(self, value: float) -> Tuple[int, float]:
        """Nearest node index and the snap distance; out-of-range values raise."""

        half = 0.5 * self.spacing
        if value < self.nodes[0] - half or value > self.nodes[-1] + half:
            raise DomainError(f"eta={value} outside the time axis [0, {self.T}]")
        index = int(np.argmin(np.abs(self.nodes - value)))
        return index, abs(float(self.nodes[index]) - value)


@dataclass(frozen=True, eq=False)
class SpatialAxis:
    """Spatial node set of one particle.

    ``kind`` is ``box`` (flat tensor grid), ``hyperboloid`` (tensor grid in the
    spatial hyperboloid coordinates u) or ``sphere`` (equal-weight S³ set).
    ``axes`` holds the 1-D node vectors of the tensor kinds.
    """

    kind: str
    nodes: np.ndarray
    weights: np.ndarray
    axes: Tuple[np.ndarray, ...] = ()
    half_width: float = 0.0

    @property
    def count(self) -> int:
        return int(self.weights.size)

    @property
    def dim(self) -> int:
        return int(self.nodes.shape[1])

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(axis.size for axis in self.axes) if self.axes else (self.count,)

    @property
    def spacing(self) -> Tuple[float, ...]:
        return tuple(float(axis[1] - axis[0]) for axis in self.axes)

    def embedded(self) -> np.ndarray:
        """Points in their embedding space (ℝᵈ, ℝ^{1,3} hyperboloid or ℝ⁴)."""

        if self.kind == "hyperboloid":
            return hyperboloid_from_u(self.nodes)
        return self.nodes

    def descriptor(self) -> Dict[str, object]:
        if self.kind == "sphere":
            return {"kind": "sphere", "count": self.count}
        return {"kind": self.kind, "per_axis": self.shape[0], "dim": self.dim, "half_width": self.half_width}

    def snap(self, point: Sequence[float]) -> Tuple[int, float]:
        target = np.atleast_1d(np.asarray(point, dtype=float))
        if target.size != self.dim:
            raise DomainError(f"spatial point needs {self.dim} components, got {target.size}")
        if self.kind != "sphere":
            half = [0.5 * h for h in self.spacing]
            for axis, value, slack in zip(self.axes, target, half):
                if value < axis[0] - slack or value > axis[-1] + slack:
                    raise DomainError(f"spatial coordinate {value} outside the grid box")
        distances = np.linalg.norm(self.nodes - target, axis=-1)
        index = int(np.argmin(distances))
        return index, float(distances[index])


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array)
    array.setflags(write=False)
    return array


def _tensor_axis(kind: str, dim: int, per_axis: int, half_width: float) -> SpatialAxis:
    if per_axis < 2:
        raise ModelError("spatial axes need at least 2 nodes per dimension")
    line = np.linspace(-half_width, half_width, int(per_axis))
    line_weights = trapezoid_weights(line)
    mesh = np.meshgrid(*([line] * dim), indexing="ij")
    nodes = np.stack([m.ravel() for m in mesh], axis=-1)
    weight_mesh = np.meshgrid(*([line_weights] * dim), indexing="ij")
    weights = np.prod(np.stack([w.ravel() for w in weight_mesh], axis=-1), axis=-1)
    if kind == "hyperboloid":
        weights = weights / np.sqrt(1.0 + np.sum(nodes * nodes, axis=-1))
    return SpatialAxis(kind, _frozen(nodes), _frozen(weights), tuple(_frozen(line) for _ in range(dim)), float(half_width))


def box_axis(d: int, per_axis: int, half_width: float) -> SpatialAxis:
    return _tensor_axis("box", d, per_axis, half_width)


def hyperboloid_axis(per_axis: int, half_width: float) -> SpatialAxis:
    return _tensor_axis("hyperboloid", 3, per_axis, half_width)


def sphere_axis(count: int) -> SpatialAxis:
    nodes = s3_nodes(count)
    weights = np.full(nodes.shape[0], S3_VOLUME / nodes.shape[0])
    return SpatialAxis("sphere", _frozen(nodes), _frozen(weights))


@dataclass(frozen=True, eq=False)
class MultiTimeGrid:
    kind: SpacetimeKind
    time: TimeAxis
    space1: SpatialAxis
    space2: SpatialAxis

    @property
    def eta1_axis(self) -> TimeAxis:
        return self.time

    @property
    def eta2_axis(self) -> TimeAxis:
        return self.time

    @property
    def T(self) -> float:
        return self.time.T

    @property
    def shape(self) -> Tuple[int, int, int, int]:
        return (self.time.count, self.space1.count, self.time.count, self.space2.count)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    def space(self, particle: int) -> SpatialAxis:
        return self.space1 if particle == 1 else self.space2

    def descriptor(self) -> Dict[str, object]:
        return {
            "spacetime": self.kind.topology.value,
            "d": self.kind.d,
            "T": self.T,
            "time_nodes": self.time.count,
            "space1": self.space1.descriptor(),
            "space2": self.space2.descriptor(),
        }

    def same_as(self, other: "MultiTimeGrid") -> bool:
        if self is other:
            return True
        return (
            self.kind == other.kind
            and self.shape == other.shape
            and np.array_equal(self.time.nodes, other.time.nodes)
            and np.array_equal(self.space1.nodes, other.space1.nodes)
            and np.array_equal(self.space2.nodes, other.space2.nodes)
        )


def inflated_half_width(kind: SpacetimeKind, observation_half_width: float, T: float) -> float:
    """Box half-width that contains the past cones of the observation window."""

    if kind.topology is Topology.OPEN:
        return math.sinh(math.asinh(observation_half_width) + T)
    return observation_half_width + T


def build_grid(
    kind: SpacetimeKind,
    T: float,
    time_nodes: int,
    space_nodes: int,
    box_half_width: float = 1.0,
    *,
    inflate: bool = True,
) -> MultiTimeGrid:
    """Grid shared by both particles.

    ``space_nodes`` counts nodes per axis on tensor kinds and the total node
    count on S³.
    """

    time = TimeAxis.uniform(T, time_nodes)
    if kind.topology is Topology.CLOSED:
        space = sphere_axis(space_nodes)
    else:
        half_width = inflated_half_width(kind, box_half_width, T) if inflate else float(box_half_width)
        if kind.topology is Topology.OPEN:
            space = hyperboloid_axis(space_nodes, half_width)
        else:
            space = box_axis(kind.d, space_nodes, half_width)
    return MultiTimeGrid(kind, time, space, space)


def grid_from_descriptor(descriptor: Dict[str, object]) -> MultiTimeGrid:
    kind = SpacetimeKind(Topology(descriptor["spacetime"]), int(descriptor["d"]))
    space = descriptor["space1"]
    if space["kind"] == "sphere":  # type: ignore[index]
        return build_grid(kind, float(descriptor["T"]), int(descriptor["time_nodes"]), int(space["count"]))  # type: ignore[index]
    return build_grid(
        kind,
        float(descriptor["T"]),
        int(descriptor["time_nodes"]),
        int(space["per_axis"]),  # type: ignore[index]
        float(space["half_width"]),  # type: ignore[index]
        inflate=False,
    )


# ---------------------------------------------------------------------------
# fields


def _weights_at(model: Optional[ScaleFactorModel], eta: np.ndarray, exponent: float) -> np.ndarray:
    if exponent == 0.0:
        return np.ones_like(eta)
    if model is None:
        raise ModelError("materialising a weighted field needs the scale-factor model")
    a = np.asarray(model(eta), dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        weight = np.where(a > 0.0, a**exponent, 0.0 if exponent > 0 else np.nan)
    return weight


@dataclass(frozen=True, eq=False)
class ParticleField:
    """Single-particle field a(η)^exponent · values(η, x)."""

    time: TimeAxis
    space: SpatialAxis
    values: np.ndarray
    exponent: float = 0.0
    model: Optional[ScaleFactorModel] = field(default=None, repr=False)

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=complex)
        if values.shape != (self.time.count, self.space.count):
            raise GridMismatchError(f"particle field shape {values.shape} does not match the grid")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def reweighted(self, delta: float, model: Optional[ScaleFactorModel] = None) -> "ParticleField":
        return ParticleField(self.time, self.space, self.values, self.exponent + delta, model or self.model)

    def materialize(self) -> np.ndarray:
        """Numeric values; nodes where a negative power meets a root are NaN."""

        weight = _weights_at(self.model, self.time.nodes, self.exponent)
        return weight[:, None] * self.values

    def l2_norms(self) -> np.ndarray:
        return np.sqrt(np.sum(self.space.weights[None, :] * np.abs(self.materialize()) ** 2, axis=1))


@dataclass(frozen=True, eq=False)
class MultiTimeField:
    grid: MultiTimeGrid
    values: np.ndarray
    exponent: float = 0.0
    model: Optional[ScaleFactorModel] = field(default=None, repr=False)

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=complex)
        if values.size != self.grid.size:
            raise GridMismatchError(f"field has {values.size} values, grid needs {self.grid.size}")
        values = values.reshape(self.grid.shape)
        if not np.all(np.isfinite(values)):
            raise DomainError("multi-time field values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, grid: MultiTimeGrid) -> "MultiTimeField":
        return cls(grid, np.zeros(grid.shape, dtype=complex))

    @classmethod
    def constant(cls, grid: MultiTimeGrid, value: complex = 1.0) -> "MultiTimeField":
        return cls(grid, np.full(grid.shape, value, dtype=complex))

    @classmethod
    def from_matrix(cls, grid: MultiTimeGrid, matrix: np.ndarray) -> "MultiTimeField":
        return cls(grid, np.asarray(matrix).reshape(grid.shape))

    def as_matrix(self) -> np.ndarray:
        """Rows index (η₁, x₁), columns (η₂, x₂)."""

        nt, n1, _, n2 = self.grid.shape
        return self.values.reshape(nt * n1, nt * n2)

    def _check(self, other: "MultiTimeField") -> None:
        if not self.grid.same_as(other.grid):
            raise GridMismatchError("fields live on different grids")
        if self.exponent != other.exponent:
            raise GridMismatchError("fields carry different conformal weight exponents")

    def __add__(self, other: "MultiTimeField") -> "MultiTimeField":
        self._check(other)
        return MultiTimeField(self.grid, self.values + other.values, self.exponent, self.model)

    def __sub__(self, other: "MultiTimeField") -> "MultiTimeField":
        self._check(other)
        return MultiTimeField(self.grid, self.values - other.values, self.exponent, self.model)

    def __mul__(self, scalar: complex) -> "MultiTimeField":
        return MultiTimeField(self.grid, self.values * scalar, self.exponent, self.model)

    __rmul__ = __mul__

    def __neg__(self) -> "MultiTimeField":
        return self * -1.0

    def with_exponent(self, exponent: float, model: Optional[ScaleFactorModel] = None) -> "MultiTimeField":
        return MultiTimeField(self.grid, self.values, exponent, model or self.model)

    def materialize(self) -> np.ndarray:
        weight = _weights_at(self.model, self.grid.time.nodes, self.exponent)
        return weight[:, None, None, None] * weight[None, None, :, None] * self.values


def bnorm(field: MultiTimeField) -> float:
    """max over (η₁, η₂) nodes of the weighted spatial L² norm."""

    values = field.values if field.exponent == 0.0 else field.materialize()
    if not np.all(np.isfinite(values)):
        raise DomainError("B-norm undefined: field is singular at a scale-factor root")
    density = np.abs(values) ** 2
    per_pair = np.einsum("iajb,a,b->ij", density, field.grid.space1.weights, field.grid.space2.weights)
    return float(np.sqrt(np.max(per_pair)))


def pair_norms(field: MultiTimeField) -> np.ndarray:
    """Spatial L² norm at every (η₁, η₂) node pair."""

    density = np.abs(field.values) ** 2
    return np.sqrt(np.einsum("iajb,a,b->ij", density, field.grid.space1.weights, field.grid.space2.weights))


# ---------------------------------------------------------------------------
# free solutions


def _particle_axes(grid: MultiTimeGrid, particle: int) -> Tuple[TimeAxis, SpatialAxis]:
    return grid.time, grid.space(particle)


def dalembert_free_1d(
    f: Callable[[np.ndarray], np.ndarray],
    g: Callable[[np.ndarray], np.ndarray],
    grid: MultiTimeGrid,
    particle: int = 1,
) -> ParticleField:
    """φ(η, z) = f(η − z) + g(η + z)."""

    time, space = _particle_axes(grid, particle)
    if space.kind != "box" or space.dim != 1:
        raise ModelError("dalembert_free_1d needs a flat d=1 grid")
    eta = time.nodes[:, None]
    z = space.nodes[None, :, 0]
    values = np.asarray(f(eta - z), dtype=complex) + np.asarray(g(eta + z), dtype=complex)
    return ParticleField(time, space, np.broadcast_to(values, (time.count, space.count)))


def plane_wave_free(k: Sequence[float], grid: MultiTimeGrid, particle: int = 1) -> ParticleField:
    """φ(η, x) = exp(−i(|k|η − k·x)), an exact massless mode."""

    time, space = _particle_axes(grid, particle)
    if space.kind != "box":
        raise ModelError("plane waves need a flat grid")
    wave = np.atleast_1d(np.asarray(k, dtype=float))
    if wave.size != space.dim:
        raise ModelError(f"wave vector needs {space.dim} components")
    phase = np.linalg.norm(wave) * time.nodes[:, None] - (space.nodes @ wave)[None, :]
    return ParticleField(time, space, np.exp(-1j * phase))


def flrw_free_from_minkowski(phi: ParticleField, model: ScaleFactorModel, d: int) -> ParticleField:
    """φ̃ = a^{−(d−1)/2} φ, recorded as an exponent shift."""

    return phi.reweighted(-(d - 1) / 2.0, model)


def product_free(phi1: ParticleField, phi2: ParticleField, grid: Optional[MultiTimeGrid] = None) -> MultiTimeField:
    """ψ_free(x₁, x₂) = φ₁(x₁) φ₂(x₂)."""

    if phi1.time is not phi2.time and not np.array_equal(phi1.time.nodes, phi2.time.nodes):
        raise GridMismatchError("single-particle fields use different time axes")
    if grid is None:
        raise GridMismatchError("product_free needs the target multi-time grid")
    if not (np.array_equal(phi1.space.nodes, grid.space1.nodes) and np.array_equal(phi2.space.nodes, grid.space2.nodes)):
        raise GridMismatchError("single-particle fields do not match the grid")
    if phi1.exponent == phi2.exponent:
        values = phi1.values[:, :, None, None] * phi2.values[None, None, :, :]
        return MultiTimeField(grid, values, phi1.exponent, phi1.model or phi2.model)
    values = phi1.materialize()[:, :, None, None] * phi2.materialize()[None, None, :, :]
    return MultiTimeField(grid, values)


# hyperspherical harmonics: label -> (degree, polynomial in q, normalisation)
_HARMONICS: Dict[str, Tuple[int, Tuple[int, ...], float]] = {"0": (0, (), 1.0 / math.sqrt(S3_VOLUME))}
for _i in range(4):
    _HARMONICS[f"x{_i}"] = (1, (_i,), math.sqrt(2.0) / math.pi)
for _i in range(4):
    for _j in range(_i + 1, 4):
        _HARMONICS[f"x{_i}x{_j}"] = (2, (_i, _j), math.sqrt(12.0) / math.pi)


def harmonic_labels() -> Tuple[str, ...]:
    return tuple(_HARMONICS)


def hyperspherical_harmonic(label: str, q: np.ndarray) -> np.ndarray:
    try:
        _degree, factors, norm = _HARMONICS[label]
    except KeyError:
        raise ModelError(f"unsupported harmonic label '{label}' (known: {', '.join(_HARMONICS)})") from None
    q = np.asarray(q, dtype=float)
    value = np.full(q.shape[:-1], norm)
    for index in factors:
        value = value * q[..., index]
    return value


def _great_circle_laplacian(func: Callable[[np.ndarray], np.ndarray], q: np.ndarray, h: float) -> np.ndarray:
    out = np.zeros(q.shape[0])
    for row, point in enumerate(q):
        basis, _ = np.linalg.qr(np.column_stack([point, np.eye(4)]))
        tangent = basis[:, 1:4].T
        centre = func(point[None, :])[0]
        total = 0.0
        for e in tangent:
            ahead = math.cos(h) * point + math.sin(h) * e
            behind = math.cos(h) * point - math.sin(h) * e
            total += func(ahead[None, :])[0] - 2.0 * centre + func(behind[None, :])[0]
        out[row] = total / (h * h)
    return out


@lru_cache(maxsize=64)
def esu_frequency(n: int, label: str, h: float = 1e-2) -> float:
    """Frequency minimising the discrete conformally coupled ESU residual.

    The residual of u = e^{−iωη}Y is measured with second differences of step
    ``h`` in time and along great circles on S³; the minimiser approaches
    n + 1 at second order in ``h``.
    """

    degree = _HARMONICS.get(label, (None,))[0]
    if degree is None or degree != n:
        raise ModelError(f"harmonic label '{label}' does not describe an n={n} mode")
    probes = s3_nodes(64)
    Y = hyperspherical_harmonic(label, probes)
    keep = np.abs(Y) > 0.25 * np.max(np.abs(Y))
    probes, Y = probes[keep], Y[keep]
    lap = _great_circle_laplacian(lambda q: hyperspherical_harmonic(label, q), probes, h)

    def residual(omega: float) -> float:
        time_part = -(2.0 - 2.0 * math.cos(omega * h)) / (h * h)
        return float(np.max(np.abs(time_part * Y - lap + Y)))

    scan = np.linspace(0.0, n + 3.0, 301)
    best = scan[int(np.argmin([residual(w) for w in scan]))]
    step = scan[1] - scan[0]
    result = optimize.minimize_scalar(residual, bounds=(max(best - step, 0.0), best + step), method="bounded", options={"xatol": 1e-12})
    logger.debug("ESU mode n=%d label=%s: omega=%.12f (h=%g)", n, label, result.x, h)
    return float(result.x)


def esu_mode_closed(n: int, label: str, grid: MultiTimeGrid, model: ScaleFactorModel, particle: int = 1) -> ParticleField:
    """φ̃(η, q) = a(η)⁻¹ e^{−iωη} Y(q) with ω from ``esu_frequency``."""

    time, space = _particle_axes(grid, particle)
    if space.kind != "sphere":
        raise ModelError("ESU modes need a closed FLRW grid")
    omega = esu_frequency(n, label)
    Y = hyperspherical_harmonic(label, space.nodes)
    values = np.exp(-1j * omega * time.nodes)[:, None] * Y[None, :]
    return ParticleField(time, space, values, -1.0, model)


def radial_wave_open(k: float, grid: MultiTimeGrid, model: ScaleFactorModel, particle: int = 1) -> ParticleField:
    """a(η)⁻¹ e^{−ikη} sin(kr)/(k sinh r), r the distance from the origin of ℍ³."""

    time, space = _particle_axes(grid, particle)
    if space.kind != "hyperboloid":
        raise ModelError("radial open-universe waves need an open FLRW grid")
    if k <= 0:
        raise ModelError("radial wave number must be positive")
    r = np.arcsinh(np.linalg.norm(space.nodes, axis=-1))
    with np.errstate(invalid="ignore", divide="ignore"):
        profile = np.where(r > 1e-12, np.sin(k * r) / (k * np.sinh(r)), 1.0)
    values = np.exp(-1j * k * time.nodes)[:, None] * profile[None, :]
    return ParticleField(time, space, values, -1.0, model)


def free_residual(phi: ParticleField) -> float:
    """max |∂²_η φ − Δφ| on interior nodes of a flat tensor grid."""

    if phi.space.kind != "box":
        raise ModelError("free_residual works on flat grids")
    values = phi.materialize().reshape((phi.time.count,) + phi.space.shape)
    ht = phi.time.spacing
    interior = (slice(1, -1),) * values.ndim
    result = (values[2:] - 2.0 * values[1:-1] + values[:-2])[(slice(None),) + interior[1:]] / ht**2
    for axis, h in enumerate(phi.space.spacing, start=1):
        lead = [slice(1, -1)] * values.ndim
        ahead, behind = list(lead), list(lead)
        ahead[axis] = slice(2, None)
        behind[axis] = slice(None, -2)
        result = result - (values[tuple(ahead)] - 2.0 * values[tuple(lead)] + values[tuple(behind)]) / h**2
    return float(np.max(np.abs(result)))


__all__ = [
    "MultiTimeField",
    "MultiTimeGrid",
    "ParticleField",
    "S3_VOLUME",
    "SpatialAxis",
    "TimeAxis",
    "bnorm",
    "box_axis",
    "build_grid",
    "dalembert_free_1d",
    "esu_frequency",
    "esu_mode_closed",
    "flrw_free_from_minkowski",
    "free_residual",
    "grid_from_descriptor",
    "harmonic_labels",
    "hyperboloid_axis",
    "hyperspherical_harmonic",
    "inflated_half_width",
    "pair_norms",
    "plane_wave_free",
    "product_free",
    "radial_wave_open",
    "sphere_axis",
]
