"""Quadrature rules for the delta-integrated model operators.

Rules come in two shapes: a ``ConeRule`` lists grid nodes inside a backward
light cone with trapezoid weights, a ``SingularRule`` lists off-grid points
whose weights already contain the singular factor (1/r, 1/√(Δη²−r²),
1/sinh s). ``particle_propagator`` composes them with the interpolation
stencils into one sparse matrix per particle.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any, Callable, Dict, List, Mapping, Optional, Tuple

import numpy as np
from scipy import sparse, special

from .errors import DomainError, ModelError
from .geometry import ScaleFactorModel, SpacetimeKind, Topology, exp_map_h3, geodesic_distance_s3

if TYPE_CHECKING:  # pragma: no cover
    from .fields import MultiTimeGrid, SpatialAxis, TimeAxis

logger = logging.getLogger(__name__)

NODE_TOL = 1e-12
# R3 low-discrepancy generator: real root of x⁴ = x + 1.
_R3_ROOT = 1.2207440846057596


@dataclass(frozen=True)
class QuadratureSettings:
    ball_radial: int = 6
    ball_angular: int = 26
    cone_radial: int = 6
    cone_angular: int = 16
    s3_exclusion_floor: float = 1e-3

    @classmethod
    def from_config(cls, overrides: Optional[Mapping[str, Any]] = None) -> "QuadratureSettings":
        import mtve_config

        values = mtve_config.section("quadrature")
        values.update({k: v for k, v in (overrides or {}).items() if v is not None})
        known = {name: values[name] for name in cls.__dataclass_fields__ if name in values}
        return cls(**known)


@dataclass(frozen=True)
class ConeRule:
    etas: np.ndarray
    points: np.ndarray
    weights: np.ndarray

    @property
    def size(self) -> int:
        return int(self.weights.size)

    def integrate(self, func: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> float:
        if self.size == 0:
            return 0.0
        return float(np.sum(self.weights * func(self.etas, self.points)))


@dataclass(frozen=True)
class SingularRule:
    """Points, their distance from the rule centre and singular-weighted weights."""

    points: np.ndarray
    radii: np.ndarray
    weights: np.ndarray
    times: Optional[np.ndarray] = None

    @property
    def size(self) -> int:
        return int(self.weights.size)

    def total(self) -> float:
        return float(np.sum(self.weights))

    def integrate(self, func: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> float:
        if self.size == 0:
            return 0.0
        return float(np.sum(self.weights * func(self.points, self.radii)))


@dataclass(frozen=True)
class PairRule:
    """S³×S³ rule: ``matrix[i, j]`` already carries w_i w_j / sinᵖ s_ij."""

    nodes: np.ndarray
    weights: np.ndarray
    matrix: np.ndarray
    power: int
    exclusion_radius: float

    def total(self) -> float:
        return float(np.sum(self.matrix))

    def integrate(self, values: np.ndarray) -> complex:
        return complex(np.sum(self.matrix * values))


def _empty_rule(dim: int) -> SingularRule:
    return SingularRule(np.zeros((0, dim)), np.zeros(0), np.zeros(0))


def trapezoid_weights(nodes: np.ndarray) -> np.ndarray:
    nodes = np.asarray(nodes, dtype=float)
    weights = np.zeros_like(nodes)
    if nodes.size < 2:
        return weights
    gaps = np.diff(nodes)
    weights[:-1] += 0.5 * gaps
    weights[1:] += 0.5 * gaps
    return weights


def _time_slice_weights(time: "TimeAxis", eta_index: int) -> np.ndarray:
    """Trapezoid weights of the nodes 0..eta_index over [0, η]."""

    return trapezoid_weights(time.nodes[: eta_index + 1])


# ---------------------------------------------------------------------------
# node sets


def sphere_directions(n: int) -> np.ndarray:
    """Golden-section spiral on S², shape (n, 3)."""

    if n < 1:
        raise ModelError("need at least one direction")
    inc = math.pi * (3.0 - math.sqrt(5.0))
    off = 2.0 / n
    k = np.arange(n)
    phi = k * inc
    y = k * off - 1.0 + off / 2.0
    r = np.sqrt(1.0 - y * y)
    return np.stack([np.cos(phi) * r, y, np.sin(phi) * r], axis=-1)


def s3_nodes(n: int) -> np.ndarray:
    """Antipodally symmetric generalized-spiral set on S³, shape (n, 4).

    Half the set covers the hemisphere q₀ ≥ 0 (polar angle from the inverse
    of the sin²α measure, the two remaining angles from an R3 sequence); the
    other half is its negative, so node i and node i + n/2 are antipodes.
    """

    if n < 2 or n % 2:
        raise ModelError(f"S³ node count must be even and >= 2, got {n}")
    m = n // 2
    table = np.linspace(0.0, 0.5 * math.pi, 20001)
    cdf = (table - np.sin(table) * np.cos(table)) / (0.5 * math.pi)
    alpha = np.interp((np.arange(m) + 0.5) / m, cdf, table)
    i = np.arange(m)
    v = np.mod(0.5 + i / _R3_ROOT**2, 1.0)
    w = np.mod(0.5 + i / _R3_ROOT**3, 1.0)
    beta = np.arccos(1.0 - 2.0 * v)
    phi = 2.0 * math.pi * w
    half = np.stack(
        [
            np.cos(alpha),
            np.sin(alpha) * np.cos(beta),
            np.sin(alpha) * np.sin(beta) * np.cos(phi),
            np.sin(alpha) * np.sin(beta) * np.sin(phi),
        ],
        axis=-1,
    )
    half /= np.linalg.norm(half, axis=-1, keepdims=True)
    return np.concatenate([half, -half], axis=0)


def s3_spacing(n: int) -> float:
    return (2.0 * math.pi**2 / n) ** (1.0 / 3.0)


def default_exclusion_radius(n: int, floor: float = 1e-3) -> float:
    return min(max(2.0 * s3_spacing(n), floor), 0.25 * math.pi)


# ---------------------------------------------------------------------------
# d = 1 cone


def _interval_weights(nodes: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Weights over ``nodes`` for ∫_lo^hi per row, trapezoid between inside nodes.

    Partial pieces between the outermost inside node and the interval ends
    go to that node, so constants integrate exactly.
    """

    tol = NODE_TOL * max(1.0, float(np.max(np.abs(nodes))))
    lo = lo[:, None]
    hi = hi[:, None]
    inside = (nodes[None, :] >= lo - tol) & (nodes[None, :] <= hi + tol) & (hi >= lo)
    left_in = np.zeros_like(inside)
    right_in = np.zeros_like(inside)
    left_in[:, 1:] = inside[:, :-1]
    right_in[:, :-1] = inside[:, 1:]
    gaps = np.diff(nodes)
    left_gap = np.concatenate([[0.0], gaps])[None, :]
    right_gap = np.concatenate([gaps, [0.0]])[None, :]
    left = np.where(left_in, 0.5 * left_gap, np.maximum(nodes[None, :] - lo, 0.0))
    right = np.where(right_in, 0.5 * right_gap, np.maximum(hi - nodes[None, :], 0.0))
    return np.where(inside, left + right, 0.0)


def _cone_block_1d(z: np.ndarray, centres: np.ndarray, delta: float) -> np.ndarray:
    lo = np.maximum(centres - delta, z[0])
    hi = np.minimum(centres + delta, z[-1])
    return _interval_weights(z, lo, hi)


def volterra_rule_1d(grid: "MultiTimeGrid", eta_index: int, x_index: int, particle: int = 1) -> ConeRule:
    """Trapezoid rule over the backward cone {0 ≤ η' ≤ η − |z − z'|}."""

    space = grid.space(particle)
    if space.kind != "box" or space.dim != 1:
        raise ModelError("volterra_rule_1d needs a flat d=1 grid")
    time = grid.time
    z = space.nodes[:, 0]
    eta = time.nodes[eta_index]
    tau = _time_slice_weights(time, eta_index)
    etas: List[float] = []
    points: List[float] = []
    weights: List[float] = []
    for j in range(eta_index + 1):
        row = _cone_block_1d(z, z[x_index : x_index + 1], eta - time.nodes[j])[0] * tau[j]
        for k in np.nonzero(row > 0.0)[0]:
            etas.append(time.nodes[j])
            points.append(z[k])
            weights.append(row[k])
    return ConeRule(np.array(etas), np.array(points).reshape(-1, 1), np.array(weights))


# ---------------------------------------------------------------------------
# d = 2 product integration against 1/√(Δη² − r²)


def _sqrt_radial_weights(radius: float, n_radial: int) -> Tuple[np.ndarray, np.ndarray]:
    r = np.linspace(0.0, radius, n_radial + 1)
    h = r[1] - r[0]
    root = np.sqrt(np.maximum(radius * radius - r * r, 0.0))
    i0 = -root
    i1 = 0.5 * radius * radius * np.arcsin(np.clip(r / radius, -1.0, 1.0)) - 0.5 * r * root
    d0 = np.diff(i0)
    d1 = np.diff(i1)
    weights = np.zeros_like(r)
    weights[:-1] += (r[1:] * d0 - d1) / h
    weights[1:] += (d1 - r[:-1] * d0) / h
    return r, weights


def disc_sqrt_rule(radius: float, n_radial: int, n_angular: int) -> SingularRule:
    """∫_{|y|≤R} g(y) dy/√(R² − |y|²), exact for g piecewise linear in |y|.

    Returns offsets from the disc centre; the constant integrand gives 2πR.
    """

    if radius <= 0.0:
        return _empty_rule(2)
    r, radial = _sqrt_radial_weights(radius, n_radial)
    theta = 2.0 * math.pi * np.arange(n_angular) / n_angular
    rr, tt = np.meshgrid(r, theta, indexing="ij")
    offsets = np.stack([rr * np.cos(tt), rr * np.sin(tt)], axis=-1).reshape(-1, 2)
    weights = np.repeat(radial * (2.0 * math.pi / n_angular), n_angular)
    return SingularRule(offsets, rr.ravel(), weights)


def cone_sqrt_rule_2d(
    eta: float,
    x: np.ndarray,
    grid: "MultiTimeGrid",
    n_radial: int = 6,
    n_angular: int = 16,
    particle: int = 1,
) -> SingularRule:
    """Product rule for ∫₀^η dη' ∫ dx' H(η−η'−|x−x'|)/√((η−η')² − |x−x'|²)."""

    space = grid.space(particle)
    if space.kind != "box" or space.dim != 2:
        raise ModelError("cone_sqrt_rule_2d needs a flat d=2 grid")
    index, distance = grid.time.snap(eta)
    if distance > NODE_TOL * max(1.0, grid.T):
        raise DomainError(f"eta={eta} is not a time node")
    tau = _time_slice_weights(grid.time, index)
    centre = np.asarray(x, dtype=float)
    points, radii, weights, times = [], [], [], []
    for j in range(index):
        disc = disc_sqrt_rule(grid.time.nodes[index] - grid.time.nodes[j], n_radial, n_angular)
        points.append(centre + disc.points)
        radii.append(disc.radii)
        weights.append(tau[j] * disc.weights)
        times.append(np.full(disc.size, grid.time.nodes[j]))
    if not points:
        return SingularRule(np.zeros((0, 2)), np.zeros(0), np.zeros(0), np.zeros(0))
    return SingularRule(np.concatenate(points), np.concatenate(radii), np.concatenate(weights), np.concatenate(times))


# ---------------------------------------------------------------------------
# d = 3 balls


def _shell_edges(radius: float, n_radial: int) -> Tuple[np.ndarray, np.ndarray]:
    edges = np.linspace(0.0, radius, n_radial + 1)
    return edges[:-1], edges[1:]


def ball_rule_3d(center: np.ndarray, radius: float, n_radial: int = 6, n_angular: int = 26) -> SingularRule:
    """∫_{|y−c|≤R} g(y)/|y − c| dy on shells.

    Each shell carries Δ(r²)/2 · 4π/n_angular and sits at the radius that
    makes the rule exact for g = 1 and g = r.
    """

    if radius <= 0.0:
        return _empty_rule(3)
    inner, outer = _shell_edges(radius, n_radial)
    shell = 0.5 * (outer**2 - inner**2)
    centroid = (2.0 / 3.0) * (outer**3 - inner**3) / (outer**2 - inner**2)
    directions = sphere_directions(n_angular)
    radii = np.repeat(centroid, n_angular)
    dirs = np.tile(directions, (n_radial, 1))
    weights = np.repeat(shell * (4.0 * math.pi / n_angular), n_angular)
    points = np.asarray(center, dtype=float) + radii[:, None] * dirs
    return SingularRule(points, radii, weights)


def hyperbolic_ball_rule(center: np.ndarray, radius: float, n_radial: int = 6, n_angular: int = 26) -> SingularRule:
    """∫_{s≤R} g(y)/sinh s dV on ℍ³ around a hyperboloid point ``center``."""

    if radius <= 0.0:
        return _empty_rule(4)
    inner, outer = _shell_edges(radius, n_radial)
    shell = np.cosh(outer) - np.cosh(inner)
    moment = (outer * np.cosh(outer) - np.sinh(outer)) - (inner * np.cosh(inner) - np.sinh(inner))
    centroid = moment / shell
    radii = np.repeat(centroid, n_angular)
    dirs = np.tile(sphere_directions(n_angular), (n_radial, 1))
    points = exp_map_h3(np.asarray(center, dtype=float), dirs, radii)
    weights = np.repeat(shell * (4.0 * math.pi / n_angular), n_angular)
    return SingularRule(points, radii, weights)


# ---------------------------------------------------------------------------
# S³ pairs


def _cap_integral(power: int, eps: float) -> float:
    """4π ∫₀^ε sin²α / sinᵖα dα."""

    if power == 0:
        return 4.0 * math.pi * (0.5 * eps - 0.25 * math.sin(2.0 * eps))
    if power == 1:
        return 4.0 * math.pi * (1.0 - math.cos(eps))
    if power == 2:
        return 4.0 * math.pi * eps
    raise ModelError(f"S³ pair rules support powers 0, 1, 2, got {power}")


def _band_integral(power: int, eps: float) -> float:
    full = {0: 2.0 * math.pi**2, 1: 8.0 * math.pi, 2: 4.0 * math.pi**2}[power]
    return full - 2.0 * _cap_integral(power, eps)


def s3_pair_matrix(nodes: np.ndarray, weights: np.ndarray, power: int, exclusion_radius: float) -> np.ndarray:
    """Pair weights w_i w_j / sinᵖ s_ij with the singular caps handled analytically.

    Pairs closer than ε to coincidence or to the antipode are dropped; the
    exact cap integral of the pure weight is added on the diagonal and the
    antipodal entry, and each row's band is rescaled so it integrates the
    pure weight exactly.
    """

    _cap_integral(power, exclusion_radius)
    s = np.asarray(geodesic_distance_s3(nodes[:, None, :], nodes[None, :, :]))
    n = nodes.shape[0]
    rows = np.arange(n)
    antipode = np.argmin(nodes @ nodes.T, axis=1)
    if exclusion_radius <= 0.0:
        band = np.sin(s) >= NODE_TOL
    else:
        band = (s >= exclusion_radius) & (s <= math.pi - exclusion_radius)
    with np.errstate(divide="ignore", invalid="ignore"):
        raw = np.where(band, weights[None, :] / np.sin(s) ** power, 0.0)
    if exclusion_radius <= 0.0:
        return weights[:, None] * raw
    sums = raw.sum(axis=1)
    empty = sums <= 0.0
    if np.any(empty):
        logger.warning("S³ pair rule: %d rows have no nodes in the band (eps=%.4g)", int(np.sum(empty)), exclusion_radius)
    calibration = np.where(empty, 0.0, _band_integral(power, exclusion_radius) / np.where(empty, 1.0, sums))
    matrix = weights[:, None] * calibration[:, None] * raw
    cap = _cap_integral(power, exclusion_radius)
    matrix[rows, rows] += weights * cap
    matrix[rows, antipode] += weights * cap
    return matrix


def s3_pair_rule(n_nodes: int, exclusion_radius: Optional[float] = None, power: int = 2) -> PairRule:
    """Equal-weight S³×S³ rule for the weight 1/sinᵖ s, p ∈ {0, 1, 2}."""

    if n_nodes < 100:
        raise ModelError(f"s3_pair_rule needs at least 100 nodes, got {n_nodes}")
    nodes = s3_nodes(n_nodes)
    weights = np.full(n_nodes, 2.0 * math.pi**2 / n_nodes)
    eps = default_exclusion_radius(n_nodes) if exclusion_radius is None else float(exclusion_radius)
    return PairRule(nodes, weights, s3_pair_matrix(nodes, weights, power, eps), power, eps)


# ---------------------------------------------------------------------------
# interpolation stencils


def time_stencil(time: "TimeAxis", t: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Linear interpolation in η: (lower index, lower weight, upper weight).

    Times outside [0, T] get zero weights.
    """

    t = np.asarray(t, dtype=float)
    h = time.spacing
    tol = NODE_TOL * max(1.0, time.T)
    position = t / h
    lower = np.clip(np.floor(position), 0, time.count - 2).astype(int)
    frac = np.clip(position - lower, 0.0, 1.0)
    valid = (t >= -tol) & (t <= time.T + tol)
    return lower, np.where(valid, 1.0 - frac, 0.0), np.where(valid, frac, 0.0)


def multilinear_stencil(space: "SpatialAxis", points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Flat node indices and weights of (bi/tri)linear interpolation.

    Points outside the grid box are dropped (zero weights).
    """

    points = np.asarray(points, dtype=float)
    dim = len(space.axes)
    shape = space.shape
    lower, frac = [], []
    valid = np.ones(points.shape[:-1], dtype=bool)
    for axis, line in enumerate(space.axes):
        h = float(line[1] - line[0])
        position = (points[..., axis] - line[0]) / h
        tol = NODE_TOL * max(1.0, line.size)
        valid &= (position >= -tol) & (position <= line.size - 1 + tol)
        base = np.clip(np.floor(position), 0, line.size - 2).astype(int)
        lower.append(base)
        frac.append(np.clip(position - base, 0.0, 1.0))
    indices, weights = [], []
    for corner in itertools.product((0, 1), repeat=dim):
        index = np.ravel_multi_index(tuple(lower[a] + corner[a] for a in range(dim)), shape)
        weight = np.ones(points.shape[:-1])
        for a in range(dim):
            weight = weight * (frac[a] if corner[a] else 1.0 - frac[a])
        indices.append(index)
        weights.append(np.where(valid, weight, 0.0))
    return np.stack(indices, axis=-1), np.stack(weights, axis=-1)


# ---------------------------------------------------------------------------
# per-particle propagators


class _Triplets:
    def __init__(self) -> None:
        self.rows: List[np.ndarray] = []
        self.cols: List[np.ndarray] = []
        self.vals: List[np.ndarray] = []

    def add(self, rows, cols, vals) -> None:
        rows, cols, vals = np.broadcast_arrays(rows, cols, vals)
        keep = vals != 0.0
        self.rows.append(rows[keep].ravel())
        self.cols.append(cols[keep].ravel())
        self.vals.append(vals[keep].ravel())

    def matrix(self, size: int) -> sparse.csr_matrix:
        if not self.vals:
            return sparse.csr_matrix((size, size))
        coo = sparse.coo_matrix(
            (np.concatenate(self.vals), (np.concatenate(self.rows), np.concatenate(self.cols))), shape=(size, size)
        )
        return coo.tocsr()


def _scale(model: Optional[ScaleFactorModel], eta: np.ndarray) -> np.ndarray:
    eta = np.asarray(eta, dtype=float)
    if model is None:
        return np.ones_like(eta)
    clipped = np.clip(eta, 0.0, model.T)
    return np.asarray(model(clipped), dtype=float)


def _propagator_1d(time, space, model, mass, triplets) -> None:
    ns = space.count
    z = space.nodes[:, 0]
    for i in range(1, time.count):
        tau = _time_slice_weights(time, i)
        rows = i * ns + np.arange(ns)
        for j in range(i):
            delta = time.nodes[i] - time.nodes[j]
            block = _cone_block_1d(z, z, delta)
            if mass:
                gap = np.maximum(delta * delta - (z[:, None] - z[None, :]) ** 2, 0.0)
                block = block * special.j0(mass * np.sqrt(gap))
            a_factor = 1.0 if model is None else float(_scale(model, time.nodes[j])) ** 2
            triplets.add(rows[:, None], j * ns + np.arange(ns)[None, :], 0.5 * tau[j] * a_factor * block)


def _propagator_2d(time, space, model, mass, settings, triplets) -> None:
    ns = space.count
    for i in range(1, time.count):
        tau = _time_slice_weights(time, i)
        rows = (i * ns + np.arange(ns))[:, None, None]
        for j in range(i):
            delta = time.nodes[i] - time.nodes[j]
            disc = disc_sqrt_rule(delta, settings.cone_radial, settings.cone_angular)
            weight = disc.weights
            if mass:
                weight = weight * np.cos(mass * np.sqrt(np.maximum(delta * delta - disc.radii**2, 0.0)))
            a_factor = 1.0 if model is None else float(_scale(model, time.nodes[j])) ** 1.5
            idx, sw = multilinear_stencil(space, space.nodes[:, None, :] + disc.points[None, :, :])
            vals = (tau[j] * a_factor / (2.0 * math.pi)) * weight[None, :, None] * sw
            triplets.add(rows, j * ns + idx, vals)


def _add_retarded_points(time, ns, row_index, t, idx, sw, weight, model, triplets) -> None:
    """Scatter weights for pulled-back times ``t`` and spatial stencils (idx, sw)."""

    lower, w0, w1 = time_stencil(time, t)
    base = weight * _scale(model, t)
    for offset, wt in ((0, w0), (1, w1)):
        vals = (base * wt)[..., None] * sw
        triplets.add(row_index, (lower + offset)[..., None] * ns + idx, vals)


def _propagator_3d_flat(time, space, model, settings, triplets) -> None:
    ns = space.count
    for i in range(1, time.count):
        ball = ball_rule_3d(np.zeros(3), time.nodes[i], settings.ball_radial, settings.ball_angular)
        idx, sw = multilinear_stencil(space, space.nodes[:, None, :] + ball.points[None, :, :])
        t = np.broadcast_to(time.nodes[i] - ball.radii, idx.shape[:-1])
        weight = np.broadcast_to(ball.weights / (4.0 * math.pi), idx.shape[:-1])
        rows = (i * ns + np.arange(ns))[:, None, None]
        _add_retarded_points(time, ns, rows, t, idx, sw, weight, model, triplets)


def _propagator_open(time, space, model, settings, triplets) -> None:
    ns = space.count
    embedded = space.embedded()
    for i in range(1, time.count):
        for k in range(ns):
            ball = hyperbolic_ball_rule(embedded[k], time.nodes[i], settings.ball_radial, settings.ball_angular)
            idx, sw = multilinear_stencil(space, ball.points[:, 1:])
            _add_retarded_points(
                time, ns, i * ns + k, time.nodes[i] - ball.radii, idx, sw, ball.weights / (4.0 * math.pi), model, triplets
            )


def winding_range(T: float) -> range:
    return range(-int(math.ceil((T + math.pi) / (2.0 * math.pi))), int(math.ceil(T / (2.0 * math.pi))) + 1)


def _propagator_closed(time, space, model, settings, triplets) -> None:
    ns = space.count
    eps = default_exclusion_radius(ns, settings.s3_exclusion_floor)
    pair = s3_pair_matrix(space.nodes, space.weights, 1, eps) / space.weights[:, None]
    s = np.asarray(geodesic_distance_s3(space.nodes[:, None, :], space.nodes[None, :, :]))
    np.fill_diagonal(s, 0.0)
    cols = np.arange(ns)[None, :]
    tol = NODE_TOL * max(1.0, time.T)
    for l in winding_range(time.T):
        shifted = s + 2.0 * math.pi * l
        sign = np.where(shifted == 0.0, 1.0, np.sign(shifted))
        reach = np.abs(shifted) <= time.T + tol
        if not np.any(reach):
            continue
        weight = np.where(reach, pair * sign / (8.0 * math.pi), 0.0)
        for i in range(time.count):
            rows = (i * ns + np.arange(ns))[:, None]
            for direction in (-1.0, 1.0):
                t = time.nodes[i] + direction * np.abs(shifted)
                lower, w0, w1 = time_stencil(time, t)
                base = weight * _scale(model, t)
                triplets.add(rows, lower * ns + cols, base * w0)
                triplets.add(rows, (lower + 1) * ns + cols, base * w1)


def particle_propagator(
    kind: SpacetimeKind,
    model: Optional[ScaleFactorModel],
    mass: float,
    time: "TimeAxis",
    space: "SpatialAxis",
    settings: Optional[QuadratureSettings] = None,
) -> sparse.csr_matrix:
    """Sparse matrix P with (P u)[η, x] = the single-particle propagator integral of u.

    Rows and columns index (time node, space node) row-major. The Green's
    prefactor, the scale-factor power of the model equation, the rule weights
    and the interpolation stencils are all folded in.
    """

    settings = settings or QuadratureSettings()
    if mass and not (kind.topology is Topology.MINKOWSKI and kind.d in (1, 2)):
        raise ModelError("massive propagators exist for Minkowski d=1 and d=2 only")
    triplets = _Triplets()
    a_model = None if kind.topology is Topology.MINKOWSKI else model
    if kind.topology is Topology.CLOSED:
        _propagator_closed(time, space, a_model, settings, triplets)
    elif kind.topology is Topology.OPEN:
        _propagator_open(time, space, a_model, settings, triplets)
    elif kind.d == 1:
        _propagator_1d(time, space, a_model, mass, triplets)
    elif kind.d == 2:
        _propagator_2d(time, space, a_model, mass, settings, triplets)
    else:
        _propagator_3d_flat(time, space, a_model, settings, triplets)
    matrix = triplets.matrix(time.count * space.count)
    logger.debug("propagator %s: %d nonzeros", kind, matrix.nnz)
    return matrix


def rule_report(settings: QuadratureSettings) -> Dict[str, float]:
    """Closed-form checks of the singular rules at unit radius."""

    return {
        "ball_constant": ball_rule_3d(np.zeros(3), 1.0, settings.ball_radial, settings.ball_angular).total() / (2.0 * math.pi),
        "disc_constant": disc_sqrt_rule(1.0, settings.cone_radial, settings.cone_angular).total() / (2.0 * math.pi),
    }


__all__ = [
    "ConeRule",
    "PairRule",
    "QuadratureSettings",
    "SingularRule",
    "ball_rule_3d",
    "cone_sqrt_rule_2d",
    "default_exclusion_radius",
    "disc_sqrt_rule",
    "hyperbolic_ball_rule",
    "multilinear_stencil",
    "particle_propagator",
    "rule_report",
    "s3_nodes",
    "s3_pair_matrix",
    "s3_pair_rule",
    "s3_spacing",
    "sphere_directions",
    "time_stencil",
    "trapezoid_weights",
    "volterra_rule_1d",
    "winding_range",
]
