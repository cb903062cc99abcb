"""Catalogue of interaction kernels K(x₁, x₂).

A kernel is a bounded factor plus a singularity class. The factor receives
broadcastable arrays ``(eta1, x1, eta2, x2)`` with the spatial coordinate
vector on the last axis of ``x1``/``x2`` (length 1 for d=1, 4 on S³).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Callable, Dict, Mapping, Optional, Tuple, Union

import numpy as np

from .errors import ModelError
from .geometry import ScaleFactorModel, geodesic_distance_s3, timelike_distances
from .quadrature import QuadratureSettings, default_exclusion_radius, s3_pair_matrix

if TYPE_CHECKING:  # pragma: no cover
    from .fields import MultiTimeGrid

logger = logging.getLogger(__name__)

BoundedFactor = Callable[[np.ndarray, np.ndarray, np.ndarray, np.ndarray], np.ndarray]

# ∫ 1/|x| over the unit cube centred at the origin.
CUBE_INVERSE_DISTANCE = 3.0 * math.log(2.0 + math.sqrt(3.0)) - math.pi / 2.0


class Singularity(str, Enum):
    NONE = "none"
    INVERSE_SPATIAL = "inverse-spatial"
    INVERSE_SINE = "inverse-sine"


def _pair_shape(eta1, x1, eta2, x2) -> Tuple[int, ...]:
    return np.broadcast_shapes(np.shape(eta1), np.shape(eta2), np.shape(x1)[:-1], np.shape(x2)[:-1])


@dataclass(frozen=True)
class InteractionKernel:
    name: str
    bounded_factor: BoundedFactor
    singularity: Singularity
    sup_bound: float
    params: Tuple[Tuple[str, float], ...] = ()

    def factor(self, eta1, x1, eta2, x2) -> np.ndarray:
        shape = _pair_shape(eta1, x1, eta2, x2)
        return np.broadcast_to(np.asarray(self.bounded_factor(eta1, x1, eta2, x2)), shape)

    def singular_mask(self, x1, x2) -> np.ndarray:
        if self.singularity is Singularity.NONE:
            return np.zeros(np.broadcast_shapes(np.shape(x1)[:-1], np.shape(x2)[:-1]), dtype=bool)
        return self._divisor(x1, x2) < 1e-12

    def _divisor(self, x1, x2) -> np.ndarray:
        if self.singularity is Singularity.INVERSE_SPATIAL:
            return np.linalg.norm(np.asarray(x1, dtype=float) - np.asarray(x2, dtype=float), axis=-1)
        return np.sin(np.asarray(geodesic_distance_s3(x1, x2)))

    def __call__(self, eta1, x1, eta2, x2) -> np.ndarray:
        """Full kernel value; singular samples come back as ``inf``."""

        value = self.factor(eta1, x1, eta2, x2)
        if self.singularity is Singularity.NONE:
            return value
        divisor = np.broadcast_to(self._divisor(x1, x2), value.shape)
        out = np.full(value.shape, np.inf, dtype=np.result_type(value, float))
        regular = divisor >= 1e-12
        out[regular] = value[regular] / divisor[regular]
        return out

    def describe(self) -> Dict[str, float]:
        return dict(self.params)


def _constant_factor(c: complex) -> BoundedFactor:
    def factor(eta1, x1, eta2, x2):
        return np.full(_pair_shape(eta1, x1, eta2, x2), c)

    return factor


def _as_factor(f: Union[complex, BoundedFactor]) -> Tuple[BoundedFactor, Optional[float]]:
    if callable(f):
        return f, None
    return _constant_factor(f), abs(f)


def natural_kernel_1d(closed_support: bool = True) -> InteractionKernel:
    """½·H((η₁−η₂)² − |z₁−z₂|²) with H(0) = 1 unless ``closed_support`` is off."""

    def factor(eta1, x1, eta2, x2):
        deta = np.abs(np.asarray(eta1, dtype=float) - np.asarray(eta2, dtype=float))
        dz = np.abs(np.asarray(x1, dtype=float)[..., 0] - np.asarray(x2, dtype=float)[..., 0])
        inside = deta >= dz if closed_support else deta > dz
        return np.where(inside, 0.5, 0.0)

    return InteractionKernel("natural_1d", factor, Singularity.NONE, 0.5, (("closed_support", float(closed_support)),))


def constant_kernel(c: complex) -> InteractionKernel:
    return InteractionKernel("constant", _constant_factor(c), Singularity.NONE, abs(c), (("value", c),))


def covariant_bounded_kernel(
    f: Callable[[np.ndarray], np.ndarray],
    model: Optional[ScaleFactorModel],
    sup_bound: Optional[float] = None,
    *,
    name: str = "covariant",
    params: Tuple[Tuple[str, float], ...] = (),
) -> InteractionKernel:
    """K̃ = f(d(x₁,x₂)) on timelike pairs, 0 otherwise (flat FLRW)."""

    if sup_bound is None:
        raise ModelError("covariant kernels need a declared sup_bound for f")

    def factor(eta1, x1, eta2, x2):
        distance = timelike_distances(eta1, x1, eta2, x2, model)
        deta = np.abs(np.asarray(eta1, dtype=float) - np.asarray(eta2, dtype=float))
        dx = np.linalg.norm(np.asarray(x1, dtype=float) - np.asarray(x2, dtype=float), axis=-1)
        timelike = np.broadcast_to(deta > dx, distance.shape)
        values = np.broadcast_to(np.asarray(f(np.where(timelike, distance, 0.0))), distance.shape)
        return np.where(timelike, values, 0.0)

    return InteractionKernel(name, factor, Singularity.NONE, float(sup_bound), params)


def singular_kernel_flat3d(f: Union[complex, BoundedFactor], sup_bound: Optional[float] = None) -> InteractionKernel:
    """K = f/|x₁ − x₂| on flat d=3 slices."""

    factor, known = _as_factor(f)
    bound = sup_bound if sup_bound is not None else (known if known is not None else math.inf)
    params = (("value", f),) if not callable(f) else ()
    return InteractionKernel("singular_flat3d", factor, Singularity.INVERSE_SPATIAL, bound, params)


def singular_kernel_closed(f: Union[complex, BoundedFactor], sup_bound: Optional[float] = None) -> InteractionKernel:
    """K̃ = f/sin s(q₁, q₂) on S³."""

    factor, known = _as_factor(f)
    bound = sup_bound if sup_bound is not None else (known if known is not None else math.inf)
    params = (("value", f),) if not callable(f) else ()
    return InteractionKernel("singular_closed", factor, Singularity.INVERSE_SINE, bound, params)


def bounded_closed_kernel(c: complex) -> InteractionKernel:
    """f = c·sin s, which cancels the 1/sin s and leaves the bounded K̃ = c."""

    return InteractionKernel("bounded_closed", _constant_factor(c), Singularity.NONE, abs(c), (("value", c),))


def _spatial_coordinates(grid: "MultiTimeGrid", particle: int) -> np.ndarray:
    return grid.space(particle).embedded()


def kernel_matrix(
    kernel: InteractionKernel,
    grid: "MultiTimeGrid",
    settings: Optional[QuadratureSettings] = None,
) -> np.ndarray:
    """K at every node pair, shaped like ``MultiTimeField.as_matrix()``.

    Singular classes are replaced by their quadrature-consistent node values:
    coincident nodes of 1/|x₁−x₂| take the cell average C/h of 1/r over one
    grid cell, and 1/sin s uses the calibrated S³ pair weights divided by the
    node weights.
    """

    settings = settings or QuadratureSettings()
    time = grid.time.nodes
    nt = time.size
    x1 = _spatial_coordinates(grid, 1)
    x2 = _spatial_coordinates(grid, 2)
    eta1 = time[:, None, None, None]
    eta2 = time[None, None, :, None]
    p1 = x1[None, :, None, None, :]
    p2 = x2[None, None, None, :, :]
    values = np.array(kernel.factor(eta1, p1, eta2, p2), dtype=complex)
    if kernel.singularity is Singularity.INVERSE_SPATIAL:
        distance = np.linalg.norm(x1[:, None, :] - x2[None, :, :], axis=-1)
        h = float(np.prod(grid.space1.spacing)) ** (1.0 / grid.space1.dim)
        inverse = np.where(distance < 1e-12, CUBE_INVERSE_DISTANCE / h, 1.0 / np.maximum(distance, 1e-300))
        values = values * inverse[None, :, None, :]
    elif kernel.singularity is Singularity.INVERSE_SINE:
        space = grid.space1
        eps = default_exclusion_radius(space.count, settings.s3_exclusion_floor)
        pair = s3_pair_matrix(space.nodes, space.weights, 1, eps)
        inverse = pair / (space.weights[:, None] * grid.space2.weights[None, :])
        values = values * inverse[None, :, None, :]
    return values.reshape(nt * x1.shape[0], nt * x2.shape[0])


# ---------------------------------------------------------------------------
# catalogue used by scenarios


def _value(params: Mapping[str, float], default: float = 1.0) -> complex:
    return params.get("value", default)


KernelBuilder = Callable[[Mapping[str, float], Optional[ScaleFactorModel]], InteractionKernel]


def _covariant_constant(params, model):
    c = _value(params)
    return covariant_bounded_kernel(
        lambda d: np.full(np.shape(d), c), model, abs(c), name="covariant_constant", params=(("value", c),)
    )


def _covariant_exp(params, model):
    c = _value(params)
    length = float(params.get("length", 1.0))
    if length <= 0:
        raise ModelError("covariant_exp needs length > 0")
    return covariant_bounded_kernel(
        lambda d: c * np.exp(-np.asarray(d) / length),
        model,
        abs(c),
        name="covariant_exp",
        params=(("length", length), ("value", c)),
    )


KERNEL_CATALOGUE: Dict[str, KernelBuilder] = {
    "natural_1d": lambda params, model: natural_kernel_1d(bool(params.get("closed_support", 1.0))),
    "constant": lambda params, model: constant_kernel(_value(params)),
    "covariant_constant": _covariant_constant,
    "covariant_exp": _covariant_exp,
    "singular_flat3d": lambda params, model: singular_kernel_flat3d(_value(params)),
    "singular_closed": lambda params, model: singular_kernel_closed(_value(params)),
    "bounded_closed": lambda params, model: bounded_closed_kernel(_value(params)),
}


def list_kernels() -> Tuple[str, ...]:
    return tuple(sorted(KERNEL_CATALOGUE))


def build_kernel(name: str, params: Optional[Mapping[str, float]] = None, model: Optional[ScaleFactorModel] = None) -> InteractionKernel:
    try:
        builder = KERNEL_CATALOGUE[name]
    except KeyError:
        raise ModelError(f"unknown kernel '{name}' (known: {', '.join(list_kernels())})") from None
    return builder(dict(params or {}), model)


__all__ = [
    "CUBE_INVERSE_DISTANCE",
    "InteractionKernel",
    "KERNEL_CATALOGUE",
    "Singularity",
    "bounded_closed_kernel",
    "build_kernel",
    "constant_kernel",
    "covariant_bounded_kernel",
    "kernel_matrix",
    "list_kernels",
    "natural_kernel_1d",
    "singular_kernel_closed",
    "singular_kernel_flat3d",
]
