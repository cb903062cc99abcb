"""Klein-Gordon Green's functions on Minkowski and FLRW backgrounds.

Distributions are kept structural: a ``GreensValue`` holds the regular part,
the coefficient of the light-cone delta and how far the evaluation point sits
from the delta's support. Nothing here samples a delta pointwise; the solver
only consumes the delta-integrated forms. Powers [a(η)a(η')]^{−α} that would
blow up at a Big Bang/Crunch root are kept as a ``ScalePrefactor`` record.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import special

from .errors import DomainError, ModelError
from .geometry import ScaleFactorModel, SpacetimePoint, geodesic_distance_h3, geodesic_distance_s3

# Relative width of the light cone used to decide on-cone evaluations.
CONE_TOL = 1e-12


class Support(str, Enum):
    RETARDED = "retarded"
    ADVANCED = "advanced"
    SYMMETRIC = "symmetric"


@dataclass(frozen=True)
class ScalePrefactor:
    """Symbolic factor [a(η)a(η')]^{−exponent} not yet applied to the value."""

    exponent: float
    eta: float
    eta_prime: float

    def evaluate(self, model: ScaleFactorModel) -> float:
        product = float(model(self.eta)) * float(model(self.eta_prime))
        if product <= 0.0 and self.exponent > 0:
            raise DomainError(f"prefactor [a a']^-{self.exponent} is singular at eta={self.eta}, eta'={self.eta_prime}")
        return product ** (-self.exponent)


@dataclass(frozen=True)
class GreensValue:
    regular: complex = 0.0
    lightcone_delta_coeff: float = 0.0
    support: Support = Support.SYMMETRIC
    delta_offset: Optional[float] = None
    prefactor: Optional[ScalePrefactor] = None
    singular: bool = False

    def delta_on_support(self, tol: float = CONE_TOL) -> float:
        """Delta coefficient if the evaluation point lies on the delta's support."""

        if self.delta_offset is None or abs(self.delta_offset) > tol:
            return 0.0
        return self.lightcone_delta_coeff

    def scaled(self, factor: float) -> "GreensValue":
        return replace(self, regular=self.regular * factor, lightcone_delta_coeff=self.lightcone_delta_coeff * factor)

    def with_volume_factor(self, model: ScaleFactorModel, power: float) -> "GreensValue":
        """Absorb a volume factor [a(η)a(η')]^{power} into the symbolic prefactor.

        The combined factor is applied numerically once its exponent is no
        longer positive, which is how the model equations cancel the roots.
        """

        if self.prefactor is None:
            raise ModelError("no symbolic prefactor to combine with")
        remaining = self.prefactor.exponent - power
        if remaining > 0:
            return replace(self, prefactor=replace(self.prefactor, exponent=remaining))
        numeric = replace(self.prefactor, exponent=remaining).evaluate(model)
        return replace(self.scaled(numeric), prefactor=None, singular=False)


@dataclass(frozen=True)
class WindingTerm:
    n: int
    radius: float
    sign: float
    amplitude: float
    coefficient: float


@dataclass(frozen=True)
class WindingSum:
    s: float
    terms: Tuple[WindingTerm, ...]
    prefactor: Optional[ScalePrefactor] = None
    singular: bool = False

    @property
    def windings(self) -> Tuple[int, ...]:
        return tuple(term.n for term in self.terms)


def _check_dimension(d: int) -> None:
    if d not in (1, 2, 3):
        raise ModelError(f"Green's functions are tabulated for d in {{1,2,3}}, got d={d}")


def _interval(x: Sequence[float], d: int) -> Tuple[float, float, float]:
    vec = np.asarray(x, dtype=float).ravel()
    if vec.size != d + 1:
        raise DomainError(f"displacement for d={d} needs {d + 1} components, got {vec.size}")
    x0 = float(vec[0])
    spatial_sq = float(np.dot(vec[1:], vec[1:]))
    return x0, x0 * x0 - spatial_sq, x0 * x0 + spatial_sq


def _gsym_from_interval(d: int, m: float, x2: float, scale: float) -> GreensValue:
    on_cone = abs(x2) <= CONE_TOL * max(scale, 1e-300)
    inside = x2 > 0.0 and not on_cone
    if d == 1:
        if x2 < 0.0 and not on_cone:
            return GreensValue()
        root = math.sqrt(max(x2, 0.0))
        return GreensValue(regular=0.5 * float(special.j0(m * root)))
    if d == 2:
        if on_cone:
            return GreensValue(singular=True)
        if not inside:
            return GreensValue()
        root = math.sqrt(x2)
        return GreensValue(regular=math.cos(m * root) / (2.0 * math.pi * root))
    # d = 3: δ(x²)/2π plus the massive tail −m J₁(m√x²)/(4π√x²)
    regular = 0.0
    if m != 0.0 and (inside or on_cone):
        z = m * math.sqrt(max(x2, 0.0))
        ratio = 0.5 if z == 0.0 else float(special.j1(z)) / z
        regular = -(m * m) * ratio / (4.0 * math.pi)
    return GreensValue(regular=regular, lightcone_delta_coeff=1.0 / (2.0 * math.pi), delta_offset=0.0 if on_cone else x2)


def minkowski_gsym(d: int, m: float, x: Sequence[float]) -> GreensValue:
    """Symmetric Green's function for displacement ``x = (x⁰, x⃗)``."""

    _check_dimension(d)
    _x0, x2, scale = _interval(x, d)
    return _gsym_from_interval(d, float(m), x2, scale)


def _restrict(value: GreensValue, keep: bool, support: Support) -> GreensValue:
    if keep:
        return replace(value, support=support)
    return GreensValue(support=support, delta_offset=value.delta_offset)


def minkowski_gret(d: int, m: float, x: Sequence[float]) -> GreensValue:
    """H(x⁰) · G_sym."""

    _check_dimension(d)
    x0, x2, scale = _interval(x, d)
    return _restrict(_gsym_from_interval(d, float(m), x2, scale), x0 >= 0.0, Support.RETARDED)


def minkowski_gadv(d: int, m: float, x: Sequence[float]) -> GreensValue:
    """H(−x⁰) · G_sym."""

    _check_dimension(d)
    x0, x2, scale = _interval(x, d)
    return _restrict(_gsym_from_interval(d, float(m), x2, scale), x0 <= 0.0, Support.ADVANCED)


def _require_chart(point: SpacetimePoint, chart: str) -> None:
    if point.chart != chart:
        raise DomainError(f"expected a {chart} point, got {point.chart}")


def flat_flrw_gsym(d: int, model: ScaleFactorModel, x: SpacetimePoint, x_prime: SpacetimePoint) -> GreensValue:
    """Massless symmetric Green's function on flat FLRW (conformal time)."""

    _check_dimension(d)
    _require_chart(x, "flat")
    _require_chart(x_prime, "flat")
    displacement = np.concatenate([[x.eta - x_prime.eta], x.spatial - x_prime.spatial])
    base = minkowski_gsym(d, 0.0, displacement)
    if d == 1:
        return base
    exponent = (d - 1) / 2.0
    a = float(model(x.eta))
    a_prime = float(model(x_prime.eta))
    if a <= 0.0 or a_prime <= 0.0:
        return replace(base, prefactor=ScalePrefactor(exponent, x.eta, x_prime.eta), singular=True)
    return base.scaled((a * a_prime) ** (-exponent))


def _open_flrw(model: ScaleFactorModel, x: SpacetimePoint, x_prime: SpacetimePoint, support: Support) -> GreensValue:
    _require_chart(x, "hyperboloid")
    _require_chart(x_prime, "hyperboloid")
    s = float(geodesic_distance_h3(x.spatial, x_prime.spatial))
    if s < CONE_TOL:
        return GreensValue(support=support, singular=True)
    lag = x.eta - x_prime.eta if support is Support.RETARDED else x_prime.eta - x.eta
    coeff = 1.0 / (4.0 * math.pi * math.sinh(s))
    value = GreensValue(lightcone_delta_coeff=coeff, support=support, delta_offset=lag - s)
    a = float(model(x.eta))
    a_prime = float(model(x_prime.eta))
    if a <= 0.0 or a_prime <= 0.0:
        return replace(value, prefactor=ScalePrefactor(1.0, x.eta, x_prime.eta), singular=True)
    return value.scaled(1.0 / (a * a_prime))


def open_flrw_gret(model: ScaleFactorModel, x: SpacetimePoint, x_prime: SpacetimePoint) -> GreensValue:
    """[a a']⁻¹ δ(η − η' − s)/(4π sinh s) on the open universe."""

    return _open_flrw(model, x, x_prime, Support.RETARDED)


def open_flrw_gadv(model: ScaleFactorModel, x: SpacetimePoint, x_prime: SpacetimePoint) -> GreensValue:
    return _open_flrw(model, x, x_prime, Support.ADVANCED)


def reachable_windings(s: float, T: float) -> Tuple[int, ...]:
    """Winding numbers n with |s + 2πn| ≤ T, i.e. images that fit in [0, T]."""

    slack = 1e-12 * max(1.0, T)
    lowest = -int(math.ceil((T + math.pi) / (2.0 * math.pi))) - 1
    highest = int(math.ceil(T / (2.0 * math.pi))) + 1
    return tuple(n for n in range(lowest, highest + 1) if abs(s + 2.0 * math.pi * n) <= T + slack)


def closed_flrw_gsym(model: ScaleFactorModel, x: SpacetimePoint, x_prime: SpacetimePoint) -> WindingSum:
    """Image sum of the closed-universe symmetric Green's function.

    Each term is a delta on (η−η')² = (s+2πn)² with coefficient
    −(1/4π)[a a']⁻¹(s+2πn)/sin s. Coincident or antipodal points (sin s = 0)
    are flagged and their amplitudes left at zero.
    """

    _require_chart(x, "sphere")
    _require_chart(x_prime, "sphere")
    s = float(geodesic_distance_s3(x.spatial, x_prime.spatial))
    sin_s = math.sin(s)
    singular = sin_s < CONE_TOL
    a = float(model(x.eta))
    a_prime = float(model(x_prime.eta))
    prefactor = None
    scale = 1.0
    if a <= 0.0 or a_prime <= 0.0:
        prefactor = ScalePrefactor(1.0, x.eta, x_prime.eta)
        singular = True
    else:
        scale = 1.0 / (a * a_prime)
    amplitude = 0.0 if sin_s < CONE_TOL else 1.0 / sin_s
    terms = []
    for n in reachable_windings(s, model.T):
        shifted = s + 2.0 * math.pi * n
        coefficient = -shifted * amplitude * scale / (4.0 * math.pi)
        terms.append(WindingTerm(n=n, radius=abs(shifted), sign=float(np.sign(shifted)), amplitude=amplitude, coefficient=coefficient))
    return WindingSum(s=s, terms=tuple(terms), prefactor=prefactor, singular=singular)


def conformal_transform_greens(G: GreensValue, omega_at_x: float, omega_at_x_prime: float, d: int) -> GreensValue:
    """Ω(x)^{−(d−1)/2} Ω(x')^{−(d−1)/2} G; the identity for d=1."""

    _check_dimension(d)
    if omega_at_x <= 0.0 or omega_at_x_prime <= 0.0:
        raise DomainError("conformal factor must be positive at both points")
    if d == 1:
        return G
    power = (d - 1) / 2.0
    return G.scaled(omega_at_x ** (-power) * omega_at_x_prime ** (-power))


def transform_mass(m: float, omega: float) -> float:
    if omega <= 0.0:
        raise DomainError("conformal factor must be positive")
    return m / omega


__all__ = [
    "GreensValue",
    "ScalePrefactor",
    "Support",
    "WindingSum",
    "WindingTerm",
    "closed_flrw_gsym",
    "conformal_transform_greens",
    "flat_flrw_gsym",
    "minkowski_gadv",
    "minkowski_gret",
    "minkowski_gsym",
    "open_flrw_gadv",
    "open_flrw_gret",
    "reachable_windings",
    "transform_mass",
]
