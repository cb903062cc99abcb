import math

import pytest
from scipy import special

from mtve.errors import DomainError, ModelError
from mtve.geometry import ScaleFactorModel, SpacetimePoint, hyperboloid_point, sphere_point
from mtve.greens import (
    closed_flrw_gsym,
    conformal_transform_greens,
    flat_flrw_gsym,
    minkowski_gadv,
    minkowski_gret,
    minkowski_gsym,
    open_flrw_gret,
    reachable_windings,
    transform_mass,
)


def test_d1_is_half_inside_and_on_the_cone():
    assert minkowski_gsym(1, 0.0, (1.0, 0.5)).regular == 0.5
    assert minkowski_gsym(1, 0.0, (1.0, 1.0)).regular == 0.5
    assert minkowski_gsym(1, 0.0, (0.5, 1.0)).regular == 0.0


def test_d1_massive_uses_bessel_j0():
    assert minkowski_gsym(1, 1.0, (2.0, 0.0)).regular == pytest.approx(0.5 * special.j0(2.0))


def test_d2_regular_part_and_cone_flag():
    assert minkowski_gsym(2, 0.0, (1.0, 0.0, 0.0)).regular == pytest.approx(1.0 / (2.0 * math.pi))
    assert minkowski_gsym(2, 0.0, (1.0, 1.0, 0.0)).singular


def test_d3_delta_only_on_the_cone():
    on = minkowski_gsym(3, 0.0, (1.0, 1.0, 0.0, 0.0))
    off = minkowski_gsym(3, 0.0, (1.0, 0.0, 0.0, 0.0))
    assert on.delta_on_support() == pytest.approx(1.0 / (2.0 * math.pi))
    assert off.delta_on_support() == 0.0
    assert off.lightcone_delta_coeff == pytest.approx(1.0 / (2.0 * math.pi))


@pytest.mark.parametrize("x", [(1.0, 0.3), (-1.0, 0.3)])
def test_retarded_plus_advanced_is_symmetric(x):
    total = minkowski_gret(1, 0.0, x).regular + minkowski_gadv(1, 0.0, x).regular
    assert total == minkowski_gsym(1, 0.0, x).regular


def test_retarded_vanishes_in_the_past():
    assert minkowski_gret(2, 0.0, (-1.0, 0.0, 0.0)).regular == 0.0


def test_argument_checks():
    with pytest.raises(DomainError):
        minkowski_gsym(2, 0.0, (1.0, 0.0))
    with pytest.raises(ModelError):
        minkowski_gsym(4, 0.0, (1.0, 0.0, 0.0, 0.0, 0.0))


def test_flat_flrw_scales_by_inverse_scale_factors():
    model = ScaleFactorModel.dust(0, 2.0)
    x = SpacetimePoint(1.0, [0.0, 0.0, 0.0])
    y = SpacetimePoint(0.5, [0.5, 0.0, 0.0])
    value = flat_flrw_gsym(3, model, x, y)
    assert value.lightcone_delta_coeff == pytest.approx(4.0 / (2.0 * math.pi))


def test_flat_flrw_keeps_root_prefactor_symbolic():
    model = ScaleFactorModel.dust(0, 2.0)
    value = flat_flrw_gsym(3, model, SpacetimePoint(1.0, [0.0, 0.0, 0.0]), SpacetimePoint(0.0, [1.0, 0.0, 0.0]))
    assert value.singular
    assert value.prefactor.exponent == 1.0
    cancelled = value.with_volume_factor(model, 1.0)
    assert not cancelled.singular
    assert cancelled.prefactor is None
    assert cancelled.lightcone_delta_coeff == pytest.approx(1.0 / (2.0 * math.pi))


def test_open_retarded_delta_on_the_geodesic_cone():
    model = ScaleFactorModel.radiation(-1, 2.0)
    x = SpacetimePoint(1.0, hyperboloid_point(0.0, [1.0, 0.0, 0.0]), chart="hyperboloid")
    y = SpacetimePoint(0.6, hyperboloid_point(0.4, [0.0, 1.0, 0.0]), chart="hyperboloid")
    value = open_flrw_gret(model, x, y)
    expected = 1.0 / (4.0 * math.pi * math.sinh(0.4)) / (math.sinh(1.0) * math.sinh(0.6))
    assert value.delta_on_support(1e-9) == pytest.approx(expected)


def test_reachable_windings_for_closed_dust():
    T = 2.0 * math.pi
    assert reachable_windings(0.5, T) == (-1, 0)
    assert reachable_windings(0.0, T) == (-1, 0, 1)


def test_closed_winding_coefficients():
    model = ScaleFactorModel.dust(1)
    x = SpacetimePoint(2.0, sphere_point(0.0, 0.0, 0.0), chart="sphere")
    y = SpacetimePoint(1.0, sphere_point(0.5, 0.0, 0.0), chart="sphere")
    result = closed_flrw_gsym(model, x, y)
    assert result.windings == (-1, 0)
    scale = 1.0 / ((1.0 - math.cos(2.0)) * (1.0 - math.cos(1.0)))
    zero = [term for term in result.terms if term.n == 0][0]
    assert zero.coefficient == pytest.approx(-0.5 / math.sin(0.5) * scale / (4.0 * math.pi))
    assert not result.singular


def test_conformal_transform():
    G = minkowski_gsym(3, 0.0, (1.0, 0.0, 0.0, 0.0))
    assert conformal_transform_greens(G, 2.0, 2.0, 1) is G
    assert conformal_transform_greens(G, 2.0, 2.0, 3).lightcone_delta_coeff == pytest.approx(G.lightcone_delta_coeff / 4.0)
    with pytest.raises(DomainError):
        conformal_transform_greens(G, 0.0, 1.0, 3)
    assert transform_mass(3.0, 2.0) == 1.5
