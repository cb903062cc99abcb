import math

import numpy as np
import pytest

from mtve.errors import DomainError, ModelError
from mtve.geometry import (
    NOT_TIMELIKE,
    ScaleFactorModel,
    SpacetimeKind,
    SpacetimePoint,
    Topology,
    check_roots,
    conformal_weight,
    exp_map_h3,
    geodesic_distance_h3,
    geodesic_distance_s3,
    hyperboloid_point,
    mean_scale,
    sphere_point,
    sup_norm,
    timelike_distance,
)


def test_closed_dust_defaults_to_full_lifetime():
    model = ScaleFactorModel.dust(1)
    assert model.T == pytest.approx(2.0 * math.pi)
    assert model(math.pi) == pytest.approx(2.0)
    check_roots(model, closed=True)


def test_flat_models_need_an_explicit_horizon():
    with pytest.raises(ModelError):
        ScaleFactorModel.radiation(0)
    assert ScaleFactorModel.radiation(0, 1.5)(1.0) == pytest.approx(1.0)


def test_scale_factor_rejects_times_outside_window():
    model = ScaleFactorModel.dust(0, 1.0)
    with pytest.raises(DomainError):
        model(1.5)
    with pytest.raises(DomainError):
        model(-0.1)


def test_check_roots_rules():
    with pytest.raises(ModelError):
        check_roots(ScaleFactorModel.constant(1.0))
    with pytest.raises(ModelError):
        check_roots(ScaleFactorModel.dust(0, 1.0), closed=True)
    check_roots(ScaleFactorModel.dust(0, 1.0))


def test_check_roots_rejects_interior_roots():
    dip = ScaleFactorModel.custom(lambda eta: eta * (eta - 0.5) ** 2, 1.0)
    with pytest.raises(ModelError, match="positive inside"):
        check_roots(dip)
    with pytest.raises(ModelError):
        check_roots(ScaleFactorModel.custom(lambda eta: np.sin(4.0 * eta), 1.0))
    check_roots(ScaleFactorModel.dust(1), closed=True)
    check_roots(ScaleFactorModel.radiation(1), closed=True)


def test_sup_norm_of_closed_dust():
    assert sup_norm(ScaleFactorModel.dust(1)) == pytest.approx(2.0, rel=1e-5)


def test_open_and_closed_kinds_are_three_dimensional():
    with pytest.raises(ModelError):
        SpacetimeKind(Topology.CLOSED, 2)
    assert SpacetimeKind.open().curvature == -1
    assert SpacetimeKind.closed().coordinate_dim == 4
    assert SpacetimeKind.minkowski(2).is_flat


def test_s3_distance_endpoints_are_exact():
    q = np.array([1.0, 0.0, 0.0, 0.0])
    assert geodesic_distance_s3(q, q) == 0.0
    assert geodesic_distance_s3(q, -q) == math.pi
    assert geodesic_distance_s3(q, [0.0, 1.0, 0.0, 0.0]) == pytest.approx(math.pi / 2)


def test_s3_distance_rejects_non_unit_points():
    with pytest.raises(DomainError):
        geodesic_distance_s3([1.0, 0.1, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0])


def test_sphere_point_is_unit():
    q = sphere_point(0.4, 1.1, 2.5)
    assert np.linalg.norm(q) == pytest.approx(1.0)
    assert geodesic_distance_s3(q, [1.0, 0.0, 0.0, 0.0]) == pytest.approx(0.4)


def test_h3_distance_from_origin():
    origin = hyperboloid_point(0.0, [1.0, 0.0, 0.0])
    x = hyperboloid_point(0.9, [0.0, 0.0, 2.0])
    assert geodesic_distance_h3(origin, x) == pytest.approx(0.9, abs=1e-12)


def test_exp_map_moves_by_the_requested_distance():
    x = hyperboloid_point(0.7, [0.0, 1.0, 0.0])
    y = exp_map_h3(x, np.array([1.0, 0.0, 0.0]), 1.3)
    assert geodesic_distance_h3(x, y) == pytest.approx(1.3, abs=1e-10)
    many = exp_map_h3(x, np.eye(3), np.array([0.2, 0.5, 0.8]))
    np.testing.assert_allclose(geodesic_distance_h3(x, many), [0.2, 0.5, 0.8], atol=1e-10)


def test_mean_scale_is_symmetric_and_exact():
    model = ScaleFactorModel.dust(0, 2.0)
    forward = mean_scale(model, 0.3, 1.7)
    backward = mean_scale(model, 1.7, 0.3)
    assert forward == backward
    assert forward == pytest.approx((1.7**3 - 0.3**3) / 3.0 / 1.4)
    assert mean_scale(model, 1.2, 1.2) == pytest.approx(1.44)


def test_timelike_distance_minkowski_and_flrw():
    a = SpacetimePoint(1.0, [0.0])
    b = SpacetimePoint(0.2, [0.3])
    assert timelike_distance(a, b) == pytest.approx(0.5)
    assert timelike_distance(a, SpacetimePoint(0.9, [0.5])) is NOT_TIMELIKE
    model = ScaleFactorModel.dust(0, 2.0)
    assert timelike_distance(a, b, model) == pytest.approx(0.5 * mean_scale(model, 1.0, 0.2))


def test_spacetime_point_copies_and_freezes_input():
    raw = np.array([0.1, 0.2])
    point = SpacetimePoint(0.5, raw)
    raw[0] = 9.0
    assert point.spatial[0] == 0.1
    with pytest.raises(ValueError):
        point.spatial[0] = 1.0


def test_conformal_weight():
    model = ScaleFactorModel.dust(0, 2.0)
    assert conformal_weight(1, 0.5, 1.5, model) == 1.0
    assert conformal_weight(3, 0.5, 1.0, model) == pytest.approx(0.25)
