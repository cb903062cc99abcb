import math

import numpy as np
import pytest

from mtve.errors import DomainError, ModelError
from mtve.fields import build_grid
from mtve.geometry import SpacetimeKind, geodesic_distance_h3, hyperboloid_point
from mtve.greens import reachable_windings
from mtve.quadrature import (
    QuadratureSettings,
    ball_rule_3d,
    cone_sqrt_rule_2d,
    default_exclusion_radius,
    disc_sqrt_rule,
    hyperbolic_ball_rule,
    multilinear_stencil,
    particle_propagator,
    rule_report,
    s3_nodes,
    s3_pair_rule,
    sphere_directions,
    time_stencil,
    trapezoid_weights,
    volterra_rule_1d,
    winding_range,
)


def _grid_1d(time_nodes, space_nodes=9):
    return build_grid(SpacetimeKind.minkowski(1), 1.0, time_nodes, space_nodes, 0.5)


def test_trapezoid_weights_sum_to_length():
    assert np.sum(trapezoid_weights(np.linspace(0.0, 2.0, 7))) == pytest.approx(2.0)


def test_sphere_directions_are_unit():
    directions = sphere_directions(26)
    assert directions.shape == (26, 3)
    np.testing.assert_allclose(np.linalg.norm(directions, axis=1), 1.0)


def test_s3_nodes_are_antipodal_pairs():
    nodes = s3_nodes(100)
    np.testing.assert_array_equal(nodes[:50], -nodes[50:])
    np.testing.assert_allclose(np.linalg.norm(nodes, axis=1), 1.0)
    with pytest.raises(ModelError):
        s3_nodes(101)


def test_cone_rule_integrates_constants_exactly():
    grid = _grid_1d(9)
    rule = volterra_rule_1d(grid, 8, 4)
    assert rule.integrate(lambda eta, z: np.ones_like(eta)) == pytest.approx(1.0, abs=1e-12)
    assert volterra_rule_1d(grid, 0, 4).size == 0


def test_cone_rule_is_second_order():
    errors = []
    for nodes in (9, 17):
        grid = _grid_1d(nodes, 2 * nodes - 1)
        rule = volterra_rule_1d(grid, nodes - 1, nodes - 1)
        exact = 2.0 * (math.e - 2.0)
        errors.append(abs(rule.integrate(lambda eta, z: np.exp(eta)) - exact))
    assert 3.5 < errors[0] / errors[1] < 4.5


def test_disc_rule_exact_for_piecewise_linear_radial_profiles():
    rule = disc_sqrt_rule(0.7, 6, 16)
    assert rule.total() == pytest.approx(2.0 * math.pi * 0.7, rel=1e-12)
    assert rule.integrate(lambda points, r: r) == pytest.approx(0.5 * math.pi**2 * 0.49, rel=1e-12)


def test_cone_sqrt_rule_total():
    grid = build_grid(SpacetimeKind.minkowski(2), 1.0, 5, 3, 0.5)
    rule = cone_sqrt_rule_2d(1.0, np.zeros(2), grid)
    assert rule.total() == pytest.approx(math.pi, rel=1e-12)
    with pytest.raises(DomainError):
        cone_sqrt_rule_2d(0.3, np.zeros(2), grid)


def test_ball_rule_exact_for_constant_and_radius():
    rule = ball_rule_3d(np.zeros(3), 0.8)
    assert rule.total() == pytest.approx(2.0 * math.pi * 0.64, rel=1e-12)
    assert rule.integrate(lambda points, r: r) == pytest.approx(4.0 * math.pi * 0.8**3 / 3.0, rel=1e-12)


def test_hyperbolic_ball_rule():
    centre = hyperboloid_point(0.3, [0.0, 1.0, 0.0])
    rule = hyperbolic_ball_rule(centre, 0.9)
    assert rule.total() == pytest.approx(4.0 * math.pi * (math.cosh(0.9) - 1.0), rel=1e-12)
    np.testing.assert_allclose(geodesic_distance_h3(centre, rule.points), rule.radii, atol=1e-9)


@pytest.mark.parametrize("power, per_row", [(0, 2.0 * math.pi**2), (1, 8.0 * math.pi), (2, 4.0 * math.pi**2)])
def test_s3_pair_rule_rows_integrate_the_weight(power, per_row):
    rule = s3_pair_rule(100, power=power)
    np.testing.assert_allclose(rule.matrix.sum(axis=1) / rule.weights, per_row, rtol=1e-12)


def test_s3_pair_rule_minimum_size():
    with pytest.raises(ModelError):
        s3_pair_rule(50)


def test_exclusion_radius_is_capped():
    assert default_exclusion_radius(100) == pytest.approx(math.pi / 4)
    assert default_exclusion_radius(100_000) < 0.2


def test_time_stencil():
    grid = _grid_1d(5)
    lower, w0, w1 = time_stencil(grid.time, np.array([0.5, 0.6, 1.5, -0.2]))
    assert (lower[0], w0[0], w1[0]) == (2, 1.0, 0.0)
    assert lower[1] == 2 and w1[1] == pytest.approx(0.4)
    assert w0[2] == w1[2] == w0[3] == w1[3] == 0.0


def test_multilinear_stencil_reproduces_linear_functions():
    grid = build_grid(SpacetimeKind.minkowski(2), 1.0, 2, 5, 0.5)
    space = grid.space1
    rng = np.random.default_rng(3)
    points = rng.uniform(-1.4, 1.4, (50, 2))
    idx, w = multilinear_stencil(space, points)
    f = lambda p: 1.0 + 2.0 * p[..., 0] - p[..., 1]
    np.testing.assert_allclose(np.sum(w * f(space.nodes[idx]), axis=-1), f(points), atol=1e-12)
    _, outside = multilinear_stencil(space, np.array([[3.0, 0.0]]))
    assert np.all(outside == 0.0)


def test_d1_propagator_gives_half_the_cone_area():
    grid = _grid_1d(5)
    P = particle_propagator(grid.kind, None, 0.0, grid.time, grid.space1)
    ones = np.ones(P.shape[1])
    ns = grid.space1.count
    assert (P @ ones)[4 * ns + ns // 2] == pytest.approx(0.5, abs=1e-12)


def test_massive_propagators_are_minkowski_only():
    grid = build_grid(SpacetimeKind.flat(1), 1.0, 3, 5, 0.5)
    with pytest.raises(ModelError):
        particle_propagator(grid.kind, None, 1.0, grid.time, grid.space1)


def test_winding_range_covers_reachable_images():
    T = 2.0 * math.pi
    for s in (0.0, 0.3, math.pi):
        assert set(reachable_windings(s, T)) <= set(winding_range(T))


def test_rule_report_is_exact_for_constants():
    report = rule_report(QuadratureSettings())
    assert report["ball_constant"] == pytest.approx(1.0)
    assert report["disc_constant"] == pytest.approx(1.0)
