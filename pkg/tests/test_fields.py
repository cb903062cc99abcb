import math

import numpy as np
import pytest

from mtve.errors import DomainError, GridMismatchError, ModelError
from mtve.fields import (
    MultiTimeField,
    S3_VOLUME,
    TimeAxis,
    bnorm,
    build_grid,
    dalembert_free_1d,
    esu_frequency,
    esu_mode_closed,
    flrw_free_from_minkowski,
    free_residual,
    grid_from_descriptor,
    hyperspherical_harmonic,
    pair_norms,
    plane_wave_free,
    product_free,
    radial_wave_open,
)
from mtve.geometry import ScaleFactorModel, SpacetimeKind
from mtve.quadrature import s3_nodes


@pytest.fixture
def grid_1d():
    return build_grid(SpacetimeKind.minkowski(1), 1.0, 5, 9, 0.5, inflate=False)


def test_time_snap_reports_distance():
    axis = TimeAxis.uniform(1.0, 5)
    index, distance = axis.snap(0.49)
    assert axis.nodes[index] == 0.5
    assert distance == pytest.approx(0.01)
    with pytest.raises(DomainError):
        axis.snap(1.5)


def test_grid_inflation():
    flat = build_grid(SpacetimeKind.minkowski(1), 1.0, 3, 5, 0.5)
    assert flat.space1.half_width == pytest.approx(1.5)
    hyper = build_grid(SpacetimeKind.open(), 0.5, 3, 3, 0.5)
    assert hyper.space1.half_width == pytest.approx(math.sinh(math.asinh(0.5) + 0.5))
    closed = build_grid(SpacetimeKind.closed(), 2.0 * math.pi, 3, 100)
    assert closed.space1.count == 100
    assert np.sum(closed.space1.weights) == pytest.approx(S3_VOLUME)


def test_grid_descriptor_rebuilds_the_same_grid(grid_1d):
    rebuilt = grid_from_descriptor(grid_1d.descriptor())
    assert rebuilt.same_as(grid_1d)


def test_fields_reject_non_finite_values(grid_1d):
    values = np.ones(grid_1d.shape)
    values[0, 0, 0, 0] = np.nan
    with pytest.raises(DomainError):
        MultiTimeField(grid_1d, values)


def test_field_values_are_read_only(grid_1d):
    field = MultiTimeField.constant(grid_1d, 1.0)
    with pytest.raises(ValueError):
        field.values[0, 0, 0, 0] = 2.0


def test_field_arithmetic_checks_grids(grid_1d):
    other = build_grid(SpacetimeKind.minkowski(1), 1.0, 5, 7, 0.5, inflate=False)
    a = MultiTimeField.constant(grid_1d, 1.0)
    with pytest.raises(GridMismatchError):
        a + MultiTimeField.constant(other, 1.0)
    with pytest.raises(GridMismatchError):
        a - a.with_exponent(1.0)
    doubled = a + a * 1.0
    assert np.all(doubled.values == 2.0)


def test_bnorm_of_constant_field(grid_1d):
    field = MultiTimeField.constant(grid_1d, 2.0)
    assert bnorm(field) == pytest.approx(2.0 * 1.0)
    assert pair_norms(field).shape == (5, 5)


def test_bnorm_of_singular_field_raises(grid_1d):
    model = ScaleFactorModel.dust(0, 1.0)
    field = MultiTimeField.constant(grid_1d, 1.0).with_exponent(-1.0, model)
    assert np.isnan(field.materialize()[0, 0, 0, 0])
    with pytest.raises(DomainError):
        bnorm(field)


def test_product_of_free_fields(grid_1d):
    phi1 = plane_wave_free([1.0], grid_1d, 1)
    phi2 = plane_wave_free([-2.0], grid_1d, 2)
    psi = product_free(phi1, phi2, grid_1d)
    eta, z = grid_1d.time.nodes[2], grid_1d.space1.nodes[3, 0]
    expected = np.exp(-1j * (eta - z)) * np.exp(-1j * (2.0 * eta + 2.0 * z))
    assert psi.values[2, 3, 2, 3] == pytest.approx(expected)


def test_dalembert_needs_one_dimensional_grid():
    grid = build_grid(SpacetimeKind.minkowski(2), 1.0, 3, 3, 0.5)
    with pytest.raises(ModelError):
        dalembert_free_1d(np.cos, np.cos, grid)


def test_plane_wave_residual_is_second_order():
    residuals = []
    for nodes in (11, 21):
        grid = build_grid(SpacetimeKind.minkowski(1), 1.0, nodes, nodes, 1.0, inflate=False)
        residuals.append(free_residual(plane_wave_free([2.0], grid)))
    assert 3.6 < residuals[0] / residuals[1] < 4.4


def test_flrw_reweighting_shifts_exponent():
    grid = build_grid(SpacetimeKind.flat(3), 1.0, 3, 3, 0.5)
    model = ScaleFactorModel.dust(0, 1.0)
    phi = flrw_free_from_minkowski(plane_wave_free([1.0, 0.0, 0.0], grid), model, 3)
    assert phi.exponent == -1.0
    assert np.all(np.isnan(phi.materialize()[0]))


def test_esu_frequencies_approach_n_plus_one():
    assert esu_frequency(0, "0") == pytest.approx(1.0, rel=1e-3)
    assert esu_frequency(1, "x0") == pytest.approx(2.0, rel=1e-3)
    with pytest.raises(ModelError):
        esu_frequency(2, "x0")


def test_harmonic_normalisation():
    q = s3_nodes(4000)
    for label in ("0", "x2"):
        Y = hyperspherical_harmonic(label, q)
        assert np.mean(Y**2) * S3_VOLUME == pytest.approx(1.0, rel=0.03)


def test_curved_modes_carry_inverse_scale_factor():
    closed = build_grid(SpacetimeKind.closed(), 2.0 * math.pi, 3, 100)
    mode = esu_mode_closed(0, "0", closed, ScaleFactorModel.dust(1))
    assert mode.exponent == -1.0
    open_grid = build_grid(SpacetimeKind.open(), 0.5, 3, 3, 0.5)
    wave = radial_wave_open(2.0, open_grid, ScaleFactorModel.radiation(-1, 0.5))
    assert wave.exponent == -1.0
    with pytest.raises(ModelError):
        radial_wave_open(2.0, closed, ScaleFactorModel.dust(1))
