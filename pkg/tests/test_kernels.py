import math

import numpy as np
import pytest

from mtve.errors import ModelError
from mtve.fields import build_grid
from mtve.geometry import SpacetimeKind
from mtve.kernels import (
    CUBE_INVERSE_DISTANCE,
    Singularity,
    bounded_closed_kernel,
    build_kernel,
    constant_kernel,
    covariant_bounded_kernel,
    kernel_matrix,
    list_kernels,
    natural_kernel_1d,
    singular_kernel_closed,
    singular_kernel_flat3d,
)


def _pt(*coords):
    return np.array(coords, dtype=float)


def test_natural_kernel_inside_boundary_and_outside():
    kernel = natural_kernel_1d()
    assert kernel(1.0, _pt(0.0), 0.2, _pt(0.3)) == 0.5
    assert kernel(1.0, _pt(0.0), 0.5, _pt(0.5)) == 0.5
    assert kernel(1.0, _pt(0.0), 0.9, _pt(0.5)) == 0.0
    assert kernel.sup_bound == 0.5


def test_open_support_variant_drops_the_light_cone():
    kernel = natural_kernel_1d(closed_support=False)
    assert kernel(1.0, _pt(0.0), 0.5, _pt(0.5)) == 0.0


def test_covariant_kernel_needs_declared_sup_bound():
    with pytest.raises(ModelError):
        covariant_bounded_kernel(np.cos, None)


def test_covariant_kernel_depends_on_timelike_distance_only():
    kernel = build_kernel("covariant_exp", {"value": 1.0, "length": 1.0})
    first = kernel.factor(1.0, _pt(0.0), 0.2, _pt(0.3))
    second = kernel.factor(1.5, _pt(1.0), 0.7, _pt(1.3))
    assert first == pytest.approx(second, abs=1e-12)
    assert first == pytest.approx(math.exp(-0.5))
    assert kernel.factor(1.0, _pt(0.0), 0.9, _pt(0.5)) == 0.0


def test_bounded_factor_respects_sup_bound():
    rng = np.random.default_rng(7)
    kernel = build_kernel("covariant_exp", {"value": 2.0, "length": 0.5})
    eta1, eta2 = rng.uniform(0.0, 1.0, (2, 10_000))
    x1, x2 = rng.uniform(-1.0, 1.0, (2, 10_000, 1))
    assert np.all(np.abs(kernel.factor(eta1, x1, eta2, x2)) <= kernel.sup_bound + 1e-15)


def test_inverse_spatial_kernel():
    kernel = singular_kernel_flat3d(3.0)
    assert kernel.singularity is Singularity.INVERSE_SPATIAL
    assert kernel.sup_bound == 3.0
    assert kernel(0.5, _pt(0.0, 0.0, 0.0), 0.2, _pt(2.0, 0.0, 0.0)) == pytest.approx(1.5)
    assert np.isinf(kernel(0.5, _pt(0.0, 0.0, 0.0), 0.2, _pt(0.0, 0.0, 0.0)))


def test_inverse_sine_kernel():
    kernel = singular_kernel_closed(2.0)
    q = _pt(1.0, 0.0, 0.0, 0.0)
    assert kernel(1.0, q, 1.0, _pt(0.0, 1.0, 0.0, 0.0)) == pytest.approx(2.0)
    assert kernel.singular_mask(q, -q)


def test_bounded_closed_kernel_has_no_singularity():
    kernel = bounded_closed_kernel(0.25)
    assert kernel.singularity is Singularity.NONE
    assert kernel.sup_bound == 0.25


def test_catalogue():
    assert set(list_kernels()) == {
        "bounded_closed",
        "constant",
        "covariant_constant",
        "covariant_exp",
        "natural_1d",
        "singular_closed",
        "singular_flat3d",
    }
    with pytest.raises(ModelError):
        build_kernel("yukawa")
    with pytest.raises(ModelError):
        build_kernel("covariant_exp", {"length": 0.0})


def test_kernel_matrix_layout_for_constant_kernel():
    grid = build_grid(SpacetimeKind.minkowski(1), 1.0, 4, 5, 0.5)
    matrix = kernel_matrix(constant_kernel(0.5 + 1j), grid)
    assert matrix.shape == (20, 20)
    assert np.all(matrix == 0.5 + 1j)


def test_kernel_matrix_uses_cell_average_at_coincidence():
    grid = build_grid(SpacetimeKind.flat(3), 0.5, 2, 3, 0.5, inflate=False)
    matrix = kernel_matrix(singular_kernel_flat3d(1.0), grid)
    h = grid.space1.spacing[0]
    ns = grid.space1.count
    assert matrix[0, 0] == pytest.approx(CUBE_INVERSE_DISTANCE / h)
    assert matrix[0, 1] == pytest.approx(1.0 / h)
    assert matrix[0, ns + 1] == pytest.approx(1.0 / h)


def test_kernel_matrix_inverse_sine_integrates_exactly():
    grid = build_grid(SpacetimeKind.closed(), 2.0 * math.pi, 2, 120)
    matrix = kernel_matrix(singular_kernel_closed(1.0), grid)
    ns = grid.space1.count
    block = matrix[:ns, :ns].real
    np.testing.assert_allclose(block @ grid.space2.weights, 8.0 * math.pi, rtol=1e-12)
