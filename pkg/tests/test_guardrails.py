import math

import pytest

from mtve.errors import ModelError
from mtve.geometry import ScaleFactorModel, SpacetimeKind
from mtve.guardrails import AboveBoundWarning, check_coupling, check_model
from mtve.kernels import build_kernel, constant_kernel, natural_kernel_1d, singular_kernel_closed, singular_kernel_flat3d


def test_coupling_below_bound_passes():
    assert check_coupling(0.1, 1.0) is False
    assert check_coupling(10.0, None) is False


def test_coupling_above_bound_warns():
    with pytest.warns(AboveBoundWarning):
        assert check_coupling(2.0, 1.0) is True


def test_strict_mode_raises(monkeypatch):
    monkeypatch.setenv("MTVE_STRICT", "1")
    with pytest.raises(ModelError):
        check_coupling(2.0, 1.0)


@pytest.mark.parametrize(
    "kind, model, kernel, masses",
    [
        (SpacetimeKind.flat(3), None, constant_kernel(1.0), (0.0, 0.0)),
        (SpacetimeKind.open(), ScaleFactorModel.dust(1), constant_kernel(1.0), (0.0, 0.0)),
        (SpacetimeKind.closed(), ScaleFactorModel.dust(1, math.pi), constant_kernel(1.0), (0.0, 0.0)),
        (SpacetimeKind.flat(1), ScaleFactorModel.dust(0, 1.0), constant_kernel(1.0), (1.0, 0.0)),
        (SpacetimeKind.flat(2), ScaleFactorModel.dust(0, 1.0), singular_kernel_flat3d(1.0), (0.0, 0.0)),
        (SpacetimeKind.flat(3), ScaleFactorModel.dust(0, 1.0), singular_kernel_closed(1.0), (0.0, 0.0)),
        (SpacetimeKind.minkowski(2), None, natural_kernel_1d(), (0.0, 0.0)),
        (SpacetimeKind.minkowski(1), None, build_kernel("covariant_constant"), (0.0, 0.0)),
    ],
)
def test_model_invariants_raise(kind, model, kernel, masses):
    with pytest.raises(ModelError):
        check_model(kind, model, kernel, masses)


def test_valid_combinations_pass():
    check_model(SpacetimeKind.minkowski(2), None, constant_kernel(1.0), (1.0, 2.0))
    check_model(SpacetimeKind.closed(), ScaleFactorModel.dust(1), singular_kernel_closed(1.0))
    check_model(SpacetimeKind.flat(3), ScaleFactorModel.radiation(0, 1.0), singular_kernel_flat3d(1.0))
