"""
Guardrails: enforce the model rules before a solve.
Relaxed rules warn unless MTVE_STRICT=1 is set; model invariants always raise.
"""
from __future__ import annotations

import os
import warnings
from typing import Optional

from .errors import ModelError
from .geometry import ScaleFactorModel, SpacetimeKind, Topology, check_roots
from .kernels import InteractionKernel, Singularity


class AboveBoundWarning(UserWarning):
    """The coupling exceeds the proven contraction bound of the closed model."""


def strict() -> bool:
    return os.environ.get("MTVE_STRICT", "0") == "1"


def _relaxed(msg: str, category=UserWarning) -> None:
    if strict():
        raise ModelError(msg)
    warnings.warn(msg, category, stacklevel=3)


def check_model(kind: SpacetimeKind, model: Optional[ScaleFactorModel], kernel: InteractionKernel, masses=(0.0, 0.0)) -> None:
    """Raise ``ModelError`` when the combination has no model equation."""

    if kind.topology is Topology.MINKOWSKI:
        if model is not None and model.kind != "custom":
            raise ModelError("Minkowski half-space takes no scale-factor model")
    else:
        if model is None:
            raise ModelError(f"{kind} needs a scale-factor model")
        if model.curvature != kind.curvature:
            raise ModelError(f"scale factor curvature k={model.curvature} does not match {kind}")
        if kind.topology is Topology.CLOSED:
            check_roots(model, closed=True)
        else:
            check_roots(model)
    if any(masses) and not (kind.topology is Topology.MINKOWSKI and kind.d in (1, 2)):
        raise ModelError("masses are supported on Minkowski d=1 and d=2 only")
    if kernel.singularity is Singularity.INVERSE_SPATIAL and not (kind.is_flat and kind.d == 3):
        raise ModelError("1/|x1-x2| kernels need flat d=3 slices")
    if kernel.singularity is Singularity.INVERSE_SINE and kind.topology is not Topology.CLOSED:
        raise ModelError("1/sin s kernels need the closed FLRW model")
    if kernel.name == "natural_1d" and kind.d != 1:
        raise ModelError("the natural kernel is a d=1 kernel")
    if kernel.name.startswith("covariant") and not (kind.topology is Topology.FLAT):
        raise ModelError("covariant kernels are defined on flat FLRW")


def check_coupling(coupling: complex, bound: Optional[float]) -> bool:
    """Warn (or raise under MTVE_STRICT) when |λ| exceeds ``bound``.

    Returns True when the coupling is above the bound.
    """

    if bound is None or abs(coupling) < bound:
        return False
    _relaxed(f"Guardrail: |lambda|={abs(coupling):.6g} is not below the contraction bound {bound:.6g}", AboveBoundWarning)
    return True


__all__ = ["AboveBoundWarning", "check_coupling", "check_model", "strict"]
