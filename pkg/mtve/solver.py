"""Model operators, Picard iteration and the conformal reductions.

The discrete operator of every model equation factorises per particle:

    (λ K̂ χ) = λ · P₁ (K ∘ χ) P₂ᵀ

with ``χ`` viewed as a matrix whose rows index (η₁, x₁) and columns (η₂, x₂),
``K`` the kernel at node pairs and ``P`` the sparse single-particle
propagators from :mod:`mtve.quadrature`. Everything λ-independent lives in an
``OperatorPlan`` that is built once per (model, grid).
"""

from __future__ import annotations

import logging
import math
import os
import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import lru_cache
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy import sparse

from .errors import DivergenceError, GridMismatchError, ModelError, ScenarioError
from .fields import MultiTimeField, MultiTimeGrid, bnorm, pair_norms
from .geometry import ScaleFactorModel, SpacetimeKind, Topology, geodesic_distance_s3, sup_norm
from .greens import reachable_windings
from .guardrails import check_coupling, check_model
from .kernels import InteractionKernel, Singularity, kernel_matrix
from .quadrature import QuadratureSettings, particle_propagator

logger = logging.getLogger(__name__)


class GreensSupport(str, Enum):
    RETARDED = "retarded"
    SYMMETRIC = "symmetric"


@dataclass(frozen=True)
class ModelSpec:
    spacetime: SpacetimeKind
    kernel: InteractionKernel
    coupling: complex = 0.0
    scale: Optional[ScaleFactorModel] = None
    greens_support: GreensSupport = GreensSupport.RETARDED
    masses: Tuple[float, float] = (0.0, 0.0)
    T: Optional[float] = None

    def __post_init__(self) -> None:
        support = GreensSupport(self.greens_support)
        object.__setattr__(self, "greens_support", support)
        object.__setattr__(self, "coupling", complex(self.coupling))
        object.__setattr__(self, "masses", (float(self.masses[0]), float(self.masses[1])))
        closed = self.spacetime.topology is Topology.CLOSED
        if closed and support is not GreensSupport.SYMMETRIC:
            raise ModelError("closed FLRW model equations use the symmetric Green's function")
        if not closed and support is not GreensSupport.RETARDED:
            raise ModelError(f"{self.spacetime} model equations use the retarded Green's function")
        if self.T is None:
            if self.scale is None:
                raise ModelError("Minkowski models need an explicit horizon T")
            object.__setattr__(self, "T", float(self.scale.T))
        elif self.scale is not None and abs(float(self.T) - self.scale.T) > 1e-12 * max(1.0, self.T):
            raise ModelError(f"horizon T={self.T} differs from the scale-factor window {self.scale.T}")
        check_model(self.spacetime, self.scale, self.kernel, self.masses)

    @property
    def horizon(self) -> float:
        return float(self.T)  # type: ignore[arg-type]

    @property
    def d(self) -> int:
        return self.spacetime.d

    def with_coupling(self, coupling: complex) -> "ModelSpec":
        return replace(self, coupling=coupling)

    def describe(self) -> Dict[str, object]:
        return {
            "spacetime": str(self.spacetime),
            "scale": None if self.scale is None else self.scale.name,
            "greens": self.greens_support.value,
            "kernel": self.kernel.name,
            "coupling": [self.coupling.real, self.coupling.imag],
            "masses": list(self.masses),
            "T": self.horizon,
        }


@dataclass(frozen=True)
class WindingCensus:
    """How many S³ node pairs see each set of reachable winding numbers."""

    T: float
    pairs: Dict[Tuple[int, ...], int]

    def generic(self) -> Tuple[int, ...]:
        return max(self.pairs.items(), key=lambda item: item[1])[0]

    @property
    def max_terms(self) -> int:
        return max(len(key) for key in self.pairs)


@dataclass(frozen=True, eq=False)
class OperatorPlan:
    model: ModelSpec
    grid: MultiTimeGrid
    p1: sparse.csr_matrix
    p2: sparse.csr_matrix
    kernel: np.ndarray
    census: Optional[WindingCensus] = None


@dataclass
class SolutionReport:
    chi: MultiTimeField
    residual_history: List[float]
    iterations: int
    converged: bool
    model: ModelSpec
    lambda_bound: Optional[float] = None
    warnings: List[str] = field(default_factory=list)
    elapsed: float = 0.0


# ---------------------------------------------------------------------------
# plans


def winding_census(model: ModelSpec, grid: MultiTimeGrid) -> WindingCensus:
    if model.spacetime.topology is not Topology.CLOSED:
        raise ModelError("winding census exists for the closed FLRW model only")
    nodes = grid.space1.nodes
    s = np.asarray(geodesic_distance_s3(nodes[:, None, :], nodes[None, :, :]))
    np.fill_diagonal(s, 0.0)
    counts: Counter = Counter()
    values, multiplicity = np.unique(np.round(s, 12), return_counts=True)
    for value, count in zip(values, multiplicity):
        counts[reachable_windings(float(value), model.horizon)] += int(count)
    census = WindingCensus(model.horizon, dict(counts))
    logger.debug("winding census T=%.6g: %s", model.horizon, census.pairs)
    return census


@lru_cache(maxsize=8)
def _cached_plan(model: ModelSpec, grid: MultiTimeGrid, settings: QuadratureSettings) -> OperatorPlan:
    started = time.perf_counter()
    p1 = particle_propagator(model.spacetime, model.scale, model.masses[0], grid.time, grid.space1, settings)
    if model.masses[1] == model.masses[0] and grid.space2 is grid.space1:
        p2 = p1
    else:
        p2 = particle_propagator(model.spacetime, model.scale, model.masses[1], grid.time, grid.space2, settings)
    census = winding_census(model, grid) if model.spacetime.topology is Topology.CLOSED else None
    plan = OperatorPlan(model, grid, p1, p2, kernel_matrix(model.kernel, grid, settings), census)
    logger.info("operator plan for %s on %s nodes ready in %.2fs", model.spacetime, grid.size, time.perf_counter() - started)
    return plan


def build_plan(model: ModelSpec, grid: MultiTimeGrid, settings: Optional[QuadratureSettings] = None) -> OperatorPlan:
    """λ-independent parts of the operator; cached per (model, grid, settings)."""

    if grid.kind != model.spacetime:
        raise GridMismatchError(f"grid is for {grid.kind}, model is {model.spacetime}")
    if abs(grid.T - model.horizon) > 1e-12 * max(1.0, model.horizon):
        raise GridMismatchError(f"grid horizon {grid.T} differs from model horizon {model.horizon}")
    return _cached_plan(model.with_coupling(0.0), grid, settings or QuadratureSettings())


# ---------------------------------------------------------------------------
# operator application


def resolve_workers(threads: Optional[int] = None) -> int:
    """Explicit argument, then MTVE_THREADS, then the config file, then the CPU count."""

    if threads is None:
        raw = os.environ.get("MTVE_THREADS")
        if raw is not None:
            try:
                threads = int(raw)
            except ValueError:
                raise ScenarioError("MTVE_THREADS must be a positive integer", field="MTVE_THREADS") from None
        else:
            import mtve_config

            threads = mtve_config.section("run").get("threads")
    if threads is None:
        threads = os.cpu_count() or 1
    if int(threads) < 1:
        raise ScenarioError("MTVE_THREADS must be a positive integer", field="MTVE_THREADS")
    return int(threads)


def _apply_matrix(plan: OperatorPlan, X: np.ndarray, coupling: complex, workers: int) -> np.ndarray:
    KX = plan.kernel * X
    n_rows = plan.p1.shape[0]
    bounds = np.linspace(0, n_rows, min(workers, n_rows) + 1).astype(int)
    out = np.empty((n_rows, plan.p2.shape[0]), dtype=complex)
    p2 = plan.p2

    def block(lo: int, hi: int) -> None:
        partial = plan.p1[lo:hi] @ KX
        out[lo:hi] = np.asarray((p2 @ partial.T).T)

    if len(bounds) <= 2:
        block(0, n_rows)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(block, bounds[:-1], bounds[1:]))
    return coupling * out


def apply_operator(
    model: ModelSpec,
    chi: MultiTimeField,
    *,
    plan: Optional[OperatorPlan] = None,
    threads: Optional[int] = None,
) -> MultiTimeField:
    """λ·K̂χ on the grid of ``chi``."""

    if chi.exponent != 0.0:
        raise ModelError("operators act on the reduced field; call reduce_conformal first")
    plan = plan or build_plan(model, chi.grid)
    if not plan.grid.same_as(chi.grid):
        raise GridMismatchError("operator plan and field use different grids")
    return MultiTimeField.from_matrix(chi.grid, _apply_matrix(plan, chi.as_matrix(), model.coupling, resolve_workers(threads)))


def _matrix_bnorm(grid: MultiTimeGrid, M: np.ndarray) -> float:
    return bnorm(MultiTimeField.from_matrix(grid, M))


def contraction_bound(model: ModelSpec) -> float:
    """(π²/√2 · (⌊T/π⌋+1)² · ‖a‖²_∞ · ‖f‖_∞)⁻¹ for the closed model."""

    if model.spacetime.topology is not Topology.CLOSED or model.kernel.singularity is not Singularity.INVERSE_SINE:
        raise ModelError("contraction_bound needs the closed FLRW model with a 1/sin s kernel")
    if not math.isfinite(model.kernel.sup_bound) or model.kernel.sup_bound <= 0:
        raise ModelError("contraction_bound needs a finite positive sup_bound for f")
    windings = math.floor(model.horizon / math.pi) + 1
    a_sup = sup_norm(model.scale)  # type: ignore[arg-type]
    return 1.0 / (math.pi**2 / math.sqrt(2.0) * windings**2 * a_sup**2 * model.kernel.sup_bound)


def _coupling_bound(model: ModelSpec) -> Optional[float]:
    if model.spacetime.topology is Topology.CLOSED and model.kernel.singularity is Singularity.INVERSE_SINE:
        return contraction_bound(model)
    return None


def picard_solve(
    model: ModelSpec,
    chi_free: MultiTimeField,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
    *,
    plan: Optional[OperatorPlan] = None,
    threads: Optional[int] = None,
) -> SolutionReport:
    """χ_{n+1} = χ_free + λK̂χ_n from χ₀ = χ_free.

    Stops once bnorm(χ_{n+1} − χ_n) ≤ tol · bnorm(χ_free) or after
    ``max_iter`` iterations; ``residual_history`` holds those increments.
    """

    if tol is None or max_iter is None:
        import mtve_config

        defaults = mtve_config.section("solver")
        tol = float(defaults["tol"]) if tol is None else tol
        max_iter = int(defaults["max_iter"]) if max_iter is None else max_iter
    if tol <= 0:
        raise ModelError("tol must be positive")
    if chi_free.exponent != 0.0:
        raise ModelError("picard_solve iterates on the reduced field; call reduce_conformal first")
    started = time.perf_counter()
    grid = chi_free.grid
    plan = plan or build_plan(model, grid)
    workers = resolve_workers(threads)
    bound = _coupling_bound(model)
    notes: List[str] = []
    if check_coupling(model.coupling, bound):
        notes.append("above-bound")
        logger.warning("coupling |%.6g| above contraction bound %.6g; iterating anyway", abs(model.coupling), bound)

    free = chi_free.as_matrix()
    scale = _matrix_bnorm(grid, free)
    chi = free
    history: List[float] = []
    converged = False
    for iteration in range(1, max_iter + 1):
        update = free + _apply_matrix(plan, chi, model.coupling, workers)
        if not np.all(np.isfinite(update)):
            raise DivergenceError(iteration)
        increment = _matrix_bnorm(grid, update - chi)
        history.append(increment)
        chi = update
        logger.debug("picard iteration %d: increment %.3e", iteration, increment)
        if increment <= tol * scale:
            converged = True
            break
    elapsed = time.perf_counter() - started
    if converged:
        logger.info("picard converged after %d iterations (%.2fs)", len(history), elapsed)
    else:
        logger.info("picard stopped after %d iterations without convergence (last increment %.3e)", len(history), history[-1])
    return SolutionReport(
        chi=MultiTimeField.from_matrix(grid, chi),
        residual_history=history,
        iterations=len(history),
        converged=converged,
        model=model,
        lambda_bound=bound,
        warnings=notes,
        elapsed=elapsed,
    )


def residual(
    model: ModelSpec,
    chi: MultiTimeField,
    chi_free: MultiTimeField,
    *,
    plan: Optional[OperatorPlan] = None,
    threads: Optional[int] = None,
) -> float:
    """bnorm(χ − χ_free − λK̂χ)."""

    if not chi.grid.same_as(chi_free.grid):
        raise GridMismatchError("chi and chi_free live on different grids")
    return bnorm(chi - chi_free - apply_operator(model, chi, plan=plan, threads=threads))


def neumann_solve(model: ModelSpec, chi_free: MultiTimeField, N: int, *, plan: Optional[OperatorPlan] = None) -> MultiTimeField:
    """Σ_{n=0}^{N} (λK̂)ⁿ χ_free."""

    if N < 0:
        raise ModelError("Neumann order must be non-negative")
    plan = plan or build_plan(model, chi_free.grid)
    total = chi_free
    term = chi_free
    for _ in range(N):
        term = apply_operator(model, term, plan=plan)
        total = total + term
    return total


def increment_ratios(report: SolutionReport) -> List[float]:
    history = report.residual_history
    return [later / earlier for earlier, later in zip(history, history[1:]) if earlier > 0.0]


# ---------------------------------------------------------------------------
# conformal reductions


def _scale_of(model) -> Optional[ScaleFactorModel]:
    return model.scale if isinstance(model, ModelSpec) else model


def reduce_conformal(psi: MultiTimeField, model, d: int) -> MultiTimeField:
    """χ = a^{(d−1)/2}(η₁) a^{(d−1)/2}(η₂) ψ, kept as an exponent shift."""

    scale = _scale_of(model)
    if d == 1 or scale is None:
        return psi
    return psi.with_exponent(psi.exponent + (d - 1) / 2.0, scale)


def unreduce_conformal(chi: MultiTimeField, model, d: int) -> MultiTimeField:
    scale = _scale_of(model)
    if d == 1 or scale is None:
        return chi
    return chi.with_exponent(chi.exponent - (d - 1) / 2.0, scale)


def bigbang_asymptotics_check(report: SolutionReport, chi_free: MultiTimeField, n_nodes_near_zero: int) -> float:
    """max of ‖χ − χ_free‖(η₁, η₂)/bnorm(χ_free) over the Big-Bang corner window.

    The window is the square of the first ``n_nodes_near_zero`` time nodes on
    both axes (n² time pairs), so the value is non-decreasing in n and is 0 at
    n = 1 for retarded models.
    """

    if report.model.greens_support is not GreensSupport.RETARDED:
        raise ModelError("the Big-Bang check applies to retarded models")
    if n_nodes_near_zero < 1:
        raise ModelError("the near-zero window needs at least one node")
    scale = bnorm(chi_free)
    if scale == 0.0:
        return 0.0
    norms = pair_norms(report.chi - chi_free)
    window = norms[:n_nodes_near_zero, :n_nodes_near_zero]
    return float(np.max(window)) / scale


__all__ = [
    "GreensSupport",
    "ModelSpec",
    "OperatorPlan",
    "SolutionReport",
    "WindingCensus",
    "apply_operator",
    "bigbang_asymptotics_check",
    "build_plan",
    "contraction_bound",
    "increment_ratios",
    "neumann_solve",
    "picard_solve",
    "reduce_conformal",
    "residual",
    "resolve_workers",
    "unreduce_conformal",
    "winding_census",
]
