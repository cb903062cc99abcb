"""Brute-force verifiers for the solver.

The dense system is assembled straight from the quadrature module (no plan
cache, no threading); Monte Carlo and probe estimates use a counter-based
generator seeded by the caller so runs are reproducible.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np
from scipy import linalg

from .errors import ModelError, VerificationError
from .fields import MultiTimeField, MultiTimeGrid, S3_VOLUME, bnorm, build_grid, sphere_axis
from .geometry import ScaleFactorModel, SpacetimeKind, Topology
from .kernels import kernel_matrix, natural_kernel_1d, singular_kernel_closed
from .quadrature import QuadratureSettings, particle_propagator, rule_report
from .solver import GreensSupport, ModelSpec, apply_operator, contraction_bound, picard_solve

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DenseSystem:
    matrix: np.ndarray
    rhs: np.ndarray
    grid: MultiTimeGrid


@dataclass(frozen=True)
class DenseSolution:
    field: Optional[MultiTimeField]
    singular: bool
    system: DenseSystem


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float
    samples: int


@dataclass(frozen=True)
class OracleCheck:
    name: str
    value: float
    expected: float
    tolerance: float
    upper_only: bool = False

    @property
    def passed(self) -> bool:
        if self.upper_only:
            return self.value <= self.expected + self.tolerance
        return abs(self.value - self.expected) <= self.tolerance


def _oracle_defaults() -> dict:
    import mtve_config

    return mtve_config.section("oracle")


def _generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def dense_operator_matrix(model: ModelSpec, grid: MultiTimeGrid, settings: Optional[QuadratureSettings] = None) -> np.ndarray:
    """W with vec(K̂χ) = W vec(χ) (λ not included), W = (P₁ ⊗ P₂) diag(vec K)."""

    settings = settings or QuadratureSettings()
    p1 = particle_propagator(model.spacetime, model.scale, model.masses[0], grid.time, grid.space1, settings).toarray()
    p2 = particle_propagator(model.spacetime, model.scale, model.masses[1], grid.time, grid.space2, settings).toarray()
    weights = kernel_matrix(model.kernel, grid, settings).ravel()
    return np.kron(p1, p2) * weights[None, :]


def assemble_dense_system(
    model: ModelSpec,
    chi_free: MultiTimeField,
    settings: Optional[QuadratureSettings] = None,
    max_unknowns: Optional[int] = None,
) -> DenseSystem:
    limit = int(max_unknowns or _oracle_defaults()["max_unknowns"])
    grid = chi_free.grid
    if grid.size > limit:
        raise ModelError(f"dense oracle is limited to {limit} unknowns, grid has {grid.size}")
    W = dense_operator_matrix(model, grid, settings)
    matrix = np.eye(grid.size, dtype=complex) - model.coupling * W
    return DenseSystem(matrix, chi_free.values.ravel().copy(), grid)


def dense_linear_solve(
    model: ModelSpec,
    chi_free: MultiTimeField,
    settings: Optional[QuadratureSettings] = None,
    max_unknowns: Optional[int] = None,
) -> DenseSolution:
    """Solve (I − λW) vec χ = vec χ_free by LU with partial pivoting.

    A singular matrix is reported through ``singular`` instead of raising.
    """

    system = assemble_dense_system(model, chi_free, settings, max_unknowns)
    lu, piv = linalg.lu_factor(system.matrix, check_finite=True)
    if np.any(np.abs(np.diag(lu)) == 0.0):
        logger.warning("dense oracle: matrix is singular for lambda=%s", model.coupling)
        return DenseSolution(None, True, system)
    values = linalg.lu_solve((lu, piv), system.rhs)
    return DenseSolution(MultiTimeField(system.grid, values.reshape(system.grid.shape)), False, system)


def _uniform_s3(rng: np.random.Generator, count: int) -> np.ndarray:
    sample = rng.standard_normal((count, 4))
    return sample / np.linalg.norm(sample, axis=1, keepdims=True)


def mc_identity_sin2(n_samples: Optional[int] = None, seed: Optional[int] = None, power: int = 2) -> Estimate:
    """Monte Carlo estimate of ∫∫ dΩ(q₁)dΩ(q₂) / sinᵖ s(q₁, q₂) over S³×S³.

    For p = 2 the exact value is 8π⁴; p = 0 returns (2π²)² with zero error.
    """

    defaults = _oracle_defaults()
    n = int(n_samples or defaults["mc_samples"])
    if n < 100_000:
        raise ModelError("mc_identity_sin2 needs at least 1e5 samples")
    rng = _generator(int(defaults["seed"] if seed is None else seed))
    total = 0.0
    total_sq = 0.0
    remaining = n
    while remaining:
        chunk = min(remaining, 250_000)
        q1 = _uniform_s3(rng, chunk)
        q2 = _uniform_s3(rng, chunk)
        cos_s = np.clip(np.sum(q1 * q2, axis=1), -1.0, 1.0)
        values = (1.0 - cos_s * cos_s) ** (-0.5 * power) if power else np.ones(chunk)
        total += float(np.sum(values))
        total_sq += float(np.sum(values * values))
        remaining -= chunk
    mean = total / n
    variance = max(total_sq / n - mean * mean, 0.0)
    volume = S3_VOLUME**2
    estimate = Estimate(volume * mean, volume * math.sqrt(variance / n), n)
    logger.info("MC sin^-%d identity: %.6f +- %.6f (%d samples)", power, estimate.value, estimate.stderr, n)
    return estimate


@dataclass(frozen=True)
class ProbeResult:
    value: float
    bound: float


def operator_norm_probe(
    model: ModelSpec,
    grid: MultiTimeGrid,
    n_probes: Optional[int] = None,
    seed: Optional[int] = None,
    *,
    check: bool = True,
) -> ProbeResult:
    """max over random χ of bnorm(λK̂χ)/bnorm(χ), a lower bound of the operator norm.

    With ``check`` the value must not exceed |λ|/contraction_bound.
    """

    if model.spacetime.topology is not Topology.CLOSED:
        raise ModelError("operator_norm_probe applies to the closed FLRW model")
    defaults = _oracle_defaults()
    count = int(n_probes or defaults["probes"])
    rng = _generator(int(defaults["seed"] if seed is None else seed))
    bound = abs(model.coupling) / contraction_bound(model)
    best = 0.0
    for _ in range(count):
        values = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
        probe = MultiTimeField(grid, values)
        ratio = bnorm(apply_operator(model, probe, threads=1)) / bnorm(probe)
        best = max(best, ratio)
    logger.info("operator norm probe: %.6g (bound %.6g, %d probes)", best, bound, count)
    if check and best > bound:
        raise VerificationError("operator_norm_probe", f"probe value {best:.6g} exceeds the contraction estimate {bound:.6g}")
    return ProbeResult(best, bound)


def s3_weight_sum(n: int) -> float:
    return float(np.sum(sphere_axis(n).weights))


def run_oracle_suite(mc_samples: Optional[int] = None, seed: Optional[int] = None) -> List[OracleCheck]:
    """Small built-in checks backing the ``oracle`` command."""

    checks: List[OracleCheck] = []
    kind = SpacetimeKind.minkowski(1)
    grid = build_grid(kind, 1.0, 7, 9, 0.5)
    model = ModelSpec(kind, natural_kernel_1d(), 1.0, T=1.0)
    free = MultiTimeField.constant(grid, 1.0)
    picard = picard_solve(model, free, 1e-13, 200, threads=1)
    dense = dense_linear_solve(model, free)
    gap = bnorm(picard.chi - dense.field) if dense.field is not None else math.inf
    checks.append(OracleCheck("picard_vs_dense_1d", gap, 0.0, 1e-10))

    checks.append(OracleCheck("s3_weight_sum", s3_weight_sum(200), S3_VOLUME, 0.005 * S3_VOLUME))
    rules = rule_report(QuadratureSettings.from_config())
    checks.append(OracleCheck("ball_rule_constant", rules["ball_constant"], 1.0, 0.005))
    checks.append(OracleCheck("disc_rule_constant", rules["disc_constant"], 1.0, 0.005))

    closed = ModelSpec(SpacetimeKind.closed(), singular_kernel_closed(1.0), 0.0, ScaleFactorModel.dust(1), GreensSupport.SYMMETRIC)
    closed = closed.with_coupling(0.5 * contraction_bound(closed))
    closed_grid = build_grid(closed.spacetime, closed.horizon, 3, 100)
    probe = operator_norm_probe(closed, closed_grid, seed=seed, check=False)
    checks.append(OracleCheck("closed_operator_norm", probe.value, probe.bound, 0.0, upper_only=True))

    mc = mc_identity_sin2(mc_samples, seed)
    expected = 8.0 * math.pi**4
    checks.append(OracleCheck("mc_identity_sin2", mc.value, expected, max(3.0 * mc.stderr, 0.01 * expected)))
    for check in checks:
        logger.info("oracle %-20s value=%.10g expected=%.10g %s", check.name, check.value, check.expected, "ok" if check.passed else "FAIL")
    return checks


__all__ = [
    "DenseSolution",
    "DenseSystem",
    "Estimate",
    "OracleCheck",
    "ProbeResult",
    "assemble_dense_system",
    "dense_linear_solve",
    "dense_operator_matrix",
    "mc_identity_sin2",
    "operator_norm_probe",
    "run_oracle_suite",
    "s3_weight_sum",
]
