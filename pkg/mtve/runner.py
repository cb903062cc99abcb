"""Scenario runs: build the model, solve, persist, export and verify.

A run directory holds ``scenario.ini`` (canonical text), ``chi`` and
``chi_free`` field snapshots, ``residuals.tsv`` and ``manifest.json``. The
manifest is written last and records size and sha256 of every other file.
"""

from __future__ import annotations

import json
import logging
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import fieldio
from .checksums import file_checksum, payload_key, text_checksum
from .errors import ModelError, VerificationError
from .fields import (
    MultiTimeField,
    MultiTimeGrid,
    ParticleField,
    build_grid,
    dalembert_free_1d,
    esu_mode_closed,
    flrw_free_from_minkowski,
    plane_wave_free,
    product_free,
    radial_wave_open,
)
from .geometry import ScaleFactorModel, SpacetimeKind, Topology
from .kernels import build_kernel
from .plotting import save_heatmap
from .quadrature import QuadratureSettings
from .scenario import Scenario, canonical_text, load_scenario, parse_scenario_text
from .solver import (
    GreensSupport,
    ModelSpec,
    SolutionReport,
    build_plan,
    contraction_bound,
    picard_solve,
    reduce_conformal,
    residual,
    unreduce_conformal,
)
from .version import VERSION

logger = logging.getLogger(__name__)

MANIFEST = "manifest.json"
SCENARIO_FILE = "scenario.ini"
RUN_FORMAT = "mtve-run/1"

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NOT_CONVERGED = 2
EXIT_VERIFY = 3


@dataclass
class RunResult:
    run_dir: Path
    manifest: Dict[str, object]
    report: SolutionReport

    @property
    def exit_code(self) -> int:
        return EXIT_OK if self.report.converged else EXIT_NOT_CONVERGED


@dataclass
class SliceExport:
    path: Path
    snaps: Dict[str, Tuple[float, float]]
    rows: int
    heatmap: Optional[Path] = None


@dataclass
class VerifyReport:
    residual: float
    recorded: float
    files: List[str] = field(default_factory=list)


# ---------------------------------------------------------------------------
# scenario -> model objects


def build_kind(scenario: Scenario) -> SpacetimeKind:
    return SpacetimeKind(Topology(scenario.model.spacetime), scenario.model.dimension)


def build_scale(scenario: Scenario, kind: SpacetimeKind) -> Optional[ScaleFactorModel]:
    name = scenario.model.scale
    if kind.topology is Topology.MINKOWSKI:
        if name != "none":
            raise ModelError("Minkowski half-space takes scale = none")
        return None
    if name == "none":
        raise ModelError(f"{kind} needs a scale-factor model (dust or radiation)")
    factory = ScaleFactorModel.dust if name == "dust" else ScaleFactorModel.radiation
    return factory(kind.curvature, scenario.model.horizon)


def build_model(scenario: Scenario) -> ModelSpec:
    kind = build_kind(scenario)
    scale = build_scale(scenario, kind)
    section = scenario.model
    kernel = build_kernel(section.kernel, {"value": section.kernel_value, "length": section.kernel_length}, scale)
    model = ModelSpec(
        spacetime=kind,
        kernel=kernel,
        coupling=section.coupling,
        scale=scale,
        greens_support=GreensSupport(section.greens),
        masses=(section.mass1, section.mass2),
        T=section.horizon if scale is None else None,
    )
    if section.coupling_fraction is not None:
        model = model.with_coupling(section.coupling_fraction * contraction_bound(model))
    return model


def build_model_grid(scenario: Scenario, model: ModelSpec) -> MultiTimeGrid:
    section = scenario.grid
    return build_grid(
        model.spacetime, model.horizon, section.time_nodes, section.space_nodes, section.box_half_width, inflate=section.inflate
    )


def _particle_free(scenario: Scenario, model: ModelSpec, grid: MultiTimeGrid, particle: int) -> ParticleField:
    free = scenario.free_field
    kind = model.spacetime
    factory = free.factory
    if factory == "constant":
        space = grid.space(particle)
        return ParticleField(grid.time, space, np.ones((grid.time.count, space.count)))
    if factory == "esu_mode":
        return esu_mode_closed(free.mode_n, free.mode_label, grid, model.scale, particle)  # type: ignore[arg-type]
    if factory == "radial_wave_open":
        return radial_wave_open(free.wave_number, grid, model.scale, particle)  # type: ignore[arg-type]
    if not kind.is_flat:
        raise ModelError(f"free field '{factory}' needs a flat spacetime")
    if factory == "gaussian":
        width, centre = free.width, free.center

        def profile(u):
            return 0.5 * np.exp(-(((u - centre) / width) ** 2))

        phi = dalembert_free_1d(profile, profile, grid, particle)
    else:
        vector = free.wave_vector_1 if particle == 1 else free.wave_vector_2
        phi = plane_wave_free(vector or (1.0,) + (0.0,) * (kind.d - 1), grid, particle)
    if kind.topology is Topology.FLAT:
        phi = flrw_free_from_minkowski(phi, model.scale, kind.d)  # type: ignore[arg-type]
    return phi


def build_free_field(scenario: Scenario, model: ModelSpec, grid: MultiTimeGrid) -> MultiTimeField:
    """The reduced free field χ_free of a scenario."""

    phi1 = _particle_free(scenario, model, grid, 1)
    phi2 = _particle_free(scenario, model, grid, 2)
    psi = product_free(phi1, phi2, grid) * scenario.free_field.amplitude
    if scenario.free_field.factory == "constant":
        return psi
    chi = reduce_conformal(psi, model, model.d)
    if chi.exponent != 0.0:
        raise ModelError(f"free field '{scenario.free_field.factory}' does not reduce to a bounded field on {model.spacetime}")
    return chi


# ---------------------------------------------------------------------------
# run


def _write_residuals(path: Path, history: Sequence[float]) -> None:
    lines = ["iteration\tincrement"] + [f"{n}\t{value!r}" for n, value in enumerate(history, start=1)]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _file_entries(run_dir: Path, names: Sequence[str]) -> Dict[str, Dict[str, object]]:
    entries: Dict[str, Dict[str, object]] = {}
    for name in names:
        digest, size = file_checksum(run_dir / name)
        entries[name] = {"sha256": digest, "bytes": size}
    return entries


def run_scenario(scenario_path, out_dir=None, *, threads: Optional[int] = None) -> RunResult:
    """Solve a scenario and persist the run; input errors raise before anything is written."""

    started = time.perf_counter()
    scenario_path = Path(scenario_path)
    scenario = load_scenario(scenario_path)
    model = build_model(scenario)
    grid = build_model_grid(scenario, model)
    chi_free = build_free_field(scenario, model, grid)
    settings = QuadratureSettings.from_config()
    run_dir = Path(out_dir) if out_dir is not None else _default_run_dir(scenario_path)

    plan = build_plan(model, grid, settings)
    solve_started = time.perf_counter()
    report = picard_solve(model, chi_free, scenario.solver.tol, scenario.solver.max_iter, plan=plan, threads=threads)
    solve_seconds = time.perf_counter() - solve_started
    recorded = residual(model, report.chi, chi_free, plan=plan, threads=threads)

    run_dir.mkdir(parents=True, exist_ok=True)
    text = canonical_text(scenario)
    (run_dir / SCENARIO_FILE).write_text(text, encoding="utf-8")
    fieldio.write_field(report.chi, run_dir, "chi")
    fieldio.write_field(chi_free, run_dir, "chi_free")
    _write_residuals(run_dir / "residuals.tsv", report.residual_history)
    names = [SCENARIO_FILE, "chi.hdr", "chi.bin", "chi_free.hdr", "chi_free.bin", "residuals.tsv"]

    for index, (eta1, eta2) in enumerate(scenario.outputs.slices):
        heatmap = run_dir / f"slice_{index}.png" if scenario.outputs.heatmap else None
        export = _export(report.chi, model, grid, run_dir / f"slice_{index}.tsv", eta=(eta1, eta2), heatmap=heatmap)
        names.append(export.path.name)
        if export.heatmap is not None:
            names.append(export.heatmap.name)

    manifest: Dict[str, object] = {
        "format": RUN_FORMAT,
        "version": VERSION,
        "scenario_checksum": text_checksum(text),
        "model": model.describe(),
        "grid": grid.descriptor(),
        "grid_key": payload_key(grid.descriptor()),
        "quadrature": asdict(settings),
        "status": "converged" if report.converged else "not-converged",
        "iterations": report.iterations,
        "residual_history": list(report.residual_history),
        "recorded_residual": recorded,
        "lambda_bound": report.lambda_bound,
        "warnings": list(report.warnings),
        "timing": {"solve_seconds": solve_seconds, "total_seconds": time.perf_counter() - started},
        "files": _file_entries(run_dir, names),
    }
    with (run_dir / MANIFEST).open("w", encoding="utf-8") as handle:
        json.dump(manifest, handle, indent=2, sort_keys=True)
        handle.write("\n")
    logger.info("run written to %s (%s, %d iterations)", run_dir, manifest["status"], report.iterations)
    return RunResult(run_dir, manifest, report)


def _default_run_dir(scenario_path: Path) -> Path:
    from .paths import ensure_directories

    return Path(ensure_directories()) / scenario_path.stem


# ---------------------------------------------------------------------------
# reloading a run


def load_manifest(run_dir) -> Dict[str, object]:
    path = Path(run_dir) / MANIFEST
    if not path.exists():
        raise VerificationError(str(path), "manifest missing")
    try:
        manifest = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise VerificationError(str(path), f"manifest is not valid JSON ({exc.msg})") from None
    if manifest.get("format") != RUN_FORMAT:
        raise VerificationError(str(path), f"unsupported run format {manifest.get('format')!r}")
    return manifest


def _reload(run_dir: Path, manifest: Dict[str, object]):
    scenario_path = run_dir / SCENARIO_FILE
    if not scenario_path.exists():
        raise VerificationError(str(scenario_path), "scenario missing")
    scenario = parse_scenario_text(scenario_path.read_text(encoding="utf-8"), str(scenario_path))
    model = build_model(scenario)
    grid = build_model_grid(scenario, model)
    settings = QuadratureSettings(**manifest.get("quadrature", {}))  # type: ignore[arg-type]
    return scenario, model, grid, settings


def verify_run(run_dir) -> VerifyReport:
    """Check every recorded file and recompute the residual from persisted data."""

    run_dir = Path(run_dir)
    manifest = load_manifest(run_dir)
    files: Dict[str, Dict[str, object]] = manifest.get("files", {})  # type: ignore[assignment]
    for name, entry in sorted(files.items()):
        path = run_dir / name
        if not path.exists():
            raise VerificationError(name, "file missing")
        digest, size = file_checksum(path)
        if size != entry["bytes"]:
            raise VerificationError(name, f"size {size} bytes, manifest records {entry['bytes']}")
        if digest != entry["sha256"]:
            raise VerificationError(name, "sha256 checksum mismatch")
    text = (run_dir / SCENARIO_FILE).read_text(encoding="utf-8")
    if text_checksum(text) != manifest.get("scenario_checksum"):
        raise VerificationError(SCENARIO_FILE, "scenario checksum mismatch")

    _scenario, model, grid, settings = _reload(run_dir, manifest)
    if payload_key(grid.descriptor()) != manifest.get("grid_key"):
        raise VerificationError(MANIFEST, "grid key does not match the grid rebuilt from scenario.ini")
    chi = fieldio.read_field(run_dir / "chi.hdr", grid)
    chi_free = fieldio.read_field(run_dir / "chi_free.hdr", grid)
    plan = build_plan(model, grid, settings)
    value = residual(model, chi, chi_free, plan=plan)
    recorded = float(manifest["recorded_residual"])  # type: ignore[arg-type]
    if abs(value - recorded) > 1e-12 * max(1.0, abs(recorded)):
        raise VerificationError("residual", f"recomputed {value!r}, manifest records {recorded!r}")
    logger.info("verified %s: %d files, residual %.3e", run_dir, len(files), value)
    return VerifyReport(value, recorded, sorted(files))


# ---------------------------------------------------------------------------
# slices


def _fmt(value: float) -> str:
    return "nan" if not math.isfinite(value) else f"{value:.17g}"


def _export(
    chi: MultiTimeField,
    model: ModelSpec,
    grid: MultiTimeGrid,
    out_path: Path,
    *,
    eta: Optional[Tuple[float, float]] = None,
    x: Optional[Tuple[Sequence[float], Sequence[float]]] = None,
    heatmap: Optional[Path] = None,
) -> SliceExport:
    if (eta is None) == (x is None):
        raise ModelError("export a slice at fixed (eta1, eta2) or at fixed (x1, x2)")
    psi = unreduce_conformal(chi, model, model.d).materialize()
    snaps: Dict[str, Tuple[float, float]] = {}
    lines: List[str] = []
    if eta is not None:
        i1, d1 = grid.time.snap(eta[0])
        i2, d2 = grid.time.snap(eta[1])
        snaps["eta1"] = (float(grid.time.nodes[i1]), d1)
        snaps["eta2"] = (float(grid.time.nodes[i2]), d2)
        x1 = grid.space1.nodes
        x2 = grid.space2.nodes
        coords = [f"x1_{k}" for k in range(x1.shape[1])] + [f"x2_{k}" for k in range(x2.shape[1])]
        block = chi.values[i1, :, i2, :]
        psi_block = psi[i1, :, i2, :]
        rows = [(list(x1[a]) + list(x2[b]), block[a, b], psi_block[a, b]) for a in range(x1.shape[0]) for b in range(x2.shape[0])]
    else:
        a, da = grid.space1.snap(x[0])  # type: ignore[index]
        b, db = grid.space2.snap(x[1])  # type: ignore[index]
        snaps["x1"] = (float(np.linalg.norm(grid.space1.nodes[a])), da)
        snaps["x2"] = (float(np.linalg.norm(grid.space2.nodes[b])), db)
        coords = ["eta1", "eta2"]
        block = chi.values[:, a, :, b]
        psi_block = psi[:, a, :, b]
        t = grid.time.nodes
        rows = [([t[i], t[j]], block[i, j], psi_block[i, j]) for i in range(t.size) for j in range(t.size)]
    for name, (node, distance) in snaps.items():
        lines.append(f"# snap {name} -> {node!r} (distance {distance:.6g})")
        if distance > 0.0:
            logger.info("slice %s snapped to node %.6g (distance %.3g)", name, node, distance)
    lines.append("\t".join(coords + ["chi_re", "chi_im", "chi_abs", "psi_re", "psi_im", "psi_abs"]))
    for coordinates, value, psi_value in rows:
        cells = [_fmt(float(c)) for c in coordinates]
        cells += [_fmt(value.real), _fmt(value.imag), _fmt(abs(value))]
        cells += [_fmt(psi_value.real), _fmt(psi_value.imag), _fmt(abs(psi_value))]
        lines.append("\t".join(cells))
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    image = save_heatmap(np.abs(block), heatmap) if heatmap is not None else None
    return SliceExport(out_path, snaps, len(rows), image)


def export_slice(
    run_dir,
    out_path,
    *,
    eta: Optional[Tuple[float, float]] = None,
    x: Optional[Tuple[Sequence[float], Sequence[float]]] = None,
    heatmap=None,
) -> SliceExport:
    """Tabulate χ and ψ over the free pair of coordinates of a finished run."""

    run_dir = Path(run_dir)
    manifest = load_manifest(run_dir)
    _scenario, model, grid, _settings = _reload(run_dir, manifest)
    chi = fieldio.read_field(run_dir / "chi.hdr", grid)
    return _export(chi, model, grid, Path(out_path), eta=eta, x=x, heatmap=Path(heatmap) if heatmap else None)


__all__ = [
    "EXIT_INPUT",
    "EXIT_NOT_CONVERGED",
    "EXIT_OK",
    "EXIT_VERIFY",
    "RunResult",
    "SliceExport",
    "VerifyReport",
    "build_free_field",
    "build_model",
    "build_model_grid",
    "export_slice",
    "load_manifest",
    "run_scenario",
    "verify_run",
]
