"""Scenario files: INI text with [model], [grid], [free_field], [solver] and [outputs].

Parsing is strict: unknown sections or keys, malformed values and unknown
catalogue names raise ``ScenarioError`` carrying the offending line and
field. ``canonical_text`` renders a parsed scenario in a fixed order, and
parsing that text reproduces it exactly.
"""

from __future__ import annotations

import configparser
import logging
from dataclasses import MISSING, dataclass, field, fields
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

from .errors import ScenarioError
from .fields import harmonic_labels
from .kernels import list_kernels

logger = logging.getLogger(__name__)

SPACETIMES = ("minkowski", "flat", "open", "closed")
SCALES = ("none", "dust", "radiation")
GREENS = ("retarded", "symmetric")
FACTORIES = ("plane_wave", "gaussian", "constant", "esu_mode", "radial_wave_open")


@dataclass(frozen=True)
class ModelSection:
    spacetime: str
    dimension: int = 3
    scale: str = "none"
    horizon: Optional[float] = None
    greens: str = "retarded"
    kernel: str = "constant"
    kernel_value: complex = 1.0
    kernel_length: float = 1.0
    coupling: complex = 0.0
    coupling_fraction: Optional[float] = None
    mass1: float = 0.0
    mass2: float = 0.0


@dataclass(frozen=True)
class GridSection:
    time_nodes: int
    space_nodes: int
    box_half_width: float = 1.0
    inflate: bool = True


@dataclass(frozen=True)
class FreeFieldSection:
    factory: str
    amplitude: complex = 1.0
    wave_vector_1: Tuple[float, ...] = ()
    wave_vector_2: Tuple[float, ...] = ()
    width: float = 0.3
    center: float = 0.0
    wave_number: float = 1.0
    mode_n: int = 0
    mode_label: str = "0"


@dataclass(frozen=True)
class SolverSection:
    tol: Optional[float] = None
    max_iter: Optional[int] = None


@dataclass(frozen=True)
class OutputsSection:
    slices: Tuple[Tuple[float, float], ...] = ()
    heatmap: bool = False


@dataclass(frozen=True)
class Scenario:
    model: ModelSection
    grid: GridSection
    free_field: FreeFieldSection
    solver: SolverSection = field(default_factory=SolverSection)
    outputs: OutputsSection = field(default_factory=OutputsSection)
    source: Optional[str] = None


_SECTIONS = {
    "model": ModelSection,
    "grid": GridSection,
    "free_field": FreeFieldSection,
    "solver": SolverSection,
    "outputs": OutputsSection,
}
_REQUIRED = ("model", "grid", "free_field")


# ---------------------------------------------------------------------------
# value codecs


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in {"1", "true", "yes", "on"}:
        return True
    if lowered in {"0", "false", "no", "off"}:
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _parse_vector(text: str) -> Tuple[float, ...]:
    return tuple(float(part) for part in text.split(",") if part.strip())


def _parse_slices(text: str) -> Tuple[Tuple[float, float], ...]:
    pairs = []
    for chunk in text.split(";"):
        if not chunk.strip():
            continue
        values = _parse_vector(chunk)
        if len(values) != 2:
            raise ValueError(f"slice '{chunk.strip()}' needs two times eta1,eta2")
        pairs.append((values[0], values[1]))
    return tuple(pairs)


def _format_complex(value: complex) -> str:
    value = complex(value)
    if value.imag == 0.0:
        return repr(value.real)
    return repr(value).strip("()")


def _format(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, complex):
        return _format_complex(value)
    if isinstance(value, tuple):
        if value and isinstance(value[0], tuple):
            return "; ".join(",".join(repr(float(v)) for v in pair) for pair in value)
        return ",".join(repr(float(v)) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


_PARSERS: Dict[str, Callable[[str], object]] = {
    "int": int,
    "float": float,
    "complex": lambda text: complex(text.replace(" ", "")),
    "bool": _parse_bool,
    "str": lambda text: text.strip(),
    "vector": _parse_vector,
    "slices": _parse_slices,
}

_KINDS: Dict[str, Dict[str, str]] = {
    "model": {
        "spacetime": "str",
        "dimension": "int",
        "scale": "str",
        "horizon": "float",
        "greens": "str",
        "kernel": "str",
        "kernel_value": "complex",
        "kernel_length": "float",
        "coupling": "complex",
        "coupling_fraction": "float",
        "mass1": "float",
        "mass2": "float",
    },
    "grid": {"time_nodes": "int", "space_nodes": "int", "box_half_width": "float", "inflate": "bool"},
    "free_field": {
        "factory": "str",
        "amplitude": "complex",
        "wave_vector_1": "vector",
        "wave_vector_2": "vector",
        "width": "float",
        "center": "float",
        "wave_number": "float",
        "mode_n": "int",
        "mode_label": "str",
    },
    "solver": {"tol": "float", "max_iter": "int"},
    "outputs": {"slices": "slices", "heatmap": "bool"},
}


def _line_index(text: str) -> Dict[Tuple[Optional[str], Optional[str]], int]:
    """Line numbers of section headers (key None) and keys."""

    index: Dict[Tuple[Optional[str], Optional[str]], int] = {}
    section: Optional[str] = None
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            index.setdefault((section, None), number)
            continue
        for sep in ("=", ":"):
            if sep in line:
                index.setdefault((section, line.split(sep, 1)[0].strip().lower()), number)
                break
    return index


def _check_choice(value: str, choices, section: str, key: str, lines) -> None:
    if value not in choices:
        raise ScenarioError(f"unknown {key} '{value}' (known: {', '.join(choices)})", line=lines.get((section, key)), field=f"{section}.{key}")


def parse_scenario_text(text: str, source: Optional[str] = None) -> Scenario:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    try:
        parser.read_string(text, source=source or "<scenario>")
    except configparser.DuplicateOptionError as exc:
        raise ScenarioError(f"duplicate key '{exc.option}'", line=exc.lineno, field=f"{exc.section}.{exc.option}") from None
    except configparser.DuplicateSectionError as exc:
        raise ScenarioError(f"duplicate section '{exc.section}'", line=exc.lineno, field=exc.section) from None
    except configparser.MissingSectionHeaderError as exc:
        raise ScenarioError("content before the first [section] header", line=exc.lineno) from None
    except configparser.ParsingError as exc:
        line = exc.errors[0][0] if exc.errors else None
        raise ScenarioError("malformed line", line=line) from None

    lines = _line_index(text)
    for section in parser.sections():
        if section not in _SECTIONS:
            raise ScenarioError(f"unknown section [{section}]", line=lines.get((section, None)), field=section)
    for section in _REQUIRED:
        if not parser.has_section(section):
            raise ScenarioError(f"missing section [{section}]", field=section)

    built = {}
    for section, cls in _SECTIONS.items():
        values = {}
        if parser.has_section(section):
            for key, raw in parser.items(section):
                kind = _KINDS[section].get(key)
                if kind is None:
                    raise ScenarioError(f"unknown key '{key}'", line=lines.get((section, key)), field=f"{section}.{key}")
                try:
                    values[key] = _PARSERS[kind](raw)
                except ValueError as exc:
                    raise ScenarioError(f"bad value {raw!r}: {exc}", line=lines.get((section, key)), field=f"{section}.{key}") from None
        try:
            built[section] = cls(**values)
        except TypeError:
            missing = [f.name for f in fields(cls) if f.name not in values and f.default is MISSING and f.default_factory is MISSING]
            raise ScenarioError(f"missing key(s) {', '.join(missing) or '?'}", line=lines.get((section, None)), field=section) from None

    model: ModelSection = built["model"]
    _check_choice(model.spacetime, SPACETIMES, "model", "spacetime", lines)
    _check_choice(model.scale, SCALES, "model", "scale", lines)
    _check_choice(model.greens, GREENS, "model", "greens", lines)
    _check_choice(model.kernel, list_kernels(), "model", "kernel", lines)
    free: FreeFieldSection = built["free_field"]
    _check_choice(free.factory, FACTORIES, "free_field", "factory", lines)
    if free.factory == "esu_mode":
        _check_choice(free.mode_label, harmonic_labels(), "free_field", "mode_label", lines)
    grid: GridSection = built["grid"]
    if grid.time_nodes < 2:
        raise ScenarioError("time_nodes must be at least 2", line=lines.get(("grid", "time_nodes")), field="grid.time_nodes")
    if grid.space_nodes < 2:
        raise ScenarioError("space_nodes must be at least 2", line=lines.get(("grid", "space_nodes")), field="grid.space_nodes")
    solver: SolverSection = built["solver"]
    if solver.tol is not None and solver.tol <= 0:
        raise ScenarioError("tol must be positive", line=lines.get(("solver", "tol")), field="solver.tol")
    if solver.max_iter is not None and solver.max_iter < 1:
        raise ScenarioError("max_iter must be at least 1", line=lines.get(("solver", "max_iter")), field="solver.max_iter")
    return Scenario(model, grid, free, solver, built["outputs"], source)


def load_scenario(path) -> Scenario:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Missing scenario file: {path}")
    scenario = parse_scenario_text(path.read_text(encoding="utf-8"), str(path))
    logger.debug("loaded scenario %s", path)
    return scenario


def canonical_text(scenario: Scenario) -> str:
    """Fixed-order rendering; every key is written, unset optionals are omitted."""

    out: List[str] = []
    for section in _SECTIONS:
        part = getattr(scenario, section)
        out.append(f"[{section}]")
        for f in fields(part):
            value = getattr(part, f.name)
            if value is None or value == ():
                continue
            out.append(f"{f.name} = {_format(value)}")
        out.append("")
    return "\n".join(out)


__all__ = [
    "FACTORIES",
    "FreeFieldSection",
    "GridSection",
    "ModelSection",
    "OutputsSection",
    "Scenario",
    "SolverSection",
    "canonical_text",
    "load_scenario",
    "parse_scenario_text",
]
