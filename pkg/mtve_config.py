"""Runtime defaults for mtve solver runs.

This module owns ``.mtve/config.json``. It holds the numerical defaults a
scenario falls back to when it leaves a key unset: stopping rule, quadrature
resolutions, oracle sizes and worker count. A missing file is written with
defaults on first use; explicit scenario keys always win over this file.
"""

from __future__ import annotations

import copy
import json
from pathlib import Path
from typing import Any, Dict

_REPO_ROOT = Path(__file__).resolve().parent
MTVE_DIR = _REPO_ROOT / ".mtve"
CONFIG_PATH = MTVE_DIR / "config.json"

_DEFAULT_CONFIG: Dict[str, Any] = {
    "solver": {
        "tol": 1e-10,
        "max_iter": 200,
    },
    "quadrature": {
        "ball_radial": 6,
        "ball_angular": 26,
        "cone_radial": 6,
        "cone_angular": 16,
        "s3_exclusion_floor": 1e-3,
    },
    "oracle": {
        "max_unknowns": 4096,
        "mc_samples": 1_000_000,
        "probes": 32,
        "seed": 2024,
    },
    "run": {
        "threads": None,
    },
}


def defaults() -> Dict[str, Any]:
    return copy.deepcopy(_DEFAULT_CONFIG)


def _write(config: Dict[str, Any]) -> None:
    CONFIG_PATH.parent.mkdir(parents=True, exist_ok=True)
    with CONFIG_PATH.open("w", encoding="utf-8") as handle:
        json.dump(config, handle, indent=2, sort_keys=True)
        handle.write("\n")


def load_config() -> Dict[str, Any]:
    """Return the runtime configuration, creating the defaults file if needed."""

    if not CONFIG_PATH.exists():
        _write(_DEFAULT_CONFIG)
        return defaults()

    try:
        with CONFIG_PATH.open("r", encoding="utf-8") as handle:
            data = json.load(handle)
    except json.JSONDecodeError:
        # A corrupted file is replaced so the next run starts clean.
        _write(_DEFAULT_CONFIG)
        return defaults()

    if not isinstance(data, dict):
        _write(_DEFAULT_CONFIG)
        return defaults()

    merged = defaults()
    for section, values in data.items():
        if isinstance(values, dict) and isinstance(merged.get(section), dict):
            merged[section].update(values)
        else:
            merged[section] = values
    return merged


def save_config(config: Dict[str, Any]) -> None:
    _write(config)


def section(name: str) -> Dict[str, Any]:
    """Shortcut for one merged section, e.g. ``section("solver")["tol"]``."""

    return dict(load_config().get(name, {}))


__all__ = ["CONFIG_PATH", "MTVE_DIR", "defaults", "load_config", "save_config", "section"]
