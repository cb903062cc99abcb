"""PNG heatmaps of exported slices."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence, Tuple

import numpy as np
from PIL import Image

# dark blue -> teal -> yellow
_STOPS: Sequence[Tuple[float, Tuple[int, int, int]]] = (
    (0.0, (20, 24, 82)),
    (0.5, (33, 145, 140)),
    (1.0, (253, 231, 37)),
)


def _colorize(unit: np.ndarray) -> np.ndarray:
    positions = np.array([p for p, _ in _STOPS])
    colors = np.array([c for _, c in _STOPS], dtype=float)
    rgb = np.stack([np.interp(unit, positions, colors[:, channel]) for channel in range(3)], axis=-1)
    return np.clip(np.rint(rgb), 0, 255).astype(np.uint8)


def heatmap_image(values: np.ndarray, *, cell: int = 8) -> Image.Image:
    """Image of a real 2-D array; NaN cells are drawn black, rows run top to bottom."""

    data = np.asarray(values, dtype=float)
    if data.ndim != 2:
        raise ValueError(f"heatmaps need a 2-D array, got shape {data.shape}")
    finite = np.isfinite(data)
    lo = float(np.min(data[finite])) if finite.any() else 0.0
    hi = float(np.max(data[finite])) if finite.any() else 1.0
    span = hi - lo if hi > lo else 1.0
    unit = np.where(finite, (np.where(finite, data, lo) - lo) / span, 0.0)
    rgb = _colorize(unit)
    rgb[~finite] = 0
    image = Image.fromarray(rgb)
    return image.resize((data.shape[1] * cell, data.shape[0] * cell), Image.NEAREST)


def save_heatmap(values: np.ndarray, path: Path, *, cell: int = 8) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    heatmap_image(values, cell=cell).save(path, format="PNG")
    return path


__all__ = ["heatmap_image", "save_heatmap"]
