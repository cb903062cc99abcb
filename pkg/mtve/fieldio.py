"""Field snapshots: a ``key: value`` text header plus a raw binary payload.

The payload is little-endian complex128 ('<c16', i.e. interleaved re/im
float64) in row-major order, η₁ outermost and x₂ innermost.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Dict, Optional, Tuple

import numpy as np

from .errors import VerificationError
from .fields import MultiTimeField, MultiTimeGrid, grid_from_descriptor
from .version import VERSION

logger = logging.getLogger(__name__)

FORMAT = "mtve-field/1"
DTYPE = "<c16"


def header_text(field: MultiTimeField, payload_name: str) -> str:
    grid = field.grid
    lines = {
        "format": FORMAT,
        "version": VERSION,
        "payload": payload_name,
        "dtype": DTYPE,
        "endianness": "little",
        "order": "eta1,x1,eta2,x2 row-major",
        "shape": ",".join(str(n) for n in grid.shape),
        "exponent": repr(float(field.exponent)),
        "grid": json.dumps(grid.descriptor(), sort_keys=True),
    }
    return "".join(f"{key}: {value}\n" for key, value in lines.items())


def write_field(field: MultiTimeField, directory: Path, stem: str) -> Tuple[Path, Path]:
    """Write ``<stem>.hdr`` and ``<stem>.bin`` into ``directory``."""

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    payload = directory / f"{stem}.bin"
    header = directory / f"{stem}.hdr"
    payload.write_bytes(np.ascontiguousarray(field.values, dtype=DTYPE).tobytes())
    header.write_text(header_text(field, payload.name), encoding="utf-8")
    logger.debug("wrote field %s (%d bytes)", payload, payload.stat().st_size)
    return header, payload


def read_header(path: Path) -> Dict[str, str]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Missing field header: {path}")
    values: Dict[str, str] = {}
    for number, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        key, sep, value = line.partition(":")
        if not sep:
            raise VerificationError(str(path), f"malformed header line {number}")
        values[key.strip()] = value.strip()
    if values.get("format") != FORMAT:
        raise VerificationError(str(path), f"unsupported field format {values.get('format')!r}")
    return values


def read_field(header_path: Path, grid: Optional[MultiTimeGrid] = None) -> MultiTimeField:
    header_path = Path(header_path)
    header = read_header(header_path)
    payload = header_path.parent / header["payload"]
    if not payload.exists():
        raise FileNotFoundError(f"Missing field payload: {payload}")
    shape = tuple(int(n) for n in header["shape"].split(","))
    raw = payload.read_bytes()
    expected = int(np.prod(shape)) * np.dtype(DTYPE).itemsize
    if len(raw) != expected:
        raise VerificationError(str(payload), f"payload has {len(raw)} bytes, header expects {expected}")
    if grid is None:
        grid = grid_from_descriptor(json.loads(header["grid"]))
    if grid.shape != shape:
        raise VerificationError(str(header_path), f"grid shape {grid.shape} does not match header shape {shape}")
    values = np.frombuffer(raw, dtype=DTYPE).reshape(shape)
    return MultiTimeField(grid, values, float(header["exponent"]))


__all__ = ["DTYPE", "FORMAT", "header_text", "read_field", "read_header", "write_field"]
