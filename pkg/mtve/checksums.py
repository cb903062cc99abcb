"""Deterministic digests for scenarios, manifests and field files."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Any, Iterable, Mapping, Tuple

import numpy as np

_CHUNK = 1 << 20


def _digest(obj: Any) -> str:
    if obj is None:
        return "null"
    if isinstance(obj, (str, int, float, bool)):
        return json.dumps(obj, sort_keys=True)
    if isinstance(obj, complex):
        return json.dumps([obj.real, obj.imag])
    if isinstance(obj, Mapping):
        items = sorted((str(k), _digest(v)) for k, v in obj.items())
        return json.dumps(items, sort_keys=True)
    if isinstance(obj, np.ndarray):
        return hashlib.sha256(np.ascontiguousarray(obj).tobytes()).hexdigest()
    if isinstance(obj, (bytes, bytearray)):
        return hashlib.sha256(obj).hexdigest()
    if isinstance(obj, Iterable):
        return json.dumps([_digest(item) for item in obj], sort_keys=True)
    return hashlib.sha256(str(obj).encode("utf-8")).hexdigest()


def payload_key(payload: Any) -> str:
    """sha256 over the canonical digest of a JSON-like payload."""

    return hashlib.sha256(_digest(payload).encode("utf-8")).hexdigest()


def text_checksum(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def file_checksum(path: Path) -> Tuple[str, int]:
    """(sha256 hex digest, byte length) of a file."""

    digest = hashlib.sha256()
    size = 0
    with Path(path).open("rb") as handle:
        for block in iter(lambda: handle.read(_CHUNK), b""):
            digest.update(block)
            size += len(block)
    return digest.hexdigest(), size


__all__ = ["file_checksum", "payload_key", "text_checksum"]
