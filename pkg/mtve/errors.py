"""Exception types raised across the mtve package.

Each class also derives from the builtin callers would naturally catch
(``ValueError`` for bad input, ``RuntimeError`` for failures during a run).
"""

from __future__ import annotations

from typing import Optional


class MtveError(Exception):
    """Base class for every error raised by mtve."""


class DomainError(MtveError, ValueError):
    """An argument lies outside the domain of a geometric or analytic map."""


class ModelError(MtveError, ValueError):
    """A model specification violates one of the model rules."""

    def __init__(self, rule: str) -> None:
        super().__init__(rule)
        self.rule = rule


class GridMismatchError(MtveError, ValueError):
    """Two fields (or a field and a model) live on incompatible grids."""


class ScenarioError(MtveError, ValueError):
    def __init__(self, message: str, *, line: Optional[int] = None, field: Optional[str] = None) -> None:
        location = []
        if line is not None:
            location.append(f"line {line}")
        if field:
            location.append(f"field '{field}'")
        text = f"{message} ({', '.join(location)})" if location else message
        super().__init__(text)
        self.line = line
        self.field = field


class DivergenceError(MtveError, RuntimeError):
    def __init__(self, iteration: int, message: str = "non-finite values encountered") -> None:
        super().__init__(f"{message} at iteration {iteration}")
        self.iteration = iteration


class VerificationError(MtveError, RuntimeError):
    def __init__(self, path: str, message: str) -> None:
        super().__init__(f"{path}: {message}")
        self.path = path


__all__ = [
    "DivergenceError",
    "DomainError",
    "GridMismatchError",
    "ModelError",
    "MtveError",
    "ScenarioError",
    "VerificationError",
]
