import os

ROOT = os.path.normpath(os.path.join(os.path.dirname(__file__), ".."))
CONFIGS = os.path.join(ROOT, "configs")
LOGS = os.path.join(ROOT, "logs")


def outputs_dir() -> str:
    """Default root for run directories (``MTVE_OUTPUTS_DIR`` overrides)."""

    return os.getenv("MTVE_OUTPUTS_DIR", os.path.join(ROOT, "outputs"))


def ensure_directories() -> str:
    """Create the outputs root and return it."""

    path = outputs_dir()
    os.makedirs(path, exist_ok=True)
    return path


def resolve_scenario(name: str) -> str:
    """Return ``name`` if it exists, else look it up under ``configs/``."""

    if os.path.exists(name):
        return name
    candidate = os.path.join(CONFIGS, name)
    if not candidate.endswith(".ini"):
        candidate += ".ini"
    return candidate


__all__ = ["CONFIGS", "LOGS", "ROOT", "ensure_directories", "outputs_dir", "resolve_scenario"]
