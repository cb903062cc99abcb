"""
mtve: multi-time Volterra equations for two interacting scalar particles.
- Keep this file side-effect free.
- Do NOT import the numerical submodules here.
"""
from .version import VERSION

__all__ = ["VERSION"]
