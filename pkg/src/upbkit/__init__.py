"""Strongly nonlocal unextendible product bases in tripartite systems."""

from .constructions import (
    ProductState,
    StateLabel,
    StateSet,
    build_334,
    build_layered,
    complete_basis,
    grid,
    removed_states,
    render_grid,
    shifts_upb,
)
from .linalg import DEFAULT_TOL, Bipartition, ToleranceConfig

__version__ = "0.1.0"

__all__ = [
    "Bipartition",
    "DEFAULT_TOL",
    "ProductState",
    "StateLabel",
    "StateSet",
    "ToleranceConfig",
    "build_334",
    "build_layered",
    "complete_basis",
    "grid",
    "removed_states",
    "render_grid",
    "shifts_upb",
]
