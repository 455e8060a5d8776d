"""Kerr-de Sitter trapping certification and quasinormal modes."""

from ._kds import (
    KdsError,
    Geometry,
    SpacetimeParams,
    StationaryFrame,
    __version__,
    beta_from_surface_gravity,
    beta_threshold,
    ergoregion_components,
    fredholm_window,
    run_command,
    solve_qnm,
    t_norm,
    trapping_scan,
)

__all__ = [
    "KdsError",
    "Geometry",
    "SpacetimeParams",
    "StationaryFrame",
    "__version__",
    "beta_from_surface_gravity",
    "beta_threshold",
    "ergoregion_components",
    "fredholm_window",
    "run_command",
    "solve_qnm",
    "t_norm",
    "trapping_scan",
]
