"""Electromagnetic waveguide modes and modal Dirichlet-to-Neumann operators."""

from ._core import (
    CutoffError,
    DtnMatrix,
    IoError,
    Materials,
    Mesh,
    Mode,
    Solution,
    SolverError,
    ValidationError,
    WgmError,
    convergence,
    import_dtn,
    parse_dtn,
    rect_beta_sq,
    rect_modes,
    solve,
)

__all__ = [
    "CutoffError",
    "DtnMatrix",
    "IoError",
    "Materials",
    "Mesh",
    "Mode",
    "Solution",
    "SolverError",
    "ValidationError",
    "WgmError",
    "convergence",
    "import_dtn",
    "parse_dtn",
    "rect_beta_sq",
    "rect_modes",
    "solve",
]
