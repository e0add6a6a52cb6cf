"""P1 finite elements for Poisson on meshes with sliver cells.

Two schemes are available: the standard Galerkin method and a stabilized
method that extends the degenerate cell's polynomial from its neighbour and
penalizes the gradient jump across the shared facet.
"""

from ._core import (
    DEFAULT_C0,
    DEFAULT_MAX_EXTENDED_CELLS,
    DENSE_LADDER,
    SPARSE_LADDER,
    IoError,
    Mesh,
    SolverError,
    ValidationError,
    build_mesh,
    condition_number,
    convergence_rates,
    load_mesh,
    solve,
    study,
    system_matrix,
)

__all__ = [
    "DEFAULT_C0",
    "DEFAULT_MAX_EXTENDED_CELLS",
    "DENSE_LADDER",
    "SPARSE_LADDER",
    "IoError",
    "Mesh",
    "SolverError",
    "ValidationError",
    "build_mesh",
    "condition_number",
    "convergence_rates",
    "load_mesh",
    "solve",
    "study",
    "system_matrix",
]
