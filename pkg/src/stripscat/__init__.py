"""stripscat: impedance-strip diffraction solver and verification suite."""

from .core import (
    BranchContext,
    BranchMode,
    Parity,
    ProblemConfig,
    green_kernel,
    green_kernel_dy,
    green_kernel_dyy,
    incident_field,
    k_star,
    xi,
)
from .bie import (
    Density,
    SolveDiagnostics,
    boundary_residual,
    off_strip_normal_derivative,
    off_strip_trace,
    scattered_field,
    solve_antisymmetric,
    solve_symmetric,
    strip_trace,
)

__all__ = [
    "BranchContext",
    "BranchMode",
    "Parity",
    "ProblemConfig",
    "green_kernel",
    "green_kernel_dy",
    "green_kernel_dyy",
    "incident_field",
    "k_star",
    "xi",
    "Density",
    "SolveDiagnostics",
    "boundary_residual",
    "off_strip_normal_derivative",
    "off_strip_trace",
    "scattered_field",
    "solve_antisymmetric",
    "solve_symmetric",
    "strip_trace",
]

__version__ = "0.1.0"
