"""Orbital-angular-momentum entanglement decay in Kolmogorov turbulence."""

from ._oamturb import (
    __version__,
    ResolutionError,
    concurrence,
    crosstalk_matrix,
    decay_distance,
    fried_from_strength,
    fried_parameter,
    kolmogorov_structure,
    lg_mode,
    phase_screen_pair,
    project_to_physical,
    run_sweep,
    scintillation_strength,
    structure_function,
)

__all__ = [
    "__version__",
    "ResolutionError",
    "concurrence",
    "crosstalk_matrix",
    "decay_distance",
    "fried_from_strength",
    "fried_parameter",
    "kolmogorov_structure",
    "lg_mode",
    "phase_screen_pair",
    "project_to_physical",
    "run_sweep",
    "scintillation_strength",
    "structure_function",
]
