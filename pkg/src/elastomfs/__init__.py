"""Time-harmonic elastic scattering by the method of fundamental solutions.

The fundamental solution of the Navier-Lame system is evaluated through a
separated spherical-wave expansion, which makes collocation matrices cheap
to assemble for exterior problems.
"""

from .addition_theorem import (
    ElasticParameters,
    fundamental_solution,
    fundamental_solution_batch,
    fundamental_solution_matrix,
    radial_factors,
    truncation_gap,
    wavenumbers,
)
from .exceptions import ConfigError, DomainError, SeparationError, SingularSystemError
from .experiment import ExperimentConfig, parse_config, run_experiment
from .mfs import (
    MFSExteriorSolver,
    cube_boundary_lattice,
    error_metrics,
    evaluation_grid,
    homothetic_basis,
    point_source_data,
)
from .reference_oracles import closed_form_fundamental, vector_wave_fundamental

__all__ = [
    "ElasticParameters",
    "wavenumbers",
    "radial_factors",
    "fundamental_solution",
    "fundamental_solution_batch",
    "fundamental_solution_matrix",
    "truncation_gap",
    "closed_form_fundamental",
    "vector_wave_fundamental",
    "MFSExteriorSolver",
    "cube_boundary_lattice",
    "homothetic_basis",
    "evaluation_grid",
    "point_source_data",
    "error_metrics",
    "ExperimentConfig",
    "parse_config",
    "run_experiment",
    "DomainError",
    "SeparationError",
    "ConfigError",
    "SingularSystemError",
]

__version__ = "0.1.0"
