"""Data-driven reachability with matrix zonotope model sets.

Three model representations are available: the plain matrix zonotope (MZ),
the constrained matrix zonotope (CMZ) that keeps the data constraints, and
the nullspace matrix zonotope (NMZ), an unconstrained over-approximation of
the CMZ with far fewer generators.
"""

from .bounds import cmz_worst_case_bound, mz_vertex_bound, nmz_bound, scaling_sweep
from .identify import (
    NoiseModel,
    TrajectoryData,
    build_cmz_model_set,
    build_data_matrices,
    build_mz_model_set,
    simulate_trajectories,
)
from .nmz import nullspace_matrix_zonotope
from .reach import METHODS, ReachConfig, containment_audit, run_methods
from .setrep import (
    ConstrainedMatrixZonotope,
    ConstrainedZonotope,
    Interval,
    MatrixZonotope,
    Zonotope,
)

__version__ = "0.1.0"

__all__ = [
    "METHODS",
    "ConstrainedMatrixZonotope",
    "ConstrainedZonotope",
    "Interval",
    "MatrixZonotope",
    "NoiseModel",
    "ReachConfig",
    "TrajectoryData",
    "Zonotope",
    "build_cmz_model_set",
    "build_data_matrices",
    "build_mz_model_set",
    "cmz_worst_case_bound",
    "containment_audit",
    "mz_vertex_bound",
    "nmz_bound",
    "nullspace_matrix_zonotope",
    "run_methods",
    "scaling_sweep",
    "simulate_trajectories",
]
