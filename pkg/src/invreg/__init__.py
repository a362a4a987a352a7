"""Planar invertible regression toolkit.

Estimates a bi-Lipschitz invertible map on [-1,1]^2 from noisy samples
by composing a coherent rotation with a piecewise-affine interpolation
of a pilot regressor, evaluates forward and inverse L2 risks, and ships
a minimax lower-bound laboratory plus an experiment CLI.
"""

from .estimator import (
    FALLBACK,
    InvertibleEstimator,
    QuadMesh,
    SquareGrid,
    boundary_project,
    build_mesh,
    evaluate,
    fit,
    fit_from_pilot,
    g_dagger,
    g_hat,
    grid_resolution,
    invert,
    non_invertible_measure,
)
from .maps import (
    BumpParams,
    InvertibilityReport,
    LevelSet,
    PlanarMap,
    check_invertible_on_grid,
    chi_theta,
    family_map,
    identity_map,
    level_set,
    omega,
    omega_inv,
    pyramid_phi,
    random_bump_params,
    swirl_truth,
    theta_angle,
    wrap,
    xi_theta,
)
from .minimax import (
    BoundReport,
    PackingCode,
    kl_gaussian_model,
    lower_bound_report,
    separation_l2,
    single_bump_mass,
    vg_code,
)
from .pilot import knn_fit, sawtooth_estimator
from .risk import (
    RiskReport,
    forward_l2_risk,
    inverse_risk,
    levelset_lipschitz_diag,
    sup_norm_error,
)
from .rotation import (
    CoherentRotation,
    RotationParams,
    corner_angles,
    estimate_rotation,
    exact_rotation,
    rho,
    rho_inv,
    tau,
    tau_inv,
)
from .synth import Dataset, DatasetFormatError, read_csv, sample_dataset, write_csv

__version__ = "0.1.0"

__all__ = [
    "BoundReport",
    "BumpParams",
    "CoherentRotation",
    "Dataset",
    "DatasetFormatError",
    "FALLBACK",
    "InvertibilityReport",
    "InvertibleEstimator",
    "LevelSet",
    "PackingCode",
    "PlanarMap",
    "QuadMesh",
    "RiskReport",
    "RotationParams",
    "SquareGrid",
    "boundary_project",
    "build_mesh",
    "check_invertible_on_grid",
    "chi_theta",
    "corner_angles",
    "estimate_rotation",
    "evaluate",
    "exact_rotation",
    "family_map",
    "fit",
    "fit_from_pilot",
    "forward_l2_risk",
    "g_dagger",
    "g_hat",
    "grid_resolution",
    "identity_map",
    "inverse_risk",
    "invert",
    "kl_gaussian_model",
    "knn_fit",
    "level_set",
    "levelset_lipschitz_diag",
    "lower_bound_report",
    "non_invertible_measure",
    "omega",
    "omega_inv",
    "pyramid_phi",
    "random_bump_params",
    "read_csv",
    "rho",
    "rho_inv",
    "sample_dataset",
    "sawtooth_estimator",
    "separation_l2",
    "single_bump_mass",
    "sup_norm_error",
    "swirl_truth",
    "tau",
    "tau_inv",
    "theta_angle",
    "vg_code",
    "wrap",
    "write_csv",
    "xi_theta",
]
