"""Forward and inverse source problems for the subdiffusion equation.

The state solves ``D_t^rho u + A u = g(t) f`` with ``u(0) = phi`` on the
eigenbasis of a positive self-adjoint operator ``A``. Given the time average
``psi = int_0^T u dt`` the package recovers the spatial source ``f`` mode by
mode. Modes that the data cannot determine are reported together with the
condition under which such data are consistent.
"""

from __future__ import annotations

from subdiff_inverse.forward_solver import (
    ForwardProblem,
    TrajectorySample,
    caputo_l1,
    integrate_trajectory,
    residual,
    residual_orders,
    solve_forward,
)
from subdiff_inverse.inverse_solver import (
    InverseProblem,
    InverseSolution,
    ModePartition,
    check_solvability,
    partition_modes,
    reconstruct_u,
    solve_inverse,
)
from subdiff_inverse.kernel import (
    QuadratureRule,
    TimeProfile,
    convolve_source,
    kernel_bound_stats,
    p_k,
    p_k_many,
    profile_from_catalog,
    sampled_profile,
)
from subdiff_inverse.spectral_space import (
    SpectralOperator,
    SpectralVector,
    dirichlet_laplacian_1d,
    project,
    reconstruct,
)
from subdiff_inverse.special_functions import (
    AccuracyWarning,
    MLParams,
    mittag_leffler,
    ml_eval,
)

__all__ = [
    "AccuracyWarning",
    "ForwardProblem",
    "InverseProblem",
    "InverseSolution",
    "MLParams",
    "ModePartition",
    "QuadratureRule",
    "SpectralOperator",
    "SpectralVector",
    "TimeProfile",
    "TrajectorySample",
    "caputo_l1",
    "check_solvability",
    "convolve_source",
    "dirichlet_laplacian_1d",
    "integrate_trajectory",
    "kernel_bound_stats",
    "mittag_leffler",
    "ml_eval",
    "p_k",
    "p_k_many",
    "partition_modes",
    "profile_from_catalog",
    "project",
    "reconstruct",
    "reconstruct_u",
    "residual",
    "residual_orders",
    "sampled_profile",
    "solve_forward",
    "solve_inverse",
]
