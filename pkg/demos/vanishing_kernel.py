"""
A source profile with a vanishing kernel
========================================

If ``g`` changes sign, the kernel ``p_k`` of some mode can vanish. That mode
of ``f`` is then invisible in the data: the source is determined only up to
a free value, and the data must satisfy a consistency condition. We build
``g(t) = 1 + beta e^t`` with ``beta`` chosen so that ``p_3 = 0`` exactly.
"""

from __future__ import annotations

import numpy as np

from subdiff_inverse import (
    ForwardProblem,
    InverseProblem,
    SpectralVector,
    dirichlet_laplacian_1d,
    integrate_trajectory,
    p_k_many,
    partition_modes,
    profile_from_catalog,
    solve_inverse,
)
from subdiff_inverse.inverse_solver import diagnostics_report, forward_problem
from subdiff_inverse.kernel import affine_exp_beta

rho, T, K, k0 = 1.0, 1.0, 8, 3
op = dirichlet_laplacian_1d(1.0, K)
beta = affine_exp_beta(rho, float(op.eigenvalues[k0 - 1]), T)
g = profile_from_catalog("affine_exp", T, beta=beta)
p = p_k_many(rho, op.eigenvalues, g, T)
print(f"beta = {beta:.12f}")
print("p_k =", np.array2string(p, precision=3))

# %%
# Data generated by the forward solver are consistent, so the solver
# returns a family of sources. Each choice of the free value reproduces the
# same ``psi``.

k = np.arange(1, K + 1)
phi = SpectralVector(1.0 / k**4)
f = SpectralVector((-1.0) ** k / k**4)
psi = integrate_trajectory(ForwardProblem(rho, T, op, phi, f, g), p=p)
problem = InverseProblem(rho, T, op, phi, psi, g)
partition = partition_modes(problem, p=p)
print("modes with vanishing kernel:", partition.b_zero)

for free in (0.0, 2.0):
    sol = solve_inverse(problem, partition, {k0: free})
    again = integrate_trajectory(forward_problem(problem, sol), p=p)
    print(f"f_{k0} = {free}: max |psi - psi(f)| = "
          f"{np.max(np.abs(again.coeffs - psi.coeffs)):.1e}")

# %%
# Changing ``psi_3`` alone breaks the consistency condition. The solver
# reports the size of the violation instead of returning a source.

bad = psi + SpectralVector.unit(K, k0, 1e-3)
sol = solve_inverse(InverseProblem(rho, T, op, phi, bad, g), partition)
print(f"solvable = {sol.solvable}, violation = {sol.violation_report}")
print()
print(diagnostics_report(problem, solve_inverse(problem, partition)))

# vim: foldmethod=marker
