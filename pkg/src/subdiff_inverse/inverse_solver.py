"""Inverse source problem: recover ``f`` from ``int_0^T u(t) dt = psi``.

Integrating the mode equations over ``[0, T]`` gives, for every ``k``,

.. math::

    f_k \\, p_{k,\\rho}(T) = \\psi_k - \\varphi_k T E_{\\rho,2}(-\\lambda_k T^\\rho).

Modes with a non-vanishing kernel determine ``f_k`` uniquely. Modes whose
kernel vanishes (possible only when ``g`` changes sign) impose the
solvability condition ``psi_k = phi_k T E_{rho,2}(-lambda_k T^rho)`` and leave
``f_k`` free.
"""

from __future__ import annotations

import csv
import logging
import math
import warnings
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from subdiff_inverse.forward_solver import (
    ForwardProblem,
    TrajectorySample,
    default_times,
    solve_forward,
)
from subdiff_inverse.kernel import (
    DEFAULT_RULE,
    KernelBoundStats,
    QuadratureRule,
    TimeProfile,
    convolve_source,
    kernel_bound_stats,
    p_k_many,
    zero_threshold,
)
from subdiff_inverse.spectral_space import (
    SpectralOperator,
    SpectralVector,
    check_domain_membership,
    domain_tail_ratio,
)
from subdiff_inverse.special_functions import mittag_leffler

log = logging.getLogger(__name__)

__all__ = [
    "InverseProblem",
    "ModePartition",
    "SolvabilityEntry",
    "InverseSolution",
    "partition_modes",
    "check_solvability",
    "default_tol_solv",
    "solve_inverse",
    "reconstruct_u",
    "forward_problem",
    "write_solution_csv",
    "read_solution_csv",
    "diagnostics_report",
]

DEFAULT_EPS_B = 1.0e-9


# {{{ problem

@dataclass(frozen=True)
class InverseProblem:
    """Data ``(rho, T, A, g, phi, psi)`` of the inverse problem."""

    rho: float
    T: float
    operator: SpectralOperator
    phi: SpectralVector
    psi: SpectralVector
    g: TimeProfile
    rule: QuadratureRule = DEFAULT_RULE

    def __post_init__(self) -> None:
        if not 0.0 < self.rho <= 1.0:
            raise ValueError(f"rho out of (0, 1]: {self.rho!r}")
        if not (self.T > 0 and math.isfinite(self.T)):
            raise ValueError(f"T must be positive: {self.T!r}")
        if abs(self.g.T - self.T) > 1e-14 * self.T:
            raise ValueError(f"profile is defined on [0, {self.g.T}], not [0, {self.T}]")
        for name in ("phi", "psi"):
            v = getattr(self, name)
            if v.K != self.operator.K:
                raise ValueError(
                    f"{name} has K={v.K} but the operator has K={self.operator.K}")

    @property
    def K(self) -> int:
        return self.operator.K

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.operator.eigenvalues

    def initial_part(self) -> np.ndarray:
        """``phi_k T E_{rho,2}(-lambda_k T^rho)``, the contribution of the
        initial state to ``psi``."""
        rho, T = self.rho, self.T
        return self.phi.coeffs * T * mittag_leffler(-self.eigenvalues * T**rho, rho, 2.0)

    def psi_tail_ratio(self) -> float:
        """``D(A)`` tail diagnostic for ``psi``."""
        return domain_tail_ratio(self.operator, self.psi, 1.0)


@dataclass(frozen=True)
class ModePartition:
    """Split of ``{1..K}`` into modes with non-zero and zero kernel.

    Indices are 1-based. ``thresholds[k - 1]`` is the cut-off used for
    mode ``k``.
    """

    b_rho: tuple[int, ...]
    b_zero: tuple[int, ...]
    p: np.ndarray
    thresholds: np.ndarray
    eps_b: float
    policy: str = "|p_k| <= eps_b T^(rho+1) / (1 + lambda_k T^rho)"

    def __post_init__(self) -> None:
        K = self.p.size
        if set(self.b_rho) & set(self.b_zero):
            raise ValueError("b_rho and b_zero overlap")
        if sorted(self.b_rho + self.b_zero) != list(range(1, K + 1)):
            raise ValueError("b_rho and b_zero must cover 1..K")

    @property
    def K(self) -> int:
        return int(self.p.size)

    def in_kernel(self) -> np.ndarray:
        mask = np.zeros(self.K, dtype=bool)
        mask[np.asarray(self.b_zero, dtype=int) - 1] = True
        return mask


@dataclass(frozen=True)
class SolvabilityEntry:
    """Solvability check of one mode ``k`` in ``B_0``.

    :arg residual: ``|psi_k - phi_k T E_{rho,2}(-lambda_k T^rho)|``.
    :arg criterion: ``"orthogonal"`` if ``phi_k = psi_k = 0``, ``"general"``
        if the residual is within tolerance, ``"violated"`` otherwise.
    """

    k: int
    residual: float
    criterion: str

    @property
    def passed(self) -> bool:
        return self.criterion != "violated"


@dataclass(frozen=True)
class InverseSolution:
    """Result of :func:`solve_inverse`.

    If *solvable* is false, *f* is *None* and *violation_report* lists the
    failing modes.
    """

    f: Optional[SpectralVector]
    partition: ModePartition
    free_indices: tuple[int, ...]
    free_values: dict[int, float]
    solvable: bool
    report: tuple[SolvabilityEntry, ...]
    tol_solv: float

    @property
    def violation_report(self) -> dict[int, float]:
        return {e.k: e.residual for e in self.report if not e.passed}

    @property
    def residuals(self) -> np.ndarray:
        """Solvability residual per mode, zero outside ``B_0``."""
        r = np.zeros(self.partition.K)
        for e in self.report:
            r[e.k - 1] = e.residual
        return r

# }}}


# {{{ solver

def partition_modes(problem: InverseProblem,
                    rule: Optional[QuadratureRule] = None,
                    eps_b: float = DEFAULT_EPS_B, *,
                    p: Optional[np.ndarray] = None) -> ModePartition:
    """Classify every mode by the size of its kernel ``p_{k,rho}(T)``."""
    if not eps_b > 0:
        raise ValueError(f"eps_b must be positive: {eps_b!r}")
    rule = problem.rule if rule is None else rule

    lam = problem.eigenvalues
    if p is None:
        p = p_k_many(problem.rho, lam, problem.g, problem.T, rule)
    p = np.asarray(p, dtype=float)
    p.setflags(write=False)

    thresholds = zero_threshold(problem.rho, lam, problem.T, eps_b)
    zero = np.abs(p) <= thresholds
    idx = np.arange(1, problem.K + 1)
    if zero.any():
        log.info("vanishing kernels at k=%s", idx[zero].tolist())
    return ModePartition(tuple(int(k) for k in idx[~zero]),
                         tuple(int(k) for k in idx[zero]),
                         p, thresholds, eps_b)


def default_tol_solv(problem: InverseProblem) -> float:
    return 1.0e-8 * (1.0 + problem.psi.norm())


def check_solvability(problem: InverseProblem, partition: ModePartition,
                      tol_solv: Optional[float] = None) -> tuple[SolvabilityEntry, ...]:
    """Evaluate the solvability condition on every mode of ``B_0``."""
    tol = default_tol_solv(problem) if tol_solv is None else float(tol_solv)
    if not tol > 0:
        raise ValueError(f"tol_solv must be positive: {tol!r}")

    if not partition.b_zero:
        return ()

    initial = problem.initial_part()
    out = []
    for k in partition.b_zero:
        phi_k, psi_k = problem.phi[k], problem.psi[k]
        r = abs(psi_k - initial[k - 1])
        if phi_k == 0.0 and psi_k == 0.0:
            criterion = "orthogonal"
        elif r <= tol:
            criterion = "general"
        else:
            criterion = "violated"
        out.append(SolvabilityEntry(k, float(r), criterion))
    return tuple(out)


def solve_inverse(problem: InverseProblem,
                  partition: Optional[ModePartition] = None,
                  free_values: Optional[Mapping[int, float]] = None, *,
                  tol_solv: Optional[float] = None,
                  warn_high_modes: bool = True) -> InverseSolution:
    """Recover ``f`` mode by mode.

    :arg free_values: ``f_k`` for (1-based) ``k`` in ``B_0``; unspecified
        entries default to zero, which selects the minimum-norm member of
        the solution family.
    """
    if partition is None:
        partition = partition_modes(problem)
    if partition.K != problem.K:
        raise ValueError("partition does not match the problem")

    free_values = dict(free_values or {})
    stray = set(free_values) - set(partition.b_zero)
    if stray:
        raise ValueError(f"free values given for modes outside B_0: {sorted(stray)}")

    check_domain_membership(problem.operator, problem.psi, 1.0, name="psi")
    tol = default_tol_solv(problem) if tol_solv is None else float(tol_solv)
    report = check_solvability(problem, partition, tol)
    solvable = all(e.passed for e in report)

    if warn_high_modes and partition.b_zero and max(partition.b_zero) > problem.K // 2:
        warnings.warn(
            f"kernel vanishes for high modes {[k for k in partition.b_zero if k > problem.K // 2]}; "
            "for sign-changing g only finitely many zeros are expected when T is small",
            RuntimeWarning, stacklevel=2)

    chosen = {k: float(free_values.get(k, 0.0)) for k in partition.b_zero}
    if not solvable:
        return InverseSolution(None, partition, partition.b_zero, chosen,
                               False, report, tol)

    f = np.zeros(problem.K)
    rhs = problem.psi.coeffs - problem.initial_part()
    idx = np.asarray(partition.b_rho, dtype=int) - 1
    f[idx] = rhs[idx] / partition.p[idx]
    for k, v in chosen.items():
        f[k - 1] = v

    return InverseSolution(SpectralVector(f), partition, partition.b_zero, chosen,
                           True, report, tol)


def forward_problem(problem: InverseProblem, solution: InverseSolution) -> ForwardProblem:
    """The forward problem with the recovered source."""
    if not solution.solvable or solution.f is None:
        raise ValueError("the inverse problem is not solvable; there is no u to build")
    return ForwardProblem(problem.rho, problem.T, problem.operator, problem.phi,
                          solution.f, problem.g, problem.rule)


def reconstruct_u(problem: InverseProblem, solution: InverseSolution,
                  times: Optional[Sequence[float]] = None, *,
                  x: Optional[Sequence[float]] = None,
                  check_rtol: float = 1.0e-8) -> list[TrajectorySample]:
    """The state ``u(t)`` for the recovered source.

    Uses ``phi_k E_{rho,1}(-lambda_k t^rho) + f_k C_k(t)`` for every mode and
    cross-checks, for ``k`` in ``B_rho``, against the ratio form
    ``[psi_k - phi_k T E_{rho,2}] C_k(t) / p_{k,rho}(T)``.
    """
    fp = forward_problem(problem, solution)
    if times is None:
        times = default_times(problem.T)
    samples = solve_forward(fp, times, x=x)

    t = np.array([s.t for s in samples])
    rho = problem.rho
    lam = problem.eigenvalues
    rhs = problem.psi.coeffs - problem.initial_part()
    U = np.array([s.coeffs for s in samples])
    worst = 0.0
    for k in solution.partition.b_rho:
        if rhs[k - 1] == 0.0:
            continue
        ratio = rhs[k - 1] / solution.partition.p[k - 1]
        alt = (problem.phi[k] * mittag_leffler(-lam[k - 1] * t**rho, rho, 1.0)
               + ratio * convolve_source(rho, float(lam[k - 1]), problem.g, t, problem.rule))
        scale = max(np.max(np.abs(U[:, k - 1])), 1e-300)
        worst = max(worst, float(np.max(np.abs(alt - U[:, k - 1]))) / scale)

    if worst > check_rtol:
        warnings.warn(f"ratio form of u disagrees with the direct form: {worst:.3e}",
                      RuntimeWarning, stacklevel=2)
    return samples

# }}}


# {{{ output

def _fmt(x: float) -> str:
    return repr(float(x))


def write_solution_csv(path, solution: InverseSolution) -> None:
    """``k,f_k,in_kernel,solvability_residual``; ``f_k`` is empty when the
    problem is not solvable."""
    in_kernel = solution.partition.in_kernel()
    res = solution.residuals
    with open(path, "w", newline="") as fd:
        w = csv.writer(fd, lineterminator="\n")
        w.writerow(["k", "f_k", "in_kernel", "solvability_residual"])
        for i in range(solution.partition.K):
            fk = "" if solution.f is None else _fmt(solution.f.coeffs[i])
            w.writerow([i + 1, fk, int(in_kernel[i]), _fmt(res[i])])


def read_solution_csv(path) -> SpectralVector:
    with open(path, newline="") as fd:
        rows = list(csv.DictReader(fd))
    if not rows or list(rows[0]) != ["k", "f_k", "in_kernel", "solvability_residual"]:
        raise ValueError(f"{path}: expected header 'k,f_k,in_kernel,solvability_residual'")
    if any(r["f_k"] == "" for r in rows):
        raise ValueError(f"{path}: the solution has no f (unsolvable instance)")
    return SpectralVector([float(r["f_k"]) for r in rows])


def diagnostics_report(problem: InverseProblem, solution: InverseSolution,
                       stats: Optional[KernelBoundStats] = None) -> str:
    """Plain-text summary of the mode partition and the kernel bounds."""
    part = solution.partition
    if stats is None:
        stats = kernel_bound_stats(problem.rho, problem.eigenvalues, problem.g,
                                   problem.T, problem.rule, eps_b=part.eps_b, p=part.p)

    lines = [
        f"rho = {problem.rho!r}",
        f"T = {problem.T!r}",
        f"K = {problem.K}",
        f"operator = {problem.operator.label}",
        f"g = {problem.g.label} (sign changes on grid: {problem.g.sign_changes()})",
        f"psi D(A) tail ratio = {problem.psi_tail_ratio():.3e}",
        "",
        "partition",
        f"  policy: {part.policy}",
        f"  eps_b = {part.eps_b!r}",
        f"  |B_rho| = {len(part.b_rho)}",
        f"  B_0 = {list(part.b_zero)}",
        "",
        "kernel bounds (lambda_k |p_k|)",
        f"  {stats.summary()}",
        "",
        f"solvable = {str(solution.solvable).lower()}",
        f"tol_solv = {solution.tol_solv!r}",
    ]
    if solution.report:
        lines.append("solvability")
        for e in solution.report:
            lines.append(f"  k={e.k} residual={e.residual!r} criterion={e.criterion} "
                         f"threshold={float(part.thresholds[e.k - 1])!r} "
                         f"p_k={float(part.p[e.k - 1])!r}")
    if solution.free_indices:
        lines.append("free values")
        for k in solution.free_indices:
            lines.append(f"  f_{k} = {solution.free_values[k]!r}")
    return "\n".join(lines) + "\n"

# }}}

# vim: foldmethod=marker
