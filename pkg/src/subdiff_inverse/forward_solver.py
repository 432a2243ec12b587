"""Forward problem ``D_t^rho u + A u = g(t) f``, ``u(0) = phi``.

Each Fourier mode evolves independently,

.. math::

    u_k(t) = \\varphi_k E_{\\rho,1}(-\\lambda_k t^\\rho) + f_k C_k(t),

with the source convolution ``C_k`` from :mod:`subdiff_inverse.kernel`. The
time integral ``int_0^T u_k dt`` has the closed form
``phi_k T E_{rho,2}(-lambda_k T^rho) + f_k p_{k,rho}(T)``, which is cross-checked
against Gauss quadrature of the trajectory. A discrete Caputo residual built
on the L1 scheme verifies that the trajectory satisfies the equation.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from subdiff_inverse.kernel import (
    DEFAULT_RULE,
    QuadratureRule,
    TimeProfile,
    convolve_source,
    p_k,
    time_quadrature,
)
from subdiff_inverse.spectral_space import (
    SpectralOperator,
    SpectralVector,
    reconstruct,
)
from subdiff_inverse.special_functions import gamma, mittag_leffler

__all__ = [
    "ForwardProblem",
    "TrajectorySample",
    "default_times",
    "trajectory_matrix",
    "solve_forward",
    "integrate_trajectory",
    "caputo_l1",
    "residual",
    "residual_orders",
    "write_trajectory_csv",
    "read_trajectory_csv",
    "write_field_csv",
]

#: number of points of the default uniform trajectory grid
DEFAULT_TIME_POINTS = 129

#: modes with ``lambda_k T^rho`` above this are too stiff for uniform grids
STIFF_LIMIT = 1.0e2


# {{{ problem

@dataclass(frozen=True)
class ForwardProblem:
    """Data of the forward problem; all vectors share the truncation ``K``."""

    rho: float
    T: float
    operator: SpectralOperator
    phi: SpectralVector
    f: SpectralVector
    g: TimeProfile
    rule: QuadratureRule = DEFAULT_RULE

    def __post_init__(self) -> None:
        if not 0.0 < self.rho <= 1.0:
            raise ValueError(f"rho out of (0, 1]: {self.rho!r}")
        if not (self.T > 0 and math.isfinite(self.T)):
            raise ValueError(f"T must be positive: {self.T!r}")
        if abs(self.g.T - self.T) > 1e-14 * self.T:
            raise ValueError(f"profile is defined on [0, {self.g.T}], not [0, {self.T}]")
        for name in ("phi", "f"):
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

    def stiff_modes(self) -> np.ndarray:
        """Boolean mask of modes with ``lambda_k T^rho > STIFF_LIMIT``."""
        return self.eigenvalues * self.T**self.rho > STIFF_LIMIT


@dataclass(frozen=True)
class TrajectorySample:
    """Coefficients ``u_k(t)`` at one time, optionally with field values."""

    t: float
    coeffs: np.ndarray
    x: Optional[np.ndarray] = field(default=None, compare=False)
    values: Optional[np.ndarray] = field(default=None, compare=False)

    def as_vector(self) -> SpectralVector:
        return SpectralVector(self.coeffs)

# }}}


# {{{ trajectories

def default_times(T: float, n: int = DEFAULT_TIME_POINTS) -> np.ndarray:
    return np.linspace(0.0, T, n)


def _check_times(problem: ForwardProblem, times) -> np.ndarray:
    t = np.asarray(times, dtype=float)
    if t.ndim != 1:
        raise ValueError("times must be a 1d sequence")
    if np.any(t < 0.0) or np.any(t > problem.T * (1 + 1e-14)):
        raise ValueError(f"times must lie in [0, {problem.T}]")
    return np.minimum(t, problem.T)


def mode_trajectory(problem: ForwardProblem, k: int, times) -> np.ndarray:
    """``u_k`` at *times* for the 1-based mode index *k*."""
    t = _check_times(problem, times)
    rho = problem.rho
    lam = float(problem.eigenvalues[k - 1])
    phi_k, f_k = problem.phi[k], problem.f[k]

    u = np.zeros(t.shape)
    if phi_k:
        u += phi_k * mittag_leffler(-lam * t**rho, rho, 1.0)
    if f_k:
        u += f_k * convolve_source(rho, lam, problem.g, t, problem.rule)
    return u


def trajectory_matrix(problem: ForwardProblem, times) -> np.ndarray:
    """Array of shape ``(len(times), K)`` with entries ``u_k(t_i)``."""
    t = _check_times(problem, times)
    out = np.zeros((t.size, problem.K))
    for k in range(1, problem.K + 1):
        out[:, k - 1] = mode_trajectory(problem, k, t)
    return out


def solve_forward(problem: ForwardProblem, times: Optional[Sequence[float]] = None,
                  *, x: Optional[Sequence[float]] = None) -> list[TrajectorySample]:
    """Spectral solution at *times* (default: 129 uniform points).

    :arg x: physical points at which to also evaluate ``u(t, x)``; requires
        an eigenfunction evaluator on the operator.
    """
    if times is None:
        times = default_times(problem.T)
    t = _check_times(problem, times)
    U = trajectory_matrix(problem, t)

    xs = None if x is None else np.asarray(x, dtype=float)
    out = []
    for i, ti in enumerate(t):
        coeffs = U[i].copy()
        coeffs.setflags(write=False)
        vals = None
        if xs is not None:
            vals = reconstruct(problem.operator, SpectralVector(coeffs), xs)
        out.append(TrajectorySample(float(ti), coeffs, xs, vals))
    return out


def integrate_trajectory(problem: ForwardProblem, *, method: str = "spectral",
                         p: Optional[np.ndarray] = None) -> SpectralVector:
    """The overdetermination data ``psi = int_0^T u(t) dt``.

    :arg method: ``"spectral"`` uses the closed form in terms of
        ``E_{rho,2}`` and ``p_{k,rho}(T)``; ``"quadrature"`` integrates the
        trajectory with composite Gauss rules in time (an independent path
        used for cross-checks).
    :arg p: precomputed kernels ``p_{k,rho}(T)`` for the spectral path.
    """
    rho, T = problem.rho, problem.T
    lam = problem.eigenvalues

    if method == "spectral":
        psi = problem.phi.coeffs * T * mittag_leffler(-lam * T**rho, rho, 2.0)
        f = problem.f.coeffs
        for i in np.nonzero(f)[0]:
            pk = p_k(rho, float(lam[i]), problem.g, T, problem.rule) if p is None else p[i]
            psi[i] += f[i] * pk
        return SpectralVector(psi)

    if method == "quadrature":
        psi = np.zeros(problem.K)
        for k in range(1, problem.K + 1):
            if not (problem.phi[k] or problem.f[k]):
                continue
            t, w = time_quadrature(rho, float(lam[k - 1]), problem.g, T, problem.rule)
            psi[k - 1] = w @ mode_trajectory(problem, k, t)
        return SpectralVector(psi)

    raise ValueError(f"unknown method: {method!r}")

# }}}


# {{{ residual

def caputo_l1(samples, rho: float, *, dt: Optional[float] = None,
              t: Optional[Sequence[float]] = None) -> np.ndarray:
    """Caputo derivative ``D_t^rho y`` at the nodes of a uniform grid.

    Uses the L1 scheme

    .. math::

        D^\\rho y(t_n) \\approx \\frac{\\Delta t^{-\\rho}}{\\Gamma(2 - \\rho)}
            \\sum_{j=0}^{n-1} b_j (y_{n-j} - y_{n-j-1}),
        \\qquad b_j = (j + 1)^{1-\\rho} - j^{1-\\rho},

    for ``rho < 1`` and second-order central differences for ``rho = 1``.
    The value at ``t_0`` is set to zero for ``rho < 1``.

    :arg dt: grid spacing; alternatively pass the grid *t*, which must be
        uniform.
    """
    y = np.asarray(samples, dtype=float)
    if y.ndim != 1 or y.size < 3:
        raise ValueError("caputo_l1 needs at least 3 samples")
    if not 0.0 < rho <= 1.0:
        raise ValueError(f"rho out of (0, 1]: {rho!r}")

    if t is not None:
        t = np.asarray(t, dtype=float)
        if t.shape != y.shape:
            raise ValueError("t and samples must have the same shape")
        h = np.diff(t)
        if np.any(h <= 0) or np.max(np.abs(h - h.mean())) > 1e-10 * h.mean():
            raise ValueError("caputo_l1 requires a uniform grid")
        dt = float(h.mean())
    if dt is None or not dt > 0:
        raise ValueError("a positive dt (or a uniform grid t) is required")

    if rho == 1.0:
        return np.gradient(y, dt, edge_order=2)

    n = y.size
    j = np.arange(n - 1, dtype=float)
    b = (j + 1.0) ** (1.0 - rho) - j ** (1.0 - rho)
    d = np.diff(y)

    out = np.zeros(n)
    out[1:] = np.convolve(b, d)[: n - 1] * dt**-rho / gamma(2.0 - rho)
    return out


def residual(problem: ForwardProblem, grid_size: int, *,
             window: float = 0.5) -> np.ndarray:
    """Per-mode maximum of ``|D^rho u_k + lambda_k u_k - f_k g|`` on a grid.

    The trajectory is the spectral solution sampled on ``grid_size + 1``
    uniform points of ``[0, T]``; the Caputo derivative is the L1 scheme.
    The maximum is taken over nodes with ``t >= window * T``. Near ``t = 0``
    the solution behaves like ``t**rho``, so the discrete residual there does
    not decrease under refinement; away from it the L1 truncation error
    decays like ``dt**min(2 - rho, 1 + rho)``.

    :arg window: fraction of ``[0, T]`` excluded at the start; ``0`` keeps
        every node except ``t = 0``.
    """
    if grid_size < 16:
        raise ValueError(f"grid_size must be >= 16: {grid_size}")
    if not 0.0 <= window < 1.0:
        raise ValueError(f"window must lie in [0, 1): {window!r}")

    t = np.linspace(0.0, problem.T, grid_size + 1)
    dt = problem.T / grid_size
    U = trajectory_matrix(problem, t)
    gt = problem.g(t)

    mask = t >= window * problem.T
    mask[0] = False
    if problem.rho == 1.0:
        # one-sided end differences are only first order
        mask[-1] = False

    out = np.zeros(problem.K)
    for i, lam in enumerate(problem.eigenvalues):
        u = U[:, i]
        if not np.any(u) and not problem.f.coeffs[i]:
            continue
        r = caputo_l1(u, problem.rho, dt=dt) + lam * u - problem.f.coeffs[i] * gt
        out[i] = np.max(np.abs(r[mask]))
    return out


def residual_orders(problem: ForwardProblem, grids: Sequence[int] = (128, 256),
                    **kwargs) -> np.ndarray:
    """Observed convergence order of :func:`residual` between two grids.

    Stiff modes (``lambda_k T^rho > 100``) and modes whose residual is
    already at round-off are reported as *nan*.
    """
    n1, n2 = grids
    r1 = residual(problem, n1, **kwargs)
    r2 = residual(problem, n2, **kwargs)
    with np.errstate(divide="ignore", invalid="ignore"):
        order = np.log(r1 / r2) / math.log(n2 / n1)
    order[problem.stiff_modes() | (r1 < 1e-13)] = np.nan
    return order

# }}}


# {{{ csv

def _fmt(x: float) -> str:
    return repr(float(x))


def write_trajectory_csv(path, samples: Sequence[TrajectorySample]) -> None:
    """Long format ``t,k,u_k``."""
    with open(path, "w", newline="") as fd:
        w = csv.writer(fd, lineterminator="\n")
        w.writerow(["t", "k", "u_k"])
        for s in samples:
            for k, c in enumerate(s.coeffs, start=1):
                w.writerow([_fmt(s.t), k, _fmt(c)])


def read_trajectory_csv(path) -> list[TrajectorySample]:
    with open(path, newline="") as fd:
        rows = list(csv.DictReader(fd))
    if not rows or list(rows[0]) != ["t", "k", "u_k"]:
        raise ValueError(f"{path}: expected header 't,k,u_k'")

    out: list[TrajectorySample] = []
    current: list[float] = []
    t_cur = None
    for r in rows:
        t = float(r["t"])
        if t != t_cur and current:
            out.append(TrajectorySample(t_cur, np.array(current)))
            current = []
        t_cur = t
        current.append(float(r["u_k"]))
    if current:
        out.append(TrajectorySample(t_cur, np.array(current)))
    return out


def write_field_csv(path, samples: Sequence[TrajectorySample]) -> None:
    """Long format ``t,x,u`` for samples with field values."""
    with open(path, "w", newline="") as fd:
        w = csv.writer(fd, lineterminator="\n")
        w.writerow(["t", "x", "u"])
        for s in samples:
            if s.x is None or s.values is None:
                raise ValueError("trajectory samples carry no field values")
            for xi, ui in zip(s.x, s.values):
                w.writerow([_fmt(s.t), _fmt(xi), _fmt(ui)])

# }}}

# vim: foldmethod=marker
