"""Internal consistency checks run by ``subdiff-inverse selftest``.

Each check compares two independently computed quantities that must agree
by an exact identity (closed forms of the Mittag-Leffler function, the
integration identity, the double-integral identity for the kernel) or by
construction (an inverse roundtrip). The test suite holds the stricter,
oracle-based versions of these checks.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from subdiff_inverse.forward_solver import ForwardProblem, integrate_trajectory
from subdiff_inverse.inverse_solver import InverseProblem, partition_modes, solve_inverse
from subdiff_inverse.kernel import (
    double_integral_identity_check,
    kernel_bound_stats,
    ml_power_integral,
    p_k_many,
    profile_from_catalog,
    sampled_profile,
)
from subdiff_inverse.spectral_space import SpectralVector, dirichlet_laplacian_1d
from subdiff_inverse.special_functions import mittag_leffler

__all__ = ["CheckResult", "run_selftest", "format_results"]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: {self.detail}"


def _closed_forms() -> tuple[bool, str]:
    from scipy.special import erfc

    z = np.linspace(-700.0, 10.0, 2001)
    e1 = np.max(np.abs(mittag_leffler(z, 1.0, 1.0) / np.exp(z) - 1.0))
    # the general algorithm against the exponential where e^z is not tiny
    z = np.linspace(-5.0, 10.0, 301)
    e1 = max(e1, np.max(np.abs(mittag_leffler(z, 1.0, 1.0, closed_forms=False)
                               / np.exp(z) - 1.0)))
    e2 = abs(mittag_leffler(-1.0, 1.0, 2.0) / (1.0 - math.exp(-1.0)) - 1.0)
    e3 = abs(mittag_leffler(-1.0, 0.5, 1.0) / (math.e * erfc(1.0)) - 1.0)
    worst = max(e1, e2, e3)
    return worst <= 1e-10, f"max rel error {worst:.2e}"


def _identity(n: int, seed: int) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        rho = rng.uniform(0.1, 1.0)
        beta = rng.choice([1.0, 2.0, rho, rho + 1.0, rho + 2.0])
        lam = -10.0 ** rng.uniform(-1.0, 4.0)
        t = rng.uniform(0.05, 2.0)
        lhs = ml_power_integral(rho, beta, lam, t)
        rhs = t**beta * mittag_leffler(lam * t**rho, rho, beta + 1.0)
        worst = max(worst, abs(lhs - rhs) / abs(rhs))
    return worst <= 1e-6, f"{n} draws, max rel error {worst:.2e}"


def _time_average(n: int, seed: int) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        rho = rng.uniform(0.1, 1.0)
        lam = 10.0 ** rng.uniform(-1.0, 5.0)
        T = rng.uniform(0.1, 2.0)
        lhs = ml_power_integral(rho, 1.0, -lam, T)
        rhs = T * mittag_leffler(-lam * T**rho, rho, 2.0)
        worst = max(worst, abs(lhs - rhs) / abs(rhs))
    return worst <= 1e-6, f"{n} draws, max rel error {worst:.2e}"


def _double_integral(n: int) -> tuple[bool, str]:
    T = 1.0
    profiles = [
        profile_from_catalog("const", T, c=1.0),
        profile_from_catalog("linear", T, a=1.0, b=-1.0),
        profile_from_catalog("cosine", T, omega=4.0),
        sampled_profile(np.exp(-np.linspace(0.0, T, 17)), T),
    ]
    cases = [(rho, lam, g) for rho in (0.3, 0.7, 1.0)
             for lam in (1.0, 40.0) for g in profiles][:n]
    worst = 0.0
    for rho, lam, g in cases:
        lhs, rhs = double_integral_identity_check(rho, lam, g)
        worst = max(worst, abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-12))
    return worst <= 1e-6, f"{len(cases)} cases, max rel difference {worst:.2e}"


def _bounds(K: int) -> tuple[bool, str]:
    lam = (np.arange(1, K + 1) * np.pi) ** 2
    g = profile_from_catalog("const", 1.0, c=1.0)
    worst = 0.0
    for rho in (0.3, 0.7, 1.0):
        s = kernel_bound_stats(rho, lam, g)
        if s.k0 != 1:
            return False, f"rho={rho}: bound fails below k0={s.k0}"
        worst = max(worst, s.band_ratio)
    return worst <= 50.0, f"K={K}, max band ratio {worst:.2f}"


def _roundtrip(K: int, seed: int) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    op = dirichlet_laplacian_1d(1.0, K)
    lam = op.eigenvalues
    g = profile_from_catalog("exp_decay", 1.0, sign_constant=True)
    worst = 0.0
    for rho in (0.5, 1.0):
        phi = SpectralVector(rng.uniform(-1, 1, K) / lam**2)
        f = SpectralVector(rng.uniform(-1, 1, K) / lam**2)
        p = p_k_many(rho, lam, g)
        psi = integrate_trajectory(ForwardProblem(rho, 1.0, op, phi, f, g), p=p)
        ip = InverseProblem(rho, 1.0, op, phi, psi, g)
        sol = solve_inverse(ip, partition_modes(ip, p=p))
        worst = max(worst, (sol.f - f).norm() / f.norm())
    return worst <= 1e-10, f"K={K}, max relative error {worst:.2e}"


def run_selftest(quick: bool = False) -> list["CheckResult"]:
    """Run all checks; *quick* uses fewer draws and modes."""
    checks: list[tuple[str, Callable[[], tuple[bool, str]]]] = [
        ("mittag-leffler closed forms", _closed_forms),
        ("integration identity", lambda: _identity(10 if quick else 100, 1)),
        ("integral of E_rho,1", lambda: _time_average(10 if quick else 100, 2)),
        ("double integral identity", lambda: _double_integral(4 if quick else 20)),
        ("kernel bounds, g = 1", lambda: _bounds(40 if quick else 200)),
        ("inverse roundtrip", lambda: _roundtrip(16 if quick else 64, 3)),
    ]

    out = []
    for name, fn in checks:
        t0 = time.perf_counter()
        try:
            ok, detail = fn()
        except Exception as exc:  # a crashing check is a failed check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append(CheckResult(name, bool(ok), detail, time.perf_counter() - t0))
    return out


def format_results(results: list[CheckResult]) -> str:
    lines = [r.line() for r in results]
    npass = sum(r.passed for r in results)
    lines.append(f"{npass}/{len(results)} checks passed")
    return "\n".join(lines) + "\n"
