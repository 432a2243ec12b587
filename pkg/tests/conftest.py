from __future__ import annotations

import math
import time
from contextlib import contextmanager
from dataclasses import dataclass

import mpmath as mp
import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


def ml_oracle(z: float, rho: float, mu: float = 1.0) -> float:
    """``E_{rho,mu}(z)`` summed in extended precision.

    The working precision is raised by the size of the largest term, so the
    alternating series loses nothing to cancellation.
    """
    z = float(z)
    az = abs(z)
    if z < 0 and rho < 1 and az ** (1.0 / rho) > 300.0:
        return _ml_oracle_asymptotic(z, rho, mu)
    peak = az ** (1.0 / rho) / math.log(10.0) if az > 0 else 0.0
    with mp.workdps(int(peak) + 40):
        zm = mp.mpf(z)
        # rho * n in double precision would perturb the Gamma arguments
        rm, mm = mp.mpf(rho), mp.mpf(mu)
        total = mp.mpf(0)
        term_max = mp.mpf(0)
        tol = mp.mpf(10) ** (-(int(peak) + 35))
        n = 0
        while True:
            term = zm**n * mp.rgamma(rm * n + mm)
            total += term
            term_max = max(term_max, abs(term))
            if n > 10 and abs(term) < tol * max(term_max, 1) and n * rho > az ** (1 / rho):
                break
            n += 1
        return float(total)


def _ml_oracle_asymptotic(z: float, rho: float, mu: float) -> float:
    # E_{rho,mu}(z) = -sum_{k>=1} z^{-k} / Gamma(mu - rho k) for z -> -inf,
    # without exponential terms when rho < 1. The coefficients carry a
    # factor sin(pi (mu - rho k)) and oscillate, so the cut-off is placed
    # by the smooth envelope Gamma(rho k - mu + 1) / (pi |z|^k) instead.
    with mp.workdps(40):
        zm, rm, mm = mp.mpf(z), mp.mpf(rho), mp.mpf(mu)
        x = -zm

        def env(k):
            return mp.gamma(abs(rm * k - mm) + 1) / (mp.pi * x**k)

        total = mp.mpf(0)
        for k in range(1, 5000):
            total += -zm ** (-k) * mp.rgamma(mm - rm * k)
            if env(k + 1) < mp.mpf(10) ** -25 * abs(total):
                break
        else:
            raise ValueError(f"asymptotic oracle not accurate at z={z}, rho={rho}")
        return float(total)


def mode_solution_rho1(lam: float, phi: float, f: float, g_const: float, t):
    """``u' + lam u = f g``, ``u(0) = phi`` with constant ``g``."""
    t = np.asarray(t, dtype=float)
    return phi * np.exp(-lam * t) + f * g_const * (-np.expm1(-lam * t)) / lam


@pytest.fixture
def ml():
    return ml_oracle


# {{{ acceptance bookkeeping

_ACCEPTANCE: dict[int, str] = {}


@dataclass
class _Record:
    detail: str = ""


@contextmanager
def _criterion(number: int, title: str, budget: float):
    rec = _Record()
    start = time.perf_counter()
    status = "FAIL"
    try:
        yield rec
        elapsed = time.perf_counter() - start
        if elapsed >= budget:
            rec.detail += f" (runtime {elapsed:.2f} s over budget {budget:g} s)"
            raise AssertionError(f"criterion {number} ran {elapsed:.2f} s, budget {budget:g} s")
        status = "PASS"
    finally:
        elapsed = time.perf_counter() - start
        line = (f"criterion {number:2d} {status}  {title}  [{elapsed:.2f} s / {budget:g} s]"
                f"  {rec.detail.strip()}")
        _ACCEPTANCE[number] = line
        print(line)


@pytest.fixture
def criterion():
    """Time a block and record one pass/fail line for the summary."""
    return _criterion


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_ACCEPTANCE[number])

# }}}

# vim: foldmethod=marker
