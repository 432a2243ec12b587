from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import erfcx, gamma as sp_gamma, gammaln

from subdiff_inverse.special_functions import (
    MLParams,
    gamma,
    lgamma,
    mittag_leffler,
    ml_asymptotic_leading,
    ml_eval,
    ml_series_mp,
    rgamma,
)

from conftest import ml_oracle


# {{{ gamma

def test_gamma_against_scipy():
    x = np.concatenate([np.linspace(0.01, 170.0, 2001), [0.5, 1.0, 2.0, 3.5]])
    assert np.allclose(gamma(x), sp_gamma(x), rtol=1e-13, atol=0)
    assert np.allclose(lgamma(x), gammaln(x), rtol=1e-13, atol=1e-14)


def test_rgamma_poles_are_zeros():
    assert np.all(rgamma(np.array([0.0, -1.0, -2.0, -7.0])) == 0.0)
    x = np.array([-0.5, -1.5, -2.5])
    assert np.allclose(rgamma(x), 1.0 / sp_gamma(x), rtol=1e-13)

# }}}


# {{{ closed forms

def test_exponential():
    z = np.linspace(-700.0, 10.0, 4001)
    assert np.max(np.abs(mittag_leffler(z, 1.0, 1.0) / np.exp(z) - 1.0)) <= 1e-12


def test_exponential_general_path():
    # the same values without the rho = 1 shortcuts
    z = np.linspace(-5.0, 10.0, 301)
    val = mittag_leffler(z, 1.0, 1.0, closed_forms=False)
    assert np.max(np.abs(val / np.exp(z) - 1.0)) <= 1e-12


def test_e12():
    z = np.linspace(-50.0, 5.0, 111)
    z = z[z != 0]
    ref = np.expm1(z) / z
    assert np.max(np.abs(mittag_leffler(z, 1.0, 2.0) / ref - 1.0)) <= 1e-12
    assert abs(ml_eval(MLParams(1.0, 2.0), -1.0) / (1.0 - math.exp(-1.0)) - 1) <= 1e-10


@pytest.mark.parametrize("x", [0.0, 0.1, 1.0, 3.0, 10.0, 40.0, 300.0, 1.0e4])
def test_half_order_erfc(x):
    # E_{1/2,1}(-x) = exp(x^2) erfc(x)
    assert abs(mittag_leffler(-x, 0.5, 1.0) / erfcx(x) - 1.0) <= 1e-12


def test_rho_out_of_range():
    with pytest.raises(ValueError, match=r"rho out of \(0, 1\]"):
        MLParams(2.0, 1.0)

# }}}


# {{{ against the extended precision series

_CASES = [
    (rho, mu, z)
    for rho in (0.1, 0.3, 0.5, 0.75, 0.9, 1.0)
    for mu in (1.0, 2.0, rho, rho + 1.0)
    for z in (-0.01, -0.7, -3.0, -12.0, -60.0)
    if abs(z) ** (1.0 / rho) < 2.0e3
]


@pytest.mark.parametrize(("rho", "mu", "z"), _CASES)
def test_against_oracle(rho, mu, z):
    ref = ml_oracle(z, rho, mu)
    val = mittag_leffler(z, rho, mu)
    # relative accuracy, or absolute where the value is tiny
    assert abs(val - ref) <= 1e-11 * max(abs(ref), 1e-3)


def test_large_argument_asymptotics():
    # E_{rho,mu}(-t) ~ 1 / (t Gamma(mu - rho)) with a relative error O(t^-1)
    t = 1.0e6
    for rho, mu in [(0.3, 1.0), (0.6, 1.6), (0.8, 2.0)]:
        lead = ml_asymptotic_leading(MLParams(rho, mu), t)
        assert abs(mittag_leffler(-t, rho, mu) / lead - 1.0) <= 1e-4


def test_series_mp_matches_oracle():
    for rho, mu, z in [(0.5, 1.0, -1.0), (0.7, 1.7, -20.0), (0.3, 0.3, -2.0)]:
        assert abs(float(ml_series_mp(MLParams(rho, mu), z)) - ml_oracle(z, rho, mu)) \
            <= 1e-14 * abs(ml_oracle(z, rho, mu))


def test_positive_argument():
    for rho, mu, z in [(0.5, 1.0, 2.0), (0.8, 1.8, 5.0), (1.0, 1.0, 3.0)]:
        ref = ml_oracle(z, rho, mu)
        assert abs(mittag_leffler(z, rho, mu) / ref - 1.0) <= 1e-12


def test_vectorized_shape():
    z = -np.logspace(-3, 4, 24).reshape(4, 6)
    out = mittag_leffler(z, 0.6, 1.6)
    assert out.shape == z.shape
    assert np.all(out == np.vectorize(lambda x: mittag_leffler(x, 0.6, 1.6))(z))

# }}}


# {{{ properties

rhos = st.floats(0.05, 1.0)
negs = st.floats(-1.0e3, -1.0e-6)


@given(rho=rhos, mu=st.floats(0.05, 3.0), z=st.floats(-60.0, -1.0e-3))
def test_recurrence(rho, mu, z):
    # E_{rho,mu}(z) = 1/Gamma(mu) + z E_{rho,rho+mu}(z)
    lhs = mittag_leffler(z, rho, mu)
    rhs = float(rgamma(mu)) + z * mittag_leffler(z, rho, rho + mu)
    scale = max(abs(lhs), float(abs(rgamma(mu))), abs(z * mittag_leffler(z, rho, rho + mu)))
    assert abs(lhs - rhs) <= 1e-10 * scale


@given(rho=rhos, x=st.floats(1e-4, 1.0e3), dx=st.floats(1e-3, 10.0))
def test_complete_monotonicity(rho, x, dx):
    # E_{rho,1}(-x) is positive and decreasing on x > 0 for rho <= 1
    a = mittag_leffler(-x, rho, 1.0)
    b = mittag_leffler(-(x + dx), rho, 1.0)
    assert 0.0 <= b <= a * (1 + 1e-12)
    assert a <= 1.0


@given(rho=rhos, x=negs)
def test_bounded_by_one(rho, x):
    # e^x underflows to zero below x = -745
    assert 0.0 <= mittag_leffler(x, rho, 1.0) <= 1.0


@given(rho=st.floats(0.1, 1.0), z=st.floats(-30.0, -0.01))
def test_derivative_identity(rho, z):
    # d/dz E_{rho,1}(z) = E_{rho,rho}(z) / rho
    h = 1e-5 * max(1.0, abs(z))
    num = (mittag_leffler(z + h, rho, 1.0) - mittag_leffler(z - h, rho, 1.0)) / (2 * h)
    ana = mittag_leffler(z, rho, rho) / rho
    assert abs(num - ana) <= 1e-6 * max(abs(ana), 1e-3)


@pytest.mark.parametrize("rho", [0.2, 0.5, 0.8, 1.0])
def test_decay_envelope(rho):
    # |E_{rho,mu}(-t)| (1 + t) stays bounded on [0, 1e8], for the mu used by
    # the solvers; the bound must not move when the grid is refined
    def worst(n):
        t = np.concatenate([[0.0], np.logspace(-6, 8, n)])
        return max(float(np.max(np.abs(mittag_leffler(-t, rho, mu)) * (1 + t)))
                   for mu in (1.0, 2.0, rho, rho + 1, rho + 2))

    coarse, fine = worst(400), worst(1600)
    assert math.isfinite(fine) and fine <= 2.0
    assert abs(fine - coarse) <= 1e-2 * fine

# }}}

# vim: foldmethod=marker
