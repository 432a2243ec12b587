"""
Evaluating the Mittag-Leffler function
======================================

Every mode of the subdiffusion solution is built from ``E_{rho,mu}(-lambda
t^rho)``. This script evaluates it on a range of arguments, compares a few
values with elementary closed forms and shows the slow algebraic tail that
replaces exponential decay once ``rho < 1``.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import erfcx

from subdiff_inverse import MLParams, mittag_leffler, ml_eval

# %%
# For ``rho = 1`` the function is the exponential, and for ``rho = 1/2`` it
# is a scaled complementary error function, ``E_{1/2,1}(-x) = exp(x^2)
# erfc(x)``. The general algorithm can be forced with ``closed_forms=False``.

x = np.array([0.1, 1.0, 5.0, 30.0])
general = mittag_leffler(-x, 0.5, 1.0, closed_forms=False)
for xi, value, ref in zip(x, general, erfcx(x)):
    print(f"E_(1/2,1)(-{xi:<4g}) = {value:.16e}   erfcx = {ref:.16e}")

print(f"E_(1,2)(-1) = {ml_eval(MLParams(1.0, 2.0), -1.0):.16f}"
      f"   1 - 1/e = {1 - math.exp(-1):.16f}")

# %%
# The decay depends strongly on ``rho``. At ``t = 100`` the exponential is
# below ``1e-43``, while ``E_{rho,1}(-t)`` for ``rho < 1`` behaves like
# ``t^{-1} / Gamma(1 - rho)``.

t = 100.0
for rho in (1.0, 0.9, 0.5, 0.2):
    value = mittag_leffler(-t, rho)
    lead = 1.0 / (t * math.gamma(1.0 - rho)) if rho < 1 else 0.0
    print(f"rho = {rho:3.1f}:  E(-{t:g}) = {value: .6e}   leading tail term {lead: .6e}")

# %%
# Evaluation is vectorised over ``z``, so a whole time grid costs one call.

t = np.linspace(0.0, 1.0, 5)
print("E_(0.6,1)(-10 t^0.6) on t =", t)
print(mittag_leffler(-10.0 * t**0.6, 0.6))

# vim: foldmethod=marker
