"""Scalar time kernels of the spectral construction.

For a mode with eigenvalue ``lam`` the source enters through the convolution

.. math::

    C(t) = \\int_0^t (t - \\eta)^{\\rho - 1} E_{\\rho,\\rho}(-\\lambda (t - \\eta)^\\rho)
        g(\\eta) \\, d\\eta,

and the overdetermination through its time integral

.. math::

    p(T) = \\int_0^T g(\\eta) (T - \\eta)^\\rho E_{\\rho,\\rho+1}(-\\lambda (T - \\eta)^\\rho)
        \\, d\\eta = \\int_0^T C(t) \\, dt.

Both are computed after the change of variables ``w = (t - eta)**rho``, which
absorbs the weak singularity of the convolution kernel exactly:

.. math::

    C(t) = \\frac{1}{\\rho} \\int_0^{t^\\rho} E_{\\rho,\\rho}(-\\lambda w)
        g(t - w^{1/\\rho}) \\, dw, \\qquad
    p(T) = \\frac{1}{\\rho} \\int_0^{T^\\rho} w^{1/\\rho} E_{\\rho,\\rho+1}(-\\lambda w)
        g(T - w^{1/\\rho}) \\, dw.

The remaining integrands are smooth apart from the factor ``w**(1/rho)``
near ``w = 0`` and a boundary layer of width ``1/lam``, which the mesh
resolves with graded and geometric breakpoints.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np

from subdiff_inverse.special_functions import AccuracyWarning, mittag_leffler

log = logging.getLogger(__name__)

__all__ = [
    "TimeProfile",
    "PROFILE_CATALOG",
    "profile_from_catalog",
    "sampled_profile",
    "QuadratureRule",
    "convolve_source",
    "p_k",
    "p_k_many",
    "time_quadrature",
    "ml_power_integral",
    "double_integral_identity_check",
    "psi_coefficient",
    "affine_exp_beta",
    "KernelBoundStats",
    "kernel_bound_stats",
    "zero_threshold",
]


# {{{ time profiles

ProfileEvaluator = Callable[[np.ndarray], np.ndarray]

# points used to verify a declared constant sign
_SIGN_CHECK_POINTS = 2049


@dataclass(frozen=True)
class TimeProfile:
    """The scalar modulation ``g(t)`` on ``[0, T]``.

    :arg evaluator: vectorised ``t -> g(t)``.
    :arg derivative: optional vectorised ``t -> g'(t)``.
    :arg sign_constant: if *True*, ``g`` is checked to have no zeros on a
        fine grid of ``[0, T]``.
    :arg breakpoints: interior points where ``g`` is less smooth (spline
        knots); quadrature meshes place panel edges there.
    """

    evaluator: ProfileEvaluator = field(compare=False)
    T: float
    kind: str = "closed_form"
    derivative: Optional[ProfileEvaluator] = field(default=None, compare=False)
    sign_constant: Optional[bool] = None
    label: str = "g"
    breakpoints: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if not (self.T > 0 and math.isfinite(self.T)):
            raise ValueError(f"T must be positive and finite: {self.T!r}")
        if self.kind not in ("closed_form", "sampled"):
            raise ValueError(f"unknown profile kind: {self.kind!r}")

        if self.sign_constant:
            t = np.linspace(0.0, self.T, _SIGN_CHECK_POINTS)
            t = np.concatenate([t, np.asarray(self.breakpoints, dtype=float)])
            gmin = float(np.min(np.abs(self(t))))
            if not gmin > 0:
                raise ValueError(
                    f"profile '{self.label}' is declared sign-constant but "
                    f"min |g| = {gmin:.3e} on [0, {self.T}]")

            vals = self(t)
            if not (np.all(vals > 0) or np.all(vals < 0)):
                raise ValueError(
                    f"profile '{self.label}' is declared sign-constant but changes sign")

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return np.asarray(self.evaluator(t), dtype=float) * np.ones_like(t)

    def deriv(self, t) -> np.ndarray:
        if self.derivative is None:
            raise ValueError(f"profile '{self.label}' has no derivative")
        t = np.asarray(t, dtype=float)
        return np.asarray(self.derivative(t), dtype=float) * np.ones_like(t)

    def sign_changes(self, n: int = _SIGN_CHECK_POINTS) -> int:
        """Number of sign changes of ``g`` on a uniform grid."""
        s = np.sign(self(np.linspace(0.0, self.T, n)))
        s = s[s != 0]
        return int(np.count_nonzero(np.diff(s)))

    @property
    def is_zero(self) -> bool:
        return bool(np.all(self(np.linspace(0.0, self.T, 257)) == 0.0))


def _const(c: float = 1.0):
    return (lambda t: np.full_like(t, c), lambda t: np.zeros_like(t))


def _linear(a: float = 1.0, b: float = 0.0):
    return (lambda t: a + b * t, lambda t: np.full_like(t, b))


def _exp_decay(a: float = 1.0, rate: float = 1.0):
    return (lambda t: a * np.exp(-rate * t), lambda t: -rate * a * np.exp(-rate * t))


def _cosine(a: float = 1.0, omega: float = 1.0, phase: float = 0.0):
    return (lambda t: a * np.cos(omega * t + phase),
            lambda t: -a * omega * np.sin(omega * t + phase))


def _affine_exp(beta: float = 0.0):
    return (lambda t: 1.0 + beta * np.exp(t), lambda t: beta * np.exp(t))


#: closed-form profiles by name, each taking keyword parameters
PROFILE_CATALOG: dict[str, Callable[..., tuple[ProfileEvaluator, ProfileEvaluator]]] = {
    "const": _const,
    "linear": _linear,
    "exp_decay": _exp_decay,
    "cosine": _cosine,
    "affine_exp": _affine_exp,
}


def profile_from_catalog(name: str, T: float, *,
                         sign_constant: Optional[bool] = None,
                         **params: float) -> TimeProfile:
    """Build a closed-form :class:`TimeProfile` from :data:`PROFILE_CATALOG`.

    .. code:: python

        g = profile_from_catalog("linear", 0.2, a=1.0, b=-3.0)
    """
    try:
        factory = PROFILE_CATALOG[name]
    except KeyError:
        raise ValueError(
            f"unknown profile '{name}'; expected one of {sorted(PROFILE_CATALOG)}"
        ) from None

    try:
        g, dg = factory(**{k: float(v) for k, v in params.items()})
    except TypeError as exc:
        raise ValueError(f"bad parameters for profile '{name}': {exc}") from None

    label = name
    if params:
        label += "(" + ", ".join(f"{k}={v!r}" for k, v in sorted(params.items())) + ")"

    return TimeProfile(g, float(T), derivative=dg, sign_constant=sign_constant,
                       label=label)


def sampled_profile(values: Sequence[float], T: float, *,
                    sign_constant: Optional[bool] = None,
                    label: str = "sampled") -> TimeProfile:
    """Natural cubic spline through samples on a uniform grid of ``[0, T]``."""
    from scipy.interpolate import CubicSpline

    y = np.asarray(values, dtype=float)
    if y.ndim != 1 or y.size < 2:
        raise ValueError("a sampled profile needs at least 2 samples")
    if not np.all(np.isfinite(y)):
        raise ValueError("profile samples must be finite")

    t = np.linspace(0.0, T, y.size)
    if y.size == 2:
        # a natural spline through two points is the chord
        slope = (y[1] - y[0]) / T
        return TimeProfile(lambda s: y[0] + slope * s, float(T), kind="sampled",
                           derivative=lambda s: np.full_like(s, slope),
                           sign_constant=sign_constant, label=label)

    spline = CubicSpline(t, y, bc_type="natural")
    dspline = spline.derivative()
    return TimeProfile(spline, float(T), kind="sampled", derivative=dspline,
                       sign_constant=sign_constant, label=label,
                       breakpoints=tuple(float(x) for x in t[1:-1]))

# }}}


# {{{ quadrature

@dataclass(frozen=True)
class QuadratureRule:
    """Composite Gauss-Legendre rule on a graded mesh.

    :arg panels: number of graded panels on the integration interval.
    :arg nodes_per_panel: Gauss-Legendre nodes per panel.
    :arg grading_exponent: mesh points ``s_j = t (j / panels)**q`` in the
        distance ``s = t - eta`` from the kernel endpoint. *None* selects
        ``q = max(2, ceil(3 / rho))``.
    :arg rtol: tolerance for the panel-doubling error estimate, relative to
        the integral of the absolute value of the integrand.
    :arg max_doublings: number of times the panel count may be doubled
        before an :class:`~subdiff_inverse.special_functions.AccuracyWarning`
        is emitted.
    """

    panels: int = 16
    nodes_per_panel: int = 12
    grading_exponent: Optional[float] = None
    rtol: float = 1.0e-11
    max_doublings: int = 4

    def __post_init__(self) -> None:
        if self.panels < 1:
            raise ValueError(f"panels must be >= 1: {self.panels}")
        if self.nodes_per_panel < 2:
            raise ValueError(f"nodes_per_panel must be >= 2: {self.nodes_per_panel}")
        if self.grading_exponent is not None and not self.grading_exponent >= 1:
            raise ValueError(f"grading_exponent must be >= 1: {self.grading_exponent}")
        if not self.rtol > 0:
            raise ValueError(f"rtol must be positive: {self.rtol}")
        if self.max_doublings < 0:
            raise ValueError(f"max_doublings must be >= 0: {self.max_doublings}")

    def grading(self, rho: float) -> float:
        if self.grading_exponent is not None:
            return float(self.grading_exponent)
        return float(max(2, math.ceil(3.0 / rho)))


DEFAULT_RULE = QuadratureRule()


@lru_cache(maxsize=64)
def _gauss(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


# geometric layer points reach down to 2**-_LAYER_DEPTH / lam
_LAYER_DEPTH = 12


def _w_edges(rho: float, lam: float, t: float, g: TimeProfile,
             panels: int, q: float) -> np.ndarray:
    """Panel edges in ``w = s**rho`` on ``[0, t**rho]``."""
    W = t**rho
    # graded in s, i.e. exponent q * rho in w
    j = np.arange(panels + 1) / panels
    edges = [W * j ** (q * rho)]

    # boundary layer of E(-lam w) at w ~ 1 / lam
    if lam * W > 2.0**-_LAYER_DEPTH:
        layer = 2.0 ** np.arange(-_LAYER_DEPTH, math.ceil(math.log2(lam * W)) + 1) / lam
        edges.append(layer[layer < W])

    # spline knots of g at eta = t - s
    if g.breakpoints:
        bp = np.asarray(g.breakpoints)
        bp = bp[bp < t]
        edges.append((t - bp) ** rho)

    e = np.unique(np.concatenate(edges))
    e = e[(e >= 0.0) & (e <= W)]
    e[0], e[-1] = 0.0, W
    # drop slivers created by nearly coincident breakpoints
    keep = np.concatenate([[True], np.diff(e) > 1.0e-15 * W])
    e = e[keep]
    e[-1] = W
    return e


def _refine(edges: np.ndarray) -> np.ndarray:
    mid = 0.5 * (edges[:-1] + edges[1:])
    out = np.empty(2 * edges.size - 1)
    out[0::2] = edges
    out[1::2] = mid
    return out


def _nodes(edges: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = _gauss(n)
    a, b = edges[:-1], edges[1:]
    h = 0.5 * (b - a)
    nodes = (0.5 * (a + b))[:, None] + h[:, None] * x
    weights = h[:, None] * w
    return nodes.ravel(), weights.ravel()


# integrand(w, t) -> values, both arrays of equal shape
Integrand = Callable[[np.ndarray, np.ndarray], np.ndarray]


def _integrate_batch(integrand: Integrand, rho: float, lam: float,
                     g: TimeProfile, ts: np.ndarray,
                     rule: QuadratureRule) -> tuple[np.ndarray, np.ndarray]:
    """Integrate ``integrand(w, t)`` over ``w in [0, t**rho]`` for each ``t``.

    :returns: ``(values, estimates)`` where the estimate is the difference
        between the mesh and its uniform refinement.
    """
    ts = np.asarray(ts, dtype=float)
    values = np.zeros(ts.shape)
    estimates = np.zeros(ts.shape)
    q = rule.grading(rho)
    n = rule.nodes_per_panel

    todo = np.nonzero(ts > 0.0)[0]
    panels = rule.panels
    for attempt in range(rule.max_doublings + 1):
        if todo.size == 0:
            break

        nodes, weights, owner, level = [], [], [], []
        for i in todo:
            e1 = _w_edges(rho, lam, float(ts[i]), g, panels, q)
            for lev, e in enumerate((e1, _refine(e1))):
                x, w = _nodes(e, n)
                nodes.append(x)
                weights.append(w)
                owner.append(np.full(x.size, i))
                level.append(np.full(x.size, lev))

        x = np.concatenate(nodes)
        w = np.concatenate(weights)
        own = np.concatenate(owner)
        lev = np.concatenate(level)
        f = integrand(x, ts[own])

        size = ts.size
        coarse = np.bincount(own[lev == 0], (w * f)[lev == 0], minlength=size)
        fine = np.bincount(own[lev == 1], (w * f)[lev == 1], minlength=size)
        scale = np.bincount(own[lev == 1], (w * np.abs(f))[lev == 1], minlength=size)

        est = np.abs(fine - coarse)
        values[todo] = fine[todo]
        estimates[todo] = est[todo]

        ok = est[todo] <= rule.rtol * scale[todo]
        todo = todo[~ok]
        if todo.size and attempt < rule.max_doublings:
            log.debug("lambda=%g: refining %d of %d points to %d panels",
                      lam, todo.size, ts.size, 2 * panels)
        panels *= 2

    if todo.size:
        worst = int(todo[np.argmax(estimates[todo])])
        warnings.warn(AccuracyWarning(
            f"kernel quadrature did not reach rtol={rule.rtol:.1e} "
            f"(rho={rho}, lambda={lam}, t={ts[worst]!r}, "
            f"estimate {estimates[worst]:.3e})", float(estimates[worst])),
            stacklevel=3)

    return values, estimates

# }}}


# {{{ kernels

def _check_args(rho: float, lam: float) -> None:
    if not 0.0 < rho <= 1.0:
        raise ValueError(f"rho out of (0, 1]: {rho!r}")
    if not lam > 0.0:
        raise ValueError(f"lambda must be positive: {lam!r}")


def _eta(t: np.ndarray, w: np.ndarray, rho: float) -> np.ndarray:
    # t - w**(1/rho), guarded against round-off below zero
    return np.clip(t - w ** (1.0 / rho), 0.0, t)


def convolve_source(rho: float, lam: float, g: TimeProfile, t,
                    rule: QuadratureRule = DEFAULT_RULE, *,
                    return_estimate: bool = False):
    """Source convolution ``C(t)`` of a mode with eigenvalue *lam*.

    *t* may be a scalar or an array of times in ``[0, g.T]``; ``C(0) = 0``.
    """
    _check_args(rho, lam)
    ta = np.asarray(t, dtype=float)
    ts = np.atleast_1d(ta).ravel()
    if np.any(ts < 0.0) or np.any(ts > g.T * (1 + 1e-14)):
        raise ValueError(f"t outside [0, {g.T}]")

    def integrand(w, tt):
        return mittag_leffler(-lam * w, rho, rho) * g(_eta(tt, w, rho)) / rho

    values, est = _integrate_batch(integrand, rho, lam, g, ts, rule)
    if ta.ndim == 0:
        values, est = float(values[0]), float(est[0])
    else:
        values, est = values.reshape(ta.shape), est.reshape(ta.shape)

    return (values, est) if return_estimate else values


def p_k(rho: float, lam: float, g: TimeProfile, T: Optional[float] = None,
        rule: QuadratureRule = DEFAULT_RULE, *,
        return_estimate: bool = False):
    """Overdetermination kernel ``p_{k,rho}(T)`` for eigenvalue *lam*."""
    _check_args(rho, lam)
    T = g.T if T is None else float(T)
    if not 0.0 < T <= g.T * (1 + 1e-14):
        raise ValueError(f"T must lie in (0, {g.T}]: {T!r}")

    def integrand(w, tt):
        return (w ** (1.0 / rho) * mittag_leffler(-lam * w, rho, rho + 1.0)
                * g(_eta(tt, w, rho)) / rho)

    values, est = _integrate_batch(integrand, rho, lam, g, np.array([T]), rule)
    return (float(values[0]), float(est[0])) if return_estimate else float(values[0])


def p_k_many(rho: float, lambdas, g: TimeProfile, T: Optional[float] = None,
             rule: QuadratureRule = DEFAULT_RULE) -> np.ndarray:
    """:func:`p_k` for every eigenvalue in *lambdas*."""
    return np.array([p_k(rho, float(lam), g, T, rule) for lam in np.asarray(lambdas)])


def _time_edges(rho: float, lam: float, g: TimeProfile, T: float,
                panels: int) -> np.ndarray:
    # the convolution behaves like t**rho near t = 0, has a layer of width
    # lam**(-1/rho) and then an algebraic transient, so panels grow
    # geometrically from 1e-14 T (below which the integral is negligible)
    bottom = 1.0e-14 * T
    layer = bottom * 2.0 ** np.arange(math.ceil(math.log2(T / bottom)) + 1)
    uniform = np.linspace(0.0, T, panels + 1)
    e = np.unique(np.concatenate([[0.0], layer, uniform, np.asarray(g.breakpoints)]))
    e = e[(e >= 0.0) & (e < T)]
    return np.append(e, T)


def time_quadrature(rho: float, lam: float, g: TimeProfile,
                    T: Optional[float] = None,
                    rule: QuadratureRule = DEFAULT_RULE, *,
                    refinements: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Gauss nodes and weights on ``[0, T]`` suited to time integrals of a
    mode: panels halve in width toward ``t = 0`` down to ``1e-14 T``, which
    resolves both the ``t**rho`` behaviour and the layer of width
    ``lam**(-1/rho)``, plus *rule.panels* uniform panels.

    :arg refinements: number of times every panel is bisected.
    """
    _check_args(rho, lam)
    T = g.T if T is None else float(T)
    e = _time_edges(rho, lam, g, T, rule.panels)
    for _ in range(refinements):
        e = _refine(e)
    return _nodes(e, rule.nodes_per_panel)


def ml_power_integral(rho: float, beta: float, lam: float, t: float,
                      rule: QuadratureRule = DEFAULT_RULE) -> float:
    """Numerical ``int_0^t eta**(beta - 1) E_{rho,beta}(lam eta**rho) d eta``.

    With ``v = eta**beta`` the integrand becomes the bounded function
    ``E_{rho,beta}(lam v**(rho / beta)) / beta``, which is integrated on
    panels growing geometrically away from ``v = 0``. In closed form the
    integral equals ``t**beta E_{rho,beta+1}(lam t**rho)``; this routine
    exists to check that identity.
    """
    if not 0.0 < rho <= 1.0:
        raise ValueError(f"rho out of (0, 1]: {rho!r}")
    if not (beta > 0 and t > 0):
        raise ValueError("beta and t must be positive")

    V = t**beta

    def f(v):
        return mittag_leffler(lam * v ** (rho / beta), rho, beta) / beta

    e = np.unique(np.concatenate([
        V * 2.0 ** -np.arange(60.0, 0.0, -1.0),
        np.linspace(0.0, V, rule.panels + 1)]))
    prev = math.nan
    for _ in range(rule.max_doublings + 1):
        x, w = _nodes(e, rule.nodes_per_panel)
        val = float(w @ f(x))
        if abs(val - prev) <= 1e-12 * float(w @ np.abs(f(x))):
            return val
        prev = val
        e = _refine(e)

    warnings.warn(f"ml_power_integral did not converge (rho={rho}, beta={beta}, "
                  f"lambda={lam}, t={t})", AccuracyWarning, stacklevel=2)
    return val


def double_integral_identity_check(rho: float, lam: float, g: TimeProfile,
                                   T: Optional[float] = None,
                                   rule: QuadratureRule = DEFAULT_RULE
                                   ) -> tuple[float, float]:
    """Compare the iterated integral of the convolution with :func:`p_k`.

    The left side integrates ``C(t)`` over ``t in [0, T]`` with an outer
    Gauss rule (geometric toward ``t = 0``), refined until two successive
    meshes agree; the right side is :func:`p_k`.
    """
    _check_args(rho, lam)
    T = g.T if T is None else float(T)

    e = _time_edges(rho, lam, g, T, rule.panels)
    lhs = math.nan
    for _ in range(rule.max_doublings + 1):
        t, w = _nodes(e, rule.nodes_per_panel)
        t2, w2 = _nodes(_refine(e), rule.nodes_per_panel)
        c = convolve_source(rho, lam, g, np.concatenate([t, t2]), rule)
        coarse, lhs = float(w @ c[:t.size]), float(w2 @ c[t.size:])
        if abs(lhs - coarse) <= 1e-10 * max(abs(lhs), 1e-300):
            break
        e = _refine(e)
    else:
        warnings.warn(AccuracyWarning(
            f"outer time quadrature did not converge (rho={rho}, lambda={lam})",
            abs(lhs - coarse)), stacklevel=2)

    return lhs, p_k(rho, lam, g, T, rule)


def psi_coefficient(rho: float, lam: float, T: float, phi_k: float, f_k: float,
                    g: TimeProfile, rule: QuadratureRule = DEFAULT_RULE, *,
                    p: Optional[float] = None) -> float:
    """Exact time integral ``int_0^T u_k dt`` of one mode.

    :arg p: precomputed ``p_{k,rho}(T)``; evaluated when omitted and needed.
    """
    _check_args(rho, lam)
    out = phi_k * T * mittag_leffler(-lam * T**rho, rho, 2.0) if phi_k else 0.0
    if f_k:
        out += f_k * (p_k(rho, lam, g, T, rule) if p is None else p)
    return float(out)


def affine_exp_beta(rho: float, lam: float, T: float,
                    rule: QuadratureRule = DEFAULT_RULE) -> float:
    """The ``beta`` for which ``g(t) = 1 + beta exp(t)`` has ``p(T) = 0``.

    Since ``p`` is linear in ``g``, ``beta = -p[1] / p[exp]`` exactly.
    """
    one = profile_from_catalog("const", T, c=1.0)
    ex = profile_from_catalog("exp_decay", T, a=1.0, rate=-1.0)
    return -p_k(rho, lam, one, T, rule) / p_k(rho, lam, ex, T, rule)

# }}}


# {{{ empirical kernel bounds

def zero_threshold(rho: float, lam, T: float, eps_b: float = 1.0e-9):
    """Threshold below which ``|p_{k,rho}(T)|`` counts as zero.

    Scaled by ``T**(rho + 1) / (1 + lam T**rho)``, the size of ``p`` for a
    unit profile, so that the classification is uniform in ``k``.
    """
    lam = np.asarray(lam, dtype=float)
    return eps_b * T ** (rho + 1.0) / (1.0 + lam * T**rho)


@dataclass(frozen=True)
class KernelBoundStats:
    """Empirical two-sided ``1/lambda_k`` bound for ``p_{k,rho}(T)``.

    .. attribute:: scaled

        ``lambda_k |p_k|`` for ``k = 1..K``.

    .. attribute:: k0

        Smallest (1-based) index from which ``scaled`` stays within a band
        of ratio at most ``band`` and no kernel is classified as zero.
        ``K + 1`` if there is no such index.
    """

    p: np.ndarray
    scaled: np.ndarray
    k0: int
    band: float
    band_ratio: float
    lower: float
    upper: float
    head_mean: float
    tail_mean: float

    @property
    def drift(self) -> float:
        """Ratio of the geometric means of the last and first windows."""
        return self.tail_mean / self.head_mean

    def summary(self) -> str:
        return (f"k0={self.k0} band=[{self.lower:.4e}, {self.upper:.4e}] "
                f"ratio={self.band_ratio:.3f} drift={self.drift:.3f}")


def kernel_bound_stats(rho: float, lambdas, g: TimeProfile,
                       T: Optional[float] = None,
                       rule: QuadratureRule = DEFAULT_RULE, *,
                       band: float = 50.0, window: int = 20,
                       eps_b: float = 1.0e-9,
                       p: Optional[np.ndarray] = None) -> KernelBoundStats:
    """Check that ``lambda_k |p_{k,rho}(T)|`` is bounded above and below.

    The geometric means over the first and last *window* indices at or
    beyond ``k0`` expose a drift toward zero or infinity.
    """
    lam = np.asarray(lambdas, dtype=float)
    T = g.T if T is None else float(T)
    if p is None:
        p = p_k_many(rho, lam, g, T, rule)
    p = np.asarray(p, dtype=float)

    scaled = lam * np.abs(p)
    nonzero = np.abs(p) > zero_threshold(rho, lam, T, eps_b)

    # scan suffixes from the end
    K = lam.size
    k0 = K + 1
    hi, lo = 0.0, math.inf
    for i in range(K - 1, -1, -1):
        if not nonzero[i]:
            break
        hi, lo = max(hi, scaled[i]), min(lo, scaled[i])
        if hi > band * lo:
            break
        k0 = i + 1

    tail = scaled[k0 - 1:]
    if tail.size:
        lower, upper = float(tail.min()), float(tail.max())
        wlen = min(window, tail.size)
        head_mean = float(np.exp(np.mean(np.log(tail[:wlen]))))
        tail_mean = float(np.exp(np.mean(np.log(tail[-wlen:]))))
    else:
        lower = upper = head_mean = tail_mean = math.nan

    return KernelBoundStats(
        p=p, scaled=scaled, k0=k0, band=band,
        band_ratio=upper / lower if tail.size else math.inf,
        lower=lower, upper=upper, head_mean=head_mean, tail_mean=tail_mean)

# }}}

# vim: foldmethod=marker
