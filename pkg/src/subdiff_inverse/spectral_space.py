"""Operators given by eigenpairs and elements of H given by Fourier coefficients.

A positive self-adjoint operator ``A`` with a complete orthonormal system of
eigenfunctions ``v_k`` is represented by the prefix ``lambda_1 <= ... <=
lambda_K`` of its spectrum. Elements ``h`` of the Hilbert space are stored as
their coefficients ``h_k = (h, v_k)``, ``k = 1..K``.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence, Union

import numpy as np

__all__ = [
    "SpectralOperator",
    "SpectralVector",
    "dirichlet_laplacian_1d",
    "project",
    "reconstruct",
    "apply_power",
    "norm_tau",
    "inner_tau",
    "domain_tail_ratio",
    "check_domain_membership",
    "write_vector_csv",
    "read_vector_csv",
    "write_operator_csv",
    "read_operator_csv",
]

EigenfunctionEvaluator = Callable[[int, np.ndarray], np.ndarray]

# warn when the last retained coefficient still carries this much weight
TAIL_WARN_RATIO = 1.0e-6


def _readonly(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SpectralOperator:
    """Eigenvalue prefix of ``A`` and, optionally, its eigenfunctions.

    :arg eigenvalues: positive, non-decreasing ``lambda_1..lambda_K``.
    :arg eigenfunction: ``(k, x) -> v_k(x)`` with 1-based ``k``; only needed
        to move between coefficients and physical space.
    :arg domain: interval ``(a, b)`` on which the eigenfunctions live.
    """

    eigenvalues: np.ndarray
    eigenfunction: Optional[EigenfunctionEvaluator] = field(default=None, compare=False)
    domain: Optional[tuple[float, float]] = None
    label: str = "explicit"

    def __post_init__(self) -> None:
        lam = _readonly(self.eigenvalues)
        if lam.ndim != 1 or lam.size == 0:
            raise ValueError("eigenvalues must be a non-empty 1d sequence")
        if not np.all(np.isfinite(lam)) or lam[0] <= 0:
            raise ValueError("eigenvalues must be finite and positive")
        if np.any(np.diff(lam) < 0):
            raise ValueError("eigenvalues must be non-decreasing")
        object.__setattr__(self, "eigenvalues", lam)

    @property
    def K(self) -> int:
        return int(self.eigenvalues.size)

    @property
    def lower_bound(self) -> float:
        """Coercivity constant ``(Ah, h) >= C (h, h)``, i.e. ``lambda_1``."""
        return float(self.eigenvalues[0])

    def eval_eigenfunctions(self, x) -> np.ndarray:
        """Matrix ``V[k-1, j] = v_k(x_j)``."""
        if self.eigenfunction is None:
            raise ValueError(f"operator '{self.label}' has no eigenfunction evaluator")
        x = np.asarray(x, dtype=float)
        return np.stack([self.eigenfunction(k, x) for k in range(1, self.K + 1)])

    def truncate(self, K: int) -> "SpectralOperator":
        return SpectralOperator(self.eigenvalues[:K], self.eigenfunction,
                                self.domain, self.label)


@dataclass(frozen=True)
class SpectralVector:
    """Fourier coefficients ``h_1..h_K`` of an element of ``H``."""

    coeffs: np.ndarray

    def __post_init__(self) -> None:
        c = _readonly(self.coeffs)
        if c.ndim != 1 or c.size == 0:
            raise ValueError("coefficients must be a non-empty 1d sequence")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zeros(cls, K: int) -> "SpectralVector":
        return cls(np.zeros(K))

    @classmethod
    def unit(cls, K: int, k: int, value: float = 1.0) -> "SpectralVector":
        c = np.zeros(K)
        c[k - 1] = value
        return cls(c)

    @property
    def K(self) -> int:
        return int(self.coeffs.size)

    def __len__(self) -> int:
        return self.K

    def __getitem__(self, k: int) -> float:
        """Coefficient ``h_k`` with 1-based ``k``."""
        if not 1 <= k <= self.K:
            raise IndexError(k)
        return float(self.coeffs[k - 1])

    def __add__(self, other: "SpectralVector") -> "SpectralVector":
        _check_same_K(self, other)
        return SpectralVector(self.coeffs + other.coeffs)

    def __sub__(self, other: "SpectralVector") -> "SpectralVector":
        _check_same_K(self, other)
        return SpectralVector(self.coeffs - other.coeffs)

    def __mul__(self, c: float) -> "SpectralVector":
        return SpectralVector(float(c) * self.coeffs)

    __rmul__ = __mul__

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))


def _check_same_K(*vs) -> None:
    Ks = {v.K for v in vs}
    if len(Ks) != 1:
        raise ValueError(f"truncation levels differ: {sorted(Ks)}")


def _check_operator_K(operator: SpectralOperator, v: SpectralVector) -> None:
    if operator.K != v.K:
        raise ValueError(f"operator has K={operator.K} but vector has K={v.K}")


def dirichlet_laplacian_1d(length: float, K: int) -> SpectralOperator:
    """``-d^2/dx^2`` on ``(0, length)`` with homogeneous Dirichlet conditions.

    ``lambda_k = (k pi / length)^2`` and
    ``v_k(x) = sqrt(2 / length) sin(k pi x / length)``.
    """
    if not length > 0:
        raise ValueError(f"length must be positive: {length!r}")
    if int(K) != K or K < 1:
        raise ValueError(f"K must be a positive integer: {K!r}")
    K = int(K)

    k = np.arange(1, K + 1)
    lam = (k * np.pi / length) ** 2
    scale = math.sqrt(2.0 / length)

    def v(k: int, x: np.ndarray) -> np.ndarray:
        return scale * np.sin(k * np.pi * np.asarray(x, dtype=float) / length)

    return SpectralOperator(lam, v, (0.0, float(length)), f"dirichlet_1d(L={length!r})")


# {{{ projection


def _gauss_legendre_composite(a: float, b: float, nodes: int,
                              per_panel: int = 16) -> tuple[np.ndarray, np.ndarray]:
    panels = max(1, math.ceil(nodes / per_panel))
    q = max(2, math.ceil(nodes / panels))
    xg, wg = np.polynomial.legendre.leggauss(q)
    edges = np.linspace(a, b, panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    x = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
    w = (half[:, None] * wg[None, :]).ravel()
    return x, w


Samples = Union[Callable[[np.ndarray], np.ndarray], tuple[Sequence[float], Sequence[float]]]


def project(operator: SpectralOperator, samples: Samples,
            quad_nodes: int = 256) -> SpectralVector:
    """Fourier coefficients ``h_k = int h(x) v_k(x) dx``.

    :arg samples: either a callable ``h(x)`` or a pair ``(x, values)`` of
        grid data, which is interpolated with a natural cubic spline.
    :arg quad_nodes: total number of composite Gauss-Legendre nodes.
    """
    if operator.eigenfunction is None or operator.domain is None:
        raise ValueError("projection needs an eigenfunction evaluator and a domain")
    if quad_nodes < operator.K:
        warnings.warn(
            f"quad_nodes={quad_nodes} < K={operator.K}: high modes are aliased",
            RuntimeWarning, stacklevel=2,
        )

    if callable(samples):
        h = samples
    else:
        from scipy.interpolate import CubicSpline

        xs, ys = (np.asarray(a, dtype=float) for a in samples)
        h = CubicSpline(xs, ys, bc_type="natural")

    a, b = operator.domain
    x, w = _gauss_legendre_composite(a, b, quad_nodes)
    hx = np.asarray(h(x), dtype=float) * w
    return SpectralVector(operator.eval_eigenfunctions(x) @ hx)


def reconstruct(operator: SpectralOperator, v: SpectralVector, x) -> np.ndarray:
    """Physical-space values ``sum_k h_k v_k(x)``."""
    _check_operator_K(operator, v)
    return v.coeffs @ operator.eval_eigenfunctions(x)


# }}}


# {{{ fractional powers


def apply_power(operator: SpectralOperator, tau: float, v: SpectralVector) -> SpectralVector:
    """``A^tau v``, i.e. coefficients ``lambda_k^tau h_k``."""
    _check_operator_K(operator, v)
    return SpectralVector(operator.eigenvalues ** tau * v.coeffs)


def inner_tau(operator: SpectralOperator, tau: float,
              u: SpectralVector, v: SpectralVector) -> float:
    """``(u, v)_tau = sum_k lambda_k^{2 tau} u_k v_k``."""
    _check_operator_K(operator, u)
    _check_operator_K(operator, v)
    return float(np.sum(operator.eigenvalues ** (2 * tau) * u.coeffs * v.coeffs))


def norm_tau(operator: SpectralOperator, tau: float, v: SpectralVector) -> float:
    """Norm of ``D(A^tau)``; ``tau = 0`` is the norm of ``H``."""
    _check_operator_K(operator, v)
    # scale before squaring to avoid overflow for large lambda_k^tau
    return float(np.linalg.norm(operator.eigenvalues ** tau * v.coeffs))


def domain_tail_ratio(operator: SpectralOperator, v: SpectralVector,
                      tau: float = 1.0) -> float:
    """``lambda_K^{2 tau} h_K^2 / max_k lambda_k^{2 tau} h_k^2``.

    A finite truncation is always in ``D(A^tau)``; this ratio is the
    diagnostic for whether the coefficients have decayed by the last mode.
    """
    _check_operator_K(operator, v)
    w = (operator.eigenvalues ** tau * v.coeffs) ** 2
    top = w.max()
    return 0.0 if top == 0 else float(w[-1] / top)


def check_domain_membership(operator: SpectralOperator, v: SpectralVector,
                            tau: float = 1.0, name: str = "vector") -> float:
    """Warn if ``v`` does not look like an element of ``D(A^tau)``."""
    ratio = domain_tail_ratio(operator, v, tau)
    if ratio > TAIL_WARN_RATIO:
        warnings.warn(
            f"{name}: D(A^{tau}) tail ratio {ratio:.3e} exceeds "
            f"{TAIL_WARN_RATIO:.0e}; the truncation K={v.K} may be too small",
            RuntimeWarning, stacklevel=2,
        )
    return ratio


# }}}


# {{{ csv


def _fmt(x: float) -> str:
    # repr is the shortest string that round-trips
    return repr(float(x))


def write_vector_csv(path, v: SpectralVector) -> None:
    with open(path, "w", newline="") as fd:
        w = csv.writer(fd, lineterminator="\n")
        w.writerow(["k", "coeff"])
        for k, c in enumerate(v.coeffs, start=1):
            w.writerow([k, _fmt(c)])


def read_vector_csv(path) -> SpectralVector:
    with open(path, newline="") as fd:
        rows = list(csv.DictReader(fd))
    if not rows or set(rows[0]) != {"k", "coeff"}:
        raise ValueError(f"{path}: expected header 'k,coeff'")
    ks = [int(r["k"]) for r in rows]
    if ks != list(range(1, len(ks) + 1)):
        raise ValueError(f"{path}: indices must be 1..K in order")
    return SpectralVector([float(r["coeff"]) for r in rows])


def write_operator_csv(path, operator: SpectralOperator) -> None:
    with open(path, "w", newline="") as fd:
        fd.write(f"# label: {operator.label}\n")
        w = csv.writer(fd, lineterminator="\n")
        w.writerow(["k", "lambda"])
        for k, lam in enumerate(operator.eigenvalues, start=1):
            w.writerow([k, _fmt(lam)])


def read_operator_csv(path) -> SpectralOperator:
    text = Path(path).read_text().splitlines()
    label = "explicit"
    if text and text[0].startswith("#"):
        head = text.pop(0).lstrip("#").strip()
        if head.startswith("label:"):
            label = head[len("label:"):].strip()
    rows = list(csv.DictReader(text))
    if not rows or set(rows[0]) != {"k", "lambda"}:
        raise ValueError(f"{path}: expected header 'k,lambda'")
    return SpectralOperator([float(r["lambda"]) for r in rows], label=label)


# }}}
