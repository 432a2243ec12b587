"""Command-line front end.

Problems are described by INI files with one section per component::

    [problem]
    rho = 0.5
    T = 1.0
    K = 32

    [operator]
    kind = dirichlet_1d
    length = 1.0

    [g]
    kind = exp_decay
    rate = 1.0
    sign_constant = true

    [phi]
    kind = random
    seed = 1
    decay = 2

    [f]
    kind = coeffs
    values = 1, 0, 0.5

Subcommands::

    subdiff-inverse forward CONFIG
    subdiff-inverse inverse CONFIG
    subdiff-inverse roundtrip CONFIG
    subdiff-inverse ml-eval --rho R --mu M --z Z
    subdiff-inverse selftest [--quick]

Outputs go to ``[output] dir`` unless the environment variable
``SUBDIFF_OUTPUT_DIR`` is set. A ``diagnostics.txt`` report is written for
every run, including failed ones.
"""

from __future__ import annotations

import argparse
import ast
import configparser
import math
import operator as _op
import os
import re
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from subdiff_inverse.forward_solver import (
    ForwardProblem,
    default_times,
    integrate_trajectory,
    solve_forward,
    write_field_csv,
    write_trajectory_csv,
)
from subdiff_inverse.inverse_solver import (
    DEFAULT_EPS_B,
    InverseProblem,
    diagnostics_report,
    partition_modes,
    read_solution_csv,
    reconstruct_u,
    solve_inverse,
    write_solution_csv,
)
from subdiff_inverse.kernel import (
    PROFILE_CATALOG,
    QuadratureRule,
    TimeProfile,
    affine_exp_beta,
    kernel_bound_stats,
    p_k_many,
    profile_from_catalog,
    sampled_profile,
)
from subdiff_inverse.spectral_space import (
    SpectralOperator,
    SpectralVector,
    dirichlet_laplacian_1d,
    project,
    read_operator_csv,
    read_vector_csv,
    write_vector_csv,
)
from subdiff_inverse.special_functions import AccuracyWarning, MLParams, ml_eval

#: environment variable overriding ``[output] dir``
OUTPUT_DIR_ENV = "SUBDIFF_OUTPUT_DIR"

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_UNSOLVABLE = 3
EXIT_NUMERICAL = 4
EXIT_IO = 5

MODES = ("forward", "inverse", "roundtrip")


class ConfigError(ValueError):
    """Invalid configuration file."""


# {{{ config schema

_PROFILE_KEYS = {
    "const": {"c"},
    "linear": {"a", "b"},
    "exp_decay": {"a", "rate"},
    "cosine": {"a", "omega", "phase"},
    "affine_exp": {"beta", "zero_mode"},
}
assert set(_PROFILE_KEYS) == set(PROFILE_CATALOG)

_VECTOR_KEYS = {
    "zero": set(),
    "coeffs": {"values"},
    "file": {"path"},
    "function": {"name", "quad_nodes", "n", "amplitude", "center", "width"},
    "random": {"seed", "decay", "scale"},
    "forward": {"perturb"},
}

_SECTIONS = {
    "problem": {"rho", "t", "k"},
    "operator": {"kind", "length", "eigenvalues", "path"},
    "g": {"kind", "sign_constant", "values", "path"}.union(*_PROFILE_KEYS.values()),
    "quadrature": {"panels", "nodes_per_panel", "grading_exponent", "rtol",
                   "max_doublings"},
    "inverse": {"eps_b", "tol_solv", "free_values"},
    "roundtrip": {"psi_method"},
    "output": {"dir", "times", "field_points", "trajectory"},
}
_VECTOR_SECTIONS = ("phi", "f", "psi", "source")

# vector sections required (and allowed) by each mode
_MODE_VECTORS = {
    "forward": ({"phi", "f"}, set()),
    "inverse": ({"phi", "psi"}, {"source"}),
    "roundtrip": ({"phi", "f"}, set()),
}


@dataclass(frozen=True)
class RunConfig:
    """A validated configuration for one of :data:`MODES`."""

    mode: str
    path: Path
    rho: float
    T: float
    K: int
    operator: SpectralOperator
    g: TimeProfile
    phi: SpectralVector
    f: Optional[SpectralVector] = None
    psi: Optional[SpectralVector] = None
    rule: QuadratureRule = field(default_factory=QuadratureRule)
    eps_b: float = DEFAULT_EPS_B
    tol_solv: Optional[float] = None
    free_values: dict[int, float] = field(default_factory=dict)
    psi_method: str = "spectral"
    output_dir: Path = Path("subdiff_out")
    times: int = 129
    field_points: int = 0
    trajectory: bool = True


_BINOPS = {ast.Add: _op.add, ast.Sub: _op.sub, ast.Mult: _op.mul,
           ast.Div: _op.truediv, ast.Pow: _op.pow}
_UNOPS = {ast.UAdd: _op.pos, ast.USub: _op.neg}
_CONSTANTS = {"pi": math.pi, "e": math.e}


def _number(text: str) -> float:
    """Parse a number, allowing simple arithmetic with ``pi`` and ``e``."""
    try:
        return float(text)
    except ValueError:
        pass

    def ev(node):
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id in _CONSTANTS:
            return _CONSTANTS[node.id]
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNOPS:
            return _UNOPS[type(node.op)](ev(node.operand))
        raise ValueError(text)

    try:
        return float(ev(ast.parse(text, mode="eval").body))
    except (SyntaxError, ZeroDivisionError, OverflowError, TypeError):
        raise ValueError(text) from None


def _locate(text: str, section: str, key: Optional[str] = None) -> int:
    """1-based line number of a section header or of a key inside it."""
    current = None
    for i, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        m = re.match(r"\[([^\]]+)\]", s)
        if m:
            current = m.group(1).strip().lower()
            if key is None and current == section:
                return i
            continue
        if current == section and key is not None:
            m = re.match(r"([^=:]+)[=:]", s)
            if m and m.group(1).strip().lower() == key:
                return i
    return 0


class _Reader:
    """Typed access to a parsed INI file with located error messages."""

    def __init__(self, path: Path, text: str, cp: configparser.ConfigParser):
        self.path = path
        self.text = text
        self.cp = cp

    def error(self, section: str, key: Optional[str], msg: str) -> ConfigError:
        line = _locate(self.text, section, key)
        where = f"{self.path}:{line}" if line else str(self.path)
        name = f"[{section}]" + (f" {key}" if key else "")
        return ConfigError(f"{where}: {name}: {msg}")

    def has(self, section: str, key: Optional[str] = None) -> bool:
        if key is None:
            return self.cp.has_section(section)
        return self.cp.has_option(section, key)

    def raw(self, section: str, key: str, default=None, required: bool = False):
        if not self.cp.has_option(section, key):
            if required:
                raise self.error(section, None, f"missing required key '{key}'")
            return default
        return self.cp.get(section, key).strip()

    def float(self, section: str, key: str, default=None, required=False):
        v = self.raw(section, key, None, required)
        if v is None:
            return default
        try:
            x = _number(v)
        except ValueError:
            raise self.error(section, key, f"expected a number, got {v!r}") from None
        if not math.isfinite(x):
            raise self.error(section, key, f"must be finite, got {v!r}")
        return x

    def int(self, section: str, key: str, default=None, required=False):
        v = self.raw(section, key, None, required)
        if v is None:
            return default
        try:
            return int(v)
        except ValueError:
            raise self.error(section, key, f"expected an integer, got {v!r}") from None

    def bool(self, section: str, key: str, default=None):
        if not self.cp.has_option(section, key):
            return default
        try:
            return self.cp.getboolean(section, key)
        except ValueError:
            raise self.error(section, key, "expected true or false") from None

    def floats(self, section: str, key: str, required=True) -> Optional[np.ndarray]:
        v = self.raw(section, key, None, required)
        if v is None:
            return None
        try:
            out = np.array([_number(x.strip())
                            for x in v.replace("\n", ",").split(",") if x.strip()])
        except ValueError:
            raise self.error(section, key, "expected comma-separated numbers") from None
        if out.size == 0 or not np.all(np.isfinite(out)):
            raise self.error(section, key, "expected finite comma-separated numbers")
        return out

    def file(self, section: str, key: str) -> Path:
        p = Path(self.raw(section, key, required=True))
        return p if p.is_absolute() else self.path.parent / p

    def check_keys(self, section: str, allowed: set[str]) -> None:
        for key in self.cp.options(section):
            if key not in allowed:
                raise self.error(section, key, f"unknown key '{key}'")

# }}}


# {{{ parse_config

def _parse_operator(r: _Reader, K: int) -> SpectralOperator:
    kind = r.raw("operator", "kind", required=True)
    if kind == "dirichlet_1d":
        r.check_keys("operator", {"kind", "length"})
        length = r.float("operator", "length", required=True)
        if not length > 0:
            raise r.error("operator", "length", "must be positive")
        return dirichlet_laplacian_1d(length, K)

    if kind == "explicit":
        r.check_keys("operator", {"kind", "eigenvalues", "path"})
        if r.has("operator", "path"):
            op = read_operator_csv(r.file("operator", "path"))
        else:
            try:
                op = SpectralOperator(r.floats("operator", "eigenvalues"))
            except ValueError as exc:
                raise r.error("operator", "eigenvalues", str(exc)) from None
        if op.K < K:
            raise r.error("operator", None, f"has {op.K} eigenvalues but K={K}")
        return op.truncate(K) if op.K > K else op

    raise r.error("operator", "kind", f"expected dirichlet_1d or explicit, got {kind!r}")


def _parse_profile(r: _Reader, rho: float, T: float, operator: SpectralOperator,
                   rule: QuadratureRule) -> TimeProfile:
    s = "g"
    kind = r.raw(s, "kind", required=True)
    sign = r.bool(s, "sign_constant")

    if kind == "sampled":
        r.check_keys(s, {"kind", "sign_constant", "values", "path"})
        if r.has(s, "path"):
            data = np.loadtxt(r.file(s, "path"), delimiter=",", ndmin=2)
            values = data[:, -1]
        else:
            values = r.floats(s, "values")
        try:
            return sampled_profile(values, T, sign_constant=sign)
        except ValueError as exc:
            raise r.error(s, None, str(exc)) from None

    if kind not in _PROFILE_KEYS:
        raise r.error(s, "kind", f"expected one of {sorted(_PROFILE_KEYS) + ['sampled']}, "
                      f"got {kind!r}")
    r.check_keys(s, {"kind", "sign_constant"} | _PROFILE_KEYS[kind])

    params = {k: r.float(s, k) for k in _PROFILE_KEYS[kind]
              if k != "zero_mode" and r.has(s, k)}
    if kind == "affine_exp" and r.has(s, "zero_mode"):
        if "beta" in params:
            raise r.error(s, "zero_mode", "give either beta or zero_mode, not both")
        k0 = r.int(s, "zero_mode")
        if not 1 <= k0 <= operator.K:
            raise r.error(s, "zero_mode", f"must lie in 1..{operator.K}")
        params["beta"] = affine_exp_beta(rho, float(operator.eigenvalues[k0 - 1]), T, rule)

    try:
        return profile_from_catalog(kind, T, sign_constant=sign, **params)
    except ValueError as exc:
        raise r.error(s, None, str(exc)) from None


def _named_function(name: str, length: float, params: dict[str, float]):
    n = params.get("n", 1.0)
    amp = params.get("amplitude", 1.0)
    center = params.get("center", 0.5 * length)
    width = params.get("width", 0.1 * length)
    table = {
        "sine": lambda x: amp * np.sin(n * np.pi * x / length),
        "parabola": lambda x: amp * x * (length - x),
        "gaussian": lambda x: amp * np.exp(-0.5 * ((x - center) / width) ** 2),
    }
    return table.get(name)


def _parse_vector(r: _Reader, s: str, K: int, operator: SpectralOperator
                  ) -> SpectralVector:
    kind = r.raw(s, "kind", required=True)
    if kind not in _VECTOR_KEYS or (kind == "forward" and s != "psi"):
        allowed = sorted(k for k in _VECTOR_KEYS if k != "forward" or s == "psi")
        raise r.error(s, "kind", f"expected one of {allowed}, got {kind!r}")
    r.check_keys(s, {"kind"} | _VECTOR_KEYS[kind])

    if kind == "zero":
        return SpectralVector.zeros(K)

    if kind == "coeffs":
        c = r.floats(s, "values")
        if c.size > K:
            raise r.error(s, "values", f"has {c.size} entries but K={K}")
        # missing trailing coefficients are zero
        return SpectralVector(np.concatenate([c, np.zeros(K - c.size)]))

    if kind == "file":
        path = r.file(s, "path")
        header = path.read_text().splitlines()[0].strip() if path.exists() else ""
        v = read_solution_csv(path) if header.startswith("k,f_k") else read_vector_csv(path)
        if v.K != K:
            raise r.error(s, "path", f"{path} has {v.K} coefficients but K={K}")
        return v

    if kind == "function":
        if operator.eigenfunction is None or operator.domain is None:
            raise r.error(s, "kind", "projection needs the dirichlet_1d operator")
        name = r.raw(s, "name", required=True)
        params = {k: r.float(s, k) for k in ("n", "amplitude", "center", "width")
                  if r.has(s, k)}
        fn = _named_function(name, operator.domain[1] - operator.domain[0], params)
        if fn is None:
            raise r.error(s, "name", "expected one of ['gaussian', 'parabola', 'sine']")
        nodes = r.int(s, "quad_nodes", max(512, 8 * K))
        return project(operator, fn, nodes)

    if kind == "random":
        seed = r.int(s, "seed", required=True)
        decay = r.float(s, "decay", 2.0)
        scale = r.float(s, "scale", 1.0)
        rng = np.random.default_rng(seed)
        return SpectralVector(scale * rng.uniform(-1.0, 1.0, K)
                              / operator.eigenvalues**decay)

    raise AssertionError(kind)


def _parse_free_values(r: _Reader) -> dict[int, float]:
    v = r.raw("inverse", "free_values")
    if not v:
        return {}
    out = {}
    for item in v.split(","):
        try:
            k, val = item.split(":")
            out[int(k)] = float(val)
        except ValueError:
            raise r.error("inverse", "free_values",
                          f"expected 'k:value, ...', got {item.strip()!r}") from None
    return out


def _parse_perturbation(r: _Reader) -> dict[int, float]:
    v = r.raw("psi", "perturb")
    out: dict[int, float] = {}
    if not v:
        return out
    for item in v.split(","):
        try:
            k, val = item.split(":")
            out[int(k)] = float(val)
        except ValueError:
            raise r.error("psi", "perturb",
                          f"expected 'k:delta, ...', got {item.strip()!r}") from None
    return out


def parse_config(path, mode: str) -> RunConfig:
    """Read and validate the configuration of a *mode* run.

    :raises ConfigError: located as ``path:line`` and naming the field.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode: {mode!r}")

    path = Path(path)
    text = path.read_text()
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text, source=str(path))
    except configparser.ParsingError as exc:
        line, content = exc.errors[0]
        if content[:1] in "'\"":
            # stored as repr(line) by configparser
            content = ast.literal_eval(content)
        raise ConfigError(f"{path}:{line}: cannot parse line {content.strip()!r}") from None
    except configparser.Error as exc:
        line = getattr(exc, "lineno", None)
        msg = str(exc).splitlines()[0] if line is None else exc.message.splitlines()[0]
        where = f"{path}:{line}" if line else str(path)
        raise ConfigError(f"{where}: {msg}") from None

    r = _Reader(path, text, cp)

    required, optional = _MODE_VECTORS[mode]
    for s in cp.sections():
        if s in _SECTIONS:
            r.check_keys(s, _SECTIONS[s])
        elif s in _VECTOR_SECTIONS:
            if s not in required | optional:
                raise r.error(s, None, f"section not used by mode '{mode}'")
        else:
            raise r.error(s, None, "unknown section")
    for s in ("problem", "operator", "g") + tuple(sorted(required)):
        if not cp.has_section(s):
            raise ConfigError(f"{path}: missing section [{s}] (required by mode '{mode}')")

    rho = r.float("problem", "rho", required=True)
    try:
        MLParams(rho, 1.0)
    except ValueError:
        raise r.error("problem", "rho", "rho out of (0, 1]") from None
    T = r.float("problem", "t", required=True)
    if not T > 0:
        raise r.error("problem", "t", "T must be positive")
    K = r.int("problem", "k", 64)
    if K < 1:
        raise r.error("problem", "k", "K must be a positive integer")

    q = "quadrature"
    try:
        rule = QuadratureRule(
            panels=r.int(q, "panels", 16),
            nodes_per_panel=r.int(q, "nodes_per_panel", 12),
            grading_exponent=r.float(q, "grading_exponent"),
            rtol=r.float(q, "rtol", 1e-11),
            max_doublings=r.int(q, "max_doublings", 4))
    except ValueError as exc:
        raise r.error(q, None, str(exc)) from None

    operator = _parse_operator(r, K)
    g = _parse_profile(r, rho, T, operator, rule)
    phi = _parse_vector(r, "phi", K, operator)
    f = _parse_vector(r, "f", K, operator) if "f" in required else None

    psi = None
    if "psi" in required:
        if r.raw("psi", "kind") == "forward":
            # psi manufactured from the source in [source], optionally perturbed
            if not cp.has_section("source"):
                raise r.error("psi", "kind", "kind=forward needs a [source] section")
            src = _parse_vector(r, "source", K, operator)
            psi_c = integrate_trajectory(
                ForwardProblem(rho, T, operator, phi, src, g, rule)).coeffs.copy()
            for k, d in _parse_perturbation(r).items():
                if not 1 <= k <= K:
                    raise r.error("psi", "perturb", f"mode {k} outside 1..{K}")
                psi_c[k - 1] += d
            psi = SpectralVector(psi_c)
        else:
            psi = _parse_vector(r, "psi", K, operator)
    elif cp.has_section("source"):
        raise r.error("source", None, f"section not used by mode '{mode}'")

    eps_b = r.float("inverse", "eps_b", DEFAULT_EPS_B)
    if not eps_b > 0:
        raise r.error("inverse", "eps_b", "must be positive")
    tol_solv = r.float("inverse", "tol_solv")
    if tol_solv is not None and not tol_solv > 0:
        raise r.error("inverse", "tol_solv", "must be positive")

    psi_method = r.raw("roundtrip", "psi_method", "spectral")
    if psi_method not in ("spectral", "quadrature"):
        raise r.error("roundtrip", "psi_method", "expected spectral or quadrature")

    times = r.int("output", "times", 129)
    if times < 2:
        raise r.error("output", "times", "need at least 2 output times")
    field_points = r.int("output", "field_points", 0)
    if field_points < 0:
        raise r.error("output", "field_points", "must be >= 0")
    if field_points and operator.eigenfunction is None:
        raise r.error("output", "field_points", "field output needs eigenfunctions")

    env = os.environ.get(OUTPUT_DIR_ENV)
    out_dir = Path(env) if env else Path(r.raw("output", "dir", "subdiff_out"))

    return RunConfig(
        mode=mode, path=path, rho=rho, T=T, K=K, operator=operator, g=g,
        phi=phi, f=f, psi=psi, rule=rule, eps_b=eps_b, tol_solv=tol_solv,
        free_values=_parse_free_values(r), psi_method=psi_method,
        output_dir=out_dir, times=times, field_points=field_points,
        trajectory=bool(r.bool("output", "trajectory", mode == "forward")))

# }}}


# {{{ run

@dataclass
class _Outcome:
    status: int = EXIT_OK
    message: str = "ok"
    details: list[str] = field(default_factory=list)
    files: list[str] = field(default_factory=list)


def _field_x(cfg: RunConfig) -> Optional[np.ndarray]:
    if not cfg.field_points:
        return None
    a, b = cfg.operator.domain
    return np.linspace(a, b, cfg.field_points)


def _run_forward(cfg: RunConfig, out: _Outcome) -> None:
    fp = ForwardProblem(cfg.rho, cfg.T, cfg.operator, cfg.phi, cfg.f, cfg.g, cfg.rule)
    psi = integrate_trajectory(fp)
    write_vector_csv(cfg.output_dir / "psi.csv", psi)
    out.files.append("psi.csv")

    if cfg.trajectory:
        samples = solve_forward(fp, default_times(cfg.T, cfg.times), x=_field_x(cfg))
        write_trajectory_csv(cfg.output_dir / "trajectory.csv", samples)
        out.files.append("trajectory.csv")
        if cfg.field_points:
            write_field_csv(cfg.output_dir / "field.csv", samples)
            out.files.append("field.csv")

    out.details += [f"||psi|| = {psi.norm()!r}"]


def _invert(cfg: RunConfig, psi: SpectralVector, out: _Outcome, *,
            p: Optional[np.ndarray] = None):
    ip = InverseProblem(cfg.rho, cfg.T, cfg.operator, cfg.phi, psi, cfg.g, cfg.rule)
    part = partition_modes(ip, eps_b=cfg.eps_b, p=p)
    sol = solve_inverse(ip, part, cfg.free_values, tol_solv=cfg.tol_solv)

    write_solution_csv(cfg.output_dir / "f.csv", sol)
    out.files.append("f.csv")
    stats = kernel_bound_stats(cfg.rho, cfg.operator.eigenvalues, cfg.g, cfg.T,
                               cfg.rule, eps_b=cfg.eps_b, p=part.p)
    out.details.append(diagnostics_report(ip, sol, stats))

    if not sol.solvable:
        out.status = EXIT_UNSOLVABLE
        viol = ", ".join(f"k={k}: {v!r}" for k, v in sol.violation_report.items())
        out.message = f"unsolvable: solvability condition violated ({viol})"
    return ip, sol


def _run_inverse(cfg: RunConfig, out: _Outcome) -> None:
    ip, sol = _invert(cfg, cfg.psi, out)
    if sol.solvable and cfg.trajectory:
        samples = reconstruct_u(ip, sol, default_times(cfg.T, cfg.times), x=_field_x(cfg))
        write_trajectory_csv(cfg.output_dir / "trajectory.csv", samples)
        out.files.append("trajectory.csv")
        if cfg.field_points:
            write_field_csv(cfg.output_dir / "field.csv", samples)
            out.files.append("field.csv")


def _run_roundtrip(cfg: RunConfig, out: _Outcome) -> None:
    p = p_k_many(cfg.rho, cfg.operator.eigenvalues, cfg.g, cfg.T, cfg.rule)
    fp = ForwardProblem(cfg.rho, cfg.T, cfg.operator, cfg.phi, cfg.f, cfg.g, cfg.rule)
    if cfg.psi_method == "spectral":
        psi = integrate_trajectory(fp, p=p)
    else:
        psi = integrate_trajectory(fp, method="quadrature")

    write_vector_csv(cfg.output_dir / "f_true.csv", cfg.f)
    write_vector_csv(cfg.output_dir / "psi.csv", psi)
    out.files += ["f_true.csv", "psi.csv"]

    _, sol = _invert(cfg, psi, out, p=p)
    if not sol.solvable:
        return

    err = (sol.f - cfg.f).norm() / max(cfg.f.norm(), 1e-300)
    lines = [
        f"psi_method = {cfg.psi_method}",
        f"K = {cfg.K}",
        f"recovery_error = {err!r}",
        f"max_abs_error = {float(np.max(np.abs(sol.f.coeffs - cfg.f.coeffs)))!r}",
        f"kernel_modes = {list(sol.partition.b_zero)}",
    ]
    (cfg.output_dir / "recovery.txt").write_text("\n".join(lines) + "\n")
    out.files.append("recovery.txt")
    out.details.insert(0, f"recovery_error = {err!r}")


def _write_diagnostics(out_dir: Path, mode: str, source: str, out: _Outcome) -> None:
    lines = [
        f"mode = {mode}",
        f"config = {source}",
        f"status = {out.status}",
        f"message = {out.message}",
    ]
    if out.files:
        lines.append("files = " + ", ".join(out.files + ["diagnostics.txt"]))
    text = "\n".join(lines) + "\n"
    if out.details:
        text += "\n" + "\n".join(d.rstrip("\n") for d in out.details) + "\n"
    (out_dir / "diagnostics.txt").write_text(text)


def run(mode: str, config_path) -> int:
    """Parse *config_path*, run *mode*, write outputs; returns the exit status."""
    out = _Outcome()
    out_dir: Optional[Path] = None
    env = os.environ.get(OUTPUT_DIR_ENV)

    try:
        cfg = parse_config(config_path, mode)
        out_dir = cfg.output_dir
    except ConfigError as exc:
        out.status, out.message = EXIT_CONFIG, f"configuration error: {exc}"
    except OSError as exc:
        out.status, out.message = EXIT_IO, f"cannot read configuration: {exc}"
    except (ArithmeticError, AccuracyWarning) as exc:
        out.status, out.message = EXIT_NUMERICAL, f"numerical failure: {exc}"

    if out_dir is None:
        out_dir = Path(env) if env else Path("subdiff_out")

    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"error: cannot create output directory {out_dir}: {exc}", file=sys.stderr)
        if out.status != EXIT_OK:
            print(f"error: {out.message}", file=sys.stderr)
        return EXIT_IO

    if out.status == EXIT_OK:
        runner = {"forward": _run_forward, "inverse": _run_inverse,
                  "roundtrip": _run_roundtrip}[mode]
        try:
            with warnings.catch_warnings():
                # inaccurate kernels would silently corrupt f
                warnings.simplefilter("error", AccuracyWarning)
                runner(cfg, out)
        except OSError as exc:
            out.status, out.message = EXIT_IO, f"I/O error: {exc}"
        except (ArithmeticError, AccuracyWarning, np.linalg.LinAlgError) as exc:
            out.status, out.message = EXIT_NUMERICAL, f"numerical failure: {exc}"
        except ValueError as exc:
            out.status, out.message = EXIT_CONFIG, f"invalid problem: {exc}"

    try:
        _write_diagnostics(out_dir, mode, str(config_path), out)
    except OSError as exc:
        print(f"error: cannot write diagnostics: {exc}", file=sys.stderr)
        return EXIT_IO

    stream = sys.stdout if out.status == EXIT_OK else sys.stderr
    print(f"{mode}: {out.message}", file=stream)
    for d in out.details[:1]:
        if d.startswith("recovery_error"):
            print(d)
    print(f"outputs in {out_dir}", file=stream)
    return out.status

# }}}


# {{{ main

def _ml_eval_command(args) -> int:
    try:
        value = ml_eval(MLParams(args.rho, args.mu), args.z)
    except (ValueError, OverflowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG if isinstance(exc, ValueError) else EXIT_NUMERICAL
    print(repr(float(value)))
    return EXIT_OK


def _selftest_command(args) -> int:
    from subdiff_inverse.selfcheck import format_results, run_selftest

    results = run_selftest(quick=args.quick)
    text = format_results(results)
    print(text, end="")

    env = os.environ.get(OUTPUT_DIR_ENV)
    out_dir = Path(env) if env else Path(args.output_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "selftest.txt").write_text(text)
    except OSError as exc:
        print(f"error: cannot write selftest report: {exc}", file=sys.stderr)
        return EXIT_IO

    return EXIT_OK if all(r.passed for r in results) else EXIT_CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="subdiff-inverse",
        description="Forward and inverse source problems for the subdiffusion "
                    "equation with spectral operators.",
        epilog=f"exit status: {EXIT_OK} ok, {EXIT_CHECK_FAILED} self-test failed, "
               f"{EXIT_CONFIG} configuration error, {EXIT_UNSOLVABLE} unsolvable, "
               f"{EXIT_NUMERICAL} numerical failure, {EXIT_IO} I/O error. "
               f"{OUTPUT_DIR_ENV} overrides the output directory.")
    sub = parser.add_subparsers(dest="command", required=True)

    for mode, help_text in [
            ("forward", "solve the forward problem and write u and psi"),
            ("inverse", "recover f from phi and psi"),
            ("roundtrip", "recover a known f from the psi it generates")]:
        p = sub.add_parser(mode, help=help_text)
        p.add_argument("config", help="INI configuration file")

    p = sub.add_parser("ml-eval", help="evaluate the Mittag-Leffler function E_{rho,mu}(z)")
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--z", type=float, required=True)

    p = sub.add_parser("selftest", help="run the built-in identity checks")
    p.add_argument("--quick", action="store_true", help="fewer draws and modes")
    p.add_argument("--output-dir", default="subdiff_out",
                   help=f"where selftest.txt goes (overridden by {OUTPUT_DIR_ENV})")

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "ml-eval":
        return _ml_eval_command(args)
    if args.command == "selftest":
        return _selftest_command(args)
    return run(args.command, args.config)


if __name__ == "__main__":
    sys.exit(main())

# }}}

# vim: foldmethod=marker
