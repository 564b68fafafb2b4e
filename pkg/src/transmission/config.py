"""Sectioned key-value run configuration.

::

    # comment
    [coefficients]
    k_plus = 1
    ...
    [data]
    g_minus = sin(pi*y/3) * exp(-x)

Numeric keys accept constant expressions (``ell = pi``).  Values may be
wrapped in double quotes.  All problems are collected and reported together
with their line numbers.
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields

import numpy as np

from .expression import Expression, ExpressionDomainError, ExpressionSyntaxError, parse_expression
from .problem import Geometry, ProblemData
from .symbols import SCAN_SYMBOLS, CoefficientSet

RUN_MODES = ("check", "scan", "solve-mode", "solve", "verify", "identities")
DATA_KEYS = ("g_minus", "g_plus", "phi1_minus", "phi1_plus", "phi2_minus", "phi2_plus")

_COEF_KEYS = ("k_plus", "k_minus", "l_plus", "l_minus")
_GEO_KEYS = {"a": float, "gamma": float, "b": float, "ell": float, "K": int, "Nx": int, "Ny": int}


@dataclass
class Numerics:
    tol: float = 1e-8
    panels: int = 64
    nodes: int = 8
    y_panels: int | None = None
    fd_h: float = 0.02
    t: float | None = None
    mode: int = 1
    scan_symbol: str = "g"
    scan_samples: int = 10_000
    seed: int = 0


_NUM_TYPES = {"tol": float, "panels": int, "nodes": int, "y_panels": int, "fd_h": float, "t": float,
              "mode": int, "scan_symbol": str, "scan_samples": int, "seed": int}


@dataclass
class RunConfig:
    coefficients: CoefficientSet
    geometry: Geometry
    data: dict = field(default_factory=dict)  # key -> Expression
    numerics: Numerics = field(default_factory=Numerics)
    mode: str = "check"

    def problem_data(self) -> ProblemData:
        kw = {}
        for key in DATA_KEYS:
            ex = self.data.get(key)
            if ex is None:
                kw[key] = None
            elif key.startswith("g_"):
                kw[key] = ex
            else:
                kw[key] = ex.of_y()
        return ProblemData(**kw)


class ConfigError(ValueError):
    def __init__(self, errors: list[tuple[int, str]]):
        self.errors = errors
        super().__init__("\n".join(f"line {ln}: {msg}" if ln else msg for ln, msg in errors))


def _unquote(v: str) -> str:
    v = v.strip()
    if len(v) >= 2 and v[0] == v[-1] == '"':
        return v[1:-1]
    return v


def _number(text: str, kind):
    ex = parse_expression(text)
    if ex.variables:
        raise ValueError(f"constant expected, found variables {sorted(ex.variables)}")
    val = float(ex())
    if kind is int:
        if val != int(val):
            raise ValueError(f"integer expected, found {text!r}")
        return int(val)
    return val


SECTIONS = {"coefficients", "geometry", "data", "numerics", "run"}


def parse_config(text: str) -> RunConfig:
    errors: list[tuple[int, str]] = []
    section = None
    raw: dict[tuple[str, str], tuple[int, str]] = {}
    for ln, line in enumerate(text.splitlines(), start=1):
        s = line.split("#", 1)[0].strip()
        if not s:
            continue
        if s.startswith("["):
            if not s.endswith("]"):
                errors.append((ln, f"syntax error: unterminated section header {s!r}"))
                continue
            name = s[1:-1].strip()
            if name not in SECTIONS:
                errors.append((ln, f"unknown section [{name}]"))
                section = None
                continue
            section = name
            continue
        if "=" not in s:
            errors.append((ln, f"syntax error: expected 'key = value', found {s!r}"))
            continue
        key, val = (p.strip() for p in s.split("=", 1))
        if section is None:
            errors.append((ln, f"key {key!r} outside a known section"))
            continue
        if not key:
            errors.append((ln, "syntax error: empty key"))
            continue
        if (section, key) in raw:
            errors.append((ln, f"duplicate key {key!r} in [{section}]"))
            continue
        raw[(section, key)] = (ln, _unquote(val))

    allowed = {
        "coefficients": set(_COEF_KEYS),
        "geometry": set(_GEO_KEYS),
        "data": set(DATA_KEYS) | {"forcing"},
        "numerics": set(_NUM_TYPES),
        "run": {"mode"},
    }
    for (sec, key), (ln, _) in raw.items():
        if key not in allowed[sec]:
            errors.append((ln, f"unknown key {key!r} in [{sec}]"))

    def get(sec, key, kind, required):
        item = raw.get((sec, key))
        if item is None:
            if required:
                errors.append((0, f"missing required key {key!r} in [{sec}]"))
            return None
        ln, val = item
        try:
            return _number(val, kind)
        except (ExpressionSyntaxError, ExpressionDomainError, ValueError) as err:
            errors.append((ln, f"{key}: {err}"))
            return None

    coef = {k: get("coefficients", k, float, True) for k in _COEF_KEYS}
    geo = {k: get("geometry", k, kind, k in ("a", "gamma", "b", "ell", "K")) for k, kind in _GEO_KEYS.items()}

    numerics = Numerics()
    for key, kind in _NUM_TYPES.items():
        item = raw.get(("numerics", key))
        if item is None:
            continue
        ln, val = item
        if kind is str:
            if val not in SCAN_SYMBOLS:
                errors.append((ln, f"scan_symbol: expected one of {', '.join(SCAN_SYMBOLS)}"))
            else:
                setattr(numerics, key, val)
            continue
        v = get("numerics", key, kind, False)
        if v is not None:
            setattr(numerics, key, v)
    for key, ok, msg in (("tol", numerics.tol > 0, "tol > 0 violated"),
                         ("panels", numerics.panels >= 1, "panels >= 1 violated"),
                         ("nodes", 1 <= numerics.nodes <= 64, "nodes must lie in 1..64"),
                         ("fd_h", numerics.fd_h > 0, "fd_h > 0 violated"),
                         ("mode", numerics.mode >= 1, "mode >= 1 violated"),
                         ("scan_samples", numerics.scan_samples >= 1, "scan_samples >= 1 violated")):
        if not ok:
            errors.append((raw.get(("numerics", key), (0,))[0], msg))

    data = {}
    for key in DATA_KEYS + ("forcing",):
        item = raw.get(("data", key))
        if item is None:
            continue
        ln, val = item
        try:
            ex = parse_expression(val)
        except ExpressionSyntaxError as err:
            errors.append((ln, f"{key}: {err}"))
            continue
        if key.startswith("phi") and "x" in ex.variables:
            errors.append((ln, f"{key}: boundary data may depend on y only"))
            continue
        if key == "forcing":
            for side in ("g_minus", "g_plus"):
                if ("data", side) in raw:
                    errors.append((ln, f"forcing conflicts with {side}"))
                data.setdefault(side, ex)
        else:
            data[key] = ex

    mode = "check"
    item = raw.get(("run", "mode"))
    if item is not None:
        if item[1] not in RUN_MODES:
            errors.append((item[0], f"mode: expected one of {', '.join(RUN_MODES)}"))
        else:
            mode = item[1]

    coefficients = geometry = None
    if all(v is not None for v in coef.values()):
        try:
            coefficients = CoefficientSet(coef["k_plus"], coef["k_minus"], coef["l_plus"], coef["l_minus"])
        except ValueError as err:
            errors.append((raw[("coefficients", "k_plus")][0], str(err)))
    if all(geo[k] is not None for k in ("a", "gamma", "b", "ell", "K")):
        kw = {k: v for k, v in geo.items() if v is not None}
        try:
            geometry = Geometry(**kw)
        except ValueError as err:
            key = str(err).split()[0] if str(err).split()[0] in _GEO_KEYS else "gamma"
            errors.append((raw.get(("geometry", key), (0,))[0], str(err)))
    if geometry is not None and numerics.mode > geometry.K:
        errors.append((raw.get(("numerics", "mode"), (0,))[0], "mode <= K violated"))
    if geometry is not None:
        _check_data_domain(data, geometry, raw, errors)

    if errors:
        errors.sort(key=lambda e: e[0])
        raise ConfigError(errors)
    return RunConfig(coefficients, geometry, data, numerics, mode)


def _check_data_domain(data, geo: Geometry, raw, errors):
    """Evaluate each expression on a small grid of its rectangle."""
    ys = np.linspace(0.0, geo.ell, 9)
    for key, ex in data.items():
        if key == "g_minus":
            xs = np.linspace(geo.a, geo.gamma, 9)
        elif key == "g_plus":
            xs = np.linspace(geo.gamma, geo.b, 9)
        else:
            xs = np.zeros(1)
        try:
            ex(xs[:, None], ys[None, :])
        except (ExpressionDomainError, ArithmeticError) as err:
            ln = raw.get(("data", key), raw.get(("data", "forcing"), (0,)))[0]
            errors.append((ln, f"{key}: domain error on its rectangle ({err})"))


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def serialize_config(cfg: RunConfig) -> str:
    co, geo, nu = cfg.coefficients, cfg.geometry, cfg.numerics
    out = ["[coefficients]"]
    out += [f"{k} = {_fmt(float(getattr(co, k)))}" for k in _COEF_KEYS]
    out.append("")
    out.append("[geometry]")
    out += [f"{k} = {_fmt(getattr(geo, k))}" for k in _GEO_KEYS]
    out.append("")
    out.append("[data]")
    out += [f"{k} = {cfg.data[k].source}" for k in DATA_KEYS if k in cfg.data]
    out.append("")
    out.append("[numerics]")
    for f in fields(Numerics):
        v = getattr(nu, f.name)
        if v is None:
            continue
        out.append(f"{f.name} = {_fmt(v)}")
    out.append("")
    out.append("[run]")
    out.append(f"mode = {cfg.mode}")
    return "\n".join(out) + "\n"


__all__ = ["RunConfig", "Numerics", "ConfigError", "parse_config", "serialize_config", "RUN_MODES", "DATA_KEYS"]
