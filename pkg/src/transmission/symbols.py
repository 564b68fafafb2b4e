"""Scalar realizations of the operator functions of the transmission problem.

Every operator built from ``M = -sqrt(-A)`` and ``L = -sqrt(-A + r I)`` is
evaluated here as an ordinary function of a complex number ``z`` (the
eigenvalue of ``-A``).  The substitution rule is

    M -> -sqrt(z),  L -> -sqrt(z + r),  exp(delta M) -> exp(-delta sqrt(z)).

All exponentials are kept in decaying form.  Differences such as
``exp(-delta s) - exp(-delta t)`` are rewritten through ``expm1`` with
``t - s = r / (t + s)``, so nothing cancels catastrophically, even for tiny r.

The functions accept scalars or numpy arrays (broadcast together) and return
a Python ``complex`` for scalar input.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

# |r| below this goes to the r = 0 formulas
R0_SWITCH = 1e-6
# |u|, |v| below this are treated as vanishing
NEAR_ZERO = 1e-300
# denominator floor of relative residuals
TINY = 1e-30


class SymbolError(ValueError):
    """Base class for symbol evaluation failures."""


class BranchCutError(SymbolError):
    """Raised when a square root argument lies on the negative real axis."""


class VanishingSymbolError(SymbolError, ZeroDivisionError):
    """Raised when a denominator symbol (u or v) vanishes numerically."""

    def __init__(self, factor: str, where=None):
        self.factor = factor
        msg = f"symbol {factor} vanishes (|{factor}| < {NEAR_ZERO:g})"
        if where is not None:
            msg += f" at {where}"
        super().__init__(msg)


def is_zero_ratio(value: float, scale: float = 1.0) -> bool:
    """Zero test used for case classification: |r| < 1e-12 * max(1, scale)."""
    return abs(value) < 1e-12 * max(1.0, abs(scale))


@dataclass(frozen=True)
class CoefficientSet:
    """Physical constants ``k_plus, k_minus, l_plus, l_minus`` and their ratios."""

    k_plus: float
    k_minus: float
    l_plus: float
    l_minus: float

    def __post_init__(self):
        for name in ("k_plus", "k_minus", "l_plus", "l_minus"):
            v = getattr(self, name)
            if not np.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v!r}")
        if self.k_plus == 0 or self.k_minus == 0:
            raise ValueError("k_plus and k_minus must be nonzero")
        if self.k_plus * self.k_minus <= 0:
            raise ValueError("k_plus * k_minus > 0 violated")

    @property
    def r_plus(self) -> float:
        return self.l_plus / self.k_plus

    @property
    def r_minus(self) -> float:
        return self.l_minus / self.k_minus

    @property
    def r(self) -> float:
        return max(-self.r_plus, -self.r_minus, 0.0)

    def _scale(self) -> float:
        return max(abs(self.r_plus), abs(self.r_minus))

    @property
    def r_plus_is_zero(self) -> bool:
        return is_zero_ratio(self.r_plus, self._scale())

    @property
    def r_minus_is_zero(self) -> bool:
        return is_zero_ratio(self.r_minus, self._scale())


@dataclass(frozen=True)
class SymbolArgs:
    """Arguments ``(delta, r, z)`` of the scalar symbols.

    Arrays are allowed; they are broadcast together.
    """

    delta: object
    r: object
    z: object

    def __post_init__(self):
        delta = np.asarray(self.delta, dtype=float)
        if np.any(~(delta > 0)):
            raise ValueError("delta > 0 violated")
        _check_domain(self.r, self.z)


def _check_domain(r, z):
    r = np.asarray(r, dtype=float)
    z = np.asarray(z, dtype=complex)
    rm = np.maximum(-r, 0.0)
    bad = (z.imag == 0) & (z.real <= rm)
    if np.any(bad):
        zb = np.broadcast_to(z, np.broadcast(r, z).shape)[np.broadcast_to(bad, np.broadcast(r, z).shape)]
        raise BranchCutError(f"z = {zb.flat[0]} lies on the cut (-inf, r_m]")


def _ret(x):
    x = np.asarray(x)
    if x.ndim == 0:
        return complex(x)
    return x


def principal_sqrt(z):
    """Principal square root with ``Re >= 0``; the negative real axis is an error."""
    arr = np.asarray(z, dtype=complex)
    if np.any((arr.imag == 0) & (arr.real < 0)):
        raise BranchCutError("square root argument on the negative real axis")
    return _ret(np.sqrt(arr))


def _phi(w):
    """(1 - exp(-w)) / w, with the removable singularity at 0 filled in."""
    w = np.asarray(w, dtype=complex)
    small = np.abs(w) < 1e-5
    ws = np.where(small, 1.0, w)
    out = -np.expm1(-ws) / ws
    series = 1 - w / 2 + w * w / 6 - w ** 3 / 24
    return np.where(small, series, out)


@dataclass
class _Parts:
    delta: np.ndarray
    r: np.ndarray
    s: np.ndarray
    t: np.ndarray
    zero: np.ndarray  # mask of the r = 0 branch
    e1: np.ndarray  # exp(-delta s)
    e2: np.ndarray  # exp(-delta t)
    om1: np.ndarray  # 1 - e1
    om2: np.ndarray  # 1 - e2
    z: np.ndarray = field(default=None)


def _parts(delta, r, z) -> _Parts:
    delta, r, z = np.broadcast_arrays(
        np.asarray(delta, dtype=float), np.asarray(r, dtype=float), np.asarray(z, dtype=complex)
    )
    _check_domain(r, z)
    zero = np.abs(r) < R0_SWITCH
    # the domain check above keeps both arguments off the cut
    s = np.sqrt(z)
    t = np.where(zero, s, np.sqrt(z + np.where(zero, 0.0, r)))
    e1 = np.exp(-delta * s)
    e2 = np.exp(-delta * t)
    om1 = -np.expm1(-delta * s)
    om2 = -np.expm1(-delta * t)
    return _Parts(delta, r, s, t, zero, e1, e2, om1, om2, z)


def _uv(p: _Parts):
    sp = p.t + p.s
    a = -np.expm1(-p.delta * sp)
    # (t+s)^2/r (e1 - e2) = delta (t+s) e1 phi(delta r/(t+s))
    rr = np.where(p.zero, 0.0, p.r)
    b = p.delta * sp * p.e1 * _phi(p.delta * rr / sp)
    # r = 0 branch written out explicitly
    a0 = -np.expm1(-2 * p.delta * p.s)
    b0 = 2 * p.delta * p.s * p.e1
    u = np.where(p.zero, a0 - b0, a - b)
    v = np.where(p.zero, a0 + b0, a + b)
    return u, v


def _guard(x, name):
    if np.any(np.abs(x) < NEAR_ZERO):
        raise VanishingSymbolError(name)
    return x


def uv_values(delta, r, z):
    """Vectorized pair ``(u_{delta,r}(z), v_{delta,r}(z))``."""
    u, v = _uv(_parts(delta, r, z))
    return _ret(u), _ret(v)


def uv_symbol(branch: str, args: SymbolArgs):
    """``u_{delta,r}(z)`` for ``branch='U'`` or ``v_{delta,r}(z)`` for ``'V'``."""
    u, v = uv_values(args.delta, args.r, args.z)
    b = branch.upper()
    if b == "U":
        return u
    if b == "V":
        return v
    raise ValueError(f"branch must be 'U' or 'V', got {branch!r}")


def _f(index: int, p: _Parts, u, v):
    _guard(u, "u")
    _guard(v, "v")
    sp = p.t + p.s
    op1, op2 = 1 + p.e1, 1 + p.e2
    if index == 1:
        gen = sp * p.t * (op1 * op2 / u + p.om1 * p.om2 / v)
        z0 = (1 / u + 1 / v) * (-np.expm1(-2 * p.delta * p.s))
    elif index == 2:
        gen = -sp * (op1 * p.om2 / u + p.om1 * op2 / v)
        z0 = p.om1 ** 2 / u + op1 ** 2 / v
    elif index == 3:
        gen = -sp * (p.om1 * p.om2 / u + op1 * op2 / v)
        z0 = op1 ** 2 / u + p.om1 ** 2 / v
    else:
        raise ValueError(f"f index must be 1, 2 or 3, got {index!r}")
    return np.where(p.zero, z0, gen)


def f_values(index: int, delta, r, z):
    """Vectorized ``f_{delta,r,index}(z)``."""
    p = _parts(delta, r, z)
    u, v = _uv(p)
    return _ret(_f(index, p, u, v))


def f_symbol(index: int, args: SymbolArgs):
    return f_values(index, args.delta, args.r, args.z)


def _g(p: _Parts):
    sp = p.t + p.s
    rr = np.where(p.zero, 0.0, p.r)
    a2 = -np.expm1(-2 * p.delta * sp)
    c2 = 2 * p.delta * sp * np.exp(-2 * p.delta * p.s) * _phi(2 * p.delta * rr / sp)
    a1 = -np.expm1(-p.delta * sp)
    c1 = p.delta * p.e1 * _phi(p.delta * rr / sp)
    gen = -p.t * (a2 ** 2 - c2 ** 2) + p.s * (a1 ** 2 + rr * c1 ** 2) ** 2
    om = -np.expm1(-2 * p.delta * p.s)
    ee = np.exp(-2 * p.delta * p.s)
    zero = (1 + p.s) * om ** 4 + 4 * om ** 2 * ee - 16 * p.delta ** 2 * p.z * ee ** 2
    return np.where(p.zero, zero, gen)


def g_values(delta, r, z):
    """Vectorized ``g_{delta,r}(z)`` (the r = 0 formula for |r| < R0_SWITCH)."""
    return _ret(_g(_parts(delta, r, z)))


def g_symbol(args: SymbolArgs):
    return g_values(args.delta, args.r, args.z)


def b_symbols(coeffs: CoefficientSet, z):
    """The pair ``(b1(z), b2(z))`` of the case with both ratios nonzero."""
    z = np.asarray(z, dtype=complex)
    _check_domain(-coeffs.r, z)
    s = np.asarray(principal_sqrt(z))
    tp = np.asarray(principal_sqrt(z + coeffs.r_plus))
    tm = np.asarray(principal_sqrt(z + coeffs.r_minus))
    tot = tp + tm + 2 * s
    b2 = (
        1
        + (coeffs.l_plus / coeffs.k_minus) / ((tm + s) * tot)
        + (coeffs.l_minus / coeffs.k_plus) / ((tp + s) * tot)
    )
    b1 = -4 * coeffs.k_plus * coeffs.k_minus * (tp + s) * (tm + s) * tot * b2
    return _ret(b1), _ret(b2)


PQ_NAMES = ("P1+", "P2+", "P3+", "P1-", "P2-", "P3-", "Q1-", "Q2-", "Q3-")


def _side(coeffs: CoefficientSet, sign: str, c: float, d: float):
    if sign == "+":
        return coeffs.k_plus, coeffs.r_plus, d
    return coeffs.k_minus, coeffs.r_minus, c


def pq_scalar(which: str, coeffs: CoefficientSet, c: float, d: float, x):
    """Scalar value of ``P_i^{+-}`` or ``Q_i^-`` at the eigenvalue ``x``.

    The operator formulas are substituted literally: ``L + M -> -(t + s)``,
    ``L -> -t``, ``exp(delta M) -> exp(-delta s)``, ``U -> u``, ``V -> v``.
    The Q operators use the r = 0 forms of U and V on the interval of length c.
    """
    if which not in PQ_NAMES:
        raise ValueError(f"unknown operator {which!r}; expected one of {PQ_NAMES}")
    kind, idx, sign = which[0], int(which[1]), which[2]
    x = np.real_if_close(np.asarray(x, dtype=complex))
    if kind == "Q":
        k, r, delta = coeffs.k_minus, 0.0, c
    else:
        k, r, delta = _side(coeffs, sign, c, d)
    p = _parts(delta, r, x)
    u, v = _uv(p)
    _guard(u, "u")
    _guard(v, "v")
    e_m, e_l = p.e1, p.e2
    if kind == "Q":
        if idx == 1:
            val = k * (1 / u + 1 / v) * (-np.expm1(-2 * delta * p.s))
        elif idx == 2:
            val = k * (p.om1 ** 2 / u + (1 + e_m) ** 2 / v)
        else:
            val = k * ((1 + e_m) ** 2 / u + p.om1 ** 2 / v)
    else:
        lm = -(p.t + p.s)
        if idx == 1:
            val = k * lm * ((1 + e_m) * p.om2 / u + p.om1 * (1 + e_l) / v)
        elif idx == 2:
            val = k * lm * (p.om1 * p.om2 / u + (1 + e_m) * (1 + e_l) / v)
        else:
            val = k * lm * (-p.t) * ((1 + e_m) * (1 + e_l) / u + p.om1 * p.om2 / v)
    val = np.asarray(val)
    if np.all(val.imag == 0):
        val = val.real
    return val.item() if val.ndim == 0 else val


def _case_components(case: int, coeffs: CoefficientSet, c: float, d: float, z):
    k_p, k_m = coeffs.k_plus, coeffs.k_minus
    s = np.asarray(principal_sqrt(np.asarray(z, dtype=complex)))
    pp = _parts(d, coeffs.r_plus, z)
    up, vp = _uv(pp)
    _guard(up, "u+")
    _guard(vp, "v+")
    fp = [k_p * _f(i, pp, up, vp) for i in (1, 2, 3)]
    gp = 4 * k_p ** 2 * (pp.t + pp.s) ** 2 * _g(pp) / (up ** 2 * vp ** 2)
    if case == 1:
        pm = _parts(c, coeffs.r_minus, z)
        um, vm = _uv(pm)
        _guard(um, "u-")
        _guard(vm, "v-")
        fm = [k_m * _f(i, pm, um, vm) for i in (1, 2, 3)]
        gm = 4 * k_m ** 2 * (pm.t + pm.s) ** 2 * _g(pm) / (um ** 2 * vm ** 2)
        g2 = fp[0] * fm[2] + fm[0] * fp[2] - 2 * s * fp[1] * fm[1]
        return {"g1+": gp, "g1-": gm, "g2": g2}
    pm = _parts(c, 0.0, z)
    um, vm = _uv(pm)
    _guard(um, "u-")
    _guard(vm, "v-")
    fm = [k_m * _f(i, pm, um, vm) for i in (1, 2, 3)]
    gm = 16 * k_m ** 2 * pm.z * _g(pm) / (um ** 2 * vm ** 2)
    g4 = -2 * s * (fp[2] * fm[1] + fp[1] * fm[2]) + 2 * pm.z * fp[0] * fm[0]
    return {"g3+": gp, "g3-": gm, "g4": g4}


def _require_case(case: int, coeffs: CoefficientSet):
    if case == 1:
        if coeffs.r_plus_is_zero or coeffs.r_minus_is_zero:
            raise ValueError("case 1 requires r_plus != 0 and r_minus != 0")
    elif case == 2:
        if coeffs.r_plus_is_zero or not coeffs.r_minus_is_zero:
            raise ValueError("case 2 requires r_plus != 0 and r_minus = 0")
    else:
        raise ValueError(f"case must be 1 or 2, got {case!r}")


def det_components(case: int, coeffs: CoefficientSet, c: float, d: float, x):
    """The g-components whose sum is ``f_1`` (case 1) or ``f_2`` (case 2)."""
    _require_case(case, coeffs)
    comps = _case_components(case, coeffs, c, d, x)
    return {k: _real(v) for k, v in comps.items()}


def _real(v):
    v = np.asarray(v)
    out = v.real if np.iscomplexobj(v) else v
    return out.item() if out.ndim == 0 else out


def det_symbol(case: int, coeffs: CoefficientSet, c: float, d: float, x):
    """``f_1 = g1+ + g1- + g2`` (case 1) or ``f_2 = g3+ + g3- + g4`` (case 2).

    These are the functions whose signs the sign lemmas control.  Note that the
    determinant of the case-1 transmission system equals ``-f_1``.
    """
    _require_case(case, coeffs)
    comps = _case_components(case, coeffs, c, d, x)
    return _real(sum(comps.values()))


FACTORIZATION_KINDS = ("D1+", "D1-", "D3+", "D3-", "detL1", "detL2", "UplusV", "UtimesV")
_KIND_ALIASES = {"D1−": "D1-", "D3−": "D3-", "detΛ1": "detL1", "detΛ2": "detL2"}


def _rel(lhs, rhs):
    lhs, rhs = np.asarray(lhs), np.asarray(rhs)
    den = np.maximum(np.maximum(np.abs(lhs), np.abs(rhs)), TINY)
    out = np.abs(lhs - rhs) / den
    return out.item() if out.ndim == 0 else out


def factorization_sides(kind: str, coeffs: CoefficientSet, c: float, d: float, x):
    """Return ``(lhs, rhs)`` of a determinant identity at real ``x``.

    lhs is assembled from products of ``pq_scalar`` values (or from u, v),
    rhs from the closed form in terms of u, v, g and f.
    """
    kind = _KIND_ALIASES.get(kind, kind)
    cache = {}

    def pq(name):
        if name not in cache:
            cache[name] = np.asarray(pq_scalar(name, coeffs, c, d, x))
        return cache[name]

    s = np.sqrt(np.asarray(x, dtype=float))
    M = -s
    if kind in ("D1+", "D1-", "D3+"):
        sg = "+" if kind != "D1-" else "-"
        k, r, delta = _side(coeffs, sg, c, d)
        p = _parts(delta, r, x)
        u, v = _uv(p)
        closed = 4 * k ** 2 * (p.t + p.s) ** 2 * _g(p) / (u ** 2 * v ** 2)
        d1 = M * pq("P1" + sg) ** 2 - pq("P3" + sg) * pq("P2" + sg)
        if kind == "D3+":
            return _real(-d1), _real(closed)
        return _real(d1), _real(-closed)
    if kind == "D3-":
        p = _parts(c, 0.0, x)
        u, v = _uv(p)
        lhs = 4 * M ** 2 * (pq("Q2-") * pq("Q3-") - M * pq("Q1-") ** 2)
        rhs = 16 * coeffs.k_minus ** 2 * p.z * _g(p) / (u ** 2 * v ** 2)
        return _real(lhs), _real(rhs)
    if kind == "detL1":
        _require_case(1, coeffs)
        a11 = (pq("P1-") - pq("P1+")) * M
        a12 = pq("P2+") + pq("P2-")
        a21 = pq("P3+") + pq("P3-")
        a22 = pq("P1-") - pq("P1+")
        return _real(a11 * a22 - a12 * a21), _real(-det_symbol(1, coeffs, c, d, x))
    if kind == "detL2":
        _require_case(2, coeffs)
        q1, q2, q3 = pq("Q1-"), pq("Q2-"), pq("Q3-")
        p1, p2, p3 = pq("P1+"), pq("P2+"), pq("P3+")
        a11 = (p1 - 2 * M * q1) * M
        a12 = -(p2 + 2 * M * q2)
        a21 = p3 + 2 * M * q3
        a22 = 2 * M * q1 - p1
        comps = _case_components(2, coeffs, c, d, x)
        kp, km = coeffs.k_plus, coeffs.k_minus
        pp = _parts(d, coeffs.r_plus, x)
        up, vp = _uv(pp)
        pm = _parts(c, 0.0, x)
        um, vm = _uv(pm)
        fp = [kp * _f(i, pp, up, vp) for i in (1, 2, 3)]
        fm = [km * _f(i, pm, um, vm) for i in (1, 2, 3)]
        # D4 = 2M (P3 Q2 + P2 Q3 + 2 M P1 Q1) with P1 = k f2, P2 = k f3, P3 = k f1
        d4 = -2 * s * (fp[0] * fm[1] + fp[2] * fm[2]) + 4 * pm.z * fp[1] * fm[0]
        rhs = comps["g3+"] + comps["g3-"] + d4
        return _real(a11 * a22 - a12 * a21), _real(rhs)
    if kind == "UplusV":
        p = _parts(d, coeffs.r_plus, x)
        u, v = _uv(p)
        return _real(u + v), _real(2 * (-np.expm1(-d * (p.t + p.s))))
    if kind == "UtimesV":
        p = _parts(c, 0.0, x)
        u, v = _uv(p)
        e = np.exp(-2 * c * p.s)
        rhs = (-np.expm1(-2 * c * p.s)) ** 2 - 4 * c ** 2 * p.z * e
        return _real(u * v), _real(rhs)
    raise ValueError(f"unknown factorization kind {kind!r}; expected one of {FACTORIZATION_KINDS}")


def factorization_residual(kind: str, coeffs: CoefficientSet, c: float, d: float, x):
    """Relative residual ``|lhs - rhs| / max(|lhs|, |rhs|, 1e-30)`` of an identity."""
    lhs, rhs = factorization_sides(kind, coeffs, c, d, x)
    return _rel(lhs, rhs)


# ---------------------------------------------------------------- sign scans

SCAN_SYMBOLS = ("u", "v", "f1", "f2", "f3", "g", "b2", "det1", "det2")


@dataclass
class ScanRanges:
    """Sampling box of a sign scan.

    For the per-interval symbols (u, v, f1..f3, g) the sample is
    ``(delta, r, x)`` with ``x`` in ``(r_m, r_m + x_span]``.  For the
    coefficient symbols (b2, det1, det2) ``coeffs`` is fixed, ``delta`` is
    used for both c and d, and ``x`` lies in ``(x_min, x_min + x_span]``
    where ``x_min`` defaults to ``coeffs.r``.
    """

    delta: tuple = (0.1, 10.0)
    r_intervals: Sequence[tuple] = ((-5.0, -0.01), (0.01, 5.0))
    include_zero: bool = True
    x_span: float = 100.0
    coeffs: CoefficientSet | None = None
    x_min: float | None = None
    x_closed: bool = False  # admit x = x_min itself


@dataclass
class ScanReport:
    symbol: str
    sample_count: int
    seed: int
    min_value: float
    max_value: float
    violations: list
    delta: np.ndarray
    r: np.ndarray
    x: np.ndarray
    values: np.ndarray
    violation_flags: np.ndarray

    @property
    def violation_count(self) -> int:
        return int(np.count_nonzero(self.violation_flags))

    def summary(self) -> str:
        return (
            f"{self.symbol}: n={self.sample_count} min={self.min_value:.6g} "
            f"max={self.max_value:.6g} violations={self.violation_count}"
        )


def _expected_sign(symbol: str, r: np.ndarray) -> np.ndarray:
    """+1 where the symbol must be positive, -1 where negative."""
    zero = np.abs(r) < R0_SWITCH
    if symbol in ("u", "v", "f1", "b2", "det2"):
        return np.ones_like(r)
    if symbol in ("f2", "f3", "g"):
        return np.where(zero, 1.0, -1.0)
    if symbol == "det1":
        return -np.ones_like(r)
    raise ValueError(f"unknown scan symbol {symbol!r}; expected one of {SCAN_SYMBOLS}")


def sign_scan(symbol: str, ranges: ScanRanges | None = None, sample_count: int = 10_000,
              seed: int = 0) -> ScanReport:
    """Sample a symbol on its lemma domain and record every sign violation."""
    if symbol not in SCAN_SYMBOLS:
        raise ValueError(f"unknown scan symbol {symbol!r}; expected one of {SCAN_SYMBOLS}")
    ranges = ranges or ScanRanges()
    rng = np.random.default_rng(seed)
    n = int(sample_count)
    delta = rng.uniform(ranges.delta[0], ranges.delta[1], n)
    if symbol in ("b2", "det1", "det2"):
        co = ranges.coeffs
        if co is None:
            raise ValueError(f"scan of {symbol} needs ranges.coeffs")
        x0 = co.r if ranges.x_min is None else ranges.x_min
        u01 = rng.random(n)
        if ranges.x_closed:
            x = x0 + ranges.x_span * u01
        else:
            x = x0 + ranges.x_span * (1.0 - u01)
        r = np.full(n, co.r)
        if symbol == "b2":
            values = np.real(np.asarray(b_symbols(co, x)[1]))
        else:
            case = 1 if symbol == "det1" else 2
            values = np.asarray(det_symbol(case, co, delta, delta[::-1].copy(), x), dtype=float)
    else:
        choices = list(ranges.r_intervals) + ([None] if ranges.include_zero else [])
        pick = rng.integers(0, len(choices), n)
        lo = np.array([(0.0 if ch is None else ch[0]) for ch in choices])[pick]
        hi = np.array([(0.0 if ch is None else ch[1]) for ch in choices])[pick]
        r = lo + (hi - lo) * rng.random(n)
        rm = np.maximum(-r, 0.0)
        x = rm + ranges.x_span * (1.0 - rng.random(n))
        p = _parts(delta, r, x)
        u, v = _uv(p)
        if symbol == "u":
            values = u
        elif symbol == "v":
            values = v
        elif symbol == "g":
            values = _g(p)
        else:
            values = _f(int(symbol[1]), p, u, v)
        values = np.real(values)
    expected = _expected_sign(symbol, r)
    flags = ~(np.sign(values) == expected)
    viol = [
        {"delta": float(delta[i]), "r": float(r[i]), "x": float(x[i]), "value": float(values[i])}
        for i in np.flatnonzero(flags)
    ]
    return ScanReport(
        symbol=symbol,
        sample_count=n,
        seed=seed,
        min_value=float(np.min(values)),
        max_value=float(np.max(values)),
        violations=viol,
        delta=delta,
        r=r,
        x=x,
        values=values,
        violation_flags=flags,
    )
