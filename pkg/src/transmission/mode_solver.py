"""Per-mode solver for the two-interval fourth-order transmission problem.

For one eigenvalue ``lam`` of ``-A0`` each side solves

    u'''' - (2 lam + r) u'' + (lam**2 + r lam) u = f,

whose characteristic roots are ``+-m`` and ``+-ell`` with ``m = sqrt(lam)``
and ``ell = sqrt(lam + r)``.  The solution on an interval ``[xl, xr]`` is a
particular solution (free-space Green function, composite Gauss quadrature)
plus a combination of four homogeneous functions

    exp(-m X),  q(X),  exp(-m Y),  q(Y),      X = x - xl,  Y = xr - x,

with ``q(a) = (exp(-ell a) - exp(-m a)) / (m - ell)``.  The pair
``exp(-m X), q(X)`` spans the same space as ``exp(-m X), exp(-ell X)`` and
tends to ``X exp(-m X)`` as ``ell -> m``, so one basis covers the distinct
and the double-root cases and no function exceeds its value at the
interval end it decays from.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .quadrature import as_values, gauss_unit
from .symbols import CoefficientSet, uv_values

RCOND_MIN = 1e-13
DET_MIN = 1e-13
RESIDUAL_POINTS = 65


class SpectralError(ValueError):
    """Eigenvalue incompatible with the ratio: lam <= max(-r, 0)."""


class SingularSystemError(np.linalg.LinAlgError):
    """Near-singular transmission or auxiliary system."""


class QuadratureError(RuntimeError):
    """The halving check of the particular-solution quadrature failed."""


@dataclass(frozen=True)
class QuadratureSpec:
    panels: int = 64
    nodes: int = 8
    check: bool = True
    tol: float = 1e-8


def characteristic_roots(lam: float, r: float) -> tuple[float, float]:
    """Return ``(m, ell) = (sqrt(lam), sqrt(lam + r))``."""
    lam = float(lam)
    r = float(r)
    if not (lam > 0 and lam + r > 0):
        raise SpectralError(f"lambda = {lam!r} must exceed max(-r, 0) = {max(-r, 0.0)!r}")
    return math.sqrt(lam), math.sqrt(lam + r)


# ------------------------------------------------------------------ kernels

def _phi_real(w: np.ndarray) -> np.ndarray:
    """(1 - exp(-w)) / w for w >= 0."""
    w = np.asarray(w, dtype=float)
    small = w < 1e-8
    ws = np.where(small, 1.0, w)
    return np.where(small, 1.0 - 0.5 * w, -np.expm1(-ws) / ws)


def _p_coeffs(m: float, ell: float) -> tuple[float, ...]:
    # ((-ell)^n - (-m)^n) / (m - ell), n = 0..4
    return (
        0.0,
        1.0,
        -(m + ell),
        m * m + m * ell + ell * ell,
        -(m + ell) * (m * m + ell * ell),
    )


class _Kernel:
    """Evaluates q and its derivatives for a fixed root pair."""

    def __init__(self, m: float, ell: float):
        self.m = m
        self.ell = ell
        self.mu = min(m, ell)
        self.gap = abs(m - ell)
        self.p = _p_coeffs(m, ell)

    def q(self, a):
        a = np.asarray(a, dtype=float)
        return a * np.exp(-self.mu * a) * _phi_real(self.gap * a)

    def dq(self, a, n: int):
        a = np.asarray(a, dtype=float)
        if n == 0:
            return self.q(a)
        return (-self.m) ** n * self.q(a) + self.p[n] * np.exp(-self.ell * a)


@dataclass
class HomogeneousBasis:
    """The four homogeneous functions on ``[x_left, x_right]``."""

    m: float
    ell: float
    x_left: float
    x_right: float

    def __post_init__(self):
        self._k = _Kernel(self.m, self.ell)

    def eval(self, x, n: int = 0) -> np.ndarray:
        """Matrix of shape ``x.shape + (4,)`` with the n-th derivatives."""
        x = np.asarray(x, dtype=float)
        X = x - self.x_left
        Y = self.x_right - x
        m = self.m
        out = np.empty(x.shape + (4,))
        out[..., 0] = (-m) ** n * np.exp(-m * X)
        out[..., 1] = self._k.dq(X, n)
        out[..., 2] = m ** n * np.exp(-m * Y)
        out[..., 3] = (-1) ** n * self._k.dq(Y, n)
        return out

    def wronskian(self, x: float) -> float:
        rows = np.array([self.eval(np.array(x), n) for n in range(4)])
        return float(np.linalg.det(rows))


def homogeneous_basis(lam: float, r: float, interval) -> HomogeneousBasis:
    m, ell = characteristic_roots(lam, r)
    xl, xr = map(float, interval)
    if not xl < xr:
        raise ValueError("interval must satisfy x_left < x_right")
    return HomogeneousBasis(m, ell, xl, xr)


# ------------------------------------------------------- particular solution

class ParticularSolution:
    """Free-space Green-function solution ``u_p = int G(|x - xi|) f(xi) dxi``.

    ``G(a) = C (exp(-m a) + m q(a))`` with ``C = 1 / (2 m ell (m + ell))``.
    Cumulative integrals of ``exp(-m a)``, ``exp(-ell a)`` and ``q(a)``
    against f are propagated panel by panel using

        q(a + b) = exp(-m b) q(a) + exp(-ell a) q(b),

    so every term stays bounded.
    """

    def __init__(self, m: float, ell: float, f, x_left: float, x_right: float,
                 quad: QuadratureSpec = QuadratureSpec(), panels: int | None = None):
        self.m, self.ell = m, ell
        self.f = f
        self.x_left, self.x_right = float(x_left), float(x_right)
        self.quad = quad
        self._k = _Kernel(m, ell)
        self.C = 1.0 / (2.0 * m * ell * (m + ell))
        length = self.x_right - self.x_left
        if panels is None:
            panels = max(quad.panels, int(math.ceil(2.0 * max(m, ell) * length)))
        self.panels = int(panels)
        self.h = length / self.panels
        self.zero = f is None or (not callable(f) and float(f) == 0.0)
        self.xi, self.wi = gauss_unit(quad.nodes)
        if not self.zero:
            self._build()

    def _build(self):
        P, h, m, ell = self.panels, self.h, self.m, self.ell
        t = self.x_left + h * np.arange(P + 1)
        t[-1] = self.x_right
        self.t = t
        X = t[:-1, None] + h * self.xi[None, :]
        F = as_values(self.f, X)
        W = h * self.wi[None, :] * F
        self.f_scale = float(np.max(np.abs(F))) if F.size else 0.0
        aL = (t[1:, None] - X)  # distance to panel end
        aR = (X - t[:-1, None])  # distance from panel start
        k = self._k
        pa_m = np.sum(W * np.exp(-m * aL), axis=1)
        pa_l = np.sum(W * np.exp(-ell * aL), axis=1)
        pb = np.sum(W * k.q(aL), axis=1)
        pr_m = np.sum(W * np.exp(-m * aR), axis=1)
        pr_l = np.sum(W * np.exp(-ell * aR), axis=1)
        prb = np.sum(W * k.q(aR), axis=1)
        em, el, qh = math.exp(-m * h), math.exp(-ell * h), float(k.q(h))
        AL = np.zeros((3, P + 1))  # rows: exp(-m), exp(-ell), q
        for j in range(P):
            AL[0, j + 1] = em * AL[0, j] + pa_m[j]
            AL[1, j + 1] = el * AL[1, j] + pa_l[j]
            AL[2, j + 1] = em * AL[2, j] + qh * AL[1, j] + pb[j]
        AR = np.zeros((3, P + 1))
        for j in range(P - 1, -1, -1):
            AR[0, j] = em * AR[0, j + 1] + pr_m[j]
            AR[1, j] = el * AR[1, j + 1] + pr_l[j]
            AR[2, j] = em * AR[2, j + 1] + qh * AR[1, j + 1] + prb[j]
        self.AL, self.AR = AL, AR

    def _integrals(self, x: np.ndarray):
        m, ell, k = self.m, self.ell, self._k
        j = np.clip(np.floor((x - self.x_left) / self.h).astype(int), 0, self.panels - 1)
        tj, tj1 = self.t[j], self.t[j + 1]
        dl = np.maximum(x - tj, 0.0)
        dr = np.maximum(tj1 - x, 0.0)
        Y = tj[:, None] + dl[:, None] * self.xi[None, :]
        Z = x[:, None] + dr[:, None] * self.xi[None, :]
        FY = as_values(self.f, Y) * (dl[:, None] * self.wi[None, :])
        FZ = as_values(self.f, Z) * (dr[:, None] * self.wi[None, :])
        aY = x[:, None] - Y
        aZ = Z - x[:, None]
        AL, AR = self.AL, self.AR
        Lm = np.exp(-m * dl) * AL[0, j] + np.sum(FY * np.exp(-m * aY), axis=1)
        Ll = np.exp(-ell * dl) * AL[1, j] + np.sum(FY * np.exp(-ell * aY), axis=1)
        Lq = np.exp(-m * dl) * AL[2, j] + k.q(dl) * AL[1, j] + np.sum(FY * k.q(aY), axis=1)
        Rm = np.exp(-m * dr) * AR[0, j + 1] + np.sum(FZ * np.exp(-m * aZ), axis=1)
        Rl = np.exp(-ell * dr) * AR[1, j + 1] + np.sum(FZ * np.exp(-ell * aZ), axis=1)
        Rq = np.exp(-m * dr) * AR[2, j + 1] + k.q(dr) * AR[1, j + 1] + np.sum(FZ * k.q(aZ), axis=1)
        return (Lm, Ll, Lq), (Rm, Rl, Rq)

    def eval(self, x, n: int = 0) -> np.ndarray:
        """n-th derivative (n = 0..4) of the particular solution at x."""
        x = np.asarray(x, dtype=float)
        if n not in (0, 1, 2, 3, 4):
            raise ValueError("derivative order must be 0..4")
        if self.zero:
            return np.zeros_like(x)
        flat = x.reshape(-1)
        (Lm, Ll, Lq), (Rm, Rl, Rq) = self._integrals(flat)
        m, pn = self.m, self._k.p[n]
        left = (-m) ** n * (Lm + m * Lq) + m * pn * Ll
        right = (-m) ** n * (Rm + m * Rq) + m * pn * Rl
        out = self.C * (left + (-1) ** n * right)
        if n == 4:
            out = out + as_values(self.f, flat)
        return out.reshape(x.shape)

    def traces(self) -> np.ndarray:
        """Values and first three derivatives at both interval ends, shape (4, 2)."""
        ends = np.array([self.x_left, self.x_right])
        return np.array([self.eval(ends, n) for n in range(4)])


def particular_solution(lam: float, r: float, f, interval, quad: QuadratureSpec = QuadratureSpec(),
                        panels: int | None = None) -> ParticularSolution:
    """One particular solution on ``interval`` with an optional halving check."""
    m, ell = characteristic_roots(lam, r)
    xl, xr = map(float, interval)
    ps = ParticularSolution(m, ell, f, xl, xr, quad, panels)
    ps.error_estimate = 0.0
    if quad.check and not ps.zero:
        half = ParticularSolution(m, ell, f, xl, xr, quad, panels=max(1, ps.panels // 2))
        full_tr, half_tr = ps.traces(), half.traces()
        # same floor as the ODE residual: relative to max(|f|, 1)
        scale = max(float(np.max(np.abs(full_tr))), max(ps.f_scale, 1.0) * ps.C / max(m, ell))
        ps.error_estimate = float(np.max(np.abs(full_tr - half_tr))) / scale
        if ps.error_estimate > quad.tol:
            raise QuadratureError(
                f"particular-solution quadrature not converged: halving estimate "
                f"{ps.error_estimate:.3e} > {quad.tol:.1e} with {ps.panels} panels"
            )
    return ps


# ------------------------------------------------------------ mode problems

@dataclass
class ModeProblem:
    """One eigenvalue ``lam`` of ``-A0`` with its forcing and boundary data.

    ``f_minus`` and ``f_plus`` are the mode coefficients of ``g/k`` on each
    side; a callable of x (vectorized), a constant, or None for zero.
    """

    lam: float
    coeffs: CoefficientSet
    a: float
    gamma: float
    b: float
    f_minus: Callable | float | None = None
    f_plus: Callable | float | None = None
    phi1_minus: float = 0.0
    phi1_plus: float = 0.0
    phi2_minus: float = 0.0
    phi2_plus: float = 0.0
    quad: QuadratureSpec = QuadratureSpec()
    _mirror_source: object = field(default=None, init=False, compare=False, repr=False)

    def __post_init__(self):
        if not (self.a < self.gamma < self.b):
            raise ValueError("a < gamma < b violated")
        r = self.coeffs.r
        if not self.lam > r:
            raise SpectralError(f"lambda = {self.lam!r} must exceed r = {r!r}")

    @property
    def c(self) -> float:
        return self.gamma - self.a

    @property
    def d(self) -> float:
        return self.b - self.gamma


@dataclass
class ModeSolution:
    """Solution of one mode problem on ``[a, gamma]`` and ``[gamma, b]``."""

    problem: ModeProblem
    roots: tuple[float, float, float]
    coeffs_minus: np.ndarray
    coeffs_plus: np.ndarray
    basis_minus: HomogeneousBasis
    basis_plus: HomogeneousBasis
    particular_minus: ParticularSolution
    particular_plus: ParticularSolution
    rcond: float
    ode_residual: float = float("nan")
    condition_residuals: np.ndarray = field(default_factory=lambda: np.full(8, np.nan))
    tol: float = 1e-8

    def u_minus(self, x, n: int = 0) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.basis_minus.eval(x, n) @ self.coeffs_minus + self.particular_minus.eval(x, n)

    def u_plus(self, x, n: int = 0) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.basis_plus.eval(x, n) @ self.coeffs_plus + self.particular_plus.eval(x, n)

    def __call__(self, x, n: int = 0, side: str | None = None) -> np.ndarray:
        """Evaluate on [a, b]; gamma itself goes to ``side`` (default minus)."""
        x = np.asarray(x, dtype=float)
        g = self.problem.gamma
        if side == "minus":
            return self.u_minus(x, n)
        if side == "plus":
            return self.u_plus(x, n)
        out = np.empty_like(x)
        left = x <= g
        out[left] = self.u_minus(x[left], n)
        out[~left] = self.u_plus(x[~left], n)
        return out

    def traces(self) -> tuple[float, float]:
        """``(u(gamma), u'(gamma))`` from the minus side."""
        g = np.array([self.problem.gamma])
        return float(self.u_minus(g, 0)[0]), float(self.u_minus(g, 1)[0])

    @property
    def ok(self) -> bool:
        return bool(self.ode_residual <= self.tol and np.all(self.condition_residuals <= self.tol))


def _ode_terms(u0, u2, u4, f, lam, r):
    return u4, -(2 * lam + r) * u2, (lam * lam + r * lam) * u0, -f


def ode_residual(sol_eval, f, lam: float, r: float, x: np.ndarray) -> float:
    """Relative ODE residual on x, normalised by the largest term and max(|f|, 1)."""
    u0, u2, u4 = sol_eval(x, 0), sol_eval(x, 2), sol_eval(x, 4)
    fv = as_values(f, x)
    terms = _ode_terms(u0, u2, u4, fv, lam, r)
    res = np.abs(sum(terms))
    scale = max(1.0, float(np.max(np.abs(fv))) if fv.size else 0.0,
                max(float(np.max(np.abs(t))) for t in terms))
    return float(np.max(res) / scale)


def _condition_rows(mp: ModeProblem, bm: HomogeneousBasis, bp: HomogeneousBasis):
    lam, co = mp.lam, mp.coeffs
    a, g, b = np.array(mp.a), np.array(mp.gamma), np.array(mp.b)
    Bm = [bm.eval(np.array([a, g]), n) for n in range(4)]  # each (2, 4)
    Bp = [bp.eval(np.array([g, b]), n) for n in range(4)]
    z4 = np.zeros(4)
    A = np.zeros((8, 8))
    A[0] = np.r_[Bm[0][0], z4]
    A[1] = np.r_[Bm[1][0], z4]
    A[2] = np.r_[z4, Bp[0][1]]
    A[3] = np.r_[z4, Bp[1][1]]
    A[4] = np.r_[Bm[0][1], -Bp[0][0]]
    A[5] = np.r_[Bm[1][1], -Bp[1][0]]
    A[6] = np.r_[co.k_minus * (Bm[2][1] - lam * Bm[0][1]), -co.k_plus * (Bp[2][0] - lam * Bp[0][0])]
    A[7] = np.r_[
        co.k_minus * (Bm[3][1] - lam * Bm[1][1]) - co.l_minus * Bm[1][1],
        -(co.k_plus * (Bp[3][0] - lam * Bp[1][0]) - co.l_plus * Bp[1][0]),
    ]
    return A


def _condition_values(mp: ModeProblem, um: np.ndarray, up: np.ndarray) -> np.ndarray:
    """The eight condition expressions from traces.

    ``um`` holds (u, u', u'', u''') at (a, gamma) as shape (4, 2); ``up`` at
    (gamma, b).
    """
    lam, co = mp.lam, mp.coeffs
    return np.array([
        um[0, 0],
        um[1, 0],
        up[0, 1],
        up[1, 1],
        um[0, 1] - up[0, 0],
        um[1, 1] - up[1, 0],
        co.k_minus * (um[2, 1] - lam * um[0, 1]) - co.k_plus * (up[2, 0] - lam * up[0, 0]),
        co.k_minus * (um[3, 1] - lam * um[1, 1]) - co.l_minus * um[1, 1]
        - (co.k_plus * (up[3, 0] - lam * up[1, 0]) - co.l_plus * up[1, 0]),
    ])


def _data_vector(mp: ModeProblem) -> np.ndarray:
    return np.array([mp.phi1_minus, mp.phi2_minus, mp.phi1_plus, mp.phi2_plus, 0, 0, 0, 0], dtype=float)


def _build_pieces(mp: ModeProblem):
    co = mp.coeffs
    m, ellp = characteristic_roots(mp.lam, co.r_plus)
    _, ellm = characteristic_roots(mp.lam, co.r_minus)
    bm = HomogeneousBasis(m, ellm, mp.a, mp.gamma)
    bp = HomogeneousBasis(m, ellp, mp.gamma, mp.b)
    pm = particular_solution(mp.lam, co.r_minus, mp.f_minus, (mp.a, mp.gamma), mp.quad)
    pp = particular_solution(mp.lam, co.r_plus, mp.f_plus, (mp.gamma, mp.b), mp.quad)
    return (m, ellp, ellm), bm, bp, pm, pp


def assemble_transmission_system(mp: ModeProblem, pieces=None):
    """The 8x8 system for the basis weights.

    Rows: u-(a), u-'(a), u+(b), u+'(b), continuity of u and u' at gamma,
    then k(u'' - lam u) and k(u''' - lam u') - l u' jumps at gamma.
    Columns: four minus-side weights, then four plus-side weights.
    """
    if pieces is None:
        pieces = _build_pieces(mp)
    _, bm, bp, pm, pp = pieces
    A = _condition_rows(mp, bm, bp)
    rhs = _data_vector(mp) - _condition_values(mp, pm.traces(), pp.traces())
    return A, rhs


def _equilibrated_solve(A: np.ndarray, rhs: np.ndarray, what: str):
    row = np.max(np.abs(A), axis=1)
    row[row == 0] = 1.0
    As = A / row[:, None]
    col = np.max(np.abs(As), axis=0)
    col[col == 0] = 1.0
    As = As / col[None, :]
    rcond = 1.0 / np.linalg.cond(As, 1)
    if not rcond >= RCOND_MIN:
        raise SingularSystemError(f"{what}: reciprocal condition number {rcond:.3e} < {RCOND_MIN:g}")
    y = np.linalg.solve(As, rhs / row)
    return y / col, float(rcond)


def _scaled_condition_residuals(mp: ModeProblem, sol: ModeSolution) -> np.ndarray:
    um = np.array([sol.u_minus(np.array([mp.a, mp.gamma]), n) for n in range(4)])
    up = np.array([sol.u_plus(np.array([mp.gamma, mp.b]), n) for n in range(4)])
    vals = _condition_values(mp, um, up) - _data_vector(mp)
    # each row is compared with the size of the quantities it balances
    co, lam = mp.coeffs, mp.lam
    mags = np.array([
        abs(um[0, 0]), abs(um[1, 0]), abs(up[0, 1]), abs(up[1, 1]),
        max(abs(um[0, 1]), abs(up[0, 0])), max(abs(um[1, 1]), abs(up[1, 0])),
        max(abs(co.k_minus) * (abs(um[2, 1]) + lam * abs(um[0, 1])),
            abs(co.k_plus) * (abs(up[2, 0]) + lam * abs(up[0, 0]))),
        max(abs(co.k_minus) * (abs(um[3, 1]) + lam * abs(um[1, 1])) + abs(co.l_minus * um[1, 1]),
            abs(co.k_plus) * (abs(up[3, 0]) + lam * abs(up[1, 0])) + abs(co.l_plus * up[1, 0])),
    ])
    return np.abs(vals) / np.maximum(mags, 1.0)


def solve_mode(mp: ModeProblem, check: bool = True) -> ModeSolution:
    """Solve one mode problem by a single equilibrated 8x8 solve."""
    pieces = _build_pieces(mp)
    roots, bm, bp, pm, pp = pieces
    A, rhs = assemble_transmission_system(mp, pieces)
    w, rcond = _equilibrated_solve(A, rhs, f"mode lambda={mp.lam:g}")
    sol = ModeSolution(mp, roots, w[:4].copy(), w[4:].copy(), bm, bp, pm, pp, rcond)
    if check:
        xm = np.linspace(mp.a, mp.gamma, RESIDUAL_POINTS)
        xp = np.linspace(mp.gamma, mp.b, RESIDUAL_POINTS)
        co = mp.coeffs
        sol.ode_residual = max(
            ode_residual(sol.u_minus, mp.f_minus, mp.lam, co.r_minus, xm),
            ode_residual(sol.u_plus, mp.f_plus, mp.lam, co.r_plus, xp),
        )
        sol.condition_residuals = _scaled_condition_residuals(mp, sol)
    return sol


# ------------------------------------------------------- auxiliary problems

@dataclass
class AuxiliarySolution:
    """Solution of the Navier problem u = u'' = 0 at both ends of one interval."""

    basis: HomogeneousBasis
    particular: ParticularSolution
    weights: np.ndarray
    rcond: float

    def __call__(self, x, n: int = 0) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.basis.eval(x, n) @ self.weights + self.particular.eval(x, n)


def solve_auxiliary_F(side: str, lam: float, coeffs: CoefficientSet, f, interval,
                      quad: QuadratureSpec = QuadratureSpec()) -> AuxiliarySolution:
    """Solve the single-interval problem with Navier conditions at both ends."""
    if side not in ("plus", "minus"):
        raise ValueError("side must be 'plus' or 'minus'")
    r = coeffs.r_plus if side == "plus" else coeffs.r_minus
    if (coeffs.r_minus_is_zero and side == "minus") or (coeffs.r_plus_is_zero and side == "plus"):
        r = 0.0
    basis = homogeneous_basis(lam, r, interval)
    ps = particular_solution(lam, r, f, interval, quad)
    ends = np.array([basis.x_left, basis.x_right])
    B0, B2 = basis.eval(ends, 0), basis.eval(ends, 2)
    A = np.vstack([B0, B2])
    tr = ps.traces()
    rhs = -np.r_[tr[0], tr[2]]
    w, rcond = _equilibrated_solve(A, rhs, f"auxiliary problem ({side}, lambda={lam:g})")
    return AuxiliarySolution(basis, ps, w, rcond)


# ------------------------------------------------------ transmission route

@dataclass
class PsiRoute:
    psi1: float
    psi2: float
    det_value: float
    matrix: np.ndarray
    rhs: np.ndarray


def _scalar_uv(delta, r, x):
    u, v = uv_values(delta, r, x)
    return u.real, v.real


def _plus_side(mp: ModeProblem, Fp: AuxiliarySolution):
    co, lam, d = mp.coeffs, mp.lam, mp.d
    s = math.sqrt(lam)
    t = math.sqrt(lam + co.r_plus)
    M, L = -s, -t
    eM, eL = math.exp(-d * s), math.exp(-d * t)
    U, V = _scalar_uv(d, co.r_plus, lam)
    g, b = np.array([mp.gamma]), np.array([mp.b])
    dFg, dFb = float(Fp(g, 1)[0]), float(Fp(b, 1)[0])
    p1, p2 = mp.phi1_plus, mp.phi2_plus
    ph = {
        1: -L * (1 + eL) * p1 + (1 - eL) * (dFb + dFg - p2),
        2: -M * (1 + eM) * p1 + (1 - eM) * (dFb + dFg - p2),
        3: L * (1 - eL) * p1 - (1 + eL) * (dFb - dFg - p2),
        4: M * (1 - eM) * p1 - (1 + eM) * (dFb - dFg - p2),
    }
    kp = co.k_plus
    P1 = kp * (L + M) * ((1 + eM) * (1 - eL) / U + (1 - eM) * (1 + eL) / V)
    P2 = kp * (L + M) * ((1 - eM) * (1 - eL) / U + (1 + eM) * (1 + eL) / V)
    P3 = kp * (L + M) * L * ((1 + eM) * (1 + eL) / U + (1 - eM) * (1 - eL) / V)
    Sa = kp * (L + M) * ((1 - eL) * ph[2] / U + (1 + eL) * ph[4] / V)
    Sb = kp * (L + M) * ((1 + eM) * ph[1] / U + (1 - eM) * ph[3] / V)
    d3, d1 = float(Fp(g, 3)[0]), dFg
    return dict(M=M, P1=P1, P2=P2, P3=P3, Sa=Sa, Sb=Sb, F3=d3, F1=d1)


def _minus_side_general(mp: ModeProblem, Fm: AuxiliarySolution):
    """Minus-side pieces for r- != 0, written in the mirror image of the plus side."""
    co, lam, c = mp.coeffs, mp.lam, mp.c
    s = math.sqrt(lam)
    t = math.sqrt(lam + co.r_minus)
    M, L = -s, -t
    eM, eL = math.exp(-c * s), math.exp(-c * t)
    U, V = _scalar_uv(c, co.r_minus, lam)
    a, g = np.array([mp.a]), np.array([mp.gamma])
    dFa, dFg = float(Fm(a, 1)[0]), float(Fm(g, 1)[0])
    p1, p2 = mp.phi1_minus, mp.phi2_minus
    ph = {
        1: -L * (1 + eL) * p1 + (1 - eL) * (p2 - dFa - dFg),
        2: -M * (1 + eM) * p1 + (1 - eM) * (p2 - dFa - dFg),
        3: L * (1 - eL) * p1 - (1 + eL) * (p2 - dFa + dFg),
        4: M * (1 - eM) * p1 - (1 + eM) * (p2 - dFa + dFg),
    }
    km = co.k_minus
    P1 = km * (L + M) * ((1 + eM) * (1 - eL) / U + (1 - eM) * (1 + eL) / V)
    P2 = km * (L + M) * ((1 - eM) * (1 - eL) / U + (1 + eM) * (1 + eL) / V)
    P3 = km * (L + M) * L * ((1 + eM) * (1 + eL) / U + (1 - eM) * (1 - eL) / V)
    Sa = km * (L + M) * ((1 - eL) * ph[2] / U + (1 + eL) * ph[4] / V)
    Sb = km * (L + M) * ((1 + eM) * ph[1] / U + (1 - eM) * ph[3] / V)
    return dict(P1=P1, P2=P2, P3=P3, Sa=Sa, Sb=Sb, F3=float(Fm(g, 3)[0]), F1=dFg)


def _minus_side_zero(mp: ModeProblem, Fm: AuxiliarySolution):
    """Minus-side pieces for r- = 0 (double characteristic roots)."""
    co, lam, c = mp.coeffs, mp.lam, mp.c
    s = math.sqrt(lam)
    M = -s
    E = math.exp(-c * s)
    U, V = _scalar_uv(c, 0.0, lam)
    a, g = np.array([mp.a]), np.array([mp.gamma])
    dFa, dFg = float(Fm(a, 1)[0]), float(Fm(g, 1)[0])
    p1, p2 = mp.phi1_minus, mp.phi2_minus
    ph2 = -M * (1 + E) * p1 + (1 - E) * (p2 - dFa - dFg)
    ph4 = M * (1 - E) * p1 - (1 + E) * (p2 - dFa + dFg)
    km = co.k_minus
    Q1 = km * (1 / U + 1 / V) * (1 - E * E)
    Q2 = km * ((1 - E) ** 2 / U + (1 + E) ** 2 / V)
    Q3 = km * ((1 + E) ** 2 / U + (1 - E) ** 2 / V)
    S3m = 2 * km * M * ((1 - E) * ph2 / U + (1 + E) * ph4 / V)
    S4m = -2 * km * M * ((1 + E) * ph2 / U + (1 - E) * ph4 / V)
    return dict(Q1=Q1, Q2=Q2, Q3=Q3, S3=S3m, S4=S4m, F3=float(Fm(g, 3)[0]), F1=dFg)


def psi_via_paper_route(case: int, mp: ModeProblem) -> PsiRoute:
    """Interface traces ``(u(gamma), u'(gamma))`` from the 2x2 trace system.

    Case 1 (both ratios nonzero) solves

        (P1- - P1+) M psi1 + (P2+ + P2-) psi2 = S1
        (P3+ + P3-) psi1 + (P1- - P1+) psi2 = S2,

    case 2 (r- = 0) solves

        (P1+ - 2M Q1) M psi1 - (P2+ + 2M Q2) psi2 = S3
        (P3+ + 2M^2 Q3) psi1 + (2M Q1 - P1+) psi2 = S4,

    all operators replaced by their scalar values at ``lam``.  The right-hand
    sides use auxiliary Navier solutions F+ and F- computed numerically.
    """
    co, lam = mp.coeffs, mp.lam
    if case == 1:
        if co.r_plus_is_zero or co.r_minus_is_zero:
            raise ValueError("case 1 requires r_plus != 0 and r_minus != 0")
    elif case == 2:
        if co.r_plus_is_zero or not co.r_minus_is_zero:
            raise ValueError("case 2 requires r_plus != 0 and r_minus = 0")
    else:
        raise ValueError(f"case must be 1 or 2, got {case!r}")
    Fp = solve_auxiliary_F("plus", lam, co, mp.f_plus, (mp.gamma, mp.b), mp.quad)
    Fm = solve_auxiliary_F("minus", lam, co, mp.f_minus, (mp.a, mp.gamma), mp.quad)
    pl = _plus_side(mp, Fp)
    M = pl["M"]
    M2 = lam
    if case == 1:
        mi = _minus_side_general(mp, Fm)
        R1 = (-co.k_plus * pl["F3"] + co.k_plus * M2 * pl["F1"] + co.l_plus * pl["F1"]
              + co.k_minus * mi["F3"] - co.k_minus * M2 * mi["F1"] - co.l_minus * mi["F1"])
        A = np.array([
            [(mi["P1"] - pl["P1"]) * M, pl["P2"] + mi["P2"]],
            [pl["P3"] + mi["P3"], mi["P1"] - pl["P1"]],
        ])
        rhs = np.array([pl["Sa"] - mi["Sa"], -pl["Sb"] - mi["Sb"] - 2.0 / M * R1])
    else:
        mi = _minus_side_zero(mp, Fm)
        R2 = (-co.k_minus * mi["F3"] + co.k_minus * M2 * mi["F1"]
              + co.k_plus * pl["F3"] - co.k_plus * M2 * pl["F1"] - co.l_plus * pl["F1"])
        A = np.array([
            [(pl["P1"] - 2 * M * mi["Q1"]) * M, -(pl["P2"] + 2 * M * mi["Q2"])],
            [pl["P3"] + 2 * M * M * mi["Q3"], 2 * M * mi["Q1"] - pl["P1"]],
        ])
        rhs = np.array([mi["S3"] - pl["Sa"], mi["S4"] - pl["Sb"] + 2.0 / M * R2])
    det = float(A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0])
    norm = float(np.linalg.norm(A[0]) * np.linalg.norm(A[1]))
    if not abs(det) >= DET_MIN * norm:
        raise SingularSystemError(f"trace system determinant {det:.3e} is numerically zero")
    psi1 = (rhs[0] * A[1, 1] - A[0, 1] * rhs[1]) / det
    psi2 = (A[0, 0] * rhs[1] - A[1, 0] * rhs[0]) / det
    return PsiRoute(float(psi1), float(psi2), det, A, rhs)


# ------------------------------------------------------------------ mirror

class _Reflected:
    """x -> center - x applied to a callable of x, optionally negated."""

    def __init__(self, fn, center: float, sign: float = 1.0):
        self.fn, self.center, self.sign = fn, center, sign

    def __call__(self, x):
        return self.sign * np.asarray(as_values(self.fn, self.center - np.asarray(x, dtype=float)))


def reflect_callable(fn, center: float, sign: float = 1.0):
    if fn is None:
        return None
    if not callable(fn):
        return sign * fn
    if isinstance(fn, _Reflected) and fn.center == center and fn.sign * sign == 1.0:
        return fn.fn
    return _Reflected(fn, center, sign)


def swap_coefficients(co: CoefficientSet) -> CoefficientSet:
    return CoefficientSet(co.k_minus, co.k_plus, co.l_minus, co.l_plus)


def mirror_mode_problem(mp: ModeProblem) -> ModeProblem:
    """Reflect x -> a + b - x: the habitats swap and odd derivatives change sign."""
    if mp._mirror_source is not None:
        return mp._mirror_source
    ab = mp.a + mp.b
    out = ModeProblem(
        lam=mp.lam,
        coeffs=swap_coefficients(mp.coeffs),
        a=mp.a,
        gamma=ab - mp.gamma,
        b=mp.b,
        f_minus=reflect_callable(mp.f_plus, ab),
        f_plus=reflect_callable(mp.f_minus, ab),
        phi1_minus=mp.phi1_plus,
        phi1_plus=mp.phi1_minus,
        phi2_minus=-mp.phi2_plus,
        phi2_plus=-mp.phi2_minus,
        quad=mp.quad,
    )
    out._mirror_source = mp
    return out


class ReflectedSolution:
    """Evaluator of a mode solution of the mirrored problem, reflected back."""

    def __init__(self, sol: ModeSolution, original: ModeProblem):
        self.sol = sol
        self.problem = original
        self.center = original.a + original.b

    def u_minus(self, x, n: int = 0):
        x = np.asarray(x, dtype=float)
        return (-1) ** n * self.sol.u_plus(self.center - x, n)

    def u_plus(self, x, n: int = 0):
        x = np.asarray(x, dtype=float)
        return (-1) ** n * self.sol.u_minus(self.center - x, n)

    def __call__(self, x, n: int = 0, side: str | None = None):
        x = np.asarray(x, dtype=float)
        if side == "minus":
            return self.u_minus(x, n)
        if side == "plus":
            return self.u_plus(x, n)
        out = np.empty_like(x)
        left = x <= self.problem.gamma
        out[left] = self.u_minus(x[left], n)
        out[~left] = self.u_plus(x[~left], n)
        return out


def solve_mode_mirrored(mp: ModeProblem) -> ReflectedSolution:
    """Solve through the mirror image (used for the r+ = 0 case)."""
    return ReflectedSolution(solve_mode(mirror_mode_problem(mp)), mp)
