"""Second-order finite-difference reference solver for single modes.

Shares no code path with the spectral solver: unknowns are nodal values on
each interval plus one ghost node past each end, the ODE is imposed with
central stencils at interior nodes, and the boundary and transmission rows
close the system.  Third derivatives at the interface use the 5-point
second-order stencil on offsets -3..1 (minus side) or -1..3 (plus side).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .mode_solver import ModeProblem
from .quadrature import as_values
from .symbols import CoefficientSet

MIN_INTERIOR = 8

# d/dx on offsets -1, 0, 1 and d^3/dx^3 on offsets -3..1; the plus-side
# third-derivative stencil is the negated mirror image.
D1_CENTRAL = np.array([-0.5, 0.0, 0.5])
D2_CENTRAL = np.array([1.0, -2.0, 1.0])
D4_CENTRAL = np.array([1.0, -4.0, 6.0, -4.0, 1.0])
D3_LEFT = np.array([0.5, -3.0, 6.0, -5.0, 1.5])  # offsets -3, -2, -1, 0, 1
D3_RIGHT = -D3_LEFT[::-1]  # offsets -1, 0, 1, 2, 3


class FDSingularError(np.linalg.LinAlgError):
    pass


@dataclass
class FDGrid:
    """Nodal FD solution; gamma is a node of both intervals."""

    h: float
    h_minus: float
    h_plus: float
    x_minus: np.ndarray
    x_plus: np.ndarray
    values_minus: np.ndarray
    values_plus: np.ndarray
    ghosts: tuple = ()

    @property
    def nodes(self) -> np.ndarray:
        return np.r_[self.x_minus, self.x_plus[1:]]

    @property
    def values(self) -> np.ndarray:
        return np.r_[self.values_minus, self.values_plus[1:]]

    @property
    def n_minus(self) -> int:
        return self.x_minus.size - 1

    @property
    def n_plus(self) -> int:
        return self.x_plus.size - 1


def _intervals(length: float, h: float) -> int:
    n = max(1, int(round(length / h)))
    if n - 1 < MIN_INTERIOR:
        raise ValueError(f"step h = {h!r} leaves fewer than {MIN_INTERIOR} interior nodes on an interval of length {length!r}")
    return n


class _Assembler:
    def __init__(self, size: int):
        self.rows, self.cols, self.vals = [], [], []
        self.rhs = np.zeros(size)
        self.row = 0

    def add(self, cols, vals, rhs: float = 0.0):
        cols = np.atleast_1d(cols)
        vals = np.atleast_1d(vals)
        self.rows.extend([self.row] * cols.size)
        self.cols.extend(cols.tolist())
        self.vals.extend(vals.tolist())
        self.rhs[self.row] = rhs
        self.row += 1

    def solve(self, size: int, what: str) -> np.ndarray:
        if self.row != size:
            raise AssertionError(f"{self.row} rows for {size} unknowns")
        A = sp.csc_matrix((self.vals, (self.rows, self.cols)), shape=(size, size))
        try:
            with np.errstate(all="raise"):
                lu = spla.splu(A)
        except (RuntimeError, FloatingPointError) as err:
            raise FDSingularError(f"{what}: singular discrete system ({err})") from err
        x = lu.solve(self.rhs)
        if not np.all(np.isfinite(x)):
            raise FDSingularError(f"{what}: singular discrete system")
        return x


def _ode_rows(asm: _Assembler, off: int, n: int, h: float, lam: float, r: float, fvals: np.ndarray):
    """Rows h^4 (u'''' - (2 lam + r) u'' + (lam^2 + r lam) u) = h^4 f at nodes 1..n-1.

    Node i of the interval is unknown ``off + i + 1`` (ghost -1 is ``off``).
    """
    c2 = -(2 * lam + r) * h * h
    c0 = (lam * lam + r * lam) * h ** 4
    stencil = D4_CENTRAL.copy()
    stencil[1:4] += c2 * D2_CENTRAL
    stencil[2] += c0
    for i in range(1, n):
        cols = off + i + 1 + np.arange(-2, 3)
        asm.add(cols, stencil, h ** 4 * fvals[i])


def fd_solve_mode(mp: ModeProblem, h: float, n_minus: int | None = None, n_plus: int | None = None) -> FDGrid:
    """Second-order FD solution of one mode problem with step close to h."""
    if not h > 0:
        raise ValueError("h > 0 violated")
    co = mp.coeffs
    lam = mp.lam
    nm = n_minus if n_minus is not None else _intervals(mp.c, h)
    npl = n_plus if n_plus is not None else _intervals(mp.d, h)
    hm, hp = mp.c / nm, mp.d / npl
    xm = mp.a + hm * np.arange(nm + 1)
    xm[-1] = mp.gamma
    xp = mp.gamma + hp * np.arange(npl + 1)
    xp[-1] = mp.b
    om, op = 0, nm + 3  # offsets of the ghost node of each side
    size = nm + npl + 6
    um = lambda i: om + i + 1  # noqa: E731
    up = lambda i: op + i + 1  # noqa: E731
    asm = _Assembler(size)
    _ode_rows(asm, om, nm, hm, lam, co.r_minus, as_values(mp.f_minus, xm))
    _ode_rows(asm, op, npl, hp, lam, co.r_plus, as_values(mp.f_plus, xp))
    # boundary rows
    asm.add(um(0), 1.0, mp.phi1_minus)
    asm.add([um(-1), um(1)], [-0.5, 0.5], hm * mp.phi2_minus)
    asm.add(up(npl), 1.0, mp.phi1_plus)
    asm.add([up(npl - 1), up(npl + 1)], [-0.5, 0.5], hp * mp.phi2_plus)
    # transmission rows at gamma: node nm of minus, node 0 of plus
    cm1 = [um(nm - 1), um(nm), um(nm + 1)]
    cp1 = [up(-1), up(0), up(1)]
    cm3 = [um(nm + j) for j in range(-3, 2)]
    cp3 = [up(j) for j in range(-1, 4)]
    asm.add([um(nm), up(0)], [1.0, -1.0])
    asm.add(cm1 + cp1, np.r_[D1_CENTRAL / hm, -D1_CENTRAL / hp])
    # k (u'' - lam u) continuity
    lap_m = co.k_minus * (D2_CENTRAL / hm ** 2 - lam * np.array([0, 1.0, 0]))
    lap_p = co.k_plus * (D2_CENTRAL / hp ** 2 - lam * np.array([0, 1.0, 0]))
    asm.add(cm1 + cp1, np.r_[lap_m, -lap_p])
    # k (u''' - lam u') - l u' continuity
    d1m = np.zeros(5)
    d1m[2:5] = D1_CENTRAL / hm  # offsets -1, 0, 1 within -3..1
    d1p = np.zeros(5)
    d1p[0:3] = D1_CENTRAL / hp  # offsets -1, 0, 1 within -1..3
    flux_m = co.k_minus * (D3_LEFT / hm ** 3 - lam * d1m) - co.l_minus * d1m
    flux_p = co.k_plus * (D3_RIGHT / hp ** 3 - lam * d1p) - co.l_plus * d1p
    asm.add(cm3 + cp3, np.r_[flux_m, -flux_p])
    sol = asm.solve(size, f"FD mode lambda={lam:g}, h={h:g}")
    vm = sol[om + 1: om + nm + 2]
    vp = sol[op + 1: op + npl + 2]
    return FDGrid(h, hm, hp, xm, xp, vm, vp, (sol[om], sol[om + nm + 2], sol[op], sol[op + npl + 2]))


def fd_sequence(mp: ModeProblem, h: float, levels: int = 3) -> list[FDGrid]:
    """Nested grids h, h/2, h/4, ... (interval counts doubled exactly)."""
    nm, npl = _intervals(mp.c, h), _intervals(mp.d, h)
    return [fd_solve_mode(mp, h / 2 ** j, nm * 2 ** j, npl * 2 ** j) for j in range(levels)]


def _restrict(fine: FDGrid, coarse: FDGrid) -> np.ndarray:
    sm = (fine.n_minus // coarse.n_minus)
    spl = (fine.n_plus // coarse.n_plus)
    return np.r_[fine.values_minus[::sm], fine.values_plus[::spl][1:]]


def richardson(grids: list[FDGrid], order: float = 2.0) -> tuple[np.ndarray, np.ndarray]:
    """Extrapolate the two finest nested grids onto the coarsest nodes."""
    coarse = grids[0]
    u1 = _restrict(grids[-2], coarse)
    u2 = _restrict(grids[-1], coarse)
    f = 2.0 ** order
    return coarse.nodes, u2 + (u2 - u1) / (f - 1.0)


def _spectral_on(ms, grid: FDGrid) -> np.ndarray:
    return np.r_[ms.u_minus(grid.x_minus), ms.u_plus(grid.x_plus[1:])]


def _errors(ms, grid: FDGrid) -> tuple[float, float]:
    e = grid.values - _spectral_on(ms, grid)
    em = e[: grid.n_minus + 1]
    ep = e[grid.n_minus:]
    # trapezoid-weighted discrete L2 on each interval
    wm = np.full(em.size, grid.h_minus)
    wm[[0, -1]] *= 0.5
    wp = np.full(ep.size, grid.h_plus)
    wp[[0, -1]] *= 0.5
    l2 = math.sqrt(float(np.sum(wm * em ** 2) + np.sum(wp * ep ** 2)))
    return float(np.max(np.abs(e))), l2


def compare(ms, fd) -> tuple[float, float, float]:
    """(max_err, l2_err, observed_order) of FD grid(s) against a mode solution.

    With one grid the order is nan.  With nested grids (h, h/2, h/4) the
    errors refer to the finest grid and the order is the self-convergence
    rate log2(|u_h - u_h/2| / |u_h/2 - u_h/4|) on the coarse nodes.
    """
    if isinstance(fd, FDGrid):
        mx, l2 = _errors(ms, fd)
        return mx, l2, float("nan")
    grids = list(fd)
    if len(grids) < 3:
        raise ValueError("three nested grids are needed for an order estimate")
    mx, l2 = _errors(ms, grids[-1])
    c = grids[-3]
    d1 = np.max(np.abs(_restrict(grids[-2], c) - c.values))
    d2 = np.max(np.abs(_restrict(grids[-1], c) - _restrict(grids[-2], c)))
    if d1 == 0.0 and d2 == 0.0:
        return mx, l2, float("nan")
    order = math.log2(d1 / d2) if d2 > 0 else float("inf")
    return mx, l2, float(order)


@dataclass
class FDAuxiliary:
    h: float
    x: np.ndarray
    values: np.ndarray
    d1: tuple[float, float]  # F' at both ends
    d3: tuple[float, float]  # F''' at both ends


def fd_solve_auxiliary(side: str, lam: float, coeffs: CoefficientSet, f, interval, h: float,
                       n: int | None = None) -> FDAuxiliary:
    """FD solution of u = u'' = 0 at both ends of one interval."""
    r = coeffs.r_plus if side == "plus" else coeffs.r_minus
    xl, xr = map(float, interval)
    n = n if n is not None else _intervals(xr - xl, h)
    hh = (xr - xl) / n
    x = xl + hh * np.arange(n + 1)
    x[-1] = xr
    size = n + 3
    asm = _Assembler(size)
    _ode_rows(asm, 0, n, hh, lam, r, as_values(f, x))
    u = lambda i: i + 1  # noqa: E731
    asm.add(u(0), 1.0)
    asm.add([u(-1), u(0), u(1)], D2_CENTRAL)
    asm.add(u(n), 1.0)
    asm.add([u(n - 1), u(n), u(n + 1)], D2_CENTRAL)
    sol = asm.solve(size, f"FD auxiliary ({side}) lambda={lam:g}, h={h:g}")
    d1 = ((sol[u(1)] - sol[u(-1)]) / (2 * hh), (sol[u(n + 1)] - sol[u(n - 1)]) / (2 * hh))
    left3 = float(D3_RIGHT @ sol[[u(j) for j in range(-1, 4)]]) / hh ** 3
    right3 = float(D3_LEFT @ sol[[u(n + j) for j in range(-3, 2)]]) / hh ** 3
    return FDAuxiliary(hh, x, sol[1: n + 2], d1, (left3, right3))
