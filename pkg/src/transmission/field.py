"""Sine-mode reduction of the two-dimensional problem on (a, b) x (0, ell)."""
from __future__ import annotations

import math
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np

from .mode_solver import ModeProblem, QuadratureError, QuadratureSpec, solve_mode
from .problem import Geometry, ProblemData
from .quadrature import composite_nodes
from .regime import RegimeReport, SpectrumInfo, check_theorem1
from .symbols import CoefficientSet

PROJ_RTOL = 1e-11
INTERFACE_NAMES = (
    "u- = u+",
    "du-/dx = du+/dx",
    "k- lap u- = k+ lap u+",
    "d/dx(k- lap u- - l- u-) = d/dx(k+ lap u+ - l+ u+)",
)


class InadmissibleRegimeError(ValueError):
    pass


class ModeError(RuntimeError):
    def __init__(self, k: int, err: Exception):
        super().__init__(f"mode {k}: {type(err).__name__}: {err}")
        self.k = k
        self.__cause__ = err


def _y_rule(ell: float, K: int, panels: int | None, nodes: int = 8):
    if panels is None:
        panels = max(32, 2 * K)
    y, w = composite_nodes(0.0, ell, panels, nodes)
    return y.ravel(), w.ravel()


def _sine_weights(ell: float, K: int, y: np.ndarray, w: np.ndarray) -> np.ndarray:
    k = np.arange(1, K + 1)[:, None]
    return (2.0 / ell) * w[None, :] * np.sin(k * math.pi * y[None, :] / ell)


class _Projector:
    """All K sine coefficients of g(x, .)/k_side from one evaluation of g.

    Recently requested x arrays are cached so the K mode forcings built
    from one projector share the evaluations of g.
    """

    def __init__(self, g, geometry: Geometry, k_side: float, panels: int | None, cache_size: int = 16):
        self.g, self.k_side, self.K = g, k_side, geometry.K
        self.ell = geometry.ell
        self.panels = panels if panels is not None else max(32, 2 * geometry.K)
        y, w = _y_rule(self.ell, self.K, self.panels)
        self.y = y
        self.S = _sine_weights(self.ell, self.K, y, w)
        self._cache: OrderedDict = OrderedDict()
        self._cache_size = cache_size

    def _coeffs(self, x: np.ndarray, y: np.ndarray, S: np.ndarray) -> np.ndarray:
        vals = np.asarray(self.g(x[:, None], y[None, :]), dtype=float)
        vals = np.broadcast_to(vals, (x.size, y.size))
        return (vals @ S.T).T / self.k_side  # (K, nx)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        key = (x.shape, x.tobytes())
        hit = self._cache.get(key)
        if hit is not None:
            self._cache.move_to_end(key)
            return hit
        out = self._coeffs(x.ravel(), self.y, self.S).reshape((self.K,) + x.shape)
        self._cache[key] = out
        if len(self._cache) > self._cache_size:
            self._cache.popitem(last=False)
        return out

    def check(self, xs: np.ndarray) -> float:
        """Relative change of the coefficients at xs when the y-panel count doubles."""
        coarse = self._coeffs(xs, self.y, self.S)
        y2, w2 = _y_rule(self.ell, self.K, 2 * self.panels)
        fine = self._coeffs(xs, y2, _sine_weights(self.ell, self.K, y2, w2))
        vals = np.asarray(self.g(xs[:, None], y2[None, :]), dtype=float)
        scale = max(1.0, float(np.max(np.abs(vals))) / abs(self.k_side))
        return float(np.max(np.abs(fine - coarse)) / scale)


class ModeForcing:
    """k-th sine coefficient of g(x, .)/k_side as a function of x."""

    def __init__(self, projector: _Projector, k: int):
        self.projector, self.k = projector, k

    def __call__(self, x):
        return self.projector(x)[self.k - 1]


def project(g, geometry: Geometry, side: str, k_side: float = 1.0, panels: int | None = None,
            check: bool = True) -> list:
    """K forcing functions f_k(x) = (2/ell) int_0^ell g(x, y)/k_side sin(k pi y/ell) dy."""
    if side not in ("minus", "plus"):
        raise ValueError("side must be 'minus' or 'plus'")
    if g is None:
        return [None] * geometry.K
    if not callable(g):
        const = float(g)
        g = lambda x, y, _c=const: np.full(np.broadcast(x, y).shape, _c)  # noqa: E731
    pr = _Projector(g, geometry, k_side, panels)
    if check:
        lo, hi = (geometry.a, geometry.gamma) if side == "minus" else (geometry.gamma, geometry.b)
        err = pr.check(np.array([lo, 0.5 * (lo + hi), hi]))
        if err > PROJ_RTOL:
            raise QuadratureError(f"projection of the {side} forcing did not converge (change {err:.2e})")
    return [ModeForcing(pr, k) for k in range(1, geometry.K + 1)]


def project_boundary(phi, geometry: Geometry, panels: int | None = None) -> np.ndarray:
    """Sine coefficients of a boundary function phi(y)."""
    if phi is None:
        return np.zeros(geometry.K)
    y, w = _y_rule(geometry.ell, geometry.K, panels)
    vals = np.broadcast_to(np.asarray(phi(y) if callable(phi) else phi, dtype=float), y.shape)
    return _sine_weights(geometry.ell, geometry.K, y, w) @ vals


def decay_rate(c: np.ndarray) -> float:
    """Slope p of a least-squares fit |c_k| ~ k^-p over the nonzero coefficients."""
    c = np.abs(np.asarray(c, dtype=float))
    k = np.arange(1, c.size + 1)
    keep = c > 1e-300
    if np.count_nonzero(keep) < 2 or np.max(c) < 1e-14:
        return float("inf")
    keep &= c > 1e-14 * np.max(c)
    if np.count_nonzero(keep) < 2:
        return float("inf")
    slope = np.polyfit(np.log(k[keep]), np.log(c[keep]), 1)[0]
    return float(-slope)


@dataclass
class InterfaceRow:
    name: str
    max_norm: float
    l2_norm: float
    scale: float

    @property
    def relative(self) -> float:
        return self.max_norm / self.scale


@dataclass
class InterfaceReport:
    rows: list[InterfaceRow]
    y: np.ndarray
    values: np.ndarray  # (4, Ny)

    def ok(self, tol: float = 1e-8) -> bool:
        return all(r.relative <= tol for r in self.rows)

    def max_relative(self) -> float:
        return max(r.relative for r in self.rows)


@dataclass
class SolutionField:
    coeffs: CoefficientSet
    geometry: Geometry
    x: np.ndarray
    y: np.ndarray
    values: np.ndarray
    modes: list
    report: RegimeReport | None = None
    pde_residual: np.ndarray | None = None
    bc_residuals: dict = field(default_factory=dict)
    boundary_coeffs: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    tol: float = 1e-8

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.geometry.eigenvalues

    def sine_matrix(self, y) -> np.ndarray:
        k = np.arange(1, self.geometry.K + 1)[:, None]
        return np.sin(k * math.pi * np.asarray(y, dtype=float)[None, :] / self.geometry.ell)

    def mode_values(self, x, n: int = 0) -> np.ndarray:
        """(K, nx) array of u_k^(n)(x), points at gamma taken from the minus side."""
        x = np.asarray(x, dtype=float)
        return np.array([m(x, n) for m in self.modes])

    def evaluate(self, x, y, n: int = 0) -> np.ndarray:
        """d^n u/dx^n on the tensor grid x by y (ascending-k summation)."""
        uk = self.mode_values(x, n)
        S = self.sine_matrix(y)
        out = np.zeros((np.size(x), np.size(y)))
        for k in range(len(self.modes)):
            out += np.outer(uk[k], S[k])
        return out

    def interface(self) -> InterfaceReport:
        return interface_report(self)

    @property
    def max_bc_residual(self) -> float:
        return max((float(np.max(np.abs(v))) for v in self.bc_residuals.values()), default=0.0)

    @property
    def max_pde_residual(self) -> float:
        return 0.0 if self.pde_residual is None else float(np.max(np.abs(self.pde_residual)))

    def ok(self) -> bool:
        return (self.max_pde_residual <= self.tol and self.max_bc_residual <= self.tol
                and interface_report(self).ok(self.tol))


def _side_traces(mode, gamma: float, side: str) -> np.ndarray:
    g = np.array([gamma])
    ev = mode.u_minus if side == "minus" else mode.u_plus
    return np.array([float(ev(g, n)[0]) for n in range(4)])


def interface_report(fld) -> InterfaceReport:
    """Max and L2 norms over y of the four interface mismatches at x = gamma.

    Works on anything exposing ``coeffs``, ``geometry``, ``modes`` (objects
    with ``u_minus``/``u_plus`` evaluators) and optionally ``y``.
    """
    co, geo = fld.coeffs, fld.geometry
    y = getattr(fld, "y", None)
    if y is None:
        y = np.linspace(0.0, geo.ell, geo.Ny)
    K = len(fld.modes)
    lam = geo.eigenvalues[:K]
    d = np.zeros((4, K))
    mags = np.zeros((4, K))
    for i, mode in enumerate(fld.modes):
        um = _side_traces(mode, geo.gamma, "minus")
        up = _side_traces(mode, geo.gamma, "plus")
        L = lam[i]
        lap_m, lap_p = um[2] - L * um[0], up[2] - L * up[0]
        flux_m = co.k_minus * (um[3] - L * um[1]) - co.l_minus * um[1]
        flux_p = co.k_plus * (up[3] - L * up[1]) - co.l_plus * up[1]
        d[:, i] = [um[0] - up[0], um[1] - up[1], co.k_minus * lap_m - co.k_plus * lap_p, flux_m - flux_p]
        mags[:, i] = [
            max(abs(um[0]), abs(up[0])),
            max(abs(um[1]), abs(up[1])),
            max(abs(co.k_minus) * (abs(um[2]) + L * abs(um[0])), abs(co.k_plus) * (abs(up[2]) + L * abs(up[0]))),
            max(abs(co.k_minus) * (abs(um[3]) + L * abs(um[1])) + abs(co.l_minus * um[1]),
                abs(co.k_plus) * (abs(up[3]) + L * abs(up[1])) + abs(co.l_plus * up[1])),
        ]
    k = np.arange(1, K + 1)[:, None]
    S = np.sin(k * math.pi * y[None, :] / geo.ell)
    vals = np.zeros((4, y.size))
    for i in range(K):
        vals += np.outer(d[:, i], S[i])
    rows = []
    for j, name in enumerate(INTERFACE_NAMES):
        l2 = math.sqrt(0.5 * geo.ell * float(np.sum(d[j] ** 2)))
        scale = max(1.0, float(np.sum(mags[j])))
        rows.append(InterfaceRow(name, float(np.max(np.abs(vals[j]))), l2, scale))
    return InterfaceReport(rows, y, vals)


def _pde_residual(fld: SolutionField, forcings) -> np.ndarray:
    """Sum over modes of the per-mode ODE residuals, scaled by the largest term."""
    geo, co = fld.geometry, fld.coeffs
    S = fld.sine_matrix(fld.y)
    x = fld.x
    left = x <= geo.gamma
    raw = np.zeros((x.size, fld.y.size))
    scale = 1.0
    for i, mode in enumerate(fld.modes):
        L = geo.eigenvalue(i + 1)
        res_k = np.zeros(x.size)
        for mask, side, r in ((left, "minus", co.r_minus), (~left, "plus", co.r_plus)):
            if not np.any(mask):
                continue
            xs = x[mask]
            ev = mode.u_minus if side == "minus" else mode.u_plus
            u0, u2, u4 = ev(xs, 0), ev(xs, 2), ev(xs, 4)
            f = forcings[side][i]
            fv = np.zeros_like(xs) if f is None else np.broadcast_to(np.asarray(f(xs) if callable(f) else f, dtype=float), xs.shape)
            terms = (u4, -(2 * L + r) * u2, (L * L + r * L) * u0, -fv)
            res_k[mask] = sum(terms)
            scale = max(scale, max(float(np.max(np.abs(t))) for t in terms))
        raw += np.outer(res_k, S[i])
    return raw / scale


def _bc_residuals(fld: SolutionField, bcoef: dict) -> dict:
    geo = fld.geometry
    y, x = fld.y, fld.x
    S = fld.sine_matrix(y)
    out = {}
    scale = 1.0
    for name, side, xe, n, key in (("u(a)", "minus", geo.a, 0, "phi1_minus"), ("ux(a)", "minus", geo.a, 1, "phi2_minus"),
                                   ("u(b)", "plus", geo.b, 0, "phi1_plus"), ("ux(b)", "plus", geo.b, 1, "phi2_plus")):
        vals = np.array([float((m.u_minus if side == "minus" else m.u_plus)(np.array([xe]), n)[0]) for m in fld.modes])
        scale = max(scale, float(np.max(np.abs(vals))), float(np.max(np.abs(bcoef[key]))))
        out[name] = (vals - bcoef[key]) @ S
    # lateral sides: u and lap u vanish at y = 0 and y = ell
    Sy = fld.sine_matrix(np.array([0.0, geo.ell]))
    uk = fld.mode_values(x, 0)
    lap = fld.mode_values(x, 2) - geo.eigenvalues[:, None] * uk
    scale = max(scale, float(np.max(np.abs(uk))), float(np.max(np.abs(lap))))
    out["u(y=0)"], out["u(y=ell)"] = uk.T @ Sy[:, 0], uk.T @ Sy[:, 1]
    out["lap u(y=0)"], out["lap u(y=ell)"] = lap.T @ Sy[:, 0], lap.T @ Sy[:, 1]
    return {k: v / scale for k, v in out.items()}


def solve_field(coeffs: CoefficientSet, geometry: Geometry, data: ProblemData | None = None, *,
                force: bool = False, quad: QuadratureSpec = QuadratureSpec(), t: float | None = None,
                y_panels: int | None = None, check: bool = True) -> SolutionField:
    """Solve the K mode problems and reconstruct u on the evaluation grid."""
    data = data if data is not None else ProblemData()
    report = check_theorem1(coeffs, SpectrumInfo(geometry.lambda_min), t)
    if not report.spectral_ok:
        raise InadmissibleRegimeError(
            f"spectral incompatibility: lambda_1 = {geometry.lambda_min!r} must exceed {coeffs.r!r}")
    if not report.admissible and not force:
        failed = [c.name for c in report.conditions if not c.satisfied]
        raise InadmissibleRegimeError(f"regime {report.case_label} not admissible: {'; '.join(failed)}")
    fm = project(data.g_minus, geometry, "minus", coeffs.k_minus, y_panels, check)
    fp = project(data.g_plus, geometry, "plus", coeffs.k_plus, y_panels, check)
    bcoef = {name: project_boundary(getattr(data, name), geometry, y_panels)
             for name in ("phi1_minus", "phi1_plus", "phi2_minus", "phi2_plus")}
    modes = []
    for k in range(1, geometry.K + 1):
        i = k - 1
        try:
            mp = ModeProblem(geometry.eigenvalue(k), coeffs, geometry.a, geometry.gamma, geometry.b,
                             fm[i], fp[i], float(bcoef["phi1_minus"][i]), float(bcoef["phi1_plus"][i]),
                             float(bcoef["phi2_minus"][i]), float(bcoef["phi2_plus"][i]), quad)
            modes.append(solve_mode(mp, check=check))
        except Exception as err:  # noqa: BLE001 - re-raised with the mode index
            raise ModeError(k, err) from err
    x = np.linspace(geometry.a, geometry.b, geometry.Nx)
    y = np.linspace(0.0, geometry.ell, geometry.Ny)
    fld = SolutionField(coeffs, geometry, x, y, np.zeros((x.size, y.size)), modes, report,
                        boundary_coeffs=bcoef)
    fld.values = fld.evaluate(x, y)
    if check:
        fld.pde_residual = _pde_residual(fld, {"minus": fm, "plus": fp})
        fld.bc_residuals = _bc_residuals(fld, bcoef)
    fld.diagnostics = {f"decay.{name}": decay_rate(c) for name, c in bcoef.items()}
    fld.diagnostics["max_mode_rcond_inv"] = max(1.0 / m.rcond for m in modes)
    return fld


def parseval_discrepancy(fld: SolutionField, x=None, nodes: int = 8) -> float:
    """Max relative gap between int_0^ell u(x, y)^2 dy and (ell/2) sum_k u_k(x)^2."""
    geo = fld.geometry
    x = fld.x if x is None else np.asarray(x, dtype=float)
    y, w = _y_rule(geo.ell, geo.K, max(32, 2 * geo.K), nodes)
    u = fld.evaluate(x, y)
    lhs = u ** 2 @ w
    rhs = 0.5 * geo.ell * np.sum(fld.mode_values(x) ** 2, axis=0)
    den = np.maximum(np.maximum(np.abs(lhs), np.abs(rhs)), 1e-300)
    gap = np.where((lhs == 0) & (rhs == 0), 0.0, np.abs(lhs - rhs) / den)
    return float(np.max(gap))
