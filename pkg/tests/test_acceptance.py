"""Acceptance criteria, one test per criterion.

Each test records a ``PASS``/``FAIL`` line (printed in the terminal summary and
to stdout) and then asserts the criterion at its stated tolerance.
"""
from __future__ import annotations

import math
import time

import numpy as np

from conftest import ACCEPTANCE_LINES
from manufactured import OdeForcing, random_smooth, transmission_pair, manufactured_mode_problem
from transmission.config import parse_config
from transmission.field import interface_report, solve_field
from transmission.mode_solver import (
    ModeProblem,
    mirror_mode_problem,
    psi_via_paper_route,
    solve_mode,
    solve_mode_mirrored,
)
from transmission.oracle import compare, fd_sequence, richardson
from transmission.problem import Geometry, ProblemData
from transmission.regime import SpectrumInfo, check_theorem1, mirror_problem
from transmission.symbols import (
    FACTORIZATION_KINDS,
    CoefficientSet,
    ScanRanges,
    det_symbol,
    f_values,
    factorization_residual,
    sign_scan,
    uv_values,
)


def record(n: int, ok: bool, text: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} [{n}] {text}"
    ACCEPTANCE_LINES[n] = line
    print(line)


# one admissible representative per sign pattern of the case-1 bullets
CASE1_FAMILIES = {
    "(+,+)": [CoefficientSet(1, 1, 2, 3), CoefficientSet(3, 0.1, 2, 7), CoefficientSet(1, 2, 0.5, 0.5),
              CoefficientSet(0.4, 2.5, 0.1, 4.0)],
    "(-,-)": [CoefficientSet(1, 1, -1, -2), CoefficientSet(2, 1, -1, -3), CoefficientSet(1, 1, -0.7, -0.7),
              CoefficientSet(1, 2, -2, -1)],
    "(+,-)": [CoefficientSet(1, 1, 3, -1), CoefficientSet(2, 1, 1, -0.2), CoefficientSet(1, 1, 6, -1),
              CoefficientSet(1, 3, 4, -0.5)],
    "(-,+)": [CoefficientSet(1, 1, -1, 3), CoefficientSet(1, 2, -0.2, 1), CoefficientSet(1, 1, -1, 6),
              CoefficientSet(3, 1, -0.5, 4)],
}
CASE2_ROUTES = {  # case-2 regimes: r+ = -0.5 with k = 1, and r+ = 4 meeting the t-bound at t = 0.5
    "r+=-0.5": (CoefficientSet(1, 1, -0.5, 0), None),
    "t=0.5": (CoefficientSet(1, 1, 4, 0), 0.5),
}
ELL = 1.0
SPEC = SpectrumInfo.for_width(ELL)
MODES = np.array([(k * math.pi / ELL) ** 2 for k in range(1, 33)])


# ------------------------------------------------------------------ 1

def test_1_sign_lemma_suite():
    t0 = time.perf_counter()
    reports = {sym: sign_scan(sym, ScanRanges(), 10_000, seed=2024) for sym in ("u", "v", "f1", "f2", "f3", "g")}
    elapsed = time.perf_counter() - t0
    counts = {s: r.violation_count for s, r in reports.items()}
    g = reports["g"]
    g_zero_bad = int(np.count_nonzero(g.violation_flags & (g.r == 0)))
    g_neg_bad = int(np.count_nonzero(g.violation_flags & (g.r < 0)))
    ok = sum(counts.values()) == 0 and elapsed < 10.0
    record(1, ok, f"sign suite 6 x 1e4 samples in {elapsed:.2f}s, violations {counts} "
                  f"(g: {g_neg_bad} with r<0, {g_zero_bad} with r=0)")
    assert elapsed < 10.0
    assert sum(counts.values()) == 0, f"sign violations {counts}"


# ------------------------------------------------------------------ 2

def _random_admissible(rng, zero_minus: bool):
    while True:
        kp, km = rng.uniform(0.3, 3.0, 2)
        lp = rng.uniform(-3, 3)
        lm = 0.0 if zero_minus else rng.uniform(-3, 3)
        if abs(lp) < 1e-3 or (not zero_minus and abs(lm) < 1e-3):
            continue
        co = CoefficientSet(kp, km, lp, lm)
        if check_theorem1(co, SpectrumInfo(co.r + 1.0)).admissible:
            return co


def test_2_factorization_identities():
    rng = np.random.default_rng(7)
    t0 = time.perf_counter()
    worst = {k: 0.0 for k in FACTORIZATION_KINDS}
    for _ in range(1000):
        co1, co2 = _random_admissible(rng, False), _random_admissible(rng, True)
        c, d = rng.uniform(0.1, 5.0, 2)
        u = 1.0 - rng.random()
        for kind in FACTORIZATION_KINDS:
            co = co2 if kind in ("D3+", "D3-", "detL2", "UtimesV") else co1
            x = co.r + 100.0 * u
            worst[kind] = max(worst[kind], factorization_residual(kind, co, c, d, x))
    elapsed = time.perf_counter() - t0
    top = max(worst.values())
    ok = top <= 1e-10 and elapsed < 10.0
    record(2, ok, f"factorization identities, 1e3 admissible tuples in {elapsed:.2f}s, worst residual {top:.2e}")
    assert elapsed < 10.0
    assert top <= 1e-10, worst


# ------------------------------------------------------------------ 3

GEOMETRIES = [(0.5, 0.5), (1.0, 1.0), (0.5, 2.0), (2.0, 0.5), (1.3, 0.7)]


def test_3_determinant_sign():
    bad, regimes, evals = [], 0, 0
    for fam, cos in CASE1_FAMILIES.items():
        for co in cos:
            assert check_theorem1(co, SPEC).admissible, (fam, co)
            regimes += 1
            for c, d in GEOMETRIES:
                vals = det_symbol(1, co, c, d, MODES)
                evals += vals.size
                bad += [(fam, co, c, d) for v in vals if not v < 0]
    for name, (co, t) in CASE2_ROUTES.items():
        assert check_theorem1(co, SPEC, t=t).admissible, name
        # lemma domain x > max(-r+, 0): sweep the eigenvalues and a shifted copy
        for shift in (0.0, 0.5):
            regimes += 1
            xs = MODES + shift
            for c, d in GEOMETRIES:
                vals = det_symbol(2, co, c, d, xs)
                evals += vals.size
                bad += [(name, co, c, d) for v in vals if not v > 0]
    ok = not bad and regimes == 20
    record(3, ok, f"determinant signs, 32 modes x {regimes} regimes x {len(GEOMETRIES)} geometries "
                  f"({evals} values), violations {len(bad)}")
    assert regimes == 20
    assert not bad, bad[:5]


# ------------------------------------------------------------------ 4

B2_FAMILIES = [
    CoefficientSet(1, 1, 2, 3), CoefficientSet(1, 1, -1, -2), CoefficientSet(2, 1, -1, -3),
    CoefficientSet(1, 1, -1, -1),  # (l+ - l-)(k+ - k-) = 0 with l+ = l-
    CoefficientSet(1, 1, -1, -2.5),  # k+ = k-
    CoefficientSet(1, 1, 3, -1), CoefficientSet(1, 1, 6, -1),  # -6 l- k+ + l+ k+ + l- k- = 8, 11
    CoefficientSet(1, 1, -1, 3), CoefficientSet(1, 1, -1, 5),
    CoefficientSet(1, 1, -0.5, 0), CoefficientSet(1, 1, 4, 0),
    CoefficientSet(1, 1, 0, -0.5), CoefficientSet(2, 1, -27 / 8, 0),  # r+ = -27/64 k+^2/k-^2 exactly
]
CONT_DELTA = np.array([0.1, 0.5, 1.0, 2.0, 5.0, 10.0])[:, None]
CONT_X = np.array([1.0, 3.0, 10.0, 30.0, 100.0])[None, :]


def _continuity_gaps():
    gaps = {}
    for k in range(2, 9):
        r = 10.0 ** -k
        u0, v0 = uv_values(CONT_DELTA, 0.0, CONT_X)
        u, v = uv_values(CONT_DELTA, r, CONT_X)
        row = {"u": float(np.max(np.abs(u - u0))), "v": float(np.max(np.abs(v - v0)))}
        for i in (1, 2, 3):
            fi = f_values(i, CONT_DELTA, r, CONT_X)
            f0 = f_values(i, CONT_DELTA, 0.0, CONT_X)
            row[f"f{i}"] = float(np.max(np.abs(fi - f0)))
        gaps[r] = row
    return gaps


def test_4_b2_positivity_and_continuity():
    b2_bad = {}
    for co in B2_FAMILIES:
        rep = check_theorem1(co, SPEC, t=0.5 if co.r_minus_is_zero and co.r_plus > 0 else None)
        assert rep.admissible, co
        n = sign_scan("b2", ScanRanges(coeffs=co), 10_000, seed=4).violation_count
        if n:
            b2_bad[str(co)] = n
    gaps = _continuity_gaps()
    cont_bad = []
    for r, row in gaps.items():
        bound = 1e-6 if r <= 1e-6 else r  # O(r) above the switch, 1e-6 at and below it
        cont_bad += [(sym, r, gap) for sym, gap in row.items() if not gap <= bound]
    uv_bad = [b for b in cont_bad if b[0] in ("u", "v")]
    f_bad = sorted({b[0] for b in cont_bad if b[0].startswith("f")})
    at_switch = {s: f"{g:.1e}" for s, g in gaps[1e-6].items()}
    ok = not b2_bad and not cont_bad
    record(4, ok, f"b2 > 0 on {len(B2_FAMILIES)} families ({sum(b2_bad.values())} violations); "
                  f"r->0 gaps at r=1e-6 {at_switch}; u,v failures {len(uv_bad)}, f indices failing {f_bad}")
    assert not b2_bad, b2_bad
    assert not uv_bad, uv_bad
    assert not cont_bad, f"r->0 continuity fails for {f_bad}: {cont_bad[:3]}"


# ------------------------------------------------------------------ 5

def _rel_linf(sol, um, up, mp):
    xm = np.linspace(mp.a, mp.gamma, 301)
    xp = np.linspace(mp.gamma, mp.b, 301)
    err = max(np.max(np.abs(sol.u_minus(xm) - um(xm))), np.max(np.abs(sol.u_plus(xp) - up(xp))))
    return err / max(np.max(np.abs(um(xm))), np.max(np.abs(up(xp))))


MANUFACTURED = [
    (CoefficientSet(1, 1, 2, 3), 9.0, 0),
    (CoefficientSet(2.5, 0.6, 1.0, -0.3), 20.0, 1),  # k+ != k-: u'' jumps at gamma
    (CoefficientSet(1, 1, 3, -1), 40.0, 2),
    (CoefficientSet(1, 1, -0.5, 0), 5.0, 3),
    (CoefficientSet(1.3, 0.7, 0, -0.4), 12.0, 4),
    (CoefficientSet(1, 2, -1, -3), 150.0, 5),
    (CoefficientSet(1, 1, 4, 0), 400.0, 6),
]


def test_5_manufactured_recovery():
    t0 = time.perf_counter()
    errs, jump = [], 0.0
    for co, lam, seed in MANUFACTURED:
        rng = np.random.default_rng(seed)
        gamma = 0.8
        um, up = transmission_pair(co, lam, gamma, random_smooth(rng, gamma), random_smooth(rng, gamma))
        g = np.array([gamma])
        jump = max(jump, abs(float(up(g, 2)[0] - um(g, 2)[0])) / max(1.0, abs(float(um(g, 2)[0]))))
        mp = manufactured_mode_problem(co, lam, 0.0, gamma, 1.9, um, up)
        errs.append(_rel_linf(solve_mode(mp), um, up, mp))
    co = CoefficientSet(2.0, 0.5, 1.0, -0.2)
    geo = Geometry(0.0, 0.6, 1.5, 1.2, K=6, Nx=41, Ny=25)
    data, exact = _manufactured_field(co, geo, seed=9)
    fld = solve_field(co, geo, data)
    err2d = float(np.max(np.abs(fld.values - exact(fld.x, fld.y))) / np.max(np.abs(exact(fld.x, fld.y))))
    elapsed = time.perf_counter() - t0
    ok = max(errs) <= 1e-8 and err2d <= 1e-8 and jump > 1e-3 and elapsed < 30.0
    record(5, ok, f"{len(errs)} manufactured mode problems, worst rel Linf {max(errs):.2e} "
                  f"(u'' jump {jump:.2f}); 2D rel Linf {err2d:.2e}; {elapsed:.2f}s")
    assert len(errs) >= 5 and jump > 1e-3
    assert max(errs) <= 1e-8, errs
    assert err2d <= 1e-8
    assert elapsed < 30.0


def _manufactured_field(co, geo, seed):
    """Two sine modes of a manufactured pair per mode, with induced data."""
    rng = np.random.default_rng(seed)
    parts = []
    for k in (1, 3):
        lam = geo.eigenvalue(k)
        wm, wp = transmission_pair(co, lam, geo.gamma, random_smooth(rng, geo.gamma), random_smooth(rng, geo.gamma))
        parts.append((k, wm, wp, OdeForcing(wm, lam, co.r_minus), OdeForcing(wp, lam, co.r_plus)))

    def s(k, y):
        return np.sin(k * math.pi * np.asarray(y) / geo.ell)

    def side_sum(which, x, y, n=0):
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        return sum((fn(x, n) if n else fn(x)) * s(k, y) for k, *fns in parts for fn in [fns[which]])

    a, b = np.array([geo.a]), np.array([geo.b])
    data = ProblemData(
        g_minus=lambda x, y: co.k_minus * side_sum(2, x, y),
        g_plus=lambda x, y: co.k_plus * side_sum(3, x, y),
        phi1_minus=lambda y: sum(float(wm(a)[0]) * s(k, y) for k, wm, *_ in parts),
        phi1_plus=lambda y: sum(float(wp(b)[0]) * s(k, y) for k, _, wp, *_ in parts),
        phi2_minus=lambda y: sum(float(wm(a, 1)[0]) * s(k, y) for k, wm, *_ in parts),
        phi2_plus=lambda y: sum(float(wp(b, 1)[0]) * s(k, y) for k, _, wp, *_ in parts),
    )

    def exact(x, y):
        left = (x <= geo.gamma)[:, None]
        return np.where(left, side_sum(0, x[:, None], y[None, :]), side_sum(1, x[:, None], y[None, :]))

    return data, exact


# ------------------------------------------------------------------ 6

FD_REGIMES = [CoefficientSet(1, 1, 2, 3), CoefficientSet(1, 1, -1, -2), CoefficientSet(1, 1, 3, -1),
              CoefficientSet(1, 1, -1, 3), CoefficientSet(1, 1, -0.5, 0), CoefficientSet(1.5, 1, 0, -0.5)]


def test_6_oracle_equivalence():
    orders, rich = [], []
    for i, co in enumerate(FD_REGIMES):
        for j in range(5):
            rng = np.random.default_rng(100 * i + j)
            lam = (rng.integers(1, 4) * math.pi) ** 2
            gamma = float(rng.uniform(0.6, 1.0))
            um, up = transmission_pair(co, lam, gamma, random_smooth(rng, gamma), random_smooth(rng, gamma))
            mp = manufactured_mode_problem(co, lam, 0.0, gamma, 1.7, um, up)
            ms = solve_mode(mp)
            grids = fd_sequence(mp, 0.02)
            orders.append(compare(ms, grids)[2])
            nodes, ur = richardson(grids)
            exact = np.r_[ms.u_minus(grids[0].x_minus), ms.u_plus(grids[0].x_plus[1:])]
            rich.append(float(np.max(np.abs(ur - exact)) / np.max(np.abs(exact))))
    ok = all(1.7 <= p <= 2.3 for p in orders) and max(rich) <= 1e-6
    record(6, ok, f"FD oracle on {len(orders)} problems ({len(FD_REGIMES)} regimes x 5): order in "
                  f"[{min(orders):.3f}, {max(orders):.3f}], worst Richardson rel {max(rich):.2e}")
    assert all(1.7 <= p <= 2.3 for p in orders), orders
    assert max(rich) <= 1e-6


# ------------------------------------------------------------------ 7

FORCINGS = [
    (lambda x: np.exp(-x), lambda x: np.cos(3 * x), 0.0, 0.0, 0.0, 0.0),
    (lambda x: x * x, lambda x: 1.0 + 0 * x, 1.0, -0.5, 0.0, 2.0),
    (None, lambda x: np.sin(7 * x) * x, 0.3, 0.0, -1.0, 0.0),
    (lambda x: np.cosh(x) - 1, None, 0.0, 1.0, 0.5, -0.5),
    (lambda x: 1 / (1 + x * x), lambda x: np.exp(x) * np.sin(x), -0.2, 0.4, 0.1, 0.3),
]


def test_7_case2_psi_route():
    worst, count = 0.0, 0
    for co, _ in CASE2_ROUTES.values():
        for lam in MODES:
            for fm, fp, p1m, p1p, p2m, p2p in FORCINGS:
                mp = ModeProblem(float(lam), co, 0.0, 0.7, 1.6, fm, fp, p1m, p1p, p2m, p2p)
                pr = psi_via_paper_route(2, mp)
                u0, u1 = solve_mode(mp).traces()
                ref = math.hypot(u0, u1)
                worst = max(worst, math.hypot(pr.psi1 - u0, pr.psi2 - u1) / ref)
                count += 1
    ok = worst <= 1e-6
    record(7, ok, f"case-2 trace route vs 8x8 solve on {count} problems (2 regimes x 32 modes x 5 forcings): "
                  f"worst rel {worst:.2e}")
    assert worst <= 1e-6


# ------------------------------------------------------------------ 8

MIRROR_CFG = """\
[coefficients]
k_plus = 1.3
k_minus = 0.8
l_plus = 0
l_minus = -0.5

[geometry]
a = 0
gamma = 0.7
b = 1.6
ell = 1
K = 6

[data]
g_minus = exp(-x) * y * (1 - y)
g_plus = cos(2*x) * sin(pi*y)
phi1_minus = sin(pi*y)
phi2_plus = y * (1 - y)
"""


def test_8_mirror_symmetry():
    worst = 0.0
    rng = np.random.default_rng(31)
    for co in (CoefficientSet(1, 1, 0, -0.5), CoefficientSet(1.3, 0.8, 0, -0.5), CoefficientSet(1, 1.5, 0, -3)):
        for lam in MODES[:8]:
            for fm, fp, p1m, p1p, p2m, p2p in FORCINGS:
                mp = ModeProblem(float(lam), co, 0.0, float(rng.uniform(0.5, 1.1)), 1.6, fm, fp, p1m, p1p, p2m, p2p)
                x = np.linspace(mp.a, mp.b, 257)
                direct, via = solve_mode(mp)(x), solve_mode_mirrored(mp)(x)
                worst = max(worst, float(np.max(np.abs(direct - via)) / max(np.max(np.abs(direct)), 1e-300)))
    cfg = parse_config(MIRROR_CFG)
    co, geo, data = cfg.coefficients, cfg.geometry, cfg.problem_data()
    fld = solve_field(co, geo, data)
    fld_m = solve_field(*mirror_problem(co, geo, data))
    field_gap = float(np.max(np.abs(fld.values - fld_m.values[::-1])) / np.max(np.abs(fld.values)))
    co2, geo2, data2 = mirror_problem(*mirror_problem(co, geo, data))
    mp = ModeProblem(9.0, co, 0.0, 0.7, 1.6, np.exp, np.cos, 1.0, 0.0, 0.5, 0.0)
    identity = (co2 == co and co2.k_plus == co.k_plus and geo2 == geo and data2 is data
                and mirror_mode_problem(mirror_mode_problem(mp)) is mp)
    ok = worst <= 1e-10 and field_gap <= 1e-10 and identity
    record(8, ok, f"r+=0 via mirror vs direct: modes rel {worst:.2e}, field rel {field_gap:.2e}; "
                  f"mirror o mirror identity {identity}")
    assert worst <= 1e-10
    assert field_gap <= 1e-10
    assert identity


# ------------------------------------------------------------------ 9

def test_9_transmission_residuals():
    rows = []
    geo = Geometry(0.0, 0.7, 1.6, ELL, K=12, Nx=49, Ny=33)
    data = ProblemData(
        g_minus=lambda x, y: np.exp(-x) * y * (1 - y) + 1,
        g_plus=lambda x, y: np.cos(3 * x) * np.sin(math.pi * y) + y,
        phi1_minus=lambda y: np.sin(2 * math.pi * y),
        phi1_plus=0.5,
        phi2_minus=lambda y: y,
        phi2_plus=lambda y: y * (1 - y),
    )
    suite = [co for cos in CASE1_FAMILIES.values() for co in cos]
    suite += [co for co, _ in CASE2_ROUTES.values()] + [CoefficientSet(1, 1.5, 0, -3)]
    for co in suite:
        assert check_theorem1(co, SpectrumInfo.for_width(geo.ell)).admissible, co
        fld = solve_field(co, geo, data)
        rep = interface_report(fld)
        rows.append((co, rep.max_relative(), fld.max_bc_residual, fld.max_pde_residual))
    co = CoefficientSet(2.0, 0.5, 1.0, -0.2)
    mgeo = Geometry(0.0, 0.6, 1.5, 1.2, K=6, Nx=41, Ny=25)
    fld = solve_field(co, mgeo, _manufactured_field(co, mgeo, seed=9)[0])
    rows.append((co, interface_report(fld).max_relative(), fld.max_bc_residual, fld.max_pde_residual))
    worst_if = max(r[1] for r in rows)
    worst_bc = max(r[2] for r in rows)
    ok = worst_if <= 1e-8 and worst_bc <= 1e-8
    record(9, ok, f"{len(rows)} admissible 2D solves: worst interface residual {worst_if:.2e}, "
                  f"worst boundary residual {worst_bc:.2e}, worst PDE residual {max(r[3] for r in rows):.2e}")
    assert worst_if <= 1e-8, [r for r in rows if r[1] > 1e-8]
    assert worst_bc <= 1e-8

