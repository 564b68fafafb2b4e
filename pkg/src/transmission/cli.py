"""Command-line entry point: ``transmission <mode> --config FILE``.

Exit status: 0 when every reported quantity is within tolerance, 1 when a
tolerance or admissibility condition is violated, 2 on configuration or
solver errors.
"""
from __future__ import annotations

import argparse
import csv
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import RUN_MODES, ConfigError, RunConfig, parse_config
from .field import interface_report, project, project_boundary, solve_field
from .mode_solver import ModeProblem, QuadratureSpec, solve_mode
from .oracle import compare, fd_sequence, richardson
from .regime import SpectrumInfo, check_theorem1
from .symbols import FACTORIZATION_KINDS, ScanRanges, factorization_residual, sign_scan

IDENTITY_TOL = 1e-10
ORDER_RANGE = (1.7, 2.3)
RICHARDSON_TOL = 1e-6

EXIT_OK, EXIT_VIOLATION, EXIT_ERROR = 0, 1, 2


def fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    return str(v)


def write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def write_kv(path: Path, pairs):
    with open(path, "w", newline="") as fh:
        for k, v in pairs:
            fh.write(f"{k}={v}\n")


class Runner:
    def __init__(self, cfg: RunConfig, out: Path, force: bool = False, quiet: bool = False):
        self.cfg, self.out, self.force, self.quiet = cfg, out, force, quiet
        self.quad = QuadratureSpec(panels=cfg.numerics.panels, nodes=cfg.numerics.nodes)

    def say(self, text: str):
        if not self.quiet:
            print(text)

    def report(self):
        cfg = self.cfg
        return check_theorem1(cfg.coefficients, SpectrumInfo(cfg.geometry.lambda_min), cfg.numerics.t)

    # ----------------------------------------------------------- modes
    def check(self) -> int:
        rep = self.report()
        (self.out / "report.txt").write_text(rep.to_text() + "\n")
        write_kv(self.out / "report.kv", rep.to_kv())
        self.say(rep.to_text())
        return EXIT_OK if rep.admissible else EXIT_VIOLATION

    def scan(self) -> int:
        nu, cfg = self.cfg.numerics, self.cfg
        ranges = ScanRanges(coeffs=cfg.coefficients)
        sr = sign_scan(nu.scan_symbol, ranges, nu.scan_samples, nu.seed)
        rows = zip([sr.symbol] * sr.sample_count, sr.delta, sr.r, sr.x, sr.values,
                   sr.violation_flags.astype(int))
        write_csv(self.out / "scan.csv", ["symbol", "delta", "r", "x", "value", "violation"], rows)
        self.say(sr.summary())
        return EXIT_OK if sr.violation_count == 0 else EXIT_VIOLATION

    def identities(self) -> int:
        cfg = self.cfg
        geo, co = cfg.geometry, cfg.coefficients
        rows, worst = [], 0.0
        for kind in FACTORIZATION_KINDS:
            for lam in geo.eigenvalues:
                try:
                    res = float(factorization_residual(kind, co, geo.c, geo.d, lam))
                except ValueError:
                    break  # identity belongs to the other case
                rows.append((kind, float(lam), res))
                worst = max(worst, res)
        write_csv(self.out / "identities.csv", ["kind", "x", "residual"], rows)
        self.say(f"identities: {len(rows)} evaluations, max residual {worst:.3e}")
        return EXIT_OK if worst <= IDENTITY_TOL else EXIT_VIOLATION

    def _require_admissible(self):
        rep = self.report()
        if not rep.spectral_ok:
            raise ValueError(f"spectral incompatibility: lambda_1 must exceed {self.cfg.coefficients.r!r}")
        if not rep.admissible and not self.force:
            raise ValueError(f"regime {rep.case_label} is not covered by the admissibility conditions; use --force")
        return rep

    def _mode_problem(self) -> ModeProblem:
        cfg = self.cfg
        geo, co, k = cfg.geometry, cfg.coefficients, cfg.numerics.mode
        data = cfg.problem_data()
        fm = project(data.g_minus, geo, "minus", co.k_minus, cfg.numerics.y_panels)[k - 1]
        fp = project(data.g_plus, geo, "plus", co.k_plus, cfg.numerics.y_panels)[k - 1]
        bc = {n: float(project_boundary(getattr(data, n), geo, cfg.numerics.y_panels)[k - 1])
              for n in ("phi1_minus", "phi1_plus", "phi2_minus", "phi2_plus")}
        return ModeProblem(geo.eigenvalue(k), co, geo.a, geo.gamma, geo.b, fm, fp,
                           bc["phi1_minus"], bc["phi1_plus"], bc["phi2_minus"], bc["phi2_plus"], self.quad)

    def solve_mode(self) -> int:
        self._require_admissible()
        mp = self._mode_problem()
        ms = solve_mode(mp)
        ms.tol = self.cfg.numerics.tol
        geo = self.cfg.geometry
        rows = []
        for side, lo, hi in (("minus", geo.a, geo.gamma), ("plus", geo.gamma, geo.b)):
            xs = np.linspace(lo, hi, geo.Nx)
            ev = ms.u_minus if side == "minus" else ms.u_plus
            vals = [ev(xs, n) for n in range(5)]
            f = mp.f_minus if side == "minus" else mp.f_plus
            r = self.cfg.coefficients.r_minus if side == "minus" else self.cfg.coefficients.r_plus
            fv = np.zeros_like(xs) if f is None else np.asarray(f(xs), dtype=float)
            res = vals[4] - (2 * mp.lam + r) * vals[2] + (mp.lam ** 2 + r * mp.lam) * vals[0] - fv
            for i, x in enumerate(xs):
                rows.append((side, x, vals[0][i], vals[1][i], vals[2][i], vals[3][i], res[i]))
        write_csv(self.out / "mode.csv", ["side", "x", "u", "du", "d2u", "d3u", "ode_residual"], rows)
        names = ["u-(a)", "u-'(a)", "u+(b)", "u+'(b)", "TC1a", "TC1b", "TC2a", "TC2b"]
        write_csv(self.out / "conditions.csv", ["condition", "relative_residual"],
                  zip(names, ms.condition_residuals))
        self.say(f"mode {self.cfg.numerics.mode}: lambda={mp.lam:.6g} rcond={ms.rcond:.3e} "
                 f"ode_residual={ms.ode_residual:.3e} max_condition_residual={np.max(ms.condition_residuals):.3e}")
        return EXIT_OK if ms.ok else EXIT_VIOLATION

    def solve(self) -> int:
        cfg = self.cfg
        fld = solve_field(cfg.coefficients, cfg.geometry, cfg.problem_data(), force=self.force,
                          quad=self.quad, t=cfg.numerics.t, y_panels=cfg.numerics.y_panels)
        fld.tol = cfg.numerics.tol
        rows = []
        for i, x in enumerate(fld.x):
            for j, y in enumerate(fld.y):
                rows.append((x, y, fld.values[i, j], fld.pde_residual[i, j]))
        write_csv(self.out / "solution.csv", ["x", "y", "u", "pde_residual"], rows)
        ir = interface_report(fld)
        write_csv(self.out / "interface.csv", ["y", "tc1", "tc2", "tc3", "tc4"],
                  ((y, *ir.values[:, j]) for j, y in enumerate(ir.y)))
        write_csv(self.out / "interface_summary.csv", ["condition", "max", "l2", "scale", "relative"],
                  ((r.name, r.max_norm, r.l2_norm, r.scale, r.relative) for r in ir.rows))
        brows = []
        for name, vals in fld.bc_residuals.items():
            coord = fld.y if name.startswith(("u(a", "ux(a", "u(b", "ux(b")) else fld.x
            brows += [(name, c, v) for c, v in zip(coord, vals)]
        write_csv(self.out / "boundary.csv", ["condition", "coordinate", "residual"], brows)
        self.say(f"solve: K={cfg.geometry.K} pde={fld.max_pde_residual:.3e} bc={fld.max_bc_residual:.3e} "
                 f"interface={ir.max_relative():.3e}")
        for r in ir.rows:
            self.say(f"  {r.name}: max={r.max_norm:.3e} l2={r.l2_norm:.3e}")
        return EXIT_OK if fld.ok() else EXIT_VIOLATION

    def verify(self) -> int:
        self._require_admissible()
        mp = self._mode_problem()
        ms = solve_mode(mp)
        grids = fd_sequence(mp, self.cfg.numerics.fd_h, 3)
        rows = []
        for gr in grids:
            mx, l2, _ = compare(ms, gr)
            rows.append([gr.h, mx, l2, float("nan")])
        _, _, order = compare(ms, grids)
        rows[-1][3] = order
        nodes, ur = richardson(grids)
        ref = np.r_[ms.u_minus(grids[0].x_minus), ms.u_plus(grids[0].x_plus[1:])]
        rich = float(np.max(np.abs(ur - ref)) / max(float(np.max(np.abs(ref))), 1e-300))
        if not np.any(ref):
            rich = float(np.max(np.abs(ur)))
        write_csv(self.out / "verify.csv", ["h", "max_err", "l2_err", "observed_order"], rows)
        write_kv(self.out / "verify.kv", [("observed_order", fmt(order)), ("richardson_relative", fmt(rich))])
        self.say(f"verify: observed order {order:.4f}, Richardson discrepancy {rich:.3e}")
        order_ok = math.isnan(order) or ORDER_RANGE[0] <= order <= ORDER_RANGE[1]
        return EXIT_OK if order_ok and rich <= RICHARDSON_TOL else EXIT_VIOLATION


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="transmission", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="mode", required=True)
    for mode in RUN_MODES:
        s = sub.add_parser(mode)
        s.add_argument("--config", required=True, type=Path)
        s.add_argument("--force", action="store_true", help="run solves outside the admissible regimes")
        s.add_argument("--out", type=Path, default=Path("out"))
        s.add_argument("--seed", type=int, default=None, help="scan sampling seed (overrides the config)")
        s.add_argument("--quiet", action="store_true")
    return p


def _provenance(err: BaseException) -> str:
    """Innermost package module on the traceback."""
    name, tb = "cli", err.__traceback__
    while tb is not None:
        mod = tb.tb_frame.f_globals.get("__name__", "")
        if mod.startswith("transmission."):
            name = mod.rsplit(".", 1)[-1]
        tb = tb.tb_next
    return name


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = args.config.read_text()
    except OSError as err:
        print(f"error [cli]: cannot read config: {err}", file=sys.stderr)
        return EXIT_ERROR
    try:
        cfg = parse_config(text)
    except ConfigError as err:
        for ln, msg in err.errors:
            where = f"{args.config}:{ln}" if ln else str(args.config)
            print(f"error [config] {where}: {msg}", file=sys.stderr)
        return EXIT_ERROR
    cfg = replace(cfg, mode=args.mode)
    if args.seed is not None:
        cfg = replace(cfg, numerics=replace(cfg.numerics, seed=args.seed))
    args.out.mkdir(parents=True, exist_ok=True)
    runner = Runner(cfg, args.out, args.force, args.quiet)
    try:
        return getattr(runner, args.mode.replace("-", "_"))()
    except (ValueError, ArithmeticError, RuntimeError, np.linalg.LinAlgError) as err:
        print(f"error [{_provenance(err)}]: {err}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
