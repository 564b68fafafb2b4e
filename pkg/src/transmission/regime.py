"""Case classification and coefficient admissibility of the well-posedness theorem."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .problem import Geometry, ProblemData, negate, reflect_forcing
from .symbols import CoefficientSet, is_zero_ratio

WEAK_RTOL = 1e-12
T_GRID = 64


@dataclass(frozen=True)
class CaseLabel:
    kind: str  # BothNonzero, RminusZero, RplusZero, BothZero
    signs: tuple[str, str] | None = None

    def __str__(self) -> str:
        if self.kind == "BothNonzero":
            return f"BothNonzero({self.signs[0]},{self.signs[1]})"
        return self.kind


@dataclass(frozen=True)
class SpectrumInfo:
    """Smallest eigenvalue of -A0; ``inv_norm = 1 / lambda_min`` in the diagonal model."""

    lambda_min: float

    def __post_init__(self):
        if not self.lambda_min > 0:
            raise ValueError("lambda_min > 0 violated")

    @property
    def inv_norm(self) -> float:
        return 1.0 / self.lambda_min

    @classmethod
    def for_width(cls, ell: float) -> "SpectrumInfo":
        return cls((math.pi / ell) ** 2)


@dataclass(frozen=True)
class Condition:
    name: str
    value: float
    threshold: float
    relation: str  # ">=" or "<="
    satisfied: bool
    scale: float = 1.0

    @property
    def margin(self) -> float:
        """Signed distance to the threshold; >= 0 when satisfied (up to tolerance)."""
        return self.value - self.threshold if self.relation == ">=" else self.threshold - self.value


@dataclass
class RegimeReport:
    case_label: CaseLabel
    conditions: list[Condition]
    t_parameter: float | None
    spectral_ok: bool
    admissible: bool
    spectrum: SpectrumInfo
    coeffs: CoefficientSet
    notes: list[str] = field(default_factory=list)

    def to_kv(self) -> list[tuple[str, str]]:
        co = self.coeffs
        kv = [
            ("case", str(self.case_label)),
            ("k_plus", repr(co.k_plus)),
            ("k_minus", repr(co.k_minus)),
            ("l_plus", repr(co.l_plus)),
            ("l_minus", repr(co.l_minus)),
            ("r_plus", repr(co.r_plus)),
            ("r_minus", repr(co.r_minus)),
            ("r", repr(co.r)),
            ("lambda_min", repr(self.spectrum.lambda_min)),
            ("inv_norm", repr(self.spectrum.inv_norm)),
            ("t_parameter", "none" if self.t_parameter is None else repr(self.t_parameter)),
        ]
        for i, c in enumerate(self.conditions):
            kv += [
                (f"condition.{i}.name", c.name),
                (f"condition.{i}.value", repr(c.value)),
                (f"condition.{i}.threshold", repr(c.threshold)),
                (f"condition.{i}.relation", c.relation),
                (f"condition.{i}.satisfied", str(c.satisfied).lower()),
            ]
        kv += [("spectral_ok", str(self.spectral_ok).lower()), ("admissible", str(self.admissible).lower())]
        for i, n in enumerate(self.notes):
            kv.append((f"note.{i}", n))
        return kv

    def to_text(self) -> str:
        lines = [f"case: {self.case_label}",
                 f"r+ = {self.coeffs.r_plus:.12g}, r- = {self.coeffs.r_minus:.12g}, r = {self.coeffs.r:.12g}"]
        for c in self.conditions:
            mark = "ok" if c.satisfied else "VIOLATED"
            lines.append(f"  {c.name}: {c.value:.12g} {c.relation} {c.threshold:.12g}  [{mark}]")
        if self.t_parameter is not None:
            lines.append(f"  t = {self.t_parameter:.12g}")
        lines.append(f"spectral: lambda_min = {self.spectrum.lambda_min:.12g} > r  [{'ok' if self.spectral_ok else 'VIOLATED'}]")
        for n in self.notes:
            lines.append(f"note: {n}")
        lines.append(f"admissible: {str(self.admissible).lower()}")
        return "\n".join(lines)


def classify(coeffs: CoefficientSet) -> CaseLabel:
    zp, zm = coeffs.r_plus_is_zero, coeffs.r_minus_is_zero
    if zp and zm:
        return CaseLabel("BothZero")
    if zm:
        return CaseLabel("RminusZero")
    if zp:
        return CaseLabel("RplusZero")
    sg = lambda v: "+" if v > 0 else "-"  # noqa: E731
    return CaseLabel("BothNonzero", (sg(coeffs.r_plus), sg(coeffs.r_minus)))


def _weak(name, value, threshold, relation, scale) -> Condition:
    tol = WEAK_RTOL * max(1.0, abs(scale), abs(value), abs(threshold))
    ok = value >= threshold - tol if relation == ">=" else value <= threshold + tol
    return Condition(name, float(value), float(threshold), relation, bool(ok), float(scale))


def t_bound(t: float, k_num: float, k_den: float) -> float:
    """(sqrt(t+1) + sqrt(t))^2 / t^2 * k_num^2 / (4 k_den^2)."""
    return (math.sqrt(t + 1) + math.sqrt(t)) ** 2 / t ** 2 * k_num ** 2 / (4 * k_den ** 2)


def _one_zero_case(r_nz: float, k_nz: float, k_z: float, nz: str, z: str,
                   spectrum: SpectrumInfo, t: float | None):
    """Conditions when the ratio of side ``z`` vanishes and side ``nz`` does not."""
    conds = [_weak(f"k_{z}/k_{nz} <= 2", k_z / k_nz, 2.0, "<=", 2.0)]
    t_used = None
    if r_nz > 0:
        t_max = 1.0 / (r_nz * spectrum.inv_norm)
        if t is not None:
            if not 0 < t < t_max:
                raise ValueError(f"t = {t!r} outside (0, {t_max!r})")
            t_used = float(t)
        else:
            grid = np.geomspace(t_max * 1e-6, t_max * (1 - 1e-12), T_GRID)
            margins = [r_nz - t_bound(tt, k_nz, k_z) for tt in grid]
            t_used = float(grid[int(np.argmax(margins))])
        conds.append(_weak(f"r_{nz} >= (sqrt(t+1)+sqrt(t))^2/t^2 k_{nz}^2/(4 k_{z}^2)",
                           r_nz, t_bound(t_used, k_nz, k_z), ">=", r_nz))
    else:
        thr = -27 * k_nz ** 2 / (64 * k_z ** 2)
        conds.append(_weak(f"r_{nz} <= -27 k_{nz}^2/(64 k_{z}^2)", r_nz, thr, "<=", thr))
    return conds, t_used


def check_theorem1(coeffs: CoefficientSet, spectrum: SpectrumInfo, t: float | None = None) -> RegimeReport:
    """Evaluate the sufficient conditions of the well-posedness theorem."""
    label = classify(coeffs)
    kp, km, lp, lm = coeffs.k_plus, coeffs.k_minus, coeffs.l_plus, coeffs.l_minus
    conds: list[Condition] = []
    t_used = None
    notes = ["||A^-1|| taken as 1/lambda_min (exact for p = 2 in the diagonal sine model)"]
    if label.kind == "BothNonzero":
        if label.signs == ("-", "-"):
            conds.append(_weak("(l+ - l-)(k+ - k-) >= 0", (lp - lm) * (kp - km), 0.0, ">=",
                               (abs(lp) + abs(lm)) * (abs(kp) + abs(km))))
        elif label.signs == ("+", "-"):
            conds.append(_weak("-6 l- k+ + l+ k+ + l- k- >= 0", -6 * lm * kp + lp * kp + lm * km, 0.0, ">=",
                               6 * abs(lm * kp) + abs(lp * kp) + abs(lm * km)))
        elif label.signs == ("-", "+"):
            conds.append(_weak("-6 l+ k- + l+ k+ + l- k- >= 0", -6 * lp * km + lp * kp + lm * km, 0.0, ">=",
                               6 * abs(lp * km) + abs(lp * kp) + abs(lm * km)))
    elif label.kind == "RminusZero":
        conds, t_used = _one_zero_case(coeffs.r_plus, kp, km, "+", "-", spectrum, t)
    elif label.kind == "RplusZero":
        conds, t_used = _one_zero_case(coeffs.r_minus, km, kp, "-", "+", spectrum, t)
    else:
        conds.append(Condition("not covered by the well-posedness theorem", 0.0, 0.0, ">=", False))
        notes.append("not covered by the well-posedness theorem: both ratios vanish; solves run only with --force")
    spectral_ok = bool(spectrum.lambda_min > max(-coeffs.r_plus, -coeffs.r_minus, 0.0))
    admissible = all(c.satisfied for c in conds) and spectral_ok and label.kind != "BothZero"
    return RegimeReport(label, conds, t_used, spectral_ok, admissible, spectrum, coeffs, notes)


def mirror_coefficients(coeffs: CoefficientSet) -> CoefficientSet:
    return CoefficientSet(coeffs.k_minus, coeffs.k_plus, coeffs.l_minus, coeffs.l_plus)


def mirror_problem(coeffs: CoefficientSet, geometry: Geometry, data: ProblemData):
    """Reflect x -> a + b - x: habitats swap, normal derivatives change sign.

    Applying it twice returns the original geometry and data objects.
    """
    if geometry._mirror_source is not None:
        geo2 = geometry._mirror_source
    else:
        geo2 = Geometry(geometry.a, geometry.a + geometry.b - geometry.gamma, geometry.b,
                        geometry.ell, geometry.K, geometry.Nx, geometry.Ny)
        geo2._mirror_source = geometry
    if data._mirror_source is not None:
        data2 = data._mirror_source
    else:
        ab = geometry.a + geometry.b
        data2 = ProblemData(
            g_minus=reflect_forcing(data.g_plus, ab),
            g_plus=reflect_forcing(data.g_minus, ab),
            phi1_minus=data.phi1_plus,
            phi1_plus=data.phi1_minus,
            phi2_minus=negate(data.phi2_plus),
            phi2_plus=negate(data.phi2_minus),
        )
        data2._mirror_source = data
    return mirror_coefficients(coeffs), geo2, data2
