from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from transmission.problem import Geometry, ProblemData
from transmission.regime import (
    CaseLabel,
    SpectrumInfo,
    check_theorem1,
    classify,
    mirror_coefficients,
    mirror_problem,
    t_bound,
)
from transmission.symbols import CoefficientSet, ScanRanges, sign_scan

BIG = SpectrumInfo(100.0)


def test_classify_examples():
    assert str(classify(CoefficientSet(1, 1, 1, 2))) == "BothNonzero(+,+)"
    assert classify(CoefficientSet(1, 1, -1, 0)) == CaseLabel("RminusZero")
    assert classify(CoefficientSet(1, 1, 0, 0)).kind == "BothZero"
    assert classify(CoefficientSet(1, 1, 0, -3)).kind == "RplusZero"
    assert str(classify(CoefficientSet(2, 1, -1, 3))) == "BothNonzero(-,+)"


def test_classify_zero_tolerance():
    assert classify(CoefficientSet(1, 1, 5e-13, 1)).kind == "RplusZero"
    assert classify(CoefficientSet(1, 1, 1e-10, 1)).kind == "BothNonzero"


def test_coefficient_set_requires_same_sign_k():
    with pytest.raises(ValueError):
        CoefficientSet(1, -1, 1, 1)
    with pytest.raises(ValueError):
        CoefficientSet(0, 1, 1, 1)


def test_mixed_case_example():
    rep = check_theorem1(CoefficientSet(1, 1, 3, -1), SpectrumInfo.for_width(1.0))
    assert str(rep.case_label) == "BothNonzero(+,-)"
    assert rep.conditions[0].value == 8
    assert rep.admissible


def test_rminus_zero_negative_example():
    co = CoefficientSet(1, 1, -0.5, 0)
    rep = check_theorem1(co, SpectrumInfo(0.6))
    assert rep.conditions[1].threshold == -27 / 64
    assert rep.admissible
    assert not check_theorem1(co, SpectrumInfo(0.5)).admissible  # lambda_min must exceed 0.5
    assert not check_theorem1(CoefficientSet(1, 1, -0.4, 0), BIG).admissible


def test_minus_minus_boundary_example():
    co = CoefficientSet(1, 1, -1, -2)
    rep = check_theorem1(co, SpectrumInfo(2.5))
    assert rep.conditions[0].value == 0
    assert rep.conditions[0].satisfied
    assert rep.admissible
    assert not check_theorem1(co, SpectrumInfo(2.0)).spectral_ok


def test_plus_plus_unconditional():
    rep = check_theorem1(CoefficientSet(3, 0.1, 2, 7), SpectrumInfo(1.0))
    assert rep.conditions == []
    assert rep.admissible


def test_both_zero_not_covered():
    rep = check_theorem1(CoefficientSet(1, 1, 0, 0), BIG)
    assert not rep.admissible
    assert rep.conditions[0].name == "not covered by the well-posedness theorem"
    assert any("not covered" in n for n in rep.notes)


def test_positive_rplus_case_t_search():
    co = CoefficientSet(1, 1, 30, 0)
    spec = SpectrumInfo(math.pi ** 2)
    rep = check_theorem1(co, spec)
    tmax = spec.lambda_min / co.r_plus
    assert 0 < rep.t_parameter < tmax
    assert rep.conditions[1].threshold == pytest.approx(t_bound(rep.t_parameter, 1, 1))
    assert rep.admissible
    # the bound decreases in t, so the search picks the largest grid point
    assert rep.t_parameter == pytest.approx(tmax * (1 - 1e-12))


def test_explicit_t_and_range_error():
    co = CoefficientSet(1, 1, 30, 0)
    spec = SpectrumInfo(math.pi ** 2)
    rep = check_theorem1(co, spec, t=0.2)
    assert rep.t_parameter == 0.2
    with pytest.raises(ValueError):
        check_theorem1(co, spec, t=0.0)
    with pytest.raises(ValueError):
        check_theorem1(co, spec, t=spec.lambda_min / 30)


def test_ratio_bound():
    assert not check_theorem1(CoefficientSet(1, 2.5, -5, 0), BIG).admissible
    rep = check_theorem1(CoefficientSet(1, 2.0, -5, 0), BIG)
    assert rep.conditions[0].satisfied


def test_rplus_zero_mirrors_rminus_zero():
    a = check_theorem1(CoefficientSet(1, 1.5, -2, 0), BIG)
    b = check_theorem1(CoefficientSet(1.5, 1, 0, -2), BIG)
    assert a.case_label.kind == "RminusZero" and b.case_label.kind == "RplusZero"
    assert [c.value for c in a.conditions] == [c.value for c in b.conditions]
    assert a.admissible == b.admissible


def test_report_serialization():
    rep = check_theorem1(CoefficientSet(1, 1, 3, -1), SpectrumInfo(2.0))
    kv = dict(rep.to_kv())
    assert kv["case"] == "BothNonzero(+,-)"
    assert kv["admissible"] == "true"
    assert kv["condition.0.satisfied"] == "true"
    text = rep.to_text()
    assert "admissible: true" in text
    assert "1/lambda_min" in text


def test_spectrum_info():
    assert SpectrumInfo(4.0).inv_norm == 0.25
    with pytest.raises(ValueError):
        SpectrumInfo(0.0)
    assert SpectrumInfo.for_width(math.pi).lambda_min == pytest.approx(1.0)


# ------------------------------------------------------------------ mirror

def _data():
    return ProblemData(
        g_minus=lambda x, y: np.exp(-x) * np.sin(np.pi * y),
        g_plus=lambda x, y: x * y,
        phi1_minus=lambda y: y,
        phi1_plus=1.0,
        phi2_minus=lambda y: y * y,
        phi2_plus=None,
    )


def test_mirror_involution_bitwise():
    co, geo, data = CoefficientSet(1.2, 0.7, 0, -0.4), Geometry(0.0, 0.3, 1.0, 1.0), _data()
    co2, geo2, data2 = mirror_problem(co, geo, data)
    co3, geo3, data3 = mirror_problem(co2, geo2, data2)
    assert co3 == co
    assert geo3 is geo
    assert data3 is data
    assert geo2.gamma == pytest.approx(0.7)


def test_mirror_swaps_data():
    co, geo, data = CoefficientSet(1.2, 0.7, 0, -0.4), Geometry(0.0, 0.3, 1.0, 1.0), _data()
    _, _, d2 = mirror_problem(co, geo, data)
    x, y = np.array([0.8]), np.array([0.3])
    assert d2.g_plus(x, y) == pytest.approx(data.g_minus(1.0 - x, y))
    assert d2.g_minus(x, y) == pytest.approx(data.g_plus(1.0 - x, y))
    assert d2.phi1_minus == 1.0
    assert d2.phi2_plus(y) == pytest.approx(-data.phi2_minus(y))
    assert d2.phi2_minus is None


def test_mirror_rplus_zero_becomes_rminus_zero():
    co = CoefficientSet(1, 1, 0, -2)
    assert classify(mirror_coefficients(co)).kind == "RminusZero"
    assert str(classify(mirror_coefficients(CoefficientSet(1, 1, 3, -1)))) == "BothNonzero(-,+)"


def test_mirror_fixed_point():
    co = CoefficientSet(1, 1, 2, 2)
    geo = Geometry(0.0, 0.5, 1.0, 1.0)
    assert mirror_coefficients(co) == co
    _, geo2, _ = mirror_problem(co, geo, ProblemData())
    assert geo2.gamma == geo.gamma


# ------------------------------------------------------------- properties

coef = st.floats(-5, 5).filter(lambda v: abs(v) > 1e-3)
kpos = st.floats(0.2, 5)


@settings(max_examples=200, deadline=None)
@given(kp=kpos, km=kpos, lp=coef, lm=coef, lam=st.floats(0.1, 50))
def test_report_invariants(kp, km, lp, lm, lam):
    co = CoefficientSet(kp, km, lp, lm)
    rep = check_theorem1(co, SpectrumInfo(lam))
    assert rep.admissible == (all(c.satisfied for c in rep.conditions) and rep.spectral_ok)
    assert rep.spectral_ok == (lam > co.r)
    mirrored = check_theorem1(mirror_coefficients(co), SpectrumInfo(lam))
    assert mirrored.admissible == rep.admissible


@settings(max_examples=100, deadline=None)
@given(kp=kpos, km=kpos, lp=coef, lm=coef)
def test_margins_continuous(kp, km, lp, lm):
    eps = 1e-7
    a = check_theorem1(CoefficientSet(kp, km, lp, lm), BIG)
    b = check_theorem1(CoefficientSet(kp, km, lp + eps, lm - eps), BIG)
    if a.case_label != b.case_label:
        return
    for ca, cb in zip(a.conditions, b.conditions):
        assert abs(ca.value - cb.value) <= 20 * eps * (1 + kp + km)


def test_b2_positive_on_admissible_regimes():
    regimes = [(1, 1, 2, 3), (1, 1, -1, -2), (2, 1, -1, -3), (1, 1, 3, -1), (1, 1, -1, 3), (1, 2, 0.5, 0.5)]
    for kp, km, lp, lm in regimes:
        co = CoefficientSet(kp, km, lp, lm)
        assert check_theorem1(co, SpectrumInfo(co.r + 1)).admissible
        rep = sign_scan("b2", ScanRanges(coeffs=co), 2000, seed=4)
        assert rep.violation_count == 0
