import pytest

from pshdef.boundary import UnsupportedOrderError, frame_at
from pshdef.certify import (CertReport, Kind, Region, check_necessary_boundary,
                            check_necessary_BP, check_sufficient, classify, detect_weak,
                            interval_IL, sample_boundary, scan_psh, series_necessity)
from pshdef.expansion import build_P, build_rho
from pshdef.expr import Const, Point, eval_field, parse

REG6 = Region(Point(0, 0), 0.3)


@pytest.fixture(scope="module")
def samples6():
    from pshdef.domains import EXAMPLE6_R
    return sample_boundary(parse(EXAMPLE6_R), REG6, 343)


def test_ball_samples_all_strong(ball):
    s = sample_boundary(ball, Region(Point(1, 0), 0.3), 125)
    assert s and all(x.kind is Kind.STRONG for x in s)
    assert all(abs(eval_field(ball, x.p)) <= 1e-12 for x in s)


def test_example6_weak_set(samples6):
    assert any(s.kind is Kind.WEAK for s in samples6)
    for s in samples6:
        assert (s.kind is Kind.WEAK) == (abs(s.p.z) <= 1e-6)


def test_samples_sorted_and_capped(samples6):
    keys = [s.p.as_real() for s in samples6]
    assert keys == sorted(keys)
    assert len(samples6) <= 343


def test_empty_intersection_gives_note(ball):
    notes = []
    assert sample_boundary(ball, Region(Point(0, 0), 0.2), 27, notes=notes) == []
    assert notes


def test_classification_invariant_under_scaling(r6, samples6):
    r2 = Const(2.0) * r6
    for s in samples6[::7]:
        assert classify(r2, s.p).kind is s.kind


def test_refinement_finds_weak_point(r6):
    # offset grid never hits z = 0 exactly
    reg = Region(Point(0.013, 0), 0.3)
    s = sample_boundary(r6, reg, 125)
    assert not any(x.kind is Kind.WEAK for x in s)
    weak = detect_weak(r6, s, reg)
    assert weak and all(abs(x.p.z) < 1e-4 for x in weak)


def test_boundary_condition_examples(r6, ball, samples6):
    assert check_necessary_boundary(r6, parse("-abs2(z)"), samples6).passed
    sb = sample_boundary(ball, Region(Point(1, 0), 0.3), 64)
    assert check_necessary_boundary(ball, Const(0.0), sb).passed
    # weak at the origin with det H = -c^2/4 = -0.1
    c = 0.4 ** 0.5
    bad = parse(f"Im(w)+{c!r}*Re(z*conj(w))")
    s = classify(bad, Point(0, 0))
    assert s.kind is Kind.WEAK
    rep = check_necessary_boundary(bad, Const(0.0), [s])
    assert rep.verdict == "fail" and rep.witnesses[0][1] == pytest.approx(0.1)


def test_BP_condition_examples(r6, samples6):
    weak = [s for s in samples6 if s.kind is Kind.WEAK]
    assert check_necessary_BP(r6, parse("1-abs2(z)"), weak).passed
    assert check_necessary_BP(r6, Const(3.0), weak).passed
    rep = check_necessary_BP(r6, parse("1+Re(z)"), [classify(r6, Point(0, 0))])
    assert rep.verdict == "fail" and rep.witnesses


def test_interval_IL(r6):
    res = interval_IL(r6, parse("abs2(z)"), Point(0, 0))
    assert res.side == "negative" and res.H_value == pytest.approx(0.25)
    assert interval_IL(r6, parse("-abs2(z)"), Point(0, 0)).side == "positive"
    assert interval_IL(r6, parse("Re(w)^2"), Point(0, 0)).side == "empty"


def test_scan_examples(r6):
    assert scan_psh(parse("abs2(z)+abs2(w)"), Region(Point(0.5, -1), 0.7), 7,
                    r=parse("abs2(z)+abs2(w)-4")).passed
    rep = scan_psh(r6, REG6, 13, max_witnesses=None)
    assert rep.verdict == "fail"
    assert any(abs(p.z) < 1e-12 and abs(p.w + 0.05) < 1e-12 for p, _ in rep.witnesses)
    viol = [v for _, v in rep.witnesses]
    assert viol == sorted(viol, reverse=True)
    assert scan_psh(build_rho(r6, parse("abs2(z)"), 0, -1), REG6, 13, r=r6).passed


def test_sufficient_example6(r6):
    rep = check_sufficient(r6, parse("abs2(z)"), Point(0, 0), REG6, grid_n=13)
    assert rep.verdict == "pass"
    assert [0.0, -1.0] in rep.parameters["feasible"]
    assert set(rep.parameters["conditions"].values()) == {"pass"}


def test_sufficient_example6_without_modification(r6):
    rep = check_sufficient(r6, Const(0.0), Point(0, 0), REG6, grid_n=13)
    assert rep.verdict == "fail" and rep.witnesses


def test_sufficient_ball_via_kohn_path(ball):
    rep = check_sufficient(ball, Const(0.0), Point(1, 0), Region(Point(1, 0), 0.3))
    assert rep.verdict == "pass"
    assert all(L == 0.0 for _, L in rep.parameters["feasible"])


def test_grid_exhaustion_is_inconclusive(r6):
    rep = check_sufficient(r6, parse("abs2(z)"), Point(0, 0), REG6, K_grid=[0.0],
                           L_grid=[1e-3], grid_n=13)
    assert rep.parameters["conditions"]["boundary_psh_some_L"] == "pass"
    assert rep.verdict == "inconclusive"


def test_series_necessity_examples(ball, r6):
    fr = frame_at(ball, Point(1, 0), 0.0)
    rep = series_necessity(ball, Const(1.0), 1.0, [fr])
    assert rep.passed and rep.parameters["frames"][0]["N"] == 0
    P = build_P(parse("abs2(z)"), -1)
    weak = [frame_at(r6, Point(0, w), 0.0) for w in (0j, -0.5 + 0.5j)]
    lo = series_necessity(r6, P, 0.0, weak)
    hi = series_necessity(r6, P, 25.0, weak)
    assert all(f["G"][0] == pytest.approx(0, abs=1e-12) for f in hi.parameters["frames"])
    assert hi.verdict == "pass"
    assert lo.verdict in ("pass", "fail")
    with pytest.raises(UnsupportedOrderError):
        series_necessity(ball, Const(1.0), 1.0, [fr], N_max=3)


def test_series_necessity_reports_negative_G0():
    # weak point with det H_r = -1/4, so G_0 = det H_r < 0
    r = parse("Im(w)+Re(z*conj(w))")
    fr = frame_at(r, Point(0, 0), 0.0)
    rep = series_necessity(r, Const(1.0), 0.0, [fr])
    assert rep.verdict == "fail" and rep.witnesses[0][1] < 0


def test_fail_report_needs_witness():
    with pytest.raises(ValueError):
        CertReport("x", "fail")


def test_report_serialises(r6):
    rep = check_sufficient(r6, parse("abs2(z)"), Point(0, 0), REG6, grid_n=9)
    d = rep.to_dict()
    assert d["verdict"] == "pass" and len(d["children"]) == 3
