import json
from fractions import Fraction

from mpmath import mp, mpc, mpf

from mde_forge.orthopoly import RationalPoly
from mde_forge.report import bound_check, dec, exact_check, numeric_check, render_report, to_jsonable


def test_rendering_keeps_working_precision():
    with mp.workprec(256):
        x = mpf(1) / 3
    assert dec(x, 40) == "0." + "3" * 40


def test_jsonable_types():
    assert to_jsonable(Fraction(-3, 4)) == "-3/4"
    assert to_jsonable(Fraction(5)) == "5"
    assert to_jsonable(1e-8) == "1e-08"
    assert to_jsonable(mpc(1, 2), 5) == {"re": "1.0", "im": "2.0"}
    assert to_jsonable(RationalPoly([Fraction(1, 2), 1])) == ["1/2", "1"]
    assert to_jsonable({"a": [True, None, 3]}) == {"a": [True, None, 3]}


def test_checks():
    with mp.workprec(256):
        tiny = mpf(10) ** -70
        c = numeric_check("n", 1, 1 + tiny, 1e-60)
    assert c.passed and 0 < c.abs_error < mpf(10) ** -69
    assert not numeric_check("n", 0, 2, 1, relative_to=1).passed
    assert numeric_check("rel", 0, 2, 1, relative_to=4).passed
    assert bound_check("b", mpf("0.5"), 1e-4, above=True).passed
    assert not bound_check("b", mpf("0.5"), 1e-4).passed
    assert not exact_check("e", False).passed


def test_report_sorted_and_counted():
    checks = [exact_check("z", True), exact_check("a", False)]
    out = json.loads(render_report("demo", checks, {"note": Fraction(1, 2)}))
    assert out["schema"] == "1" and out["suite"] == "demo"
    assert [c["name"] for c in out["checks"]] == ["a", "z"]
    assert out["n_failed"] == 1 and out["passed"] is False
    assert out["note"] == "1/2"
    assert set(out["checks"][0]) >= {"name", "target", "value", "abs_error", "tolerance", "pass"}
