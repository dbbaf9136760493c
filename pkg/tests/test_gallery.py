from fractions import Fraction

import pytest

from sigma_lab import FiniteSpace, Partition, cond_exp
from sigma_lab.detect import NOT_TENDING, TENDING, projective_consistency
from sigma_lab.errors import HypothesisViolation, SigmaLabError
from sigma_lab.gallery import (ENTRIES, SQRT6_X, Alternating, DyadicWeak, TrivialCounterexample, Warren, build,
                               run, warren_display_a1, warren_display_a2, warren_pair, warren_space)
from sigma_lab.opnorm import op_norm
from sigma_lab.scalar import quad


def failing(claims):
    return [c.name for c in claims if not c.holds]


@pytest.mark.parametrize("p", ["3/2", "2", "3"])
def test_warren_claims(p):
    # at horizon 8 the last-half rule is a hair short of halving for p != 2
    res = run("warren", p=p)
    assert failing(res.claims) == []
    assert res.report.verdicts["ONC"] == TENDING


def test_warren_l1_norm_closed_form():
    for n in range(1, 7):
        eps = Fraction(1, 2**n)
        sp = warren_space(eps)
        fine, first = warren_pair(sp)
        assert op_norm(sp, fine, first, 1, 1).value.exact == 2 / (1 + eps)


def test_warren_displays():
    eps = Fraction(1, 5)
    sp = warren_space(eps)
    fine, first = warren_pair(sp)
    f = [Fraction(1), Fraction(2), Fraction(-3), Fraction(7, 3)]
    assert list(cond_exp(sp, fine, f).values) == warren_display_a2(eps, f)
    assert list(cond_exp(sp, first, f).values) == warren_display_a1(eps, f)


@pytest.mark.parametrize("p", [1, "inf", "1/2"])
def test_warren_rejects_endpoint_exponents(p):
    with pytest.raises((HypothesisViolation, ValueError)):
        Warren(p)


def test_dyadic_weak_claims():
    res = run("dyadic-weak", horizon=8)
    assert failing(res.claims) == []
    assert res.report.verdicts["WC"] == TENDING
    assert res.report.verdicts["SC"] == NOT_TENDING
    assert res.report.verdicts["HC"] == NOT_TENDING


def test_dyadic_weak_numbers():
    assert (Fraction(1, 4) + SQRT6_X) ** 2 == quad(Fraction(7, 64), Fraction(1, 32), 6)
    assert (Fraction(1, 8) + SQRT6_X) ** 2 == Fraction(3, 32)
    mat = DyadicWeak().materialize(6)
    st = mat.stage(5)
    a, b = st.events["A"], st.events["B"]
    assert st.space.measure(a) == st.space.measure(b) == Fraction(1, 4) + SQRT6_X
    assert st.space.measure(a & b) == Fraction(3, 16)
    assert st.space.measure(st.events["Bn"]) == Fraction(1, 4)
    assert projective_consistency(DyadicWeak(), 5, 7)[0]


def test_dyadic_weak_needs_four_stages():
    with pytest.raises(HypothesisViolation):
        DyadicWeak().materialize(3)


def test_trivial_counterexample():
    res = run("trivial-counterexample", horizon=4)
    assert failing(res.claims) == []
    sp = FiniteSpace.uniform(4)
    with pytest.raises(HypothesisViolation):
        TrivialCounterexample(sp, sp.event(sp.ids).mask)
    with pytest.raises(HypothesisViolation):
        TrivialCounterexample(sp, 0)


def test_monotone_dyadic():
    res = run("monotone-dyadic", horizon=6)
    assert failing(res.claims) == []
    assert res.report.verdicts["MC"] == "limit-matches"


def test_alternating():
    res = run("alternating", horizon=6)
    assert failing(res.claims) == []
    sp = FiniteSpace.uniform(4)
    a = Partition.trivial(sp)
    with pytest.raises(HypothesisViolation):
        Alternating(sp, a, a)


def test_registry():
    assert set(ENTRIES) == {"warren", "dyadic-weak", "trivial-counterexample", "monotone-dyadic", "alternating"}
    with pytest.raises(SigmaLabError):
        build("nope")
    scen, mat = build("alternating")
    assert mat.horizon == ENTRIES["alternating"].default_horizon
