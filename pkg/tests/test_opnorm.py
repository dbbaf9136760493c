from fractions import Fraction
import math

import pytest
from hypothesis import given, strategies as st

from sigma_lab import Partition, RandomVariable, is_subfield, join, meet
from sigma_lab.errors import HypothesisViolation
from sigma_lab.gallery import warren_pair, warren_space
from sigma_lab.opnorm import (INF, brute_opnorm, lower_bound_witness, lp_norm, lp_ratio, op_norm,
                              parse_exponent, rogge_check, verify_onc_hc_chain)

from conftest import space_with, values_on

TOL = 1e-9


def crossed(sp):
    ids = sp.ids
    return (Partition.from_atoms(sp, [[ids[0], ids[1]], [ids[2], ids[3]]]),
            Partition.from_atoms(sp, [[ids[0], ids[2]], [ids[1], ids[3]]]))


def test_parse_exponent():
    assert parse_exponent("inf") == INF and parse_exponent("3/2") == Fraction(3, 2)
    assert parse_exponent(math.inf) == INF
    with pytest.raises(ValueError):
        parse_exponent(Fraction(1, 2))


def test_lp_norm_examples(uniform4):
    assert lp_norm(uniform4, [1, 1, 1, 1], 3).exact == 1
    assert lp_norm(uniform4, [1, -1, 2, 0], INF).exact == 2
    assert lp_norm(uniform4, [1, -1, 2, 0], 1).exact == 1
    # sqrt(6/4)
    r = lp_norm(uniform4, [1, -1, 2, 0], 2)
    assert r.lo ** 2 <= Fraction(3, 2) <= r.hi ** 2


def test_equal_fields_have_zero_norm(uniform4):
    a, _ = crossed(uniform4)
    for p, q in ((1, 1), (2, 2), (INF, INF), (INF, 1), (3, 2)):
        assert op_norm(uniform4, a, a, p, q).value.hi == 0


def test_crossed_pair(uniform4):
    a, b = crossed(uniform4)
    r = op_norm(uniform4, a, b, 1, 1)
    assert r.exact and r.value.exact == 1 and r.method == "extreme-point-L1"
    assert list(r.witness_f.values) == [4, 0, 0, 0]
    assert lp_ratio(uniform4, a, b, r.witness_f, 1, 1).exact == 1
    r2 = op_norm(uniform4, a, b, 2, 2)
    assert r2.exact and r2.value.exact == 1 and r2.method == "spectral-L2"
    assert op_norm(uniform4, a, b, INF, INF).value.exact == 1
    assert op_norm(uniform4, a, b, INF, 1).value.exact == 1


def test_q_above_p_rejected(uniform4):
    a, b = crossed(uniform4)
    with pytest.raises(HypothesisViolation):
        op_norm(uniform4, a, b, 1, 2)


def test_lower_bound_witnesses(uniform4):
    a, b = crossed(uniform4)
    assert lower_bound_witness(uniform4, a, b, "distinct-L1").bound == 1
    lb = lower_bound_witness(uniform4, a, b, "distinct-Linf")
    assert lb.bound == Fraction(1, 2)
    assert lp_ratio(uniform4, a, b, lb.witness_f, INF, INF).exact >= Fraction(1, 2)
    ind = lower_bound_witness(uniform4, a, b, "independent-event")
    for p in (1, 2, 3, INF):
        assert lp_ratio(uniform4, a, b, ind.witness_f, p, p).lo >= 1 - Fraction(1, 10**30)
    coarse = Partition.trivial(uniform4)
    nested = lower_bound_witness(uniform4, coarse, a, "nested")
    assert lp_ratio(uniform4, coarse, a, nested.witness_f, 2, 2).exact == 1
    with pytest.raises(HypothesisViolation):
        lower_bound_witness(uniform4, a, b, "nested")
    with pytest.raises(HypothesisViolation):
        lower_bound_witness(uniform4, a, a, "distinct-L1")


def test_l1_and_linf_agree_on_warren():
    sp = warren_space(Fraction(1, 4))
    fine, first = warren_pair(sp)
    l1 = op_norm(sp, fine, first, 1, 1).value.exact
    assert l1 == 2 / (1 + Fraction(1, 4))
    assert op_norm(sp, fine, first, INF, INF).value.exact == l1


def test_duality_on_warren():
    # the difference of two conditional expectations is self-adjoint
    sp = warren_space(Fraction(1, 3))
    fine, first = warren_pair(sp)
    for p in (Fraction(3, 2), Fraction(4, 3)):
        dual = p / (p - 1)
        assert abs(op_norm(sp, fine, first, p, p).estimate - op_norm(sp, fine, first, dual, dual).estimate) < 1e-6


@given(space_with(2, max_size=5))
def test_matches_dense_oracle(data):
    sp, a, b = data
    for p, q in ((1, 1), (INF, 1), (INF, INF)):
        fast = op_norm(sp, a, b, p, q)
        assert fast.exact and fast.value.exact == brute_opnorm(sp, a, b, p, q).value.exact
    l2 = op_norm(sp, a, b, 2, 2)
    assert abs(l2.estimate - brute_opnorm(sp, a, b, 2, 2).estimate) < TOL


@given(space_with(2, max_size=5))
def test_symmetry_and_zero(data):
    sp, a, b = data
    for p, q in ((1, 1), (2, 2), (INF, 1)):
        x, y = op_norm(sp, a, b, p, q), op_norm(sp, b, a, p, q)
        assert abs(x.estimate - y.estimate) < TOL
        assert (x.value.hi == 0) == (a == b)


@given(space_with(2, max_size=5))
def test_monotone_in_target_exponent(data):
    sp, a, b = data
    seq = [op_norm(sp, a, b, INF, q).estimate for q in (1, 2, 3, INF)]
    assert all(x <= y + TOL for x, y in zip(seq, seq[1:]))


@given(space_with(2, max_size=5), st.data())
def test_witness_ratio_below_norm(data, draw):
    sp, a, b = data
    f = RandomVariable(sp, draw.draw(values_on(sp)))
    if lp_norm(sp, f, 2).hi == 0:
        return
    assert lp_ratio(sp, a, b, f, 2, 2).lo <= op_norm(sp, a, b, 2, 2).value.hi + Fraction(1, 10**9)


@given(space_with(2, max_size=5), st.sampled_from([(2, 1), (INF, 1), (INF, INF)]))
def test_onc_hc_chain(data, pq):
    sp, a, b = data
    rep = verify_onc_hc_chain(sp, a, b, *pq)
    assert rep.holds, rep.violation


@given(space_with(2, max_size=5), st.data())
def test_rogge_bound_for_nested_fields(data, draw):
    sp, a, b = data
    small, big = meet(a, b), join(a, b)
    assert is_subfield(small, big)
    family = [RandomVariable(sp, draw.draw(values_on(sp, bound=3))) for _ in range(3)]
    r = draw.draw(st.sampled_from([1, 2, 3]))
    level = draw.draw(st.sampled_from([Fraction(1, 2), 1, 2, 4]))
    rep = rogge_check(sp, small, big, family, r, level)
    assert rep.holds


def test_rogge_needs_nesting(uniform4):
    a, b = crossed(uniform4)
    with pytest.raises(HypothesisViolation):
        rogge_check(uniform4, a, b, [RandomVariable(uniform4, [1, 0, 0, 0])], 2, 1)
