from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from sigma_lab import Partition, RandomVariable, bayes_cond_exp, cond_exp, is_subfield, meet, reweight
from sigma_lab.conditioning import operator_matrix
from sigma_lab.errors import HypothesisViolation, SpaceMismatchError
from sigma_lab.gallery import warren_pair, warren_space
from sigma_lab.space import FiniteSpace, normalize_density

from conftest import space_with, values_on


def test_max_coordinate_display_on_indicator():
    for eps in (Fraction(1, 4), Fraction(1, 3), Fraction(1, 10)):
        sp = warren_space(eps)
        fine, _ = warren_pair(sp)
        out = cond_exp(sp, fine, RandomVariable.indicator(sp.event(["11"]), sp))
        assert out.values[0] == 0
        assert list(out.values[1:]) == [eps / (1 + eps)] * 3
    sp = warren_space(Fraction(1, 4))
    fine, _ = warren_pair(sp)
    assert cond_exp(sp, fine, RandomVariable.indicator(sp.event(["11"]), sp)).values[3] == Fraction(1, 5)


def test_trivial_and_discrete(uniform4):
    f = RandomVariable(uniform4, [1, 2, 3, 6])
    assert list(cond_exp(uniform4, Partition.trivial(uniform4), f).values) == [3] * 4
    assert cond_exp(uniform4, Partition.discrete(uniform4), f) == f


def test_null_outcomes_get_zero():
    sp = FiniteSpace(["a", "b", "c"], [Fraction(1, 2), Fraction(1, 2), 0])
    f = RandomVariable(sp, [2, 4, 100])
    assert list(cond_exp(sp, Partition.trivial(sp), f).values) == [3, 3, 0]


def test_operator_rows(uniform4):
    q = Fraction(1, 4)
    assert all(row == [q] * 4 for row in operator_matrix(uniform4, Partition.trivial(uniform4)).rows)
    ids = uniform4.ids
    a = Partition.from_atoms(uniform4, [[ids[0], ids[1]], [ids[2], ids[3]]])
    op = operator_matrix(uniform4, a)
    h = Fraction(1, 2)
    assert op.rows[0] == [h, h, 0, 0] and op.rows[3] == [0, 0, h, h]
    for k in range(4):
        ind = RandomVariable.indicator(uniform4.event([ids[k]]), uniform4)
        assert op.apply(ind) == cond_exp(uniform4, a, ind)


def test_partition_from_another_space(uniform4):
    other = FiniteSpace.uniform(4, prefix="v")
    with pytest.raises(SpaceMismatchError):
        cond_exp(uniform4, Partition.trivial(other), RandomVariable(uniform4, [0] * 4))


def test_bayes_example(uniform4):
    ids = uniform4.ids
    a = Partition.from_atoms(uniform4, [[ids[0], ids[1]], [ids[2], ids[3]]])
    d = [Fraction(2, 3), Fraction(2, 3), Fraction(4, 3), Fraction(4, 3)]
    f = RandomVariable.indicator(uniform4.event([ids[0]]), uniform4)
    via = bayes_cond_exp(uniform4, a, d, f)
    assert via.values[0] == Fraction(1, 2)
    q = reweight(uniform4, d)
    assert list(via.values) == list(cond_exp(q, a.on(q), RandomVariable(q, f.values)).values)
    assert bayes_cond_exp(uniform4, a, [1] * 4, f) == cond_exp(uniform4, a, f)
    c = RandomVariable.constant(uniform4, Fraction(7, 3))
    assert list(bayes_cond_exp(uniform4, a, d, c).values) == [Fraction(7, 3)] * 4
    with pytest.raises(HypothesisViolation):
        bayes_cond_exp(uniform4, a, [0, 2, 1, 1], f)


@given(space_with(2), st.data())
def test_tower_conservation_idempotence_adjointness(data, draw):
    sp, a, b = data
    f = RandomVariable(sp, draw.draw(values_on(sp)))
    g = RandomVariable(sp, draw.draw(values_on(sp)))
    coarse = meet(a, b)
    assert is_subfield(coarse, a)
    pa = cond_exp(sp, a, f)
    assert cond_exp(sp, coarse, pa) == cond_exp(sp, coarse, f)
    assert pa.expectation() == f.expectation()
    assert cond_exp(sp, a, pa) == pa
    assert (g * pa).expectation() == (f * cond_exp(sp, a, g)).expectation()
    assert cond_exp(sp, a, RandomVariable.constant(sp, 1)) == RandomVariable.constant(sp, 1)


@given(space_with(1), st.data())
def test_jensen_for_absolute_value(data, draw):
    sp, a = data
    f = RandomVariable(sp, draw.draw(values_on(sp)))
    lhs = abs(cond_exp(sp, a, f))
    rhs = cond_exp(sp, a, abs(f))
    assert all(x <= y for i, (x, y) in enumerate(zip(lhs.values, rhs.values)) if not sp.is_null(i))


@given(space_with(1), st.data())
def test_bayes_identity(data, draw):
    sp, a = data
    raw = [Fraction(draw.draw(st.integers(6, 12)), 8) for _ in sp.ids]
    d = normalize_density(sp, raw)
    f = RandomVariable(sp, draw.draw(values_on(sp)))
    q = reweight(sp, d)
    dv = RandomVariable(sp, d)
    q_f = cond_exp(q, a.on(q), RandomVariable(q, f.values))
    p_d = cond_exp(sp, a, dv)
    p_df = cond_exp(sp, a, dv * f)
    for i in range(len(sp.ids)):
        if not sp.is_null(i):
            assert q_f.values[i] * p_d.values[i] == p_df.values[i]
