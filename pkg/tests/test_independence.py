from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from sigma_lab import FiniteSpace, Partition
from sigma_lab.detect import NOT_TENDING, TENDING
from sigma_lab.errors import HypothesisViolation, SigmaLabError, SpaceMismatchError
from sigma_lab.gallery import dyadic_product_family, dyadic_weak_family, product_bits_family
from sigma_lab.independence import brute_cond_independent, is_cond_independent, preservation_experiment

from conftest import partitions_of, space_with, spaces


def coins(sp):
    ids = sp.ids
    return (Partition.from_atoms(sp, [[ids[0], ids[1]], [ids[2], ids[3]]]),
            Partition.from_atoms(sp, [[ids[0], ids[2]], [ids[1], ids[3]]]))


def test_fair_coins(uniform4):
    a, b = coins(uniform4)
    assert is_cond_independent(uniform4, [a, b]).holds
    # the parity of the two coins is pairwise independent of each, but not jointly
    ids = uniform4.ids
    parity = Partition.from_atoms(uniform4, [[ids[0], ids[3]], [ids[1], ids[2]]])
    assert is_cond_independent(uniform4, [a, parity]).holds
    cert = is_cond_independent(uniform4, [a, b, parity])
    assert not cert.holds and "fails at atoms" in cert.describe()


def test_field_with_itself(uniform4):
    a, _ = coins(uniform4)
    cert = is_cond_independent(uniform4, [a, a])
    assert not cert.holds
    atoms, c, lhs, rhs = cert.violating_tuple
    # least failing tuple: P(a_0) = 1/2 against P(a_0)**2 = 1/4
    assert atoms == (0, 0) and c == 0 and lhs == Fraction(1, 2) and rhs == Fraction(1, 4)
    assert is_cond_independent(uniform4, [a, a], given=a).holds
    t = Partition.trivial(uniform4)
    assert is_cond_independent(uniform4, [t, t]).holds


def test_events_are_promoted(uniform4):
    ids = uniform4.ids
    e, f = uniform4.event(ids[:2]), uniform4.event([ids[0], ids[2]])
    assert is_cond_independent(uniform4, [e, f]).holds
    assert not is_cond_independent(uniform4, [e, uniform4.event([ids[0]])]).holds


def test_errors(uniform4):
    with pytest.raises(SigmaLabError):
        is_cond_independent(uniform4, [])
    other = FiniteSpace.uniform(4, prefix="v")
    with pytest.raises(SpaceMismatchError):
        is_cond_independent(uniform4, [Partition.trivial(other)])


@given(space_with(3, max_size=6, max_atoms=3))
def test_matches_event_oracle(data):
    sp, a, b, c = data
    assert is_cond_independent(sp, [a, b], c).holds == brute_cond_independent(sp, [a, b], c)
    assert is_cond_independent(sp, [a, b, c]).holds == brute_cond_independent(sp, [a, b, c])


@given(space_with(2, max_size=6))
def test_trivial_condition_is_plain_independence(data):
    sp, a, b = data
    assert is_cond_independent(sp, [a, b]).holds == \
        is_cond_independent(sp, [a, b], Partition.trivial(sp)).holds
    # conditioning on the discrete field makes everything independent
    assert is_cond_independent(sp, [a, b], Partition.discrete(sp)).holds


@given(spaces(min_size=2, max_size=6), st.data())
def test_relabeling_and_null_outcomes(sp, data):
    a, b = data.draw(partitions_of(sp)), data.draw(partitions_of(sp))
    perm = data.draw(st.permutations(range(len(sp.ids))))
    sp2 = FiniteSpace([sp.ids[i] for i in perm] + ["ghost"], [sp.masses[i] for i in perm] + [0])

    def moved(p):
        return Partition(sp2, [p.labels[i] if p.labels[i] >= 0 else None for i in perm] + [0])

    assert is_cond_independent(sp, [a, b]).holds == is_cond_independent(sp2, [moved(a), moved(b)]).holds


def test_product_bits_family():
    rep = preservation_experiment(product_bits_family())
    assert rep.stagewise_ok and rep.given_verdict == TENDING
    assert rep.hypotheses_witnessed and rep.conclusion_holds


def test_dyadic_product_family_small_horizon():
    rep = preservation_experiment(dyadic_product_family(4))
    assert rep.stagewise_ok and rep.hypotheses_witnessed and rep.conclusion_holds


def test_dyadic_weak_family():
    rep = preservation_experiment(dyadic_weak_family(8))
    assert rep.stagewise_ok
    assert rep.given_verdict == NOT_TENDING and not rep.hypotheses_witnessed
    assert not rep.conclusion_holds


def test_strict_mode_raises(uniform4):
    from sigma_lab.independence import FamilyStage, ScenarioFamily
    a, _ = coins(uniform4)
    t = Partition.trivial(uniform4)
    fam = ScenarioFamily("self", [FamilyStage(1, uniform4, t, [a, a])], t, [a, a])
    assert not preservation_experiment(fam).stagewise_ok
    with pytest.raises(HypothesisViolation):
        preservation_experiment(fam, strict=True)
