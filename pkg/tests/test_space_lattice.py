from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from sigma_lab import FiniteSpace, Partition, generate, is_subfield, join, make_space, meet, reweight
from sigma_lab.errors import InvalidSpaceError, SpaceMismatchError
from sigma_lab.lattice import (brute_events, brute_join_events, brute_meet, windowed_liminf,
                               windowed_limsup)
from sigma_lab.space import normalize_density

from conftest import space_with, spaces


def pairs(sp):
    ids = sp.ids
    a = Partition.from_atoms(sp, [[ids[0], ids[1]], [ids[2], ids[3]]])
    b = Partition.from_atoms(sp, [[ids[0], ids[2]], [ids[1], ids[3]]])
    return a, b


# -- spaces -------------------------------------------------------------------------

def test_bernoulli_product_masses():
    eps = Fraction(1, 4)
    sp = make_space([("00", (1 - eps) / 2), ("01", eps / 2), ("10", (1 - eps) / 2), ("11", eps / 2)])
    assert sp.masses == (Fraction(3, 8), Fraction(1, 8), Fraction(3, 8), Fraction(1, 8))


def test_null_outcome_accepted():
    sp = FiniteSpace(["a", "b", "c"], [Fraction(1, 2), Fraction(1, 2), 0])
    assert sp.is_null(2) and not sp.is_null(0)


@pytest.mark.parametrize("ids,masses", [
    (["a", "b"], [Fraction(1, 2), Fraction(1, 3)]),
    (["a", "b"], [Fraction(3, 2), Fraction(-1, 2)]),
    (["a", "a"], [Fraction(1, 2), Fraction(1, 2)]),
])
def test_invalid_spaces(ids, masses):
    with pytest.raises(InvalidSpaceError):
        FiniteSpace(ids, masses)


def test_reweight_examples(uniform4):
    assert reweight(uniform4, [1] * 4) == uniform4
    q = reweight(uniform4, [Fraction(2, 3), Fraction(2, 3), Fraction(4, 3), Fraction(4, 3)])
    assert q.masses == (Fraction(1, 6), Fraction(1, 6), Fraction(1, 3), Fraction(1, 3))
    with pytest.raises(InvalidSpaceError):
        reweight(uniform4, [0, Fraction(4, 3), Fraction(4, 3), Fraction(4, 3)])
    with pytest.raises(InvalidSpaceError):
        reweight(uniform4, [2, 2, 2, 2])


@given(spaces(), st.lists(st.integers(6, 12), min_size=6, max_size=6))
def test_reweight_round_trip(sp, raw):
    d = normalize_density(sp, [Fraction(x, 8) for x in raw[:len(sp.ids)]])
    q = reweight(sp, d)
    assert q.same_null_class(sp)
    back = normalize_density(q, [1 / x for x in d])
    assert reweight(q, back).masses == sp.masses


@given(spaces(), st.data())
def test_symmetric_difference_measure(sp, data):
    n = len(sp.ids)
    e = data.draw(st.integers(0, 2**n - 1))
    f = data.draw(st.integers(0, 2**n - 1))
    direct = sum((sp.masses[i] for i in range(n) if ((e >> i) & 1) != ((f >> i) & 1)), Fraction(0))
    assert sp.measure(e ^ f) == direct
    assert sp.measure(e ^ f) == sp.measure(e) + sp.measure(f) - 2 * sp.measure(e & f)


# -- lattice ----------------------------------------------------------------------------

def test_crossed_pairs(uniform4):
    a, b = pairs(uniform4)
    assert join(a, b) == Partition.discrete(uniform4)
    assert brute_events(join(a, b)) == brute_join_events(a, b)
    assert meet(a, b) == Partition.trivial(uniform4) == brute_meet(a, b)
    assert not is_subfield(a, b)
    assert is_subfield(a, Partition.discrete(uniform4))
    assert is_subfield(Partition.trivial(uniform4), a)


def test_trivial_and_idempotent(uniform4):
    a, _ = pairs(uniform4)
    t = Partition.trivial(uniform4)
    assert join(a, t) == a and meet(a, t) == t
    assert join(a, a) == a and meet(a, a) == a


def test_different_spaces_rejected(uniform4):
    other = FiniteSpace.uniform(4, prefix="v")
    with pytest.raises(SpaceMismatchError):
        join(Partition.trivial(uniform4), Partition.trivial(other))


def test_null_generators_do_not_change_completion():
    sp = FiniteSpace(["a", "b", "c", "d"], [Fraction(1, 2), Fraction(1, 2), 0, 0])
    base = generate(sp, [sp.event(["a"])])
    assert generate(sp, [sp.event(["a"]), sp.event(["c"])]) == base
    assert generate(sp, [sp.event(["a", "d"])]) == base


def test_windowed_limits(uniform4):
    a, b = pairs(uniform4)
    seq = [a, b] * 4
    # a one-stage final window just returns the last stage
    assert windowed_liminf(seq, 1)[0] == b
    lo, _ = windowed_liminf(seq, 1, tail=2)
    hi, _ = windowed_limsup(seq, 1, tail=2)
    assert lo == Partition.trivial(uniform4)
    assert hi == Partition.discrete(uniform4)
    lo, stable = windowed_liminf([a] * 5, 2)
    assert lo == a and stable


@given(space_with(3, max_size=8))
def test_lattice_laws(data):
    sp, a, b, c = data
    assert join(a, b) == join(b, a) and meet(a, b) == meet(b, a)
    assert join(join(a, b), c) == join(a, join(b, c))
    assert meet(meet(a, b), c) == meet(a, meet(b, c))
    assert join(a, meet(a, b)) == a and meet(a, join(a, b)) == a


@given(space_with(2, max_size=5))
def test_meet_and_join_match_event_oracles(data):
    sp, a, b = data
    m = meet(a, b)
    assert m == brute_meet(a, b)
    assert brute_events(m) == brute_events(a) & brute_events(b)
    assert brute_events(join(a, b)) == brute_join_events(a, b)
    # the meet is the coarsest common refinement target
    assert is_subfield(m, a) and is_subfield(m, b)


@given(space_with(2, max_size=6), st.integers(1, 4))
def test_liminf_inside_limsup(data, n):
    sp, a, b = data
    seq = [a, b, a, join(a, b), b]
    lo, _ = windowed_liminf(seq, min(n, len(seq)))
    hi, _ = windowed_limsup(seq, min(n, len(seq)))
    assert is_subfield(lo, hi)


@given(space_with(1, max_size=6), st.permutations(range(6)))
def test_relabeling_preserves_structure(data, perm):
    sp, a = data
    n = len(sp.ids)
    order = [i for i in perm if i < n]
    sp2 = FiniteSpace([sp.ids[i] for i in order], [sp.masses[i] for i in order])
    a2 = Partition(sp2, [a.labels[i] if a.labels[i] >= 0 else None for i in order])
    assert sorted(a.atom_masses) == sorted(a2.atom_masses)
