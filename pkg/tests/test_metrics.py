from fractions import Fraction
import random

import pytest
from hypothesis import given, strategies as st

from sigma_lab import FiniteSpace, Partition, is_subfield, join
from sigma_lab.errors import BudgetExceeded, SpaceMismatchError
from sigma_lab import metrics
from sigma_lab.metrics import (_star, brute_hausdorff, brute_inf_symdiff, brute_rho, hausdorff, inf_symdiff,
                               rho)
from sigma_lab.opnorm import landers_check, sandwich_check

from conftest import space_with


def crossed(sp):
    ids = sp.ids
    return (Partition.from_atoms(sp, [[ids[0], ids[1]], [ids[2], ids[3]]]),
            Partition.from_atoms(sp, [[ids[0], ids[2]], [ids[1], ids[3]]]))


def test_crossed_pair_distances(uniform4):
    a, b = crossed(uniform4)
    rep = hausdorff(a, b)
    assert rep.rho_ab == rep.rho_ba == Fraction(1, 2)
    assert rep.D == 1 and rep.delta == Fraction(1, 2)
    assert rep.exact and rep.label == "exact"
    assert uniform4.measure(rep.witness_a.mask) == Fraction(1, 2)


def test_distance_to_itself_and_trivial(uniform4):
    a, _ = crossed(uniform4)
    assert hausdorff(a, a).D == 0
    t = Partition.trivial(uniform4)
    # an a-atom of mass 1/2 is at distance 1/2 from both trivial events
    assert rho(a, t).value == Fraction(1, 2)
    assert rho(t, a).value == 0


def test_inf_symdiff_examples(uniform4):
    a, _ = crossed(uniform4)
    ids = uniform4.ids
    e = uniform4.event([ids[0]])
    v, best = inf_symdiff(e, a)
    assert v == Fraction(1, 4) and best.mask == 0
    # a tie inside an atom keeps the atom out
    v, best = inf_symdiff(uniform4.event([ids[0], ids[2]]), a)
    assert v == Fraction(1, 2) and best.mask == 0
    v, best = inf_symdiff(uniform4.event([ids[0], ids[1], ids[2]]), a)
    assert v == Fraction(1, 4) and best.mask == a.atoms[0]


def test_space_mismatch(uniform4):
    other = FiniteSpace.uniform(4, prefix="v")
    with pytest.raises(SpaceMismatchError):
        rho(Partition.trivial(uniform4), Partition.discrete(other))


def test_budget_and_lower_bound_label(monkeypatch):
    n = 12
    sp = FiniteSpace.uniform(n)
    a = Partition(sp, [i // 2 for i in range(n)])
    b = Partition(sp, [i % 2 if i < n - 1 else 2 for i in range(n)])
    exact = hausdorff(a, b)
    monkeypatch.setenv("SIGMA_LAB_BUDGET", "16")   # four atoms searched exactly
    with pytest.raises(BudgetExceeded, match="approx"):
        rho(a, b)
    approx = hausdorff(a, b, approx=True)
    assert approx.label == "LOWER BOUND" and not approx.exact
    assert approx.rho_ab <= exact.rho_ab


def test_star_bitset_matches_dict(monkeypatch):
    rng = random.Random(7)
    for _ in range(300):
        masses = [Fraction(rng.randint(0, 9), rng.choice([4, 6, 12])) for _ in range(rng.randint(1, 7))]
        total = sum(masses, Fraction(0))
        fast = _star(masses, total)
        # a negative limit forces the dictionary path used for quadratic-field masses
        monkeypatch.setattr(metrics, "BITSET_LIMIT", -1)
        slow = _star(masses, total)
        monkeypatch.undo()
        assert fast == slow


@given(space_with(2, max_size=6))
def test_matches_brute_force(data):
    sp, a, b = data
    rep = hausdorff(a, b)
    assert (rep.rho_ab, rep.rho_ba) == brute_hausdorff(a, b)
    # the witness realizes the value
    assert inf_symdiff(rep.witness_a, b)[0] == rep.rho_ab


@given(space_with(2, max_size=6), st.data())
def test_inf_symdiff_matches_brute(data, draw):
    sp, a, _ = data
    e = draw.draw(st.integers(0, 2 ** len(sp.ids) - 1))
    v, best = inf_symdiff(e, a)
    assert v == brute_inf_symdiff(e, a)
    assert a.is_measurable(best.mask) and sp.measure(e ^ best.mask) == v


@given(space_with(3, max_size=6))
def test_metric_axioms(data):
    sp, a, b, c = data
    dab = hausdorff(a, b)
    assert dab.delta <= dab.D <= 2 * dab.delta
    assert dab.D == hausdorff(b, a).D
    assert hausdorff(a, c).D <= dab.D + hausdorff(b, c).D
    assert (dab.D == 0) == (a == b)


@given(space_with(2, max_size=6))
def test_landers_inequality(data):
    _, a, b = data
    holds, left, right = landers_check(a, b)
    assert holds and left <= right


@given(space_with(1, max_size=6), st.data())
def test_sandwich(data, draw):
    sp, a = data
    e = draw.draw(st.integers(0, 2 ** len(sp.ids) - 1))
    holds, inf, mid = sandwich_check(sp, e, a)
    assert holds and inf <= 2 * mid <= 4 * inf


@given(space_with(2, max_size=6))
def test_nested_distance_is_one_sided(data):
    _, a, b = data
    big = join(a, b)
    assert is_subfield(a, big)
    assert rho(a, big).value == 0
    assert hausdorff(a, big).delta == brute_rho(big, a)
