from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings, strategies as st

from sigma_lab import FiniteSpace, Partition

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@st.composite
def spaces(draw, min_size=1, max_size=6, nulls=True):
    n = draw(st.integers(min_size, max_size))
    lo = 0 if nulls else 1
    nums = draw(st.lists(st.integers(lo, 9), min_size=n, max_size=n))
    if not any(nums):
        nums[0] = 1
    total = sum(nums)
    return FiniteSpace([f"w{k + 1}" for k in range(n)], [Fraction(x, total) for x in nums])


@st.composite
def partitions_of(draw, space, max_atoms=4):
    k = draw(st.integers(1, max_atoms))
    labels = draw(st.lists(st.integers(0, k - 1), min_size=len(space.ids), max_size=len(space.ids)))
    return Partition(space, labels)


@st.composite
def space_with(draw, count=2, max_size=6, max_atoms=4, nulls=True):
    sp = draw(spaces(max_size=max_size, nulls=nulls))
    parts = [draw(partitions_of(sp, max_atoms)) for _ in range(count)]
    return (sp, *parts)


@st.composite
def values_on(draw, space, bound=5):
    return [Fraction(draw(st.integers(-bound * 4, bound * 4)), draw(st.integers(1, 4)))
            for _ in space.ids]


@pytest.fixture
def uniform4():
    return FiniteSpace.uniform(4)


# -- acceptance reporting --------------------------------------------------------------
# test_acceptance.py records one entry per sub-claim; the summary prints one line per
# criterion (with its pinned tolerance) followed by the sub-claims.

ACCEPTANCE = []


def record(criterion, claim, ok, tolerance, detail=""):
    ACCEPTANCE.append((criterion, claim, bool(ok), tolerance, detail))
    print(f"criterion {criterion} {'PASS' if ok else 'FAIL'} {claim} [tol {tolerance}] {detail}")
    return ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    by = {}
    for entry in ACCEPTANCE:
        by.setdefault(entry[0], []).append(entry)
    for crit in sorted(by):
        rows = by[crit]
        bad = [r for r in rows if not r[2]]
        tols = "; ".join(sorted({str(r[3]) for r in rows}))
        tr.write_line(f"criterion {crit}: {'PASS' if not bad else 'FAIL'} "
                      f"({len(rows) - len(bad)}/{len(rows)} sub-claims; tolerance {tols})")
        for _, claim, ok, tol, detail in rows:
            tr.write_line(f"    {'PASS' if ok else 'FAIL'} {claim}" + (f": {detail}" if detail else ""))
