"""Exact conditional independence of finitely many sigma-fields, and the
preservation-in-the-limit experiment."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import prod

from .errors import BudgetExceeded, HypothesisViolation, SigmaLabError, SpaceMismatchError
from .lattice import Partition, generate

ZERO = Fraction(0)
TUPLE_LIMIT = 10**6


@dataclass
class IndependenceCertificate:
    family: list
    given: Partition
    holds: bool
    violating_tuple: tuple | None = None   # (atom indices, conditioning atom, lhs, rhs)
    checked: int = 0

    def describe(self):
        if self.holds:
            return "conditionally independent"
        atoms, c, lhs, rhs = self.violating_tuple
        return f"fails at atoms {atoms} given atom {c}: {lhs} != {rhs}"


def _promote(space, item):
    if isinstance(item, Partition):
        return item
    # an event (mask or Event) stands for the completed sigma-field it generates
    return generate(space, [item])


def is_cond_independent(space, family, given=None):
    """Atom-level check of ``P(a_1 & .. & a_k & c) P(c)**(k-1) = prod P(a_i & c)``.

    Events in ``family`` are promoted to the sigma-fields they generate.  The
    reported violation is the lexicographically least failing tuple
    ``(c, a_1, ..., a_k)``.
    """
    if not family:
        raise SigmaLabError("empty family")
    family = [_promote(space, f) for f in family]
    given = Partition.trivial(space) if given is None else given
    for part in family + [given]:
        if part.space is not space and part.space != space:
            raise SpaceMismatchError("all sigma-fields must live on one space")
    k = len(family)
    if prod(p.n_atoms for p in family) > TUPLE_LIMIT:
        raise BudgetExceeded(f"atom tuples exceed {TUPLE_LIMIT}")
    joint = {}
    marg = [dict() for _ in range(k)]
    cmass = [ZERO] * given.n_atoms
    for i, m in enumerate(space.masses):
        c = given.labels[i]
        if c < 0:
            continue
        key = tuple(p.labels[i] for p in family)
        joint[(c,) + key] = joint.get((c,) + key, ZERO) + m
        for j, a in enumerate(key):
            marg[j][(c, a)] = marg[j].get((c, a), ZERO) + m
        cmass[c] = cmass[c] + m
    checked = 0
    ok = True
    for c in range(given.n_atoms):
        pc = cmass[c]
        scale = pc ** (k - 1)
        support = [sorted(a for (cc, a) in marg[j] if cc == c) for j in range(k)]
        expected = prod(len(s) for s in support)
        present = 0
        for key, mass in joint.items():
            if key[0] != c:
                continue
            present += 1
            checked += 1
            rhs = prod((marg[j][(c, a)] for j, a in enumerate(key[1:])), start=Fraction(1))
            if mass * scale != rhs:
                ok = False
        if present != expected:
            ok = False
    if ok:
        return IndependenceCertificate(family, given, True, None, checked)
    # locate the least violating tuple
    for c in range(given.n_atoms):
        pc = cmass[c]
        scale = pc ** (k - 1)
        support = [sorted(a for (cc, a) in marg[j] if cc == c) for j in range(k)]
        for atoms in product(*support):
            lhs = joint.get((c,) + atoms, ZERO) * scale
            rhs = prod((marg[j][(c, a)] for j, a in enumerate(atoms)), start=Fraction(1))
            if lhs != rhs:
                return IndependenceCertificate(family, given, False, (atoms, c, lhs, rhs), checked)
    raise AssertionError("violation detected but not located")


def brute_cond_independent(space, family, given=None):
    """All-events oracle for two or more fields: ``P(E_1 & .. & c) P(c)**(k-1) = prod P(E_i & c)``."""
    family = [_promote(space, f) for f in family]
    given = Partition.trivial(space) if given is None else given
    k = len(family)
    events = [list(p.events()) for p in family]
    for c in given.atoms:
        pc = space.measure(c)
        for combo in product(*events):
            inter = c
            for e in combo:
                inter &= e
            lhs = space.measure(inter) * pc ** (k - 1)
            rhs = prod((space.measure(e & c) for e in combo), start=Fraction(1))
            if lhs != rhs:
                return False
    return True


# -- preservation experiment -------------------------------------------------------

@dataclass
class FamilyStage:
    n: int
    space: object
    given: Partition
    family: list


@dataclass
class ScenarioFamily:
    """Stages of a conditioning sequence C_n and a family B_n^i, with declared limits."""

    name: str
    stages: list
    given_limit: Partition
    family_limits: list
    meta: dict = field(default_factory=dict)


@dataclass
class PreservationReport:
    name: str
    stagewise: list
    stagewise_ok: bool
    given_verdict: str
    family_verdicts: list
    limit_certificate: IndependenceCertificate
    hypotheses_witnessed: bool
    conclusion_holds: bool
    given_series: list = field(default_factory=list)
    family_series: list = field(default_factory=list)


def preservation_experiment(fam, strict=False):
    """Witness hypotheses and conclusion of the preservation result at the horizon.

    Hypotheses: stage-wise conditional independence of the family given C_n,
    a strong-convergence verdict for C_n -> C_0 and weak-convergence verdicts
    for every B_n^i -> B_0^i.  Conclusion: the limits are conditionally
    independent given C_0.  With ``strict`` a stage-wise violation raises.
    """
    from .detect import Stage, stat_strong, stat_weak, verdict, TENDING

    stagewise = []
    for st in fam.stages:
        cert = is_cond_independent(st.space, st.family, st.given)
        stagewise.append((st.n, cert))
        if strict and not cert.holds:
            raise HypothesisViolation(f"stage {st.n}: {cert.describe()}")
    ok = all(c.holds for _, c in stagewise)
    given_series = []
    family_series = [[] for _ in fam.family_limits]
    for st in fam.stages:
        gl = fam.given_limit.on(st.space) if fam.given_limit.space != st.space else fam.given_limit
        given_series.append(stat_strong(Stage(st.n, st.space, st.given, gl)))
        for i, (part, lim) in enumerate(zip(st.family, fam.family_limits)):
            lim = lim.on(st.space) if lim.space != st.space else lim
            family_series[i].append(stat_weak(Stage(st.n, st.space, part, lim))[0])
    gv = verdict(given_series)
    fv = [verdict(s) for s in family_series]
    last = fam.stages[-1].space
    limit_cert = is_cond_independent(last, [lim.on(last) if lim.space != last else lim
                                            for lim in fam.family_limits],
                                     fam.given_limit.on(last) if fam.given_limit.space != last
                                     else fam.given_limit)
    hyp = ok and gv == TENDING and all(v == TENDING for v in fv)
    return PreservationReport(fam.name, stagewise, ok, gv, fv, limit_cert, hyp, limit_cert.holds,
                              given_series, family_series)
