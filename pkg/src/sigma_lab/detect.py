"""Per-stage statistics for sequences of sigma-fields and finite-horizon verdicts.

A scenario materializes, at horizon N, stages n = 1..N.  Each stage holds a
finite space (shared by all stages for most scenarios), the stage partition,
the candidate limit and optional named test events.  Every statistic is a
nonnegative exact number (or a certified enclosure for operator norms) that
vanishes when the stage equals the limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .conditioning import Contingency, RandomVariable, cond_exp
from .errors import BudgetExceeded, HypothesisViolation, SigmaLabError, enumeration_budget
from .lattice import Partition, is_subfield, join_all, meet_all, windowed_liminf, windowed_limsup
from .metrics import hausdorff, inf_symdiff
from .opnorm import INF, lp_ratio, op_norm, parse_exponent
from .scalar import CReal, compare
from .space import Event, iter_bits, reweight

ZERO = Fraction(0)

MODES = ("WC", "SC", "HC", "ONC", "STC", "ASC", "OC", "MC")
TAILS = {"none": "none", "constant": "constant", "inc": "inc", "dec": "dec",
         "eventually-constant": "constant", "monotone-increasing": "inc",
         "monotone-decreasing": "dec"}

TENDING, NOT_TENDING, INCONCLUSIVE = "tending-to-zero", "not-tending", "inconclusive"


@dataclass
class Stage:
    n: int
    space: object
    part: Partition
    limit: Partition
    events: dict = field(default_factory=dict)  # name -> mask

    def reweighted(self, density):
        """The same stage under ``Q = density * P`` (density indexed like the outcomes)."""
        q = reweight(self.space, density)
        return Stage(self.n, q, self.part.on(q), self.limit.on(q), dict(self.events))


@dataclass
class Materialization:
    name: str
    horizon: int
    stages: list
    tail: str = "none"
    common_space: bool = True
    meta: dict = field(default_factory=dict)

    def stage(self, n):
        for s in self.stages:
            if s.n == n:
                return s
        raise KeyError(n)


class Scenario:
    """A finitely presented sequence of sigma-fields; subclasses build materializations."""

    name = "scenario"
    tail = "none"
    projective = True  # atom masses agree across horizons
    min_horizon = 1

    def materialize(self, horizon):
        raise NotImplementedError

    def params(self):
        return {}


class ExplicitScenario(Scenario):
    """Stages listed outright on one space."""

    def __init__(self, space, parts, limit, events=None, tail="none", name="explicit"):
        self.space = space
        self.parts = list(parts)
        self.limit = limit
        self.events = dict(events or {})
        self.tail = TAILS[tail]
        self.name = name

    def materialize(self, horizon=None):
        horizon = len(self.parts) if horizon is None else min(horizon, len(self.parts))
        stages = [Stage(n + 1, self.space, self.parts[n], self.limit, self.events)
                  for n in range(horizon)]
        return Materialization(self.name, horizon, stages, self.tail, True)


# -- statistics ---------------------------------------------------------------

def _cells(stage):
    return Contingency(stage.part, stage.limit)


def stat_weak(stage, exhaustive=False):
    """``(max_A E|P_n 1_A - 1_A|, max_A inf_symdiff(A, B_n))`` over atoms A of the limit.

    With ``exhaustive`` the maxima run over every event of the limit field.
    """
    part, limit = stage.part, stage.limit
    if exhaustive:
        if (1 << limit.n_atoms) > enumeration_budget():
            raise BudgetExceeded("exhaustive weak statistic over budget")
        selections = range(1, 1 << limit.n_atoms)
    else:
        selections = [1 << j for j in range(limit.n_atoms)]
    t = Contingency(part, limit)
    by_limit = t.cells_of_b()
    best_l1 = ZERO
    best_inf = ZERO
    for sel in selections:
        # E|P_n 1_A - 1_A| = sum over B_n-atoms a of 2 m(a&A)(m(a) - m(a&A)) / m(a)
        inside = {}
        for j in iter_bits(sel):
            for k in by_limit[j]:
                ia = t.cell_a[k]
                inside[ia] = inside.get(ia, ZERO) + t.mass[k]
        l1 = ZERO
        inf = ZERO
        for ia, x in inside.items():
            w = part.atom_masses[ia]
            l1 = l1 + 2 * x * (w - x) / w
            inf = inf + min(x, w - x)
        if l1 > best_l1:
            best_l1 = l1
        if inf > best_inf:
            best_inf = inf
    return best_l1, best_inf


def stat_strong(stage):
    """``sum_w E|P_n 1_w - P_0 1_w|`` over ambient outcomes w."""
    t = _cells(stage)
    total = ZERO
    for k in range(len(t)):
        total = total + t.mass[k] * t.spike_l1(k)
    return total


def stat_hausdorff(stage, approx=False):
    return hausdorff(stage.part, stage.limit, approx).D


def stat_opnorm(stage, p, q, approx=False):
    return op_norm(stage.space, stage.part, stage.limit, p, q, approx)


def _event_gap_max(stage, mask):
    f = RandomVariable.indicator(mask, stage.space)
    d = cond_exp(stage.space, stage.part, f) - cond_exp(stage.space, stage.limit, f)
    sup = stage.space.support
    return max((abs(v) for i, v in enumerate(d.values) if (sup >> i) & 1), default=ZERO)


def stat_as(stage):
    """Pointwise sup of ``|P_n f - P_0 f|`` over outcome indicators and declared events."""
    t = _cells(stage)
    space = stage.space
    best = ZERO
    for k in range(len(t)):
        ma, mb, m = t.row[t.cell_a[k]], t.col[t.cell_b[k]], t.mass[k]
        top = max(space.masses[i] for i in t.members[k])
        vals = [abs(1 / ma - 1 / mb)]
        if ma > m:
            vals.append(1 / ma)
        if mb > m:
            vals.append(1 / mb)
        v = top * max(vals)
        if v > best:
            best = v
    for mask in stage.events.values():
        v = _event_gap_max(stage, mask)
        if v > best:
            best = v
    return best


def stat_orthogonal(stage):
    """``max |E[(1_E - P_0 1_E) g]|`` over B_n-events E and test functions g.

    For fixed g the quantity is additive over the B_n-atoms in E, so the best
    E collects the atoms of one sign; no enumeration is needed.
    """
    t = _cells(stage)
    space, part = stage.space, stage.part
    best = ZERO
    # outcome indicators: only the atom holding the outcome contributes positively
    for k in range(len(t)):
        mb, m = t.col[t.cell_b[k]], t.mass[k]
        top = max(space.masses[i] for i in t.members[k])
        v = top * (mb - m) / mb
        if v > best:
            best = v
    for mask in stage.events.values():
        g = RandomVariable.indicator(mask, space)
        h = g - cond_exp(space, stage.limit, g)
        pos = neg = ZERO
        for atom in part.atoms:
            c = sum((space.masses[i] * h.values[i] for i in iter_bits(atom)), ZERO)
            if c > 0:
                pos = pos + c
            else:
                neg = neg - c
        v = max(pos, neg)
        if v > best:
            best = v
    return best


def per_event_strong(stage, mask):
    f = RandomVariable.indicator(mask, stage.space)
    d = cond_exp(stage.space, stage.part, f) - cond_exp(stage.space, stage.limit, f)
    return abs(d).expectation()


def stc_tail(tail, horizon, n):
    return 1 if tail in ("constant", "inc", "dec") else max(1, (horizon - n + 1) // 2)


@dataclass
class STCResult:
    n: int
    liminf: Partition
    limsup: Partition
    liminf_is_limit: bool
    limsup_is_limit: bool
    stabilized: bool
    statistic: object


def stat_stc(mat, n):
    """Windowed liminf/limsup at stage n and their distance to the limit."""
    if not mat.common_space:
        raise HypothesisViolation("set-theoretic limits need one common space")
    parts = [s.part for s in mat.stages]
    first = mat.stages[0].n
    idx = n - first + 1
    tail = stc_tail(mat.tail, len(parts), idx)
    lo, st1 = windowed_liminf(parts, idx, tail)
    hi, st2 = windowed_limsup(parts, idx, tail)
    limit = mat.stage(n).limit
    stat = hausdorff(lo, limit).D + hausdorff(hi, limit).D
    return STCResult(n, lo, hi, lo == limit, hi == limit, st1 and st2, stat)


@dataclass
class MonotoneResult:
    increasing: bool
    decreasing: bool
    declared: str
    limit_identified: Partition | None
    matches_limit: bool | None


def check_monotone(mat):
    """Refinement flags of the stage chain; under a monotone declaration, compare the limit."""
    if not mat.common_space:
        return MonotoneResult(False, False, mat.tail, None, None)
    parts = [s.part for s in mat.stages]
    inc = all(is_subfield(x, y) for x, y in zip(parts, parts[1:]))
    dec = all(is_subfield(y, x) for x, y in zip(parts, parts[1:]))
    ident = None
    match = None
    limit = mat.stages[-1].limit
    if mat.tail == "inc":
        ident = join_all(parts)
        match = ident == limit
    elif mat.tail == "dec":
        ident = meet_all(parts)
        match = ident == limit
    return MonotoneResult(inc, dec, mat.tail, ident, match)


# -- verdicts ------------------------------------------------------------------

def _as_float(v):
    return float(v)


def verdict(series):
    """Finite-horizon classification of a nonnegative series.

    Over the last half H of the series: tending-to-zero when H vanishes, or
    when H is non-increasing and its last value is at most half its first;
    not-tending when min(H) > max(H)/2 > 0; otherwise inconclusive.
    """
    vals = [_as_float(v) for v in series]
    if not vals:
        return INCONCLUSIVE
    h = vals[len(vals) // 2:] if len(vals) > 1 else vals
    if all(v == 0 for v in h):
        return TENDING
    if all(x >= y for x, y in zip(h, h[1:])) and h[-1] <= h[0] / 2:
        return TENDING
    if min(h) > 0 and min(h) > max(h) / 2:
        return NOT_TENDING
    return INCONCLUSIVE


# -- reports ------------------------------------------------------------------------

@dataclass
class StatPoint:
    n: int
    mode: str
    value: object        # exact scalar or CReal
    exact: bool

    @property
    def as_float(self):
        return float(self.value)


@dataclass
class ConvergenceReport:
    scenario: str
    horizon: int
    modes: list
    p: object
    q: object
    series: dict = field(default_factory=dict)        # mode -> [StatPoint]
    verdicts: dict = field(default_factory=dict)
    weak_bp: list = field(default_factory=list)        # B_P membership statistic
    stc: list = field(default_factory=list)
    monotone: MonotoneResult | None = None
    notes: list = field(default_factory=list)

    def values(self, mode):
        return [pt.value for pt in self.series.get(mode, [])]

    def floats(self, mode):
        return [float(pt.value) for pt in self.series.get(mode, [])]


def parse_modes(modes):
    if isinstance(modes, str):
        modes = [m.strip().upper() for m in modes.split(",") if m.strip()]
    bad = [m for m in modes if m not in MODES]
    if bad:
        raise SigmaLabError(f"unknown modes {bad}; choose from {','.join(MODES)}")
    return list(modes)


def detect(mat, modes=("WC", "SC", "HC", "ONC", "ASC", "OC"), p=2, q=2, approx=False,
           stages=None):
    """Run the requested statistics on every stage (or the listed stage numbers)."""
    modes = parse_modes(modes)
    p, q = parse_exponent(p), parse_exponent(q)
    report = ConvergenceReport(mat.name, mat.horizon, modes, p, q)
    chosen = [s for s in mat.stages if stages is None or s.n in stages]
    for mode in modes:
        if mode == "MC":
            continue
        if mode == "STC" and not mat.common_space:
            report.notes.append("STC skipped: stages live on separate spaces")
            continue
        report.series[mode] = []
    for st in chosen:
        for mode in report.series:
            if mode == "WC":
                l1, bp = stat_weak(st)
                report.series[mode].append(StatPoint(st.n, mode, l1, True))
                report.weak_bp.append(StatPoint(st.n, "WC-BP", bp, True))
            elif mode == "SC":
                report.series[mode].append(StatPoint(st.n, mode, stat_strong(st), True))
            elif mode == "HC":
                report.series[mode].append(StatPoint(st.n, mode, stat_hausdorff(st, approx), True))
            elif mode == "ONC":
                r = stat_opnorm(st, p, q, approx)
                value = r.value.exact if r.exact and r.value.is_exact else r.value
                report.series[mode].append(StatPoint(st.n, mode, value, r.exact))
            elif mode == "ASC":
                report.series[mode].append(StatPoint(st.n, mode, stat_as(st), True))
            elif mode == "OC":
                report.series[mode].append(StatPoint(st.n, mode, stat_orthogonal(st), True))
            elif mode == "STC":
                res = stat_stc(mat, st.n)
                report.stc.append(res)
                report.series[mode].append(StatPoint(st.n, mode, res.statistic, True))
    for mode, pts in report.series.items():
        report.verdicts[mode] = verdict([pt.value for pt in pts])
    if "MC" in modes:
        report.monotone = check_monotone(mat)
        if not mat.common_space:
            report.verdicts["MC"] = "n/a"
        elif report.monotone.matches_limit is None:
            report.verdicts["MC"] = "not-monotone" if not (report.monotone.increasing or
                                                           report.monotone.decreasing) else "monotone"
        else:
            report.verdicts["MC"] = "limit-matches" if report.monotone.matches_limit else "limit-differs"
    return report


# -- stage-wise consistency chains -----------------------------------------------------------

@dataclass
class ChainCheck:
    n: int
    holds: bool
    failures: list


def _balanced_signs(space, mine, other):
    cells = {}
    for i, (x, y) in enumerate(zip(mine.labels, other.labels)):
        if x is not None and x >= 0 and not space.is_null(i):
            cells.setdefault(x, {}).setdefault(y, []).append(i)
    vals = [Fraction(0)] * len(space.ids)
    for groups in cells.values():
        weighted = sorted(((sum(space.masses[i] for i in g), g) for g in groups.values()),
                          key=lambda t: t[0], reverse=True)
        plus = minus = Fraction(0)
        for w, g in weighted:
            sgn = 1 if plus <= minus else -1
            if sgn > 0:
                plus += w
            else:
                minus += w
            for i in g:
                vals[i] = Fraction(sgn)
    return RandomVariable(space, vals)


def _atom_sign_lower_bound(space, part, limit, p, q):
    """Best ratio over a few structured test functions.

    Candidates: ``2 * 1_A - 1`` and ``1_A - P_other 1_A`` for atoms ``A`` of either
    field, plus a sign function constant on the meet cells whose mass is greedily
    balanced inside each atom of one field.
    """
    best = CReal.of(0)
    for mine, other in ((part, limit), (limit, part)):
        f = _balanced_signs(space, mine, other)
        if any(f.values):
            r = lp_ratio(space, part, limit, f, p, q)
            if compare(r, best) == 1:
                best = r
        for mask in mine.atoms:
            ind = RandomVariable.indicator(mask, space)
            for f in (2 * ind - 1, ind - cond_exp(space, other, ind)):
                if not any(f.values):
                    continue
                r = lp_ratio(space, part, limit, f, p, q)
                if compare(r, best) == 1:
                    best = r
    return best


def stage_inequality_chain(stage, p=INF, q=1):
    """Literal stage-wise inequalities linking the statistics.

    For each limit atom A:
    ``E|P_n 1_A - 1_A| <= 2 inf_symdiff(A, B_n) <= 2 D(B_n, B_0) + 2 inf_symdiff(A, B_0)``;
    plus ``stat_strong >= stat_weak``, ``D <= 2 * 2**q ||P_n - P_0||**q`` and
    ``stat_as >= E|P_n f - P_0 f|`` for every test function.
    """
    failures = []
    space, part, limit = stage.space, stage.part, stage.limit
    D = stat_hausdorff(stage)
    for mask in limit.atoms:
        ind = RandomVariable.indicator(mask, space)
        l1 = abs(cond_exp(space, part, ind) - ind).expectation()
        i_n, _ = inf_symdiff(mask, part)
        i_0, _ = inf_symdiff(mask, limit)
        if not l1 <= 2 * i_n:
            failures.append(("l1<=2inf", mask, l1, i_n))
        if not 2 * i_n <= 2 * D + 2 * i_0:
            failures.append(("2inf<=2D", mask, i_n, D))
    weak, _ = stat_weak(stage)
    strong = stat_strong(stage)
    if not strong >= weak:
        failures.append(("strong>=weak", None, strong, weak))
    p, q = parse_exponent(p), parse_exponent(q)
    try:
        norm = op_norm(space, part, limit, p, q)
        lower = norm.value if norm.exact else CReal.of(norm.lower)
    except BudgetExceeded:
        # a certified lower bound on the right-hand side still proves the inequality
        lower = _atom_sign_lower_bound(space, part, limit, p, q)
    right = CReal.of(2) * (lower if q == INF else CReal.of(2).pow(q) * lower.pow(q))
    c = compare(D, right)
    if c is None or c > 0:
        failures.append(("D<=2*2^q*norm^q", None, D, right))
    asc = stat_as(stage)
    t = _cells(stage)
    for k in range(len(t)):
        # outcome indicators: E|P_n 1_w - P_0 1_w| = m(w) * spike_l1(cell of w)
        v = max(space.masses[i] for i in t.members[k]) * t.spike_l1(k)
        if not asc >= v:
            failures.append(("as>=per-outcome", k, asc, v))
    for name, m in stage.events.items():
        v = per_event_strong(stage, m)
        if not asc >= v:
            failures.append(("as>=per-event", name, asc, v))
    return ChainCheck(stage.n, not failures, failures)


# -- invariance under equivalent measures --------------------------------------------------

INVARIANCE_MODES = ("WC", "SC", "HC", "ASC")


@dataclass
class InvarianceRun:
    verdicts_p: dict
    verdicts_q: dict
    agree: dict
    hc_transfer_ok: bool
    oc_agree: bool | None = None


def invariance_experiment(mat, densities, modes=INVARIANCE_MODES, p=2, q=2, with_oc=True):
    """Recompute statistics under Q with ``dQ/dP = densities[n]`` per stage.

    ``densities`` maps stage numbers to per-outcome density lists (positive,
    normalized).  For HC the transfer ``D_Q <= ||dQ/dP||_oo D_P`` (and the
    reverse with ``dP/dQ``) is checked at every stage.  The OC comparison is
    reported only; its invariance is an open question.
    """
    modes = list(modes)
    all_modes = modes + (["OC"] if with_oc and "OC" not in modes else [])
    q_stages = [st.reweighted(densities[st.n]) for st in mat.stages]
    qmat = Materialization(mat.name + "@Q", mat.horizon, q_stages, mat.tail, mat.common_space, mat.meta)
    rp = detect(mat, all_modes, p, q)
    rq = detect(qmat, all_modes, p, q)
    hc_ok = True
    if "HC" in modes:
        for st, qst, dp, dq in zip(mat.stages, q_stages, rp.values("HC"), rq.values("HC")):
            dens = [x for i, x in enumerate(densities[st.n]) if not st.space.is_null(i)]
            top, inv_top = max(dens), max(1 / x for x in dens)
            if not (dq <= top * dp and dp <= inv_top * dq):
                hc_ok = False
    agree = {m: rp.verdicts[m] == rq.verdicts[m] for m in modes}
    oc = rp.verdicts.get("OC") == rq.verdicts.get("OC") if with_oc else None
    return InvarianceRun({m: rp.verdicts[m] for m in all_modes},
                         {m: rq.verdicts[m] for m in all_modes}, agree, hc_ok, oc)


def projective_consistency(scenario, h1, h2):
    """Atom masses of the limit and of each common stage agree across two horizons."""
    m1, m2 = scenario.materialize(h1), scenario.materialize(h2)
    mismatches = []
    by_n = {s.n: s for s in m2.stages}
    for s in m1.stages:
        t = by_n.get(s.n)
        if t is None:
            continue
        if sorted(s.part.atom_masses) != sorted(t.part.atom_masses):
            mismatches.append(("stage", s.n))
        if sorted(s.limit.atom_masses) != sorted(t.limit.atom_masses):
            mismatches.append(("limit", s.n))
    return not mismatches, mismatches
