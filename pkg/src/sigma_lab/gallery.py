"""Built-in scenarios with machine-checkable expected claims.

Each entry builds a materialization at a horizon and states claims about
it.  A claim names the mathematical fact it checks (``source``) and its
tolerance; tolerance 0 means exact arithmetic.
"""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .conditioning import RandomVariable, cond_exp
from .detect import (NOT_TENDING, TENDING, Materialization, Scenario, Stage, check_monotone,
                     detect, stat_hausdorff, stat_stc, stat_strong, stat_weak, verdict)
from .errors import HypothesisViolation, SigmaLabError
from .independence import FamilyStage, ScenarioFamily, is_cond_independent
from .lattice import Partition, generate
from .opnorm import INF, lower_bound_witness, op_norm, parse_exponent
from .scalar import CReal, compare, quad
from .space import FiniteSpace, iter_bits, mask_of

ZERO = Fraction(0)
ONE = Fraction(1)
SQRT6_X = quad(Fraction(-1, 8), Fraction(1, 8), 6)  # (sqrt(6) - 1) / 8


@dataclass
class Claim:
    name: str
    source: str
    holds: bool
    tolerance: object = 0
    detail: str = ""


# -- Bernoulli pair (two-coordinate reduction) -------------------------------------

WARREN_IDS = ("00", "01", "10", "11")


def warren_space(eps):
    eps = Fraction(eps)
    return FiniteSpace(WARREN_IDS, [(1 - eps) / 2, eps / 2, (1 - eps) / 2, eps / 2])


def warren_pair(space):
    """(field of the max of both coordinates, field of the first coordinate)."""
    fine = Partition.from_atoms(space, [["00"], ["01", "10", "11"]])
    first = Partition.from_atoms(space, [["00", "01"], ["10", "11"]])
    return fine, first


class Warren(Scenario):
    name = "warren"

    def __init__(self, p=2):
        p = parse_exponent(p)
        if p == INF or p <= 1:
            raise HypothesisViolation("the Bernoulli-pair scenario needs p strictly between 1 and oo")
        self.p = p

    def params(self):
        return {"p": str(self.p)}

    def materialize(self, horizon):
        stages = []
        for n in range(1, horizon + 1):
            sp = warren_space(Fraction(1, 2**n))
            fine, first = warren_pair(sp)
            stages.append(Stage(n, sp, fine, first))
        return Materialization(self.name, horizon, stages, self.tail, common_space=False,
                               meta={"eps": "2**-n"})


def warren_three_coordinates(n, m=1):
    """Coordinates (x0, xm, xn) as an 8-outcome space; stage and limit fields as before."""
    e_m, e_n = Fraction(1, 2**m), Fraction(1, 2**n)
    ids, masses, fine_key, first_key = [], [], [], []
    for x0 in (0, 1):
        for xm in (0, 1):
            for xn in (0, 1):
                ids.append(f"{x0}{xm}{xn}")
                masses.append(Fraction(1, 2) * (e_m if xm else 1 - e_m) * (e_n if xn else 1 - e_n))
                fine_key.append(x0 | xn)
                first_key.append(x0)
    sp = FiniteSpace(ids, masses)
    return sp, Partition(sp, fine_key), Partition(sp, first_key)


def warren_display_a2(eps, f):
    """Closed form of E[f | max of coordinates] on the Bernoulli pair."""
    f00, f01, f10, f11 = f
    rest = (f01 * eps + f10 * (1 - eps) + f11 * eps) / (1 + eps)
    return [f00, rest, rest, rest]


def warren_display_a1(eps, f):
    """Closed form of E[f | first coordinate] on the Bernoulli pair."""
    f00, f01, f10, f11 = f
    left = f00 * (1 - eps) + f01 * eps
    right = f10 * (1 - eps) + f11 * eps
    return [left, left, right, right]


def warren_claims(mat, p, report=None):
    claims = []
    p = parse_exponent(p)
    expo = min(p - 1, ONE)
    ratios = []
    norms = []
    for st in mat.stages:
        eps = Fraction(1, 2**st.n)
        r = op_norm(st.space, st.part, st.limit, p, p)
        norms.append(r)
        ratios.append(float(r.value) ** float(p) / float(eps) ** float(expo))
    ref = ratios[min(5, len(ratios) - 1)]
    claims.append(Claim("opnorm-power-ratio-bounded", "||T||_{p->p}^p <= C_p eps^((p-1) min 1)",
                        max(ratios) <= 2 * ref, 1e-12,
                        f"max ratio {max(ratios):.6g}, ratio at n={min(6, len(ratios))} {ref:.6g}"))
    claims.append(Claim("opnorm-tending", "operator-norm convergence for 1 < p < oo",
                        verdict([r.value for r in norms]) == TENDING, 1e-12,
                        ", ".join(f"{float(r.value):.4g}" for r in norms)))
    l1_ok, linf_ok, l1_exact = True, True, True
    for st in mat.stages:
        eps = Fraction(1, 2**st.n)
        v1 = op_norm(st.space, st.part, st.limit, 1, 1)
        vinf = op_norm(st.space, st.part, st.limit, INF, INF)
        l1_ok &= v1.exact and v1.value.exact >= 1
        linf_ok &= vinf.exact and vinf.value.exact >= Fraction(1, 2)
        l1_exact &= v1.value.exact == 2 / (1 + eps)
    claims.append(Claim("l1-norm-at-least-one", "distinct fields: ||P_A - P_B||_{1->1} >= 1", l1_ok))
    claims.append(Claim("linf-norm-at-least-half", "distinct fields: ||P_A - P_B||_{oo->oo} >= 1/2",
                        linf_ok))
    claims.append(Claim("l1-norm-closed-form", "||T||_{1->1} = 2/(1+eps) on the Bernoulli pair",
                        l1_exact))
    # displays at eps = 1/4 with a generic f
    eps = Fraction(1, 4)
    sp = warren_space(eps)
    fine, first = warren_pair(sp)
    f = [Fraction(3), Fraction(-5, 7), Fraction(11, 2), Fraction(2, 9)]
    a2 = cond_exp(sp, fine, f).values
    a1 = cond_exp(sp, first, f).values
    claims.append(Claim("display-max-coordinate", "E[f | max(Z1, Z2)] closed form at eps = 1/4",
                        list(a2) == warren_display_a2(eps, f)))
    claims.append(Claim("display-first-coordinate", "E[f | Z1] closed form at eps = 1/4",
                        list(a1) == warren_display_a1(eps, f)))
    # an extra independent coordinate leaves the norms unchanged
    same = True
    for n in (2, 3):
        sp3, fine3, first3 = warren_three_coordinates(n + 1, 1)
        sp2 = warren_space(Fraction(1, 2**(n + 1)))
        f2, g2 = warren_pair(sp2)
        for pp in (1, 2):
            a = op_norm(sp3, fine3, first3, pp, pp).value
            b = op_norm(sp2, f2, g2, pp, pp).value
            same &= compare(a, b) == 0
    claims.append(Claim("tower-reduction", "an independent extra coordinate does not change the norm",
                        same))
    return claims


# -- square-root-six counterexample -------------------------------------------------

def _intervals(points):
    pts = sorted(set(points))
    return list(zip(pts[:-1], pts[1:]))


class DyadicWeak(Scenario):
    """Half-dyadic sets converging weakly but not strongly to the trivial field."""

    name = "dyadic-weak"
    min_horizon = 4

    def __init__(self):
        x = SQRT6_X
        self.x = x
        self.A = [(Fraction(3, 16), Fraction(7, 16)), (1 - x, ONE)]
        self.B = [(Fraction(1, 16), Fraction(5, 16)), (1 - 2 * x + Fraction(1, 16), 1 - x + Fraction(1, 16))]

    def params(self):
        return {"x": "(sqrt(6)-1)/8"}

    def space(self, horizon):
        pts = [Fraction(k, 2**horizon) for k in range(2**horizon + 1)]
        for lo, hi in self.A + self.B:
            pts += [lo, hi]
        ivs = _intervals(pts)
        sp = FiniteSpace([f"I{k:05d}" for k in range(len(ivs))], [hi - lo for lo, hi in ivs])
        return sp, ivs

    @staticmethod
    def _mask(ivs, pieces):
        # every piece endpoint is a breakpoint, so a piece is a run of consecutive intervals
        los = [lo for lo, _ in ivs]
        mask = 0
        for a, b in pieces:
            start, stop = bisect_left(los, a), bisect_left(los, b)
            mask |= ((1 << (stop - start)) - 1) << start
        return mask

    @staticmethod
    def set_pieces(n):
        return [(Fraction(2 * k, 2**n), Fraction(2 * k + 1, 2**n)) for k in range(2**(n - 2))] \
            if n >= 2 else []

    def materialize(self, horizon):
        if horizon < 4:
            raise HypothesisViolation("the square-root-six scenario needs horizon >= 4")
        sp, ivs = self.space(horizon)
        trivial = Partition.trivial(sp)
        a = self._mask(ivs, self.A)
        b = self._mask(ivs, self.B)
        stages = []
        for n in range(1, horizon + 1):
            bn = self._mask(ivs, self.set_pieces(n))
            stages.append(Stage(n, sp, generate(sp, [bn]), trivial, {"A": a, "B": b, "Bn": bn}))
        return Materialization(self.name, horizon, stages, self.tail, True,
                               meta={"intervals": ivs})


def dyadic_weak_claims(mat):
    claims = []
    x = SQRT6_X
    sp = mat.stages[0].space
    a, b = mat.stages[0].events["A"], mat.stages[0].events["B"]
    ind_a = RandomVariable.indicator(a, sp)
    ind_b = RandomVariable.indicator(b, sp)
    ind_ab = RandomVariable.indicator(a & b, sp)
    coef_a_off = (Fraction(1, 8) + x) / Fraction(3, 4)
    disp_ok = ci_ok = mass_ok = True
    weak_zero = True
    strong_vals = []
    hc_ok = True
    for st in mat.stages:
        bn = st.events["Bn"]
        if st.n >= 2:
            mass_ok &= sp.measure(bn) == Fraction(1, 4)
        if st.n < 4:
            continue
        pa = cond_exp(sp, st.part, ind_a)
        pb = cond_exp(sp, st.part, ind_b)
        pab = cond_exp(sp, st.part, ind_ab)
        for i in range(len(sp.ids)):
            inside = (bn >> i) & 1
            want_a = Fraction(1, 2) if inside else coef_a_off
            want_ab = Fraction(1, 4) if inside else Fraction(1, 6)
            disp_ok &= pa.values[i] == want_a and pb.values[i] == want_a and pab.values[i] == want_ab
            ci_ok &= pa.values[i] * pb.values[i] == pab.values[i]
        weak_zero &= stat_weak(st)[0] == 0
        strong_vals.append(stat_strong(st))
        hc_ok &= stat_hausdorff(st) >= Fraction(1, 4)
    claims.append(Claim("half-dyadic-mass", "P(B_n) = 1/4 for n >= 2", mass_ok))
    claims.append(Claim("conditional-probability-displays",
                        "P(A|B_n) = P(B|B_n) = 1/2 on B_n and (1/8+x)/(3/4) off it; "
                        "P(A&B|B_n) = 1/4 on B_n and 1/6 off it", disp_ok))
    claims.append(Claim("conditional-independence-each-stage", "P_n(1_A) P_n(1_B) = P_n(1_{A&B})", ci_ok))
    lhs, rhs = (Fraction(1, 4) + x) ** 2, Fraction(3, 16)
    cert = is_cond_independent(sp, [a, b], Partition.trivial(sp))
    claims.append(Claim("unconditional-independence-fails", "(1/4 + x)^2 != 1/8 + 1/16",
                        lhs != rhs and not cert.holds, 0, f"(1/4+x)^2 = {lhs}"))
    claims.append(Claim("weak-statistic-zero", "the trivial limit is fixed by every conditioning",
                        weak_zero))
    claims.append(Claim("strong-statistic-bounded-below", "no strong convergence: stat_strong >= 1/10",
                        all(v >= Fraction(1, 10) for v in strong_vals), 0,
                        "values " + ", ".join(str(v) for v in strong_vals)))
    claims.append(Claim("strong-statistic-value", "stat_strong = 3/4 exactly for n >= 4",
                        all(v == Fraction(3, 4) for v in strong_vals)))
    claims.append(Claim("hausdorff-bounded-below", "D(B_n, trivial) >= 1/4", hc_ok))
    return claims


# -- small scenarios ---------------------------------------------------------------------

def uniform4():
    return FiniteSpace.uniform(4)


class TrivialCounterexample(Scenario):
    """Constant sigma(A) with the trivial field as the weak-limit target."""

    name = "trivial-counterexample"
    tail = "constant"

    def __init__(self, space=None, event=None):
        self.sp = space or uniform4()
        self.event = event if event is not None else self.sp.event(self.sp.ids[:len(self.sp.ids) // 2]).mask
        pe = self.sp.measure(self.event)
        if not 0 < pe < 1:
            raise HypothesisViolation("the event must have probability strictly between 0 and 1")

    def materialize(self, horizon):
        sp = self.sp
        sig = generate(sp, [self.event])
        trivial = Partition.trivial(sp)
        return Materialization(self.name, horizon,
                               [Stage(n, sp, sig, trivial, {"A": self.event}) for n in range(1, horizon + 1)],
                               self.tail, True)


def trivial_counterexample_claims(mat):
    st = mat.stages[0]
    sp = st.space
    each = all(is_cond_independent(sp, [s.part, s.part], s.part).holds for s in mat.stages)
    lim = is_cond_independent(sp, [st.part, st.part], st.limit)
    return [Claim("self-independent-given-itself", "sigma(A) is independent of itself given sigma(A)", each),
            Claim("limit-not-self-independent", "sigma(A) is not independent of itself given the trivial field",
                  not lim.holds, 0, lim.describe())]


class MonotoneDyadic(Scenario):
    """Dyadic partitions of [0,1) refining up to the horizon level."""

    name = "monotone-dyadic"
    tail = "inc"
    projective = False  # the limit is the horizon level itself

    def materialize(self, horizon):
        size = 2**horizon
        sp = FiniteSpace([f"d{k:05d}" for k in range(size)], [Fraction(1, size)] * size)
        levels = [Partition(sp, [k >> (horizon - n) for k in range(size)]) for n in range(1, horizon + 1)]
        top = levels[-1]
        half = mask_of(range(size // 2 - size // 8, size // 2 + size // 8 + 1)) if size >= 8 else 1
        return Materialization(self.name, horizon, [Stage(n, sp, levels[n - 1], top, {"E": half})
                                                    for n in range(1, horizon + 1)], self.tail, True)


def monotone_dyadic_claims(mat):
    mono = check_monotone(mat)
    claims = [Claim("increasing-chain", "each level refines the previous one", mono.increasing),
              Claim("join-is-limit", "the join of the chain is the declared limit", bool(mono.matches_limit))]
    onc_ok = hc_ok = True
    for st in mat.stages[:-1]:
        lb = lower_bound_witness(st.space, st.part, st.limit, "nested")
        two = op_norm(st.space, st.part, st.limit, 2, 2)
        onc_ok &= lb.bound >= 1 and two.exact and two.value.exact == 1
        hc_ok &= stat_hausdorff(st) == Fraction(1, 2)
    claims.append(Claim("onc-p-equals-q-stays-one", "strict nesting: ||P_B - P_A||_{p->p} >= 1", onc_ok))
    claims.append(Claim("hausdorff-stays-half", "D(level n, level N) = 1/2 for n < N", hc_ok))
    st = stat_stc(mat, mat.stages[0].n)
    claims.append(Claim("set-theoretic-limit", "windowed liminf and limsup equal the limit",
                        st.liminf_is_limit and st.limsup_is_limit))
    weak = [stat_weak(s)[0] for s in mat.stages]
    claims.append(Claim("weak-statistic-decreasing", "E|P_n 1_A - 1_A| decreases along the refinement",
                        all(x >= y for x, y in zip(weak, weak[1:])) and weak[-1] == 0))
    rep = detect(mat, ["WC", "SC", "HC", "ONC", "STC", "ASC", "OC"], 2, 2)
    bad = [m for m, v in rep.verdicts.items() if v != TENDING]
    claims.append(Claim("every-statistic-tends", "the filtration converges in every mode at the horizon",
                        not bad, 1e-12, ", ".join(bad)))
    return claims


class Alternating(Scenario):
    """Two fields taken in turn; the limit candidate is the first."""

    name = "alternating"

    def __init__(self, space=None, first=None, second=None):
        self.sp = space or uniform4()
        ids = self.sp.ids
        self.first = first or Partition.from_atoms(self.sp, [[ids[0], ids[1]], list(ids[2:])])
        self.second = second or Partition.from_atoms(self.sp, [[ids[0], ids[2]], [ids[1]] + list(ids[3:])])
        if self.first == self.second:
            raise HypothesisViolation("the alternating scenario needs two distinct fields")

    def materialize(self, horizon):
        stages = [Stage(n, self.sp, self.first if n % 2 else self.second, self.first)
                  for n in range(1, horizon + 1)]
        return Materialization(self.name, horizon, stages, self.tail, True)


def alternating_claims(mat):
    st = stat_stc(mat, mat.stages[0].n)
    sc = verdict([stat_strong(s) for s in mat.stages])
    return [Claim("liminf-differs-from-limsup", "alternation separates the set-theoretic limits",
                  st.liminf != st.limsup),
            Claim("strong-not-tending", "the strong statistic does not tend to zero", sc != TENDING, 0, sc)]


# -- scenario families for the independence experiment -----------------------------------------

def product_bits_family(horizon=4):
    sp = uniform4()
    ids = sp.ids
    c1 = Partition.from_atoms(sp, [[ids[0], ids[1]], [ids[2], ids[3]]])
    c2 = Partition.from_atoms(sp, [[ids[0], ids[2]], [ids[1], ids[3]]])
    trivial = Partition.trivial(sp)
    stages = [FamilyStage(n, sp, trivial, [c1, c2]) for n in range(1, horizon + 1)]
    return ScenarioFamily("product-bits", stages, trivial, [c1, c2])


def dyadic_product_family(horizon=8):
    side = 2**horizon
    size = side * side
    sp = FiniteSpace([f"g{k}" for k in range(size)], [Fraction(1, size)] * size)
    trivial = Partition.trivial(sp)

    def coord(level, axis):
        shift = horizon - level
        if axis == 0:
            return Partition(sp, [(k // side) >> shift for k in range(size)])
        return Partition(sp, [(k % side) >> shift for k in range(size)])

    stages = [FamilyStage(n, sp, trivial, [coord(n, 0), coord(n, 1)]) for n in range(1, horizon + 1)]
    return ScenarioFamily("dyadic-product", stages, trivial, [coord(horizon, 0), coord(horizon, 1)])


def dyadic_weak_family(horizon=8):
    scen = DyadicWeak()
    mat = scen.materialize(horizon)
    sp = mat.stages[0].space
    a, b = mat.stages[0].events["A"], mat.stages[0].events["B"]
    fa, fb = generate(sp, [a]), generate(sp, [b])
    trivial = Partition.trivial(sp)
    stages = [FamilyStage(st.n, sp, st.part, [fa, fb]) for st in mat.stages if st.n >= 4]
    return ScenarioFamily("dyadic-weak-family", stages, trivial, [fa, fb])


FAMILIES = {"product-bits": product_bits_family, "dyadic-product": dyadic_product_family,
            "dyadic-weak-family": dyadic_weak_family}


# -- registry --------------------------------------------------------------------------

@dataclass
class GalleryEntry:
    name: str
    describes: str
    factory: Callable
    claims: Callable
    default_horizon: int = 12
    params: dict = field(default_factory=dict)


ENTRIES = {
    "warren": GalleryEntry("warren", "Bernoulli pair: p->p norm convergence for 1<p<oo, vacuous at p=1",
                           lambda p=2: Warren(p), lambda mat, p=2: warren_claims(mat, p), 12, {"p": "2"}),
    "dyadic-weak": GalleryEntry("dyadic-weak", "square-root-six intervals: weak but not strong convergence",
                                lambda **_: DyadicWeak(), lambda mat, **_: dyadic_weak_claims(mat), 12),
    "trivial-counterexample": GalleryEntry("trivial-counterexample",
                                           "constant sigma(A) vs trivial limit: self-independence is lost",
                                           lambda **_: TrivialCounterexample(),
                                           lambda mat, **_: trivial_counterexample_claims(mat), 6),
    "monotone-dyadic": GalleryEntry("monotone-dyadic", "increasing dyadic filtration up to the horizon",
                                    lambda **_: MonotoneDyadic(), lambda mat, **_: monotone_dyadic_claims(mat), 8),
    "alternating": GalleryEntry("alternating", "two crossed fields in turn: liminf differs from limsup",
                                lambda **_: Alternating(), lambda mat, **_: alternating_claims(mat), 8),
}


def get_entry(name):
    try:
        return ENTRIES[name]
    except KeyError:
        raise SigmaLabError(f"unknown gallery entry {name!r}; known: {', '.join(ENTRIES)}") from None


def build(name, horizon=None, **params):
    entry = get_entry(name)
    scen = entry.factory(**params)
    horizon = entry.default_horizon if horizon is None else horizon
    return scen, scen.materialize(horizon)


@dataclass
class GalleryRun:
    name: str
    report: object
    claims: list

    @property
    def ok(self):
        return all(c.holds for c in self.claims)


def default_modes(mat):
    modes = ["WC", "SC", "HC", "ONC", "ASC", "OC"]
    if mat.common_space:
        modes += ["STC", "MC"]
    return modes


def run(name, horizon=None, p=None, q=None, modes=None, **params):
    entry = get_entry(name)
    if name == "warren":
        params.setdefault("p", p if p is not None else 2)
        p = q = params["p"]
    scen, mat = build(name, horizon, **params)
    p = 2 if p is None else p
    q = p if q is None else q
    report = detect(mat, modes or default_modes(mat), p, q)
    claims = entry.claims(mat, **params)
    return GalleryRun(name, report, claims)


def build_warren(p, horizon):
    return Warren(p).materialize(horizon)


def build_dyadic_weak(horizon):
    return DyadicWeak().materialize(horizon)


def build_trivial_counterexample(space, event, horizon=4):
    return TrivialCounterexample(space, event).materialize(horizon)


def build_monotone_dyadic(horizon):
    return MonotoneDyadic().materialize(horizon)


def build_alternating(space, first, second, horizon=6):
    return Alternating(space, first, second).materialize(horizon)


# -- equivalent reweightings for the invariance experiment --------------------------------

def _normalized(space, raw):
    total = sum((m * d for m, d in zip(space.masses, raw)), ZERO)
    return [d / total for d in raw]


def equivalent_densities(mat, rng, denom=16):
    """Random ``dQ/dP`` per stage with values in [1/2, 2].

    Stages on a common space share one density.  Bernoulli-pair stages get
    a product density ``u(x0) v(xn)``, which keeps the reweighted stage a
    reduction of a reweighted product space.
    """
    if mat.common_space:
        sp = mat.stages[0].space
        raw = [Fraction(rng.randint(12 * denom, 24 * denom), 16 * denom) for _ in sp.ids]
        dens = _normalized(sp, raw)
        return {st.n: dens for st in mat.stages}
    u1 = Fraction(rng.randint(3 * denom, 5 * denom), 4 * denom)
    u = {0: 2 - u1, 1: u1}
    out = {}
    for st in mat.stages:
        eps = st.space.masses[1] * 2
        c = Fraction(rng.randint(3 * denom, 4 * denom), 3 * denom) if rng.random() < 0.5 \
            else Fraction(rng.randint(3 * denom, 4 * denom), 4 * denom)
        v = {1: c, 0: (1 - eps * c) / (1 - eps)}
        out[st.n] = [u[int(i[0])] * v[int(i[1])] for i in st.space.ids]
    return out
