"""Seeded randomized checks of the inequalities and identities, with shrinking.

Each trial draws its own generator from ``(seed, check, trial)``, so a
trial's instance does not depend on which other trials ran or in what
order.  An instance is a plain dict (masses, partition labels, random
variable values, density, event labels, parameters), which makes it easy to
shrink and to serialize for replay.
"""

from __future__ import annotations

import hashlib
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from .conditioning import RandomVariable, bayes_cond_exp, cond_exp
from .detect import stat_strong, Stage
from .errors import HypothesisViolation, SigmaLabError
from .independence import brute_cond_independent, is_cond_independent
from .lattice import Partition, brute_events, brute_join_events, brute_meet, is_subfield, join, meet
from .metrics import brute_rho, hausdorff, rho
from .opnorm import INF, landers_check, lower_bound_witness, op_norm, rogge_check, sandwich_check, \
    verify_onc_hc_chain
from .space import FiniteSpace, mask_of, reweight

ZERO = Fraction(0)

PASS, FAIL, DISCARD, ERROR = "pass", "fail", "discard", "error"


@dataclass
class FuzzConfig:
    seed: int = 42
    trials: int = 500
    min_outcomes: int = 2
    max_outcomes: int = 6
    min_atoms: int = 1
    max_atoms: int = 4
    denominator: int = 12          # mass numerators drawn from 0..denominator
    null_rate: float = 0.1         # chance that an outcome gets zero mass
    checks: tuple = ()
    shrink: bool = True
    workers: int = 1

    def selected(self):
        return tuple(self.checks) if self.checks else tuple(CHECKS)


# -- instance generation --------------------------------------------------------------

def trial_seed(seed, check, trial):
    digest = hashlib.blake2b(f"{seed}/{check}/{trial}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def rand_masses(rng, n, denom, null_rate=0.0):
    nums = [0 if rng.random() < null_rate else rng.randint(1, denom) for _ in range(n)]
    if not any(nums):
        nums[rng.randrange(n)] = rng.randint(1, denom)
    total = sum(nums)
    return [Fraction(k, total) for k in nums]


def rand_labels(rng, n, kmin, kmax):
    k = rng.randint(min(kmin, n), min(kmax, n))
    order = list(range(n))
    rng.shuffle(order)
    labels = [0] * n
    for j, i in enumerate(order):
        labels[i] = j if j < k else rng.randrange(k)
    return labels


def refine_labels(rng, labels, split=2):
    return [(l, rng.randrange(split)) for l in labels]


def rand_values(rng, n, denom=4, size=3):
    return [Fraction(rng.randint(-size * denom, size * denom), rng.randint(1, denom)) for _ in range(n)]


def rand_density(rng, n, denom=8):
    """Raw weights in [3/4, 3/2]; normalized later so the density lies in [1/2, 2]."""
    return [Fraction(rng.randint(6 * denom, 12 * denom), 8 * denom) for _ in range(n)]


def _base(rng, cfg, parts=2, values=0, density=False, event=False):
    n = rng.randint(cfg.min_outcomes, cfg.max_outcomes)
    inst = {"masses": rand_masses(rng, n, cfg.denominator, cfg.null_rate),
            "parts": [rand_labels(rng, n, cfg.min_atoms, cfg.max_atoms) for _ in range(parts)],
            "values": [rand_values(rng, n) for _ in range(values)],
            "params": {}}
    if density:
        inst["density"] = rand_density(rng, n)
    if event:
        inst["event"] = [rng.randrange(2) for _ in range(n)]
    return inst


def materialize(inst):
    """(space, partitions, random variables) of an instance."""
    masses = inst["masses"]
    sp = FiniteSpace([f"w{k + 1}" for k in range(len(masses))], masses)
    parts = [Partition(sp, [tuple(l) if isinstance(l, list) else l for l in labels]) for labels in inst["parts"]]
    rvs = [RandomVariable(sp, vals) for vals in inst.get("values", [])]
    return sp, parts, rvs


def _density(sp, inst):
    raw = inst["density"]
    total = sum((m * d for m, d in zip(sp.masses, raw)), ZERO)
    return [d / total for d in raw]


def _event(inst):
    return mask_of(i for i, b in enumerate(inst["event"]) if b)


# -- checks -----------------------------------------------------------------------------
# each check returns (status, detail)

def check_metric_axioms(inst):
    sp, (a, b, c), _ = materialize(inst)
    h = {}
    for x, y, key in ((a, b, "ab"), (b, a, "ba"), (b, c, "bc"), (a, c, "ac"), (a, a, "aa")):
        h[key] = hausdorff(x, y)
    bad = []
    if h["aa"].D != 0 or h["aa"].delta != 0:
        bad.append("D(a,a) != 0")
    if h["ab"].D != h["ba"].D or h["ab"].delta != h["ba"].delta:
        bad.append("asymmetric")
    for m in ("D", "delta"):
        if getattr(h["ac"], m) > getattr(h["ab"], m) + getattr(h["bc"], m):
            bad.append(f"triangle fails for {m}")
    for key in ("ab", "bc", "ac"):
        r = h[key]
        if not (r.delta <= r.D <= 2 * r.delta):
            bad.append(f"delta <= D <= 2 delta fails on {key}")
    if (h["ab"].D == 0) != (a == b):
        bad.append("D(a,b) = 0 does not match equality of the completed fields")
    if h["ab"].rho_ab != brute_rho(a, b) or h["ab"].rho_ba != brute_rho(b, a):
        bad.append("rho differs from the all-events oracle")
    return (FAIL, "; ".join(bad)) if bad else (PASS, f"D(a,b) = {h['ab'].D}")


def check_landers(inst):
    sp, (a, b), _ = materialize(inst)
    ok, left, right = landers_check(a, b)
    return (PASS if ok else FAIL), f"rho(a v b, b) = {left}, 4 rho(a, b) = {right}"


ROGGE_R = (1, 2, 3)
ROGGE_A = (Fraction(1, 2), Fraction(1), Fraction(2), Fraction(4))


def gen_rogge(rng, cfg):
    inst = _base(rng, cfg, parts=1, values=rng.randint(1, 3))
    inst["parts"].append(refine_labels(rng, inst["parts"][0]))
    return inst


def check_rogge(inst):
    sp, (small, big), fam = materialize(inst)
    if small == big:
        return DISCARD, "refinement is not strict"
    for r in ROGGE_R:
        for a in ROGGE_A:
            rep = rogge_check(sp, small, big, fam, r, a)
            if not rep.holds:
                return FAIL, f"r={r} a={a}: lhs {rep.lhs.decimal(20)} > rhs {rep.rhs.decimal(20)}"
    return PASS, ""


ONC_HC_PAIRS = ((2, 1), (INF, 1), (INF, INF))


def check_onc_hc(inst):
    sp, (a, b), _ = materialize(inst)
    for p, q in ONC_HC_PAIRS:
        rep = verify_onc_hc_chain(sp, a, b, p, q)
        if not rep.holds:
            return FAIL, f"(p,q)=({p},{q}): {rep.violation}"
    return PASS, ""


def check_l1_lower(inst):
    sp, (a, b), _ = materialize(inst)
    if a == b:
        return DISCARD, "equal fields"
    r = op_norm(sp, a, b, 1, 1)
    wit = lower_bound_witness(sp, a, b, "distinct-L1")
    if not (r.exact and r.value.exact >= 1 and 1 <= wit.bound <= r.value.exact):
        return FAIL, f"L1->L1 norm {r.value.exact}, witness ratio {wit.bound}"
    return PASS, str(r.value.exact)


def check_linf_lower(inst):
    sp, (a, b), _ = materialize(inst)
    if a == b:
        return DISCARD, "equal fields"
    r = op_norm(sp, a, b, INF, INF)
    wit = lower_bound_witness(sp, a, b, "distinct-Linf")
    half = Fraction(1, 2)
    if not (r.exact and r.value.exact >= half and half <= wit.bound <= r.value.exact):
        return FAIL, f"Linf->Linf norm {r.value.exact}, witness ratio {wit.bound}"
    return PASS, str(r.value.exact)


def gen_bayes(rng, cfg):
    return _base(rng, cfg, parts=1, values=1, density=True)


def check_bayes(inst):
    sp, (a,), (f,) = materialize(inst)
    d = _density(sp, inst)
    qs = reweight(sp, d)
    dv = RandomVariable(sp, d)
    q_f = cond_exp(qs, a.on(qs), RandomVariable(qs, f.values))
    p_d = cond_exp(sp, a, dv)
    p_df = cond_exp(sp, a, dv * f)
    via = bayes_cond_exp(sp, a, d, f)
    for i in range(len(sp.ids)):
        if sp.is_null(i):
            continue
        if q_f.values[i] * p_d.values[i] != p_df.values[i]:
            return FAIL, f"Q_A(f) P_A(d) != P_A(d f) at {sp.ids[i]}"
        if via.values[i] != q_f.values[i]:
            return FAIL, f"Bayes formula differs from direct conditioning at {sp.ids[i]}"
    return PASS, ""


def gen_tower(rng, cfg):
    return _base(rng, cfg, parts=2, values=2)


def check_tower(inst):
    """Tower property, expectation conservation, idempotence and self-adjointness."""
    sp, (a, b), (f, g) = materialize(inst)
    coarse = meet(a, b)
    pa_f = cond_exp(sp, a, f)
    if cond_exp(sp, coarse, pa_f) != cond_exp(sp, coarse, f):
        return FAIL, "tower property"
    if pa_f.expectation() != f.expectation():
        return FAIL, "expectation not conserved"
    if cond_exp(sp, a, pa_f) != pa_f:
        return FAIL, "not idempotent"
    if (g * pa_f).expectation() != (f * cond_exp(sp, a, g)).expectation():
        return FAIL, "not self-adjoint"
    return PASS, ""


def gen_invariance(rng, cfg):
    return _base(rng, cfg, parts=2, density=True)


def check_measure_invariance(inst):
    """Null class, lattice relations and metric transfer under an equivalent measure."""
    sp, (a, b), _ = materialize(inst)
    d = _density(sp, inst)
    qs = reweight(sp, d)
    qa, qb = a.on(qs), b.on(qs)
    if not sp.same_null_class(qs):
        return FAIL, "null class changed"
    if (a == b) != (qa == qb) or is_subfield(a, b) != is_subfield(qa, qb):
        return FAIL, "lattice relations changed"
    pos = [x for i, x in enumerate(d) if not sp.is_null(i)]
    top, bot = max(pos), min(pos)
    for x, y, qx, qy in ((a, b, qa, qb), (b, a, qb, qa)):
        rp, rq = rho(x, y).value, rho(qx, qy).value
        if not (bot * rp <= rq <= top * rp):
            return FAIL, f"rho transfer fails: P {rp}, Q {rq}, density in [{bot}, {top}]"
    sp_zero = stat_strong(Stage(1, sp, a, b)) == 0
    sq_zero = stat_strong(Stage(1, qs, qa, qb)) == 0
    if sp_zero != sq_zero:
        return FAIL, "strong statistic vanishes under one measure only"
    return PASS, ""


def gen_sandwich(rng, cfg):
    return _base(rng, cfg, parts=1, event=True)


def check_sandwich(inst):
    sp, (a,), _ = materialize(inst)
    ok, inf, mid = sandwich_check(sp, _event(inst), a)
    return (PASS if ok else FAIL), f"inf {inf}, E|P 1_E - 1_E| {mid}"


def gen_lattice(rng, cfg):
    return _base(rng, cfg, parts=3)


def check_lattice_laws(inst):
    sp, (a, b, c), _ = materialize(inst)
    bad = []
    if join(a, b) != join(b, a) or meet(a, b) != meet(b, a):
        bad.append("commutativity")
    if join(join(a, b), c) != join(a, join(b, c)) or meet(meet(a, b), c) != meet(a, meet(b, c)):
        bad.append("associativity")
    if join(a, meet(a, b)) != a or meet(a, join(a, b)) != a:
        bad.append("absorption")
    if join(a, a) != a or meet(a, a) != a:
        bad.append("idempotence")
    if not (is_subfield(meet(a, b), a) and is_subfield(a, join(a, b))):
        bad.append("order")
    if meet(a, b) != brute_meet(a, b):
        bad.append("meet differs from the event-set oracle")
    if brute_events(join(a, b)) != brute_join_events(a, b):
        bad.append("join differs from the event-set oracle")
    return (FAIL, ", ".join(bad)) if bad else (PASS, "")


def gen_indep(rng, cfg):
    """Half the trials build a conditional product so that independence holds."""
    if rng.random() < 0.5:
        return _base(rng, cfg, parts=rng.choice((3, 4)))
    best = []
    for nc in (1, 2):
        for n1 in (1, 2, 3):
            for n2 in (1, 2, 3):
                if 2 <= nc * n1 * n2 <= max(cfg.max_outcomes, 2):
                    best.append((nc, n1, n2))
    nc, n1, n2 = rng.choice(best)
    pc = rand_masses(rng, nc, cfg.denominator)
    m1 = [rand_masses(rng, n1, cfg.denominator) for _ in range(nc)]
    m2 = [rand_masses(rng, n2, cfg.denominator) for _ in range(nc)]
    masses, lc, l1, l2 = [], [], [], []
    for c in range(nc):
        for i in range(n1):
            for j in range(n2):
                masses.append(pc[c] * m1[c][i] * m2[c][j])
                lc.append(c)
                l1.append(i)
                l2.append(j)
    return {"masses": masses, "parts": [lc, l1, l2], "values": [], "params": {"product": True}}


def check_indep_oracle(inst):
    sp, parts, _ = materialize(inst)
    given, family = parts[0], parts[1:]
    cert = is_cond_independent(sp, family, given)
    oracle = brute_cond_independent(sp, family, given)
    if cert.holds != oracle:
        return FAIL, f"atom check says {cert.holds}, all-events oracle says {oracle}"
    if not cert.holds:
        atoms, c, lhs, rhs = cert.violating_tuple
        if lhs == rhs:
            return FAIL, "violating tuple does not reproduce a difference"
    if inst["params"].get("product") and not cert.holds:
        return FAIL, "conditional product not recognized as independent"
    return PASS, cert.describe()


def gen_two(rng, cfg):
    return _base(rng, cfg, parts=2)


def gen_three(rng, cfg):
    return _base(rng, cfg, parts=3)


CHECKS = {
    "metric-axioms": (gen_three, check_metric_axioms),
    "landers": (gen_two, check_landers),
    "rogge": (gen_rogge, check_rogge),
    "onc-hc": (gen_two, check_onc_hc),
    "l1-lower": (gen_two, check_l1_lower),
    "linf-lower": (gen_two, check_linf_lower),
    "bayes": (gen_bayes, check_bayes),
    "tower": (gen_tower, check_tower),
    "measure-invariance": (gen_invariance, check_measure_invariance),
    "sandwich": (gen_sandwich, check_sandwich),
    "lattice-laws": (gen_lattice, check_lattice_laws),
    "indep-oracle": (gen_indep, check_indep_oracle),
}


def parse_checks(text):
    names = [c.strip() for c in text.split(",") if c.strip()] if isinstance(text, str) else list(text)
    bad = [c for c in names if c not in CHECKS]
    if bad:
        raise SigmaLabError(f"unknown checks {', '.join(bad)}; known: {', '.join(CHECKS)}")
    return tuple(names)


# -- running and shrinking -----------------------------------------------------------------

def evaluate(check_fn, inst):
    try:
        return check_fn(inst)
    except HypothesisViolation as exc:
        return DISCARD, str(exc)
    except Exception as exc:  # a crash is a finding, not a discard
        return ERROR, f"{type(exc).__name__}: {exc}"


def _complexity(inst):
    n = len(inst["masses"])
    atoms = sum(len(set(map(repr, labels))) for labels in inst["parts"])
    dens = sum(m.denominator for m in inst["masses"])
    vals = sum(abs(v.numerator) + v.denominator for vals in inst.get("values", []) for v in vals)
    extra = sum(d.numerator + d.denominator for d in inst.get("density", []))
    return (n, atoms, dens, vals, extra)


def _normalize(masses):
    total = sum(masses, ZERO)
    if total == 0:
        return None
    return [m / total for m in masses]


def _drop(inst, i):
    masses = _normalize(inst["masses"][:i] + inst["masses"][i + 1:])
    if masses is None or not masses:
        return None
    out = dict(inst, masses=masses,
               parts=[labels[:i] + labels[i + 1:] for labels in inst["parts"]],
               values=[vals[:i] + vals[i + 1:] for vals in inst.get("values", [])])
    if "density" in inst:
        out["density"] = inst["density"][:i] + inst["density"][i + 1:]
    if "event" in inst:
        out["event"] = inst["event"][:i] + inst["event"][i + 1:]
    return out


def _candidates(inst):
    n = len(inst["masses"])
    for i in range(n):
        c = _drop(inst, i)
        if c is not None:
            yield c
    for k, labels in enumerate(inst["parts"]):
        distinct = sorted(set(map(repr, labels)))
        if len(distinct) > 1:
            keys = {r: l for r, l in zip(map(repr, labels), labels)}
            first = keys[distinct[0]]
            for r in distinct[1:]:
                merged = [first if repr(l) == r else l for l in labels]
                parts = list(inst["parts"])
                parts[k] = merged
                yield dict(inst, parts=parts)
    pos = [m for m in inst["masses"] if m > 0]
    uniform = [Fraction(1, len(pos)) if m > 0 else ZERO for m in inst["masses"]]
    if uniform != inst["masses"]:
        yield dict(inst, masses=uniform)
    for den in (2, 3, 4, 6, 8, 12):
        rounded = [m.limit_denominator(den) if m > 0 else ZERO for m in inst["masses"]]
        if all(r > 0 for r, m in zip(rounded, inst["masses"]) if m > 0):
            rounded = _normalize(rounded)
            if rounded is not None and rounded != inst["masses"]:
                yield dict(inst, masses=rounded)
    for k, vals in enumerate(inst.get("values", [])):
        for simpler in ([ZERO] * len(vals), [Fraction(round(v)) for v in vals]):
            if simpler != vals:
                values = list(inst["values"])
                values[k] = simpler
                yield dict(inst, values=values)
    if "density" in inst and any(d != 1 for d in inst["density"]):
        yield dict(inst, density=[Fraction(1)] * n)


def shrink(check_fn, inst, status, max_steps=500):
    """Greedy shrinking: accept any simpler candidate on which the check still fails the same way."""
    current = inst
    steps = 0
    improved = True
    while improved and steps < max_steps:
        improved = False
        for cand in _candidates(current):
            steps += 1
            if _complexity(cand) >= _complexity(current):
                continue
            st, _ = evaluate(check_fn, cand)
            if st == status:
                current = cand
                improved = True
                break
    return current


@dataclass
class CheckStats:
    name: str
    passed: int = 0
    failed: int = 0
    discarded: int = 0
    errors: int = 0
    failures: list = field(default_factory=list)   # [{trial, seed, status, detail, instance, shrunk}]

    @property
    def ok(self):
        return self.failed == 0 and self.errors == 0


@dataclass
class FuzzReport:
    config: FuzzConfig
    stats: dict

    @property
    def ok(self):
        return all(s.ok for s in self.stats.values())

    def to_json(self):
        cfg = self.config
        return {
            "config": {"seed": cfg.seed, "trials": cfg.trials, "min_outcomes": cfg.min_outcomes,
                       "max_outcomes": cfg.max_outcomes, "min_atoms": cfg.min_atoms,
                       "max_atoms": cfg.max_atoms, "denominator": cfg.denominator,
                       "checks": list(cfg.selected())},
            "ok": self.ok,
            "checks": {name: {"passed": s.passed, "failed": s.failed, "discarded": s.discarded,
                              "errors": s.errors,
                              "failures": [dict(f, instance=instance_to_json(f["instance"]),
                                                shrunk=instance_to_json(f["shrunk"]))
                                           for f in s.failures]}
                       for name, s in self.stats.items()},
        }


def instance_to_json(inst):
    from .io import scalar_to_json

    def labels(ls):
        return [list(l) if isinstance(l, tuple) else l for l in ls]

    doc = {"masses": [scalar_to_json(m) for m in inst["masses"]],
           "parts": [labels(ls) for ls in inst["parts"]],
           "values": [[scalar_to_json(v) for v in vals] for vals in inst.get("values", [])],
           "params": dict(inst.get("params", {}))}
    if "density" in inst:
        doc["density"] = [scalar_to_json(d) for d in inst["density"]]
    if "event" in inst:
        doc["event"] = list(inst["event"])
    return doc


def instance_from_json(doc):
    from .io import scalar_from_json

    inst = {"masses": [scalar_from_json(m, f"masses[{k}]") for k, m in enumerate(doc["masses"])],
            "parts": [[tuple(l) if isinstance(l, list) else l for l in ls] for ls in doc["parts"]],
            "values": [[scalar_from_json(v) for v in vals] for vals in doc.get("values", [])],
            "params": dict(doc.get("params", {}))}
    if "density" in doc:
        inst["density"] = [scalar_from_json(d) for d in doc["density"]]
    if "event" in doc:
        inst["event"] = list(doc["event"])
    return inst


def _run_one(args):
    cfg, name, trial, registry = args
    gen, check_fn = registry[name]
    seed = trial_seed(cfg.seed, name, trial)
    inst = gen(random.Random(seed), cfg)
    status, detail = evaluate(check_fn, inst)
    return name, trial, seed, inst, status, detail


def run_fuzz(cfg, extra_checks=None):
    """Run every selected check for ``cfg.trials`` trials.

    ``extra_checks`` maps further names to ``(generator, check)`` pairs; it is
    how tests plant a deliberately false property to exercise the shrinker.
    """
    registry = dict(CHECKS)
    registry.update(extra_checks or {})
    names = list(cfg.checks) if cfg.checks else list(CHECKS)
    bad = [n for n in names if n not in registry]
    if bad:
        raise SigmaLabError(f"unknown checks {', '.join(bad)}; known: {', '.join(registry)}")
    jobs = [(cfg, name, t, registry) for name in names for t in range(cfg.trials)]
    if cfg.workers > 1 and not extra_checks:
        with ProcessPoolExecutor(cfg.workers) as pool:
            results = list(pool.map(_run_one, jobs, chunksize=16))
    else:
        results = [_run_one(j) for j in jobs]
    stats = {name: CheckStats(name) for name in names}
    for name, trial, seed, inst, status, detail in results:
        s = stats[name]
        if status == PASS:
            s.passed += 1
        elif status == DISCARD:
            s.discarded += 1
        else:
            if status == FAIL:
                s.failed += 1
            else:
                s.errors += 1
            shrunk = shrink(registry[name][1], inst, status) if cfg.shrink else inst
            s.failures.append({"trial": trial, "seed": seed, "status": status, "detail": detail,
                               "instance": inst, "shrunk": shrunk,
                               "shrunk_detail": evaluate(registry[name][1], shrunk)[1]})
    return FuzzReport(cfg, stats)


def replay(name, doc, extra_checks=None):
    """Re-run one check on a serialized instance; returns (status, detail)."""
    registry = dict(CHECKS)
    registry.update(extra_checks or {})
    if name not in registry:
        raise SigmaLabError(f"unknown check {name!r}")
    return evaluate(registry[name][1], instance_from_json(doc))
