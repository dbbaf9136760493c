"""Norms of ``P_A - P_B`` between weighted Lebesgue spaces on a finite space.

All work happens on the cells of the join of A and B: the difference of the
two conditional expectations only sees ``E[f | A v B]``, and conditioning
on the join never increases an Lp norm, so the supremum is attained by
join-measurable functions.  Cells split further into connected components
of the atom-intersection graph, on which the operator is block diagonal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import kernels
from .conditioning import Contingency, CondExpOperator, RandomVariable, cond_exp
from .errors import BudgetExceeded, HypothesisViolation, SpaceMismatchError, enumeration_budget
from .lattice import is_subfield
from .metrics import inf_symdiff, rho
from .scalar import CReal, as_scalar, bounds, compare, exact_root, pow_bounds, sign
from .space import Event, iter_bits

INF = math.inf
ZERO = Fraction(0)
ONE = Fraction(1)

SEED = 20240601
STARTS = 32
STALL_TOL = 1e-12
STALL_ITERS = 100
MAX_ITERS = 20000


def parse_exponent(p):
    """Exponent as a Fraction in [1, oo) or ``math.inf``."""
    if isinstance(p, str):
        s = p.strip().lower()
        if s in ("inf", "infinity", "oo", "∞"):
            return INF
        p = Fraction(s)
    elif isinstance(p, float):
        if math.isinf(p):
            return INF
        p = Fraction(p)
    else:
        p = Fraction(p)
    if p < 1:
        raise ValueError(f"exponent must be at least 1, got {p}")
    return p


def _fmt_exp(p):
    return "inf" if p == INF else str(p)


# -- Lp norms ---------------------------------------------------------------

def _abs_pow_bounds(v, p):
    """Certified bounds of ``|v| ** p``, exact pair when available."""
    v = abs(v)
    if p.denominator == 1:
        x = v ** p.numerator
        return x, x
    if not hasattr(v, "d"):
        r = exact_root(Fraction(v) ** p.numerator, p.denominator)
        if r is not None:
            return r, r
    lo, hi = bounds(v)
    lo = max(lo, ZERO)
    return pow_bounds(lo, hi, p)


def _power_sum(masses, values, q):
    """Certified ``sum m |v|**q``; exact whenever every term is."""
    exact = True
    total = ZERO
    lo_sum = hi_sum = ZERO
    for m, v in zip(masses, values):
        if not sign(m) or not v:
            continue
        lo, hi = _abs_pow_bounds(v, q)
        if exact and lo == hi:
            total = total + m * lo
        else:
            exact = False
        mlo, mhi = bounds(m)
        lo_sum += mlo * bounds(lo)[0]
        hi_sum += mhi * bounds(hi)[1]
    if exact:
        return CReal.of(total)
    return CReal.interval(max(lo_sum, ZERO), hi_sum)


def weighted_norm(masses, values, p):
    """``(sum m |v|**p) ** (1/p)`` as a CReal; max over positive masses for p = oo."""
    p = parse_exponent(p)
    if p == INF:
        best = ZERO
        for m, v in zip(masses, values):
            if sign(m) > 0 and abs(v) > best:
                best = abs(v)
        return CReal.of(best)
    pw = _power_sum(masses, values, p)
    if pw.is_exact:
        return CReal.root(pw.exact, p)
    lo, hi = pow_bounds(pw.lo, pw.hi, 1 / p)
    return CReal.interval(lo, hi)


def lp_norm(space, f, p):
    """Lp norm of a random variable under the space's masses."""
    values = f.values if isinstance(f, RandomVariable) else [as_scalar(v) for v in f]
    return weighted_norm(space.masses, values, p)


# -- results ----------------------------------------------------------------

METHODS = ("extreme-point-L1", "sign-enumeration-Linf", "spectral-L2",
           "multistart-ascent", "brute-oracle")


@dataclass
class OpNormResult:
    """Operator norm with certificates.

    ``value`` is a CReal: the exact value when ``exact``; otherwise an
    enclosure ``[lower, upper]`` when ``upper`` is certified, or the
    certified lower bound widened to the numerical estimate when it is not
    (``upper`` is then None).
    """

    value: CReal
    witness_f: RandomVariable
    method: str
    exact: bool
    lower: Fraction
    upper: Fraction | None
    estimate: float
    p: object = None
    q: object = None
    witness_ratio: CReal | None = None
    notes: list = field(default_factory=list)

    def as_float(self):
        return self.estimate


# -- cell view ----------------------------------------------------------------

class _Cells:
    """Join cells with per-component index lists."""

    def __init__(self, space, a, b):
        if a.space is not b.space and a.space != b.space:
            raise SpaceMismatchError("partitions live on different spaces")
        if a.space is not space and a.space != space:
            raise SpaceMismatchError("partitions live on another space")
        self.space = space
        self.table = t = Contingency(a, b)
        self.m = t.mass
        self.ca, self.cb = t.cell_a, t.cell_b
        self.row, self.col = t.row, t.col
        self.components = sorted(t.components(), key=min)

    def kappa(self, k):
        return self.table.spike_l1(k)

    def to_rv(self, per_cell):
        vals = [ZERO] * len(self.space.ids)
        for k, members in enumerate(self.table.members):
            for i in members:
                vals[i] = per_cell[k]
        return RandomVariable(self.space, vals)

    def apply(self, f):
        return self.table.apply_difference(f)

    def float_matrix(self, cells=None):
        cells = list(range(len(self.m))) if cells is None else cells
        m = [float(self.m[k]) for k in cells]
        T = np.zeros((len(cells), len(cells)))
        for i, c in enumerate(cells):
            for j, d in enumerate(cells):
                if self.ca[c] == self.ca[d]:
                    T[i, j] += m[j] / float(self.row[self.ca[c]])
                if self.cb[c] == self.cb[d]:
                    T[i, j] -= m[j] / float(self.col[self.cb[c]])
        return T, np.array(m)


def _ratio(cells, f, p, q):
    """Certified ``||T f||_q / ||f||_p`` for a per-cell vector ``f``."""
    num = weighted_norm(cells.m, cells.apply(f), q)
    den = weighted_norm(cells.m, f, p)
    if den.hi <= 0:
        return CReal.of(ZERO)
    if num.is_exact and den.is_exact:
        return CReal.of(num.exact / den.exact)
    if num.hi == 0:
        return CReal.of(ZERO)
    return num / den


# -- exact methods ------------------------------------------------------------

def _spike_method(cells):
    best, arg = None, 0
    for k in range(len(cells.m)):
        v = cells.kappa(k)
        if best is None or v > best:
            best, arg = v, k
    f = [ZERO] * len(cells.m)
    if best is None:
        return ZERO, f
    f[arg] = 1 / cells.m[arg]
    return best, f


def _op_1_1(cells):
    value, f = _spike_method(cells)
    return _exact_result(cells, value, f, "extreme-point-L1", 1, 1)


def _op_inf_inf(cells):
    # ||T||_{oo->oo} = ||T||_{1->1} by self-adjointness; the maximizing sign
    # vector for the row of cell c follows the signs of that row.
    value, spike = _spike_method(cells)
    n = len(cells.m)
    f = [ONE] * n
    if value:
        c = next(k for k, v in enumerate(spike) if v)
        a, b = cells.ca[c], cells.cb[c]
        for k in range(n):
            coef = ZERO
            if cells.ca[k] == a:
                coef += cells.m[k] / cells.row[a]
            if cells.cb[k] == b:
                coef -= cells.m[k] / cells.col[b]
            f[k] = ONE if sign(coef) >= 0 else -ONE
    return _exact_result(cells, value, f, "sign-enumeration-Linf", INF, INF)


def _exact_result(cells, value, f, method, p, q):
    cr = CReal.of(value)
    return OpNormResult(cr, cells.to_rv(f), method, True, cr.lo, cr.hi, float(value), p, q,
                        witness_ratio=_ratio(cells, f, p, q) if any(f) else CReal.of(ZERO))


def _enum_component(cells, comp, q, approx):
    """Max over sign patterns of ``||T s||_q**q`` restricted to one component.

    Returns ``(value_power, signs, exact)`` with ``value_power`` a CReal.
    """
    J = len(comp)
    if J == 0:
        return CReal.of(ZERO), [], True
    rows = sorted({cells.ca[k] for k in comp})
    cols = sorted({cells.cb[k] for k in comp})
    ri = {r: i for i, r in enumerate(rows)}
    ci = {c: i for i, c in enumerate(cols)}
    ca = [ri[cells.ca[k]] for k in comp]
    cb = [ci[cells.cb[k]] for k in comp]
    w = [cells.m[k] for k in comp]
    rw = [cells.row[r] for r in rows]
    cw = [cells.col[c] for c in cols]
    patterns = 1 << (J - 1)
    if patterns > enumeration_budget():
        if not approx:
            raise BudgetExceeded(
                f"{patterns} sign patterns exceed the enumeration budget; "
                "pass --approx for a labeled lower bound or raise SIGMA_LAB_BUDGET")
        return None
    if q == 1:
        coef = [w[k] / (rw[ca[k]] * cw[cb[k]]) for k in range(J)]
        value, mask = kernels.sign_l1_max(ca, cb, w, rw, cw, coef)
        signs = [-ONE if (mask >> k) & 1 else ONE for k in range(J)]
        return CReal.of(value), signs, True
    # general q: screen in floating point, then certify the leading patterns
    T, m = cells.float_matrix(comp)
    qf = float(q)
    best = []
    for mask in range(patterns):
        s = np.array([-1.0 if (mask >> k) & 1 else 1.0 for k in range(J)])
        val = float(np.sum(m * np.abs(T @ s) ** qf))
        best.append((val, mask))
    top = max(v for v, _ in best)
    cands = [mk for v, mk in best if v >= top * (1 - 1e-9) - 1e-300]
    winner, win_mask = None, None
    for mk in cands:
        s = [-ONE if (mk >> k) & 1 else ONE for k in range(J)]
        full = [ZERO] * len(cells.m)
        for k, c in enumerate(comp):
            full[c] = s[k]
        t = cells.apply(full)
        pw = _power_sum([cells.m[c] for c in comp], [t[c] for c in comp], q)
        if winner is None or compare(pw, winner) == 1:
            winner, win_mask = pw, mk
    signs = [-ONE if (win_mask >> k) & 1 else ONE for k in range(J)]
    ambiguous = any(compare(_pattern_power(cells, comp, mk, q), winner) is None
                    for mk in cands if mk != win_mask)
    return winner, signs, winner.is_exact and not ambiguous


def _pattern_power(cells, comp, mask, q):
    full = [ZERO] * len(cells.m)
    for k, c in enumerate(comp):
        full[c] = -ONE if (mask >> k) & 1 else ONE
    t = cells.apply(full)
    return _power_sum([cells.m[c] for c in comp], [t[c] for c in comp], q)


def _op_inf_q(cells, q, approx):
    powers, witness, exact = [], [ZERO] * len(cells.m), True
    for comp in cells.components:
        got = _enum_component(cells, comp, q, approx)
        if got is None:
            return None
        pw, signs, ex = got
        exact = exact and ex
        powers.append(pw)
        for k, c in enumerate(comp):
            witness[c] = signs[k]
    total = powers[0]
    for pw in powers[1:]:
        total = total + pw
    if total.is_exact:
        value = CReal.root(total.exact, q)
    else:
        lo, hi = pow_bounds(max(total.lo, ZERO), total.hi, 1 / Fraction(q))
        value = CReal.interval(lo, hi)
    return OpNormResult(value, cells.to_rv(witness), "sign-enumeration-Linf",
                        exact and value.is_exact, value.lo, value.hi, float(value), INF, q,
                        witness_ratio=_ratio(cells, witness, INF, q))


# -- spectral method for p = q = 2 ------------------------------------------------

def ldl_psd(S):
    """Exact PSD test by symmetric-pivoted LDL^T: ``(is_psd, is_singular)``."""
    n = len(S)
    S = [list(r) for r in S]
    active = list(range(n))
    while active:
        piv = max(active, key=lambda i: S[i][i])
        d = S[piv][piv]
        if d < 0:
            return False, False
        if d == 0:
            for i in active:
                for j in active:
                    if S[i][j] != 0:
                        return False, False
            return True, True
        active.remove(piv)
        row = S[piv]
        for i in active:
            factor = S[i][piv] / d
            if not factor:
                continue
            Si = S[i]
            for j in active:
                if row[j]:
                    Si[j] = Si[j] - factor * row[j]
    return True, False


def _gram(weights, row_tot, col_tot):
    """``M[a][a'] = sum_b W[a,b] W[a',b] / w_b`` and the diagonal ``w_a``."""
    na = len(row_tot)
    M = [[ZERO] * na for _ in range(na)]
    by_col = {}
    for (a, b), w in weights.items():
        by_col.setdefault(b, []).append((a, w))
    for b, entries in by_col.items():
        wb = col_tot[b]
        for a, x in entries:
            for a2, y in entries:
                M[a][a2] = M[a][a2] + x * y / wb
    return M, list(row_tot)


def _null_vector(weights, na, nb):
    """Exact nonzero ``y`` with ``sum_a W[a,b] y_a = 0`` for every b (needs na > nb)."""
    rows = [[weights.get((a, b), ZERO) for a in range(na)] for b in range(nb)]
    pivots = []
    r = 0
    for c in range(na):
        pr = next((i for i in range(r, nb) if rows[i][c]), None)
        if pr is None:
            continue
        rows[r], rows[pr] = rows[pr], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [v * inv for v in rows[r]]
        for i in range(nb):
            if i != r and rows[i][c]:
                fac = rows[i][c]
                rows[i] = [x - fac * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == nb:
            break
    free = next(c for c in range(na) if c not in pivots)
    y = [ZERO] * na
    y[free] = ONE
    for i, c in enumerate(pivots):
        y[c] = -rows[i][free]
    return y


def _rayleigh(M, D, y):
    num = ZERO
    for i, yi in enumerate(y):
        if yi:
            for j, yj in enumerate(y):
                if yj and M[i][j]:
                    num = num + yi * M[i][j] * yj
    den = sum((D[i] * yi * yi for i, yi in enumerate(y) if yi), ZERO)
    return num / den


def _shifted(M, D, mu):
    return [[M[i][j] - (mu * D[i] if i == j else ZERO) for j in range(len(D))]
            for i in range(len(D))]


def _to_fraction_vec(v, bits=48):
    scale = max(abs(x) for x in v) or 1.0
    return [Fraction(round(x / scale * 2**bits), 2**bits) for x in v]


def _min_eig_certified(M, D):
    """Smallest eigenvalue of the pencil (M, D): ``(lo, hi, exact_value_or_None, y)``.

    ``y`` is a rational vector whose exact Rayleigh quotient is ``hi``.
    """
    n = len(D)
    Mf = np.array([[float(x) for x in r] for r in M])
    Df = np.array([float(x) for x in D])
    s = 1 / np.sqrt(Df)
    vals, vecs = np.linalg.eigh(Mf * s[:, None] * s[None, :])
    mu0 = float(vals[0])
    y = _to_fraction_vec(vecs[:, 0] * s)
    if not any(y):
        y = [ONE] + [ZERO] * (n - 1)
    hi = _rayleigh(M, D, y)
    for den in (1, 2, 4, 8, 16, 10, 100, 1000, 10**4, 10**6, 10**9):
        cand = Fraction(mu0).limit_denominator(den)
        if cand > hi or cand < 0:
            continue
        psd, singular = ldl_psd(_shifted(M, D, cand))
        if psd and singular:
            return cand, cand, cand, y
    if hi < 0:
        hi = ZERO
    gap = Fraction(1, 10**15)
    lo = None
    for _ in range(30):
        cand = Fraction(mu0) - gap
        if cand <= 0:
            lo = ZERO
            break
        psd, _ = ldl_psd(_shifted(M, D, cand))
        if psd:
            lo = cand
            break
        gap *= 10
    if lo is None:
        lo = ZERO
    return lo, hi, None, y


def _side(table, comp, forward):
    """Gram data of one side of a component (A-atoms if ``forward``)."""
    ca, cb = (table.cell_a, table.cell_b) if forward else (table.cell_b, table.cell_a)
    rt, ct = (table.row, table.col) if forward else (table.col, table.row)
    rows = sorted({ca[k] for k in comp})
    cols = sorted({cb[k] for k in comp})
    ri = {r: i for i, r in enumerate(rows)}
    ci = {c: i for i, c in enumerate(cols)}
    weights = {(ri[ca[k]], ci[cb[k]]): table.mass[k] for k in comp}
    return rows, cols, weights, [rt[r] for r in rows], [ct[c] for c in cols]


def _op_2_2(cells):
    table = cells.table
    n = len(cells.m)
    found = []  # per component: (norm2_lo, norm2_hi, exact norm2 or None, y, rows, owner)
    for comp in cells.components:
        comp_best = None
        for forward in (True, False):
            rows, cols, weights, rt, ct = _side(table, comp, forward)
            if len(rows) <= 1:
                continue
            own = table.cell_a if forward else table.cell_b
            if len(rows) > len(cols):
                y = _null_vector(weights, len(rows), len(cols))
                cand = (ONE, ONE, ONE, y, rows, own)
            else:
                M, D = _gram(weights, rt, ct)
                lo, hi, ex, y = _min_eig_certified(M, D)
                cand = (1 - hi, 1 - lo, None if ex is None else 1 - ex, y, rows, own)
            if comp_best is None or cand[0] > comp_best[0]:
                comp_best = cand
        if comp_best is not None:
            found.append(comp_best)
    if not found:
        return _exact_result(cells, ZERO, [ZERO] * n, "spectral-L2", 2, 2)
    best = max(found, key=lambda c: c[0])
    lo2, hi2, ex2, y, rows, own = best
    top_hi = max(c[1] for c in found)
    witness = [ZERO] * n
    pos = {r: i for i, r in enumerate(rows)}
    for k in range(n):
        i = pos.get(own[k])
        if i is not None:
            witness[k] = y[i]
    ratio = _ratio(cells, witness, 2, 2)
    if ex2 is not None and top_hi <= ex2:
        value = CReal.root(ex2, 2)
        return OpNormResult(value, cells.to_rv(witness), "spectral-L2", True,
                            value.lo, value.hi, float(value), 2, 2, witness_ratio=ratio,
                            notes=[f"norm squared = {ex2}"])
    lo, _ = pow_bounds(max(lo2, ZERO), max(lo2, ZERO), Fraction(1, 2))
    _, hi = pow_bounds(max(top_hi, ZERO), max(top_hi, ZERO), Fraction(1, 2))
    lo = max(lo, ratio.lo)
    value = CReal.interval(lo, max(lo, hi))
    return OpNormResult(value, cells.to_rv(witness), "spectral-L2", False,
                        value.lo, value.hi, float(value), 2, 2, witness_ratio=ratio)


# -- multistart ascent ---------------------------------------------------------------

def _fnorm(m, x, p):
    if p == INF:
        return float(np.max(np.abs(x))) if len(x) else 0.0
    return float(np.sum(m * np.abs(x) ** p) ** (1.0 / p))


def _dual(x, r):
    """Norming direction of ``x`` in L^r (up to scale)."""
    if r == 1:
        return np.sign(x)
    return np.sign(x) * np.abs(x) ** (r - 1)


def _ascent(T, m, p, q, starts):
    pf, qf = float(p), float(q)
    pstar = pf / (pf - 1)
    best_val, best_f = -1.0, None
    for f in starts:
        nf = _fnorm(m, f, pf)
        if nf == 0:
            continue
        f = f / nf
        val = _fnorm(m, T @ f, qf)
        last_good, last_val = 0, val
        for it in range(MAX_ITERS):
            h = _dual(T @ f, qf)
            g = T @ h
            if not np.any(g):
                break
            nf_new = _dual(g, pstar)
            nrm = _fnorm(m, nf_new, pf)
            if nrm == 0:
                break
            cand = nf_new / nrm
            cval = _fnorm(m, T @ cand, qf)
            if cval >= val:
                f, val = cand, cval
            if val - last_val > STALL_TOL * max(1.0, abs(val)):
                last_val, last_good = val, it
            elif it - last_good >= STALL_ITERS:
                break
        if val > best_val:
            best_val, best_f = val, f
    return best_val, best_f


def _starts(cells, rng):
    n = len(cells.m)
    out = []
    for k in range(min(n, 8)):
        e = np.zeros(n)
        e[k] = 1.0
        out.append(e)
    for atoms, owner in ((cells.row, cells.ca), (cells.col, cells.cb)):
        for a in range(min(len(atoms), 4)):
            out.append(np.array([1.0 if owner[k] == a else 0.0 for k in range(n)]))
    while len(out) < STARTS // 2:
        out.append(rng.choice([-1.0, 1.0], size=n))
    while len(out) < STARTS:
        out.append(rng.standard_normal(n))
    return out[:STARTS]


def _op_general(cells, p, q):
    T, m = cells.float_matrix()
    rng = np.random.default_rng(SEED)
    starts = _starts(cells, rng)
    if len(cells.m) <= 16:
        # best sign pattern of the L-infinity problem as an extra start
        got = _op_inf_q(cells, 1, approx=True)
        if got is not None:
            starts.append(np.array([float(v) for v in _cell_values(cells, got.witness_f)]))
    est, f = _ascent(T, m, p, q, starts)
    if f is None:
        return _exact_result(cells, ZERO, [ZERO] * len(cells.m), "multistart-ascent", p, q)
    fr = _to_fraction_vec(f)
    ratio = _ratio(cells, fr, p, q)
    lower = ratio.lo
    hi = max(lower, Fraction(est) * (1 + Fraction(1, 10**9)))
    value = CReal.interval(lower, hi)
    return OpNormResult(value, cells.to_rv(fr), "multistart-ascent", False, lower, None,
                        max(est, float(lower)), p, q, witness_ratio=ratio,
                        notes=[f"{STARTS} starts, seed {SEED}; value is a certified lower bound"])


def _cell_values(cells, rv):
    return [rv.values[cells.table.members[k][0]] for k in range(len(cells.m))]


# -- dispatch --------------------------------------------------------------------

def op_norm(space, a, b, p, q, approx=False, method=None):
    """``sup ||(P_a - P_b) f||_q / ||f||_p`` with method chosen by ``(p, q)``."""
    p, q = parse_exponent(p), parse_exponent(q)
    if q > p:
        raise HypothesisViolation(f"q = {_fmt_exp(q)} exceeds p = {_fmt_exp(p)}")
    cells = _Cells(space, a, b)
    if method == "brute-oracle":
        return brute_opnorm(space, a, b, p, q)
    if p == 1:
        res = _op_1_1(cells)
    elif p == INF and q == INF:
        res = _op_inf_inf(cells)
    elif p == INF:
        res = _op_inf_q(cells, q, approx)
        if res is None:
            res = _op_general(cells, Fraction(10**6), q)
            res.method = "multistart-ascent"
            res.notes.append("sign enumeration over budget: ascent with p = 10**6 approximates p = oo")
            res.p = INF
            res.witness_f = RandomVariable(space, [ONE if sign(v) >= 0 else -ONE
                                                   for v in res.witness_f.values])
            res.witness_ratio = lp_ratio(space, a, b, res.witness_f, INF, q)
            res.lower = res.witness_ratio.lo
            res.value = CReal.interval(res.lower, max(res.lower, res.value.hi))
    elif p == 2 and q == 2:
        res = _op_2_2(cells)
    else:
        res = _op_general(cells, p, q)
    res.p, res.q = p, q
    return res


def lp_ratio(space, a, b, f, p, q):
    """Certified ``||(P_a - P_b) f||_q / ||f||_p`` for an outcome-level ``f``."""
    t = cond_exp(space, a, f) - cond_exp(space, b, f)
    num = lp_norm(space, t, q)
    den = lp_norm(space, f, p)
    if den.hi <= 0:
        raise ValueError("zero function")
    if num.is_exact and den.is_exact:
        return CReal.of(num.exact / den.exact)
    if num.hi == 0:
        return CReal.of(ZERO)
    return num / den


# -- brute-force oracle --------------------------------------------------------------

def brute_opnorm(space, a, b, p, q):
    """Dense outcome-level oracle: spikes (p = 1), all sign vectors (p = oo), SVD (2, 2).

    Works on the positive outcomes directly, with no join reduction.
    """
    p, q = parse_exponent(p), parse_exponent(q)
    pos = space.positive()
    Pa, Pb = CondExpOperator(space, a), CondExpOperator(space, b)
    n = len(space.ids)

    def apply(values):
        return [x - y for x, y in zip(Pa.apply(values).values, Pb.apply(values).values)]

    if p == 1 and q == 1:
        best = ZERO
        for i in pos:
            f = [ZERO] * n
            f[i] = 1 / space.masses[i]
            v = sum((space.masses[j] * abs(t) for j, t in enumerate(apply(f))), ZERO)
            best = max(best, v)
        cr = CReal.of(best)
        return OpNormResult(cr, RandomVariable.constant(space, 0), "brute-oracle", True,
                            cr.lo, cr.hi, float(best), p, q)
    if p == INF and q in (1, INF):
        best = ZERO
        k = len(pos)
        if (1 << k) > enumeration_budget():
            raise BudgetExceeded("oracle enumeration over budget")
        for mask in range(1 << k):
            f = [ZERO] * n
            for j, i in enumerate(pos):
                f[i] = -ONE if (mask >> j) & 1 else ONE
            t = apply(f)
            if q == 1:
                v = sum((space.masses[j] * abs(x) for j, x in enumerate(t)), ZERO)
            else:
                v = max((abs(t[i]) for i in pos), default=ZERO)
            best = max(best, v)
        cr = CReal.of(best)
        return OpNormResult(cr, RandomVariable.constant(space, 0), "brute-oracle", True,
                            cr.lo, cr.hi, float(best), p, q)
    if p == 2 and q == 2:
        mf = np.array([float(space.masses[i]) for i in pos])
        Tm = np.array([[float(Pa.rows[i][j] - Pb.rows[i][j]) for j in pos] for i in pos])
        S = np.sqrt(mf)[:, None] * Tm / np.sqrt(mf)[None, :]
        v = float(np.linalg.svd(S, compute_uv=False)[0]) if len(pos) else 0.0
        cr = CReal.interval(Fraction(v), Fraction(v))
        return OpNormResult(cr, RandomVariable.constant(space, 0), "brute-oracle", False,
                            cr.lo, None, v, p, q)
    raise ValueError("the dense oracle covers (1,1), (oo,1), (oo,oo) and (2,2)")


# -- structural lower bounds ------------------------------------------------------------

@dataclass
class LowerBound:
    kind: str
    witness_f: RandomVariable
    bound: object
    norm: str
    event: Event


def _first_nonmeasurable(src, dst):
    """First atom of ``src`` that is not ``dst``-measurable, as a mask (or None)."""
    for m in src.atoms:
        if not dst.is_measurable(m):
            return m
    return None


def _independent_event(space, of, against):
    """An event of ``of`` with 0 < P < 1 independent of every atom of ``against``."""
    if (1 << of.n_atoms) > enumeration_budget():
        raise BudgetExceeded("event search over budget; raise SIGMA_LAB_BUDGET")
    for mask in of.events():
        pe = space.measure(mask)
        if not (0 < pe < 1):
            continue
        if all(space.measure(mask & at) == pe * m for at, m in zip(against.atoms, against.atom_masses)):
            return mask
    return None


def lower_bound_witness(space, a, b, kind):
    """Structural witness ``f`` and the certified lower bound it gives on the norm.

    kinds: ``distinct-L1`` (L1->L1 >= 1), ``distinct-Linf`` (Linf->Linf >= 1/2),
    ``nested`` (a strictly inside b: every p->p norm >= 1) and
    ``independent-event`` (a nontrivial event of one field independent of the
    other: every p->p norm >= 1).
    """
    if kind in ("distinct-L1", "distinct-Linf"):
        src, dst = b, a
        mask = _first_nonmeasurable(b, a)
        if mask is None:
            src, dst = a, b
            mask = _first_nonmeasurable(a, b)
        if mask is None:
            raise HypothesisViolation("the two sigma-fields are equal")
        ind = RandomVariable.indicator(mask, space)
        if kind == "distinct-L1":
            f = ind - cond_exp(space, dst, ind)
            return LowerBound(kind, f, lp_ratio(space, a, b, f, 1, 1).exact, "L1->L1", Event(space, mask))
        return LowerBound(kind, ind, lp_ratio(space, a, b, ind, INF, INF).exact, "Linf->Linf",
                          Event(space, mask))
    if kind == "nested":
        if not is_subfield(a, b) or a == b:
            raise HypothesisViolation("nested witness needs the first field strictly inside the second")
        mask = _first_nonmeasurable(b, a)
        ind = RandomVariable.indicator(mask, space)
        f = ind - cond_exp(space, a, ind)
        return LowerBound(kind, f, ONE, "Lp->Lp, every p", Event(space, mask))
    if kind == "independent-event":
        mask = _independent_event(space, b, a)
        if mask is None:
            mask = _independent_event(space, a, b)
        if mask is None:
            raise HypothesisViolation("no nontrivial event of one field is independent of the other")
        pe = space.measure(mask)
        vals = [(1 / pe if (mask >> i) & 1 else -1 / (1 - pe)) if not space.is_null(i) else ZERO
                for i in range(len(space.ids))]
        return LowerBound(kind, RandomVariable(space, vals), ONE, "Lp->Lp, every p", Event(space, mask))
    raise ValueError(f"unknown witness kind {kind!r}")


# -- inequality chains ---------------------------------------------------------------------

@dataclass
class ChainReport:
    holds: bool
    checked: int
    norm: OpNormResult
    rho_ab: object
    rho_ba: object
    violation: dict | None = None
    rows: list = field(default_factory=list)


def verify_onc_hc_chain(space, a, b, p, q, norm=None, keep_rows=False):
    """Check ``inf_symdiff(E, b) <= mid(E) <= 2**q ||T||**q`` over all events E of a (and b of a).

    ``mid(E) = 2**q E|1_E - P_b 1_E|**q`` for finite q and ``2 E|1_E - P_b 1_E|``
    for q = oo, where the right end is ``2 ||T||``.  The norm side uses the
    certified lower bound, lifted by the event indicators themselves.
    """
    p, q = parse_exponent(p), parse_exponent(q)
    if norm is None:
        norm = op_norm(space, a, b, p, q)
    lower = CReal.of(norm.lower) if not norm.exact else norm.value
    rows = []
    violation = None
    checked = 0
    budget = enumeration_budget()
    for first, second in ((a, b), (b, a)):
        if (1 << first.n_atoms) > budget:
            raise BudgetExceeded("event enumeration over budget; raise SIGMA_LAB_BUDGET")
        for mask in first.events():
            checked += 1
            ind = RandomVariable.indicator(mask, space)
            resid = ind - cond_exp(space, second, ind)
            inf, _ = inf_symdiff(mask, second)
            ev = lp_ratio(space, a, b, ind, p, q) if mask & space.support else CReal.of(ZERO)
            cap_norm = _max_creal(lower, ev)
            if q == INF:
                mid = CReal.of(2 * abs(resid).expectation())
                right = CReal.of(2) * cap_norm
            else:
                two_q = CReal.of(2).pow(q)
                mid = two_q * _power_sum(space.masses, resid.values, q)
                right = two_q * cap_norm.pow(q)
            left_ok = compare(inf, mid)
            right_ok = compare(mid, right)
            ok1 = left_ok is not None and left_ok <= 0
            ok2 = right_ok is not None and right_ok <= 0
            if keep_rows:
                rows.append({"event": mask, "inf": inf, "mid": mid, "right": right})
            if not (ok1 and ok2) and violation is None:
                violation = {"event": Event(space, mask), "inf": inf, "mid": mid, "right": right,
                             "link": "inf<=mid" if not ok1 else "mid<=2^q||T||^q"}
    rab, rba = rho(a, b).value, rho(b, a).value
    return ChainReport(violation is None, checked, norm, rab, rba, violation, rows)


def _max_creal(x, y):
    x, y = CReal.of(x), CReal.of(y)
    c = compare(x, y)
    if c is None:
        return x if x.lo >= y.lo else y
    return x if c >= 0 else y


# -- Rogge-type bound for nested fields ------------------------------------------------------

def rogge_constant(r):
    r = Fraction(r)
    return CReal.of(2) * CReal.root(2, r) if r < 2 else CReal.of(2)


def truncation_tail(space, family, r, a):
    """``sup_f ||f 1_{|f| > a}||_r`` over the family."""
    a = as_scalar(a)
    best = CReal.of(ZERO)
    for f in family:
        vals = [v if abs(v) > a else ZERO for v in f.values]
        best = _max_creal(best, weighted_norm(space.masses, vals, r))
    return best


@dataclass
class RoggeReport:
    holds: bool
    lhs: CReal
    rhs: CReal
    delta: object
    r: Fraction
    a: object


def rogge_check(space, small, big, family, r, a):
    """``sup_f ||P_big f - P_small f||_r <= C_r a [d(1-d)]**(1/r) + 2 tail(a)`` with ``d = rho(big, small)``."""
    if not is_subfield(small, big):
        raise HypothesisViolation("Rogge bound needs the first field inside the second")
    r = Fraction(r)
    lhs = CReal.of(ZERO)
    for f in family:
        t = cond_exp(space, big, f) - cond_exp(space, small, f)
        lhs = _max_creal(lhs, lp_norm(space, t, r))
    d = rho(big, small).value
    core = CReal.root(d * (1 - d), r)
    rhs = rogge_constant(r) * CReal.of(as_scalar(a)) * core + CReal.of(2) * truncation_tail(space, family, r, a)
    c = compare(lhs, rhs)
    return RoggeReport(c is not None and c <= 0, lhs, rhs, d, r, a)


def landers_check(a, b):
    """``rho(a v b, b) <= 4 rho(a, b)``: returns (holds, left, right)."""
    from .lattice import join
    left = rho(join(a, b), b).value
    right = 4 * rho(a, b).value
    return left <= right, left, right


def sandwich_check(space, event, part):
    """``inf/2 <= E|P_part 1_E - 1_E| <= 2 inf``: returns (holds, inf, middle)."""
    mask = event.mask if isinstance(event, Event) else event
    inf, _ = inf_symdiff(mask, part)
    ind = RandomVariable.indicator(mask, space)
    mid = abs(cond_exp(space, part, ind) - ind).expectation()
    return inf <= 2 * mid and mid <= 2 * inf, inf, mid
