"""Hausdorff-type distances between sigma-fields of one finite space.

``rho(A, B)`` is the sup over A-events E of the inf over B-events F of
``P(E ^ F)``.  The inner inf has a closed form atom by atom; the outer sup
is a subset search over A-atoms that splits along the connected components
of the atom-intersection graph.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

from . import kernels
from .conditioning import Contingency
from .errors import BudgetExceeded, SpaceMismatchError, atom_limit, enumeration_budget
from .space import Event, iter_bits

ZERO = Fraction(0)


def _mask(event):
    return event.mask if isinstance(event, Event) else event


def inf_symdiff(event, part):
    """Least ``P(event ^ F)`` over ``part``-measurable ``F``, with the minimizer.

    Per atom b the best choice costs ``min(P(E & b), P(b) - P(E & b))``; the
    minimizer keeps the atoms where ``P(E & b) > P(b) / 2``.
    """
    if isinstance(event, Event) and event.space is not part.space and event.space != part.space:
        raise SpaceMismatchError("event and partition live on different spaces")
    mask = _mask(event)
    space = part.space
    inside = [ZERO] * part.n_atoms
    for i, l in enumerate(part.labels):
        if l >= 0 and (mask >> i) & 1:
            inside[l] = inside[l] + space.masses[i]
    total = ZERO
    keep = 0
    for l, (x, w) in enumerate(zip(inside, part.atom_masses)):
        rest = w - x
        if x > rest:
            keep |= part.atoms[l]
            total = total + rest
        else:
            total = total + x
    return total, Event(space, keep)


@dataclass
class RhoResult:
    value: object
    witness: Event
    exact: bool = True
    nodes: int = 0


@dataclass
class MetricReport:
    rho_ab: object
    rho_ba: object
    witness_a: Event
    witness_b: Event
    exact: bool = True
    D: object = field(init=False)
    delta: object = field(init=False)

    def __post_init__(self):
        self.D = self.rho_ab + self.rho_ba
        self.delta = self.rho_ab if self.rho_ab >= self.rho_ba else self.rho_ba

    @property
    def label(self):
        return "exact" if self.exact else "LOWER BOUND"


BITSET_LIMIT = 1 << 26


def _star_bits(ints, total, scale):
    """Integer subset sums as big-int bitsets; one prefix bitset per item for backtracking."""
    prefix = [1]
    for w in ints:
        prefix.append(prefix[-1] | (prefix[-1] << w))
    reach = prefix[-1]
    half = total // 2
    window = reach & ((1 << (half + 1)) - 1)
    v = window.bit_length() - 1   # largest reachable sum <= total / 2

    def least_mask(s):
        # exclude the highest item whenever the rest can still reach s
        mask = 0
        for i in range(len(ints) - 1, -1, -1):
            if (prefix[i] >> s) & 1:
                continue
            mask |= 1 << i
            s -= ints[i]
        return mask

    mask = min(least_mask(v), least_mask(total - v))
    return Fraction(v, scale), mask


def _star(masses, total):
    """Subset sums of one column: best ``min(s, total - s)`` with least mask."""
    if all(isinstance(m, Fraction) for m in masses):
        scale = 1
        for m in masses:
            scale = scale * m.denominator // gcd(scale, m.denominator)
        ints = [int(m * scale) for m in masses]
        if sum(ints) <= BITSET_LIMIT:
            return _star_bits(ints, sum(ints), scale)
    budget = enumeration_budget()
    reach = {ZERO: 0}
    for i, m in enumerate(masses):
        nxt = dict(reach)
        for s, mask in reach.items():
            t = s + m
            cand = mask | (1 << i)
            old = nxt.get(t)
            if old is None or cand < old:
                nxt[t] = cand
        reach = nxt
        if len(reach) > budget:
            return None
    best, best_mask = None, 0
    for s, mask in reach.items():
        v = s if s <= total - s else total - s
        if best is None or v > best or (v == best and mask < best_mask):
            best, best_mask = v, mask
    return best, best_mask


def _greedy(weights, col_tot):
    """Greedy insertion then single-flip local search; a lower bound only."""
    n, nb = len(weights), len(col_tot)
    x = [ZERO] * nb

    def score(xs):
        return sum((min(v, w - v) for v, w in zip(xs, col_tot)), ZERO)

    chosen = [False] * n
    current = score(x)
    improved = True
    while improved:
        improved = False
        for i in range(n):
            sgn = -1 if chosen[i] else 1
            trial = [v + sgn * w for v, w in zip(x, weights[i])]
            s = score(trial)
            if s > current:
                x, current, chosen[i] = trial, s, not chosen[i]
                improved = True
    mask = sum(1 << i for i in range(n) if chosen[i])
    return current, mask


def rho(a, b, approx=False):
    """``rho(a, b)``: worst-approximable ``a``-event, with the witness event."""
    if a.space is not b.space and a.space != b.space:
        raise SpaceMismatchError("partitions live on different spaces")
    table = Contingency(a, b)
    limit = atom_limit()
    total = ZERO
    witness = 0
    exact = True
    for cells in table.components():
        rows = sorted({table.cell_a[k] for k in cells})
        cols = sorted({table.cell_b[k] for k in cells})
        if len(rows) == 1:
            continue  # the lone a-atom is a union of b-atoms: nothing to gain
        ridx = {r: i for i, r in enumerate(rows)}
        cidx = {c: j for j, c in enumerate(cols)}
        weights = [[ZERO] * len(cols) for _ in rows]
        for k in cells:
            weights[ridx[table.cell_a[k]]][cidx[table.cell_b[k]]] = table.mass[k]
        col_tot = [table.col[c] for c in cols]
        found = None
        if len(cols) == 1:
            found = _star([w[0] for w in weights], col_tot[0])
        if found is None:
            if len(rows) > limit:
                if not approx:
                    raise BudgetExceeded(
                        f"a component has {len(rows)} atoms, above the exact limit of {limit}; "
                        "pass --approx for a labeled lower bound or raise SIGMA_LAB_BUDGET")
                found = _greedy(weights, col_tot)
                exact = False
            else:
                found = kernels.subset_balance_max(weights, col_tot)
        value, mask = found
        total = total + value
        for i in iter_bits(mask):
            witness |= a.atoms[rows[i]]
    return RhoResult(total, Event(a.space, witness), exact)


def hausdorff(a, b, approx=False):
    """Both one-sided distances, ``D = rho_ab + rho_ba`` and ``delta = max``."""
    ab = rho(a, b, approx)
    ba = rho(b, a, approx)
    return MetricReport(ab.value, ba.value, ab.witness, ba.witness, ab.exact and ba.exact)


def hausdorff_D(a, b, approx=False):
    return hausdorff(a, b, approx).D


# -- brute-force oracles --------------------------------------------------

def brute_inf_symdiff(event, part):
    """Minimum over all ``2**atoms`` events of ``part`` (oracle)."""
    mask = _mask(event)
    space = part.space
    return min(space.measure(mask ^ f) for f in part.events())


def brute_rho(a, b):
    """Sup-inf over all event pairs (oracle)."""
    space = a.space
    events_b = list(b.events())
    best = ZERO
    for e in a.events():
        v = min(space.measure(e ^ f) for f in events_b)
        if v > best:
            best = v
    return best


def brute_hausdorff(a, b):
    return brute_rho(a, b), brute_rho(b, a)

