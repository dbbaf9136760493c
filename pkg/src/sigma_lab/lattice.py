"""Complete sub-sigma-fields of a finite space, stored as canonical partitions.

A partition keeps one label per outcome: ``-1`` on null outcomes, otherwise
the atom index, with atoms numbered by their least outcome.  Two partitions
that differ only on null outcomes therefore have identical labels, which is
exactly completion with respect to the null sets.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations

from .errors import HypothesisViolation, InvalidSpaceError, SpaceMismatchError
from .space import Event, check_same_space, iter_bits, mask_of


class UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))
        self.rank = [0] * n

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x, y):
        x, y = self.find(x), self.find(y)
        if x == y:
            return
        if self.rank[x] < self.rank[y]:
            x, y = y, x
        elif self.rank[x] == self.rank[y]:
            self.rank[x] += 1
        self.parent[y] = x


class Partition:
    """A P-complete sub-sigma-field, as atoms of positive mass."""

    __slots__ = ("space", "labels", "n_atoms", "_atoms", "_masses", "_hash")

    def __init__(self, space, raw_labels):
        labels = []
        seen = {}
        support = space.support
        if len(raw_labels) != len(space.ids):
            raise InvalidSpaceError("label vector does not match the space")
        for i, key in enumerate(raw_labels):
            if not (support >> i) & 1:
                labels.append(-1)
                continue
            if key is None:
                raise InvalidSpaceError(f"positive outcome {space.ids[i]!r} has no atom")
            k = seen.get(key)
            if k is None:
                k = seen[key] = len(seen)
            labels.append(k)
        self.space = space
        self.labels = tuple(labels)
        self.n_atoms = len(seen)
        self._atoms = None
        self._masses = None
        self._hash = None

    # -- constructors ---------------------------------------------------
    @classmethod
    def from_atoms(cls, space, atoms):
        """Partition from atoms given as outcome ids, indices, masks or Events.

        Null outcomes may be omitted; every positive outcome must be covered
        exactly once.
        """
        raw = [None] * len(space.ids)
        for k, atom in enumerate(atoms):
            for i in _indices(space, atom):
                if raw[i] is not None:
                    raise InvalidSpaceError(f"outcome {space.ids[i]!r} lies in two atoms")
                raw[i] = k
        return cls(space, raw)

    @classmethod
    def trivial(cls, space):
        return cls(space, [0] * len(space.ids))

    @classmethod
    def discrete(cls, space):
        return cls(space, list(range(len(space.ids))))

    def on(self, space):
        """The same partition on an equivalent space (same outcomes, same null set)."""
        if not self.space.same_null_class(space):
            raise SpaceMismatchError("target space is not equivalent")
        return Partition(space, [None if l < 0 else l for l in self.labels])

    # -- views ----------------------------------------------------------
    @property
    def atoms(self):
        """Atom bitmasks in canonical order."""
        if self._atoms is None:
            buckets = [[] for _ in range(self.n_atoms)]
            for i, l in enumerate(self.labels):
                if l >= 0:
                    buckets[l].append(i)
            self._atoms = tuple(mask_of(b) for b in buckets)
        return self._atoms

    @property
    def atom_masses(self):
        if self._masses is None:
            totals = [Fraction(0)] * self.n_atoms
            masses = self.space.masses
            for i, l in enumerate(self.labels):
                if l >= 0:
                    totals[l] = totals[l] + masses[i]
            self._masses = tuple(totals)
        return self._masses

    def atom_events(self):
        return [Event(self.space, m) for m in self.atoms]

    def atom_ids(self):
        return [[self.space.ids[i] for i in iter_bits(m)] for m in self.atoms]

    def union_of(self, atom_set):
        """Event made of the atoms whose indices are in ``atom_set`` (iterable or bitmask)."""
        if isinstance(atom_set, int):
            atom_set = iter_bits(atom_set)
        mask = 0
        atoms = self.atoms
        for k in atom_set:
            mask |= atoms[k]
        return mask

    def is_measurable(self, event):
        """Whether the event is a union of atoms up to null outcomes."""
        mask = event.mask if isinstance(event, Event) else event
        state = [0] * self.n_atoms  # bit 1: some outcome inside, bit 2: some outside
        for i, l in enumerate(self.labels):
            if l >= 0:
                state[l] |= 1 if (mask >> i) & 1 else 2
        return all(s != 3 for s in state)

    def events(self):
        """All events of the sigma-field (2**n_atoms of them); for oracles only."""
        atoms = self.atoms
        for r in range(1 << self.n_atoms):
            mask = 0
            for k in iter_bits(r):
                mask |= atoms[k]
            yield mask

    def is_trivial(self):
        return self.n_atoms <= 1

    def __eq__(self, other):
        if not isinstance(other, Partition):
            return NotImplemented
        return self.labels == other.labels and (
            self.space is other.space or self.space == other.space)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.labels)
        return self._hash

    def __repr__(self):
        return f"Partition({self.atom_ids()})"


def _indices(space, atom):
    if isinstance(atom, Event):
        check_same_space(space, atom.space)
        return list(iter_bits(atom.mask))
    if isinstance(atom, int):
        return list(iter_bits(atom))
    out = []
    for x in atom:
        if isinstance(x, str):
            try:
                out.append(space.index[x])
            except KeyError:
                raise InvalidSpaceError(f"unknown outcome {x!r}") from None
        else:
            out.append(int(x))
    return out


def _same(a, b):
    if a.space is not b.space and a.space != b.space:
        raise SpaceMismatchError("partitions live on different spaces")


def generate(space, events):
    """Completed sigma-field generated by the events."""
    masks = []
    for e in events:
        if isinstance(e, Event):
            check_same_space(space, e.space)
            masks.append(e.mask)
        elif isinstance(e, int):
            masks.append(e)
        else:
            masks.append(mask_of(_indices(space, e)))
    raw = [tuple((m >> i) & 1 for m in masks) for i in range(len(space.ids))]
    return Partition(space, raw)


def join(a, b):
    """Common refinement."""
    _same(a, b)
    return Partition(a.space, list(zip(a.labels, b.labels)))


def meet(a, b):
    """Sigma-field intersection: connected components of shared atoms."""
    _same(a, b)
    uf = UnionFind(a.n_atoms + b.n_atoms)
    off = a.n_atoms
    for la, lb in zip(a.labels, b.labels):
        if la >= 0:
            uf.union(la, lb + off)
    return Partition(a.space, [uf.find(l) if l >= 0 else None for l in a.labels])


def is_subfield(a, b):
    """``a`` is contained in ``b``: every atom of ``b`` lies inside one atom of ``a``."""
    _same(a, b)
    owner = [-1] * b.n_atoms
    for la, lb in zip(a.labels, b.labels):
        if lb < 0:
            continue
        if owner[lb] < 0:
            owner[lb] = la
        elif owner[lb] != la:
            return False
    return True


def join_all(parts):
    parts = list(parts)
    out = parts[0]
    for p in parts[1:]:
        out = join(out, p)
    return out


def meet_all(parts):
    parts = list(parts)
    out = parts[0]
    for p in parts[1:]:
        out = meet(out, p)
    return out


def _window(parts, n, tail, outer, inner):
    big_n = len(parts)
    if big_n == 0:
        raise HypothesisViolation("empty window: no partitions")
    if tail < 1:
        raise ValueError("tail must be at least 1")
    last = big_n - tail + 1
    if not 1 <= n <= last:
        raise HypothesisViolation(f"empty window: start {n} with tail {tail} and length {big_n}")
    suffix = [None] * (big_n + 2)
    suffix[big_n] = parts[big_n - 1]
    for m in range(big_n - 1, n - 1, -1):
        suffix[m] = inner(parts[m - 1], suffix[m + 1])

    def value(start):
        out = suffix[start]
        for m in range(start + 1, last + 1):
            out = outer(out, suffix[m])
        return out

    val = value(n)
    stabilized = n + 1 <= last and value(n + 1) == val
    return val, stabilized


def windowed_liminf(parts, n, tail=1):
    """``join_{m=n..N-tail+1} meet_{k=m..N} parts[k]`` with a stabilization flag.

    ``n`` is 1-based.  With ``tail=1`` this is the finite-horizon truncation of
    the set-theoretic liminf; larger ``tail`` keeps every tail meet over at
    least ``tail`` stages.
    """
    return _window(parts, n, tail, join, meet)


def windowed_limsup(parts, n, tail=1):
    """``meet_{m=n..N-tail+1} join_{k=m..N} parts[k]`` with a stabilization flag."""
    return _window(parts, n, tail, meet, join)


def brute_events(part):
    """Set of event masks restricted to positive outcomes (oracle helper)."""
    sup = part.space.support
    return {m & sup for m in part.events()}


def brute_meet(a, b):
    """Meet via explicit intersection of the two event sets (oracle)."""
    common = brute_events(a) & brute_events(b)
    # atoms are the minimal nonempty common events
    atoms = [e for e in common if e and not any(f and f != e and (f & e) == f for f in common)]
    return Partition.from_atoms(a.space, atoms)


def brute_join_events(a, b):
    """Intersection-closure of the union of two event sets, closed under unions (oracle)."""
    ea, eb = brute_events(a), brute_events(b)
    gens = {x & y for x in ea for y in eb}
    closed = set(gens)
    changed = True
    while changed:
        changed = False
        for x, y in combinations(list(closed), 2):
            u = x | y
            if u not in closed:
                closed.add(u)
                changed = True
    return closed
