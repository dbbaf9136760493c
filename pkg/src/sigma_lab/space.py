"""Finite weighted probability spaces and their events.

Outcomes are indexed ``0..n-1``; events are bitmasks over those indices.
Zero-mass outcomes are kept in storage and model the null sets.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import InvalidSpaceError, SpaceMismatchError
from .scalar import as_scalar, sign


def iter_bits(mask):
    """Indices of the set bits of ``mask`` in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def mask_of(indices):
    buf = bytearray()
    for i in indices:
        byte = i >> 3
        if byte >= len(buf):
            buf.extend(b"\0" * (byte + 1 - len(buf)))
        buf[byte] |= 1 << (i & 7)
    return int.from_bytes(buf, "little")


class FiniteSpace:
    """Finite outcome set with exact masses summing to one."""

    __slots__ = ("ids", "masses", "index", "support", "_hash")

    def __init__(self, ids, masses):
        ids = tuple(str(i) for i in ids)
        masses = tuple(as_scalar(m) for m in masses)
        if len(ids) != len(masses):
            raise InvalidSpaceError("ids and masses differ in length")
        if not ids:
            raise InvalidSpaceError("a space needs at least one outcome")
        index = {}
        for k, ident in enumerate(ids):
            if ident in index:
                raise InvalidSpaceError(f"duplicate outcome identifier {ident!r}")
            index[ident] = k
        total = Fraction(0)
        support = []
        for ident, m in zip(ids, masses):
            s = sign(m)
            if s < 0:
                raise InvalidSpaceError(f"negative mass {m} on outcome {ident!r}")
            if s > 0:
                support.append(index[ident])
            total = total + m
        if total != 1:
            raise InvalidSpaceError(f"masses sum to {total}, not 1")
        self.ids = ids
        self.masses = masses
        self.index = index
        self.support = mask_of(support)
        self._hash = None

    @classmethod
    def uniform(cls, n, prefix="w"):
        return cls([f"{prefix}{k + 1}" for k in range(n)], [Fraction(1, n)] * n)

    def __len__(self):
        return len(self.ids)

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, FiniteSpace):
            return NotImplemented
        return self.ids == other.ids and self.masses == other.masses

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.ids, self.masses))
        return self._hash

    def __repr__(self):
        return f"FiniteSpace({len(self.ids)} outcomes)"

    @property
    def full(self):
        return (1 << len(self.ids)) - 1

    def mass(self, ident):
        return self.masses[self.index[ident]]

    def measure(self, mask):
        total = Fraction(0)
        masses = self.masses
        for i in iter_bits(mask):
            total = total + masses[i]
        return total

    def is_null(self, i):
        return not (self.support >> i) & 1

    def positive(self):
        """Indices of positive-mass outcomes."""
        return list(iter_bits(self.support))

    def event(self, ids=()):
        return Event(self, mask_of(self.index[i] for i in ids))

    def event_from_indices(self, indices):
        return Event(self, mask_of(indices))

    def same_null_class(self, other):
        return self.ids == other.ids and self.support == other.support


def make_space(masses):
    """Validated space from ``[(id, mass), ...]``."""
    masses = list(masses)
    return FiniteSpace([i for i, _ in masses], [m for _, m in masses])


def check_same_space(a, b):
    if a is not b and a != b:
        raise SpaceMismatchError("objects live on different spaces")


class Event:
    """A subset of a space's outcomes."""

    __slots__ = ("space", "mask")

    def __init__(self, space, mask):
        if mask < 0 or mask >> len(space.ids):
            raise InvalidSpaceError("event mask outside the space")
        self.space = space
        self.mask = mask

    def _other(self, other):
        check_same_space(self.space, other.space)
        return other.mask

    def measure(self):
        return self.space.measure(self.mask)

    def complement(self):
        return Event(self.space, self.space.full ^ self.mask)

    def __or__(self, other):
        return Event(self.space, self.mask | self._other(other))

    def __and__(self, other):
        return Event(self.space, self.mask & self._other(other))

    def __xor__(self, other):
        return Event(self.space, self.mask ^ self._other(other))

    def __sub__(self, other):
        return Event(self.space, self.mask & ~self._other(other))

    union, intersection, symmetric_difference, difference = __or__, __and__, __xor__, __sub__

    def __contains__(self, ident):
        return bool((self.mask >> self.space.index[ident]) & 1)

    def indices(self):
        return list(iter_bits(self.mask))

    def members(self):
        return [self.space.ids[i] for i in iter_bits(self.mask)]

    def is_null(self):
        return not (self.mask & self.space.support)

    def __eq__(self, other):
        if not isinstance(other, Event):
            return NotImplemented
        return self.mask == other.mask and (self.space is other.space or self.space == other.space)

    def __hash__(self):
        return hash(self.mask)

    def __repr__(self):
        return f"Event({self.members()})"


def reweight(space, density):
    """Space with masses ``density(w) * mass(w)``: the equivalent measure with that density.

    ``density`` maps outcome ids (or indices) to scalars; missing null
    outcomes default to 1.
    """
    values = _density_values(space, density)
    new = []
    total = Fraction(0)
    for i, (m, d) in enumerate(zip(space.masses, values)):
        if sign(m) > 0 and sign(d) <= 0:
            raise InvalidSpaceError(
                f"density must be positive on positive-mass outcome {space.ids[i]!r}")
        nm = d * m
        new.append(nm)
        total = total + nm
    if total != 1:
        raise InvalidSpaceError(f"density is not normalized: E[density] = {total}")
    return FiniteSpace(space.ids, new)


def _density_values(space, density):
    if isinstance(density, dict):
        out = []
        for i, ident in enumerate(space.ids):
            if ident in density:
                out.append(as_scalar(density[ident]))
            elif i in density:
                out.append(as_scalar(density[i]))
            elif space.is_null(i):
                out.append(Fraction(1))
            else:
                raise InvalidSpaceError(f"density missing for outcome {ident!r}")
        return out
    values = [as_scalar(v) for v in density]
    if len(values) != len(space.ids):
        raise InvalidSpaceError("density length does not match the space")
    return values


def normalize_density(space, raw):
    """Rescale positive weights so that their ``space``-expectation is one."""
    raw = _density_values(space, raw)
    total = sum((m * d for m, d in zip(space.masses, raw)), Fraction(0))
    return [d / total for d in raw]


def density_between(p_space, q_space):
    """``dQ/dP`` on positive outcomes (1 on null outcomes)."""
    if not p_space.same_null_class(q_space):
        raise InvalidSpaceError("measures are not equivalent")
    out = []
    for i, (mp, mq) in enumerate(zip(p_space.masses, q_space.masses)):
        out.append(mq / mp if sign(mp) > 0 else Fraction(1))
    return out
