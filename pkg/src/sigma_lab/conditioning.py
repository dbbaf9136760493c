"""Conditional expectation operators on finite spaces and change of measure."""

from __future__ import annotations

from fractions import Fraction

from .errors import HypothesisViolation, InvalidSpaceError, SpaceMismatchError
from .lattice import Partition
from .scalar import as_scalar, sign
from .space import Event, _density_values, check_same_space, iter_bits

ZERO = Fraction(0)
ONE = Fraction(1)


class RandomVariable:
    """Real function on the outcomes of a space; equality is mod null outcomes."""

    __slots__ = ("space", "values")

    def __init__(self, space, values):
        if isinstance(values, dict):
            vals = []
            for i, ident in enumerate(space.ids):
                if ident in values:
                    vals.append(as_scalar(values[ident]))
                elif space.is_null(i):
                    vals.append(ZERO)
                else:
                    raise InvalidSpaceError(f"no value for outcome {ident!r}")
            values = vals
        values = tuple(as_scalar(v) for v in values)
        if len(values) != len(space.ids):
            raise InvalidSpaceError("value vector does not match the space")
        self.space = space
        self.values = values

    @classmethod
    def constant(cls, space, c):
        return cls(space, [as_scalar(c)] * len(space.ids))

    @classmethod
    def indicator(cls, event, space=None):
        if isinstance(event, Event):
            space, mask = event.space, event.mask
        else:
            mask = event
        return cls(space, [ONE if (mask >> i) & 1 else ZERO for i in range(len(space.ids))])

    def _binary(self, other, op):
        if isinstance(other, RandomVariable):
            check_same_space(self.space, other.space)
            return RandomVariable(self.space, [op(x, y) for x, y in zip(self.values, other.values)])
        c = as_scalar(other)
        return RandomVariable(self.space, [op(x, c) for x in self.values])

    def __add__(self, other):
        return self._binary(other, lambda x, y: x + y)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, lambda x, y: x - y)

    def __rsub__(self, other):
        return self._binary(other, lambda x, y: y - x)

    def __mul__(self, other):
        return self._binary(other, lambda x, y: x * y)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._binary(other, lambda x, y: x / y)

    def __neg__(self):
        return RandomVariable(self.space, [-x for x in self.values])

    def __abs__(self):
        return RandomVariable(self.space, [abs(x) for x in self.values])

    def expectation(self):
        total = ZERO
        for m, v in zip(self.space.masses, self.values):
            if sign(m):
                total = total + m * v
        return total

    def is_zero(self):
        return all(v == 0 for i, v in enumerate(self.values) if not self.space.is_null(i))

    def __eq__(self, other):
        if not isinstance(other, RandomVariable):
            return NotImplemented
        if self.space is not other.space and self.space != other.space:
            return False
        sup = self.space.support
        return all(x == y for i, (x, y) in enumerate(zip(self.values, other.values))
                   if (sup >> i) & 1)

    __hash__ = None

    def __getitem__(self, ident):
        return self.values[self.space.index[ident]]

    def __repr__(self):
        return f"RandomVariable({dict(zip(self.space.ids, map(str, self.values)))})"


def _check(space, part):
    if part.space is not space and part.space != space:
        raise SpaceMismatchError("partition belongs to another space")


def cond_exp(space, part, f):
    """``E[f | part]``: atom-wise mass-weighted averages, 0 on null outcomes."""
    _check(space, part)
    if isinstance(f, RandomVariable):
        check_same_space(space, f.space)
        values = f.values
    else:
        values = [as_scalar(v) for v in f]
    sums = [ZERO] * part.n_atoms
    masses = space.masses
    for i, l in enumerate(part.labels):
        if l >= 0:
            sums[l] = sums[l] + masses[i] * values[i]
    am = part.atom_masses
    avg = [s / m for s, m in zip(sums, am)]
    return RandomVariable(space, [avg[l] if l >= 0 else ZERO for l in part.labels])


def cond_prob(space, part, event):
    """``P(event | part)`` as a random variable."""
    return cond_exp(space, part, RandomVariable.indicator(event, space))


class CondExpOperator:
    """``E[. | part]`` materialized as an outcome-indexed matrix."""

    def __init__(self, space, part):
        _check(space, part)
        self.space = space
        self.partition = part
        n = len(space.ids)
        am = part.atom_masses
        rows = []
        for i in range(n):
            l = part.labels[i]
            if l < 0:
                rows.append([ZERO] * n)
                continue
            row = [ZERO] * n
            for j in iter_bits(part.atoms[l]):
                row[j] = space.masses[j] / am[l]
            rows.append(row)
        self.rows = rows

    def apply(self, f):
        values = f.values if isinstance(f, RandomVariable) else [as_scalar(v) for v in f]
        out = []
        for row in self.rows:
            acc = ZERO
            for w, v in zip(row, values):
                if w:
                    acc = acc + w * v
            out.append(acc)
        return RandomVariable(self.space, out)

    __call__ = apply

    def weights(self, atom):
        """Averaging weights ``mass(w)/P(atom)`` of one atom."""
        m = self.partition.atom_masses[atom]
        return {self.space.ids[j]: self.space.masses[j] / m
                for j in iter_bits(self.partition.atoms[atom])}


def operator_matrix(space, part):
    return CondExpOperator(space, part)


def bayes_cond_exp(space, part, density, f):
    """``Q[f | part]`` for ``dQ/dP = density`` via ``P[d f | part] / P[d | part]``."""
    _check(space, part)
    d = _density_values(space, density)
    for i, v in enumerate(d):
        if not space.is_null(i) and sign(v) <= 0:
            raise HypothesisViolation(
                f"density must be positive on positive-mass outcome {space.ids[i]!r}")
    dv = RandomVariable(space, d)
    num = cond_exp(space, part, dv * f)
    den = cond_exp(space, part, dv)
    out = []
    for i, (x, y) in enumerate(zip(num.values, den.values)):
        if space.is_null(i):
            out.append(ZERO)
        else:
            assert sign(y) > 0, "conditional density vanished on a positive atom"
            out.append(x / y)
    return RandomVariable(space, out)


class Contingency:
    """Masses of the nonempty intersections of the atoms of two partitions.

    Cells are the atoms of the join, in canonical order; ``cell_a[k]`` and
    ``cell_b[k]`` give the atoms containing cell ``k``.  This is the
    atom-reduced view every operator-norm and metric computation runs on.
    """

    def __init__(self, a, b):
        if a.space is not b.space and a.space != b.space:
            raise SpaceMismatchError("partitions live on different spaces")
        self.a, self.b = a, b
        index = {}
        cell_a, cell_b, mass, members = [], [], [], []
        masses = a.space.masses
        for i, (la, lb) in enumerate(zip(a.labels, b.labels)):
            if la < 0:
                continue
            k = index.get((la, lb))
            if k is None:
                k = index[(la, lb)] = len(cell_a)
                cell_a.append(la)
                cell_b.append(lb)
                mass.append(ZERO)
                members.append([])
            mass[k] = mass[k] + masses[i]
            members[k].append(i)
        self.index = index
        self.cell_a, self.cell_b, self.mass = cell_a, cell_b, mass
        self.members = members
        self.row = a.atom_masses
        self.col = b.atom_masses

    def __len__(self):
        return len(self.mass)

    def get(self, ia, ib):
        k = self.index.get((ia, ib))
        return ZERO if k is None else self.mass[k]

    def cells_of_a(self):
        out = [[] for _ in range(len(self.row))]
        for k, ia in enumerate(self.cell_a):
            out[ia].append(k)
        return out

    def cells_of_b(self):
        out = [[] for _ in range(len(self.col))]
        for k, ib in enumerate(self.cell_b):
            out[ib].append(k)
        return out

    def spike_l1(self, k):
        """``||(P_a - P_b) 1_c / P(c)||_1`` for the cell ``c`` with index ``k``."""
        m = self.mass[k]
        ma, mb = self.row[self.cell_a[k]], self.col[self.cell_b[k]]
        return m * abs(1 / ma - 1 / mb) + (ma - m) / ma + (mb - m) / mb

    def components(self):
        """Connected components of the atom graph: lists of cell indices."""
        from .lattice import UnionFind
        na = len(self.row)
        uf = UnionFind(na + len(self.col))
        for ia, ib in zip(self.cell_a, self.cell_b):
            uf.union(ia, na + ib)
        groups = {}
        for k, ia in enumerate(self.cell_a):
            groups.setdefault(uf.find(ia), []).append(k)
        return list(groups.values())

    def cell_mask(self, k):
        from .space import mask_of
        return mask_of(self.members[k])

    def apply_difference(self, f):
        """``(P_a - P_b) f`` for ``f`` given per cell (the operator on join-measurable functions)."""
        ua = [ZERO] * len(self.row)
        vb = [ZERO] * len(self.col)
        for k, x in enumerate(f):
            w = self.mass[k] * x
            ua[self.cell_a[k]] = ua[self.cell_a[k]] + w
            vb[self.cell_b[k]] = vb[self.cell_b[k]] + w
        ua = [u / m for u, m in zip(ua, self.row)]
        vb = [v / m for v, m in zip(vb, self.col)]
        return [ua[ia] - vb[ib] for ia, ib in zip(self.cell_a, self.cell_b)]


def expectation_abs_diff(space, f, g):
    return abs(f - g).expectation()
