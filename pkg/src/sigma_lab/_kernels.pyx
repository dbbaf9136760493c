# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""int64 twins of the kernels in ``_kernels_py``; same search order and tie-breaks.

Callers guarantee that every intermediate fits in a signed 64-bit integer.
"""

from libc.stdlib cimport malloc, free
from libc.string cimport memset


cdef struct BBState:
    int n
    int nb
    long long *w          # n x nb, row-major
    long long *col
    long long *rem        # (n + 1) x nb
    long long *x
    long long best
    unsigned long long best_mask
    int have_best
    long long nodes


cdef long long _bound(BBState *s, int undecided) nogil:
    cdef long long total2 = 0, w, lo2, hi2
    cdef int b
    cdef long long *r = s.rem + undecided * s.nb
    for b in range(s.nb):
        w = s.col[b]
        lo2 = 2 * s.x[b]
        hi2 = 2 * (s.x[b] + r[b])
        if lo2 <= w and w <= hi2:
            total2 += w
        elif hi2 < w:
            total2 += hi2
        else:
            total2 += 2 * (w - s.x[b])
    return total2


cdef long long _leaf(BBState *s) nogil:
    cdef long long total = 0, v, u
    cdef int b
    for b in range(s.nb):
        v = s.x[b]
        u = s.col[b] - v
        total += v if v <= u else u
    return total


cdef void _visit(BBState *s, int i, unsigned long long mask) nogil:
    cdef long long v
    cdef int row, b
    s.nodes += 1
    if i == 0:
        v = _leaf(s)
        if not s.have_best or v > s.best:
            s.best = v
            s.best_mask = mask
            s.have_best = 1
        return
    if s.have_best and _bound(s, i) <= 2 * s.best:
        return
    row = i - 1
    _visit(s, row, mask)
    if row == s.n - 1:
        return
    for b in range(s.nb):
        s.x[b] += s.w[row * s.nb + b]
    _visit(s, row, mask | (1ULL << row))
    for b in range(s.nb):
        s.x[b] -= s.w[row * s.nb + b]


def subset_balance_max(weights, col_tot):
    """int64 branch and bound; see ``_kernels_py.subset_balance_max``."""
    cdef int n = len(weights)
    cdef int nb = len(col_tot)
    cdef BBState s
    cdef int i, b
    if n == 0 or nb == 0:
        return 0, 0, 0
    if n > 63:
        raise ValueError("at most 63 rows")
    s.n = n
    s.nb = nb
    s.w = <long long *> malloc(n * nb * sizeof(long long))
    s.col = <long long *> malloc(nb * sizeof(long long))
    s.rem = <long long *> malloc((n + 1) * nb * sizeof(long long))
    s.x = <long long *> malloc(nb * sizeof(long long))
    try:
        for i in range(n):
            row = weights[i]
            for b in range(nb):
                s.w[i * nb + b] = row[b]
        for b in range(nb):
            s.col[b] = col_tot[b]
            s.rem[b] = 0
            s.x[b] = 0
        for i in range(n):
            for b in range(nb):
                s.rem[(i + 1) * nb + b] = s.rem[i * nb + b] + s.w[i * nb + b]
        s.have_best = 0
        s.best = 0
        s.best_mask = 0
        s.nodes = 0
        with nogil:
            _visit(&s, n, 0)
        return s.best, s.best_mask, s.nodes
    finally:
        free(s.w)
        free(s.col)
        free(s.rem)
        free(s.x)


def sign_l1_max(cell_a, cell_b, cell_w, row_w, col_w, coef):
    """int64 Gray-code enumeration; see ``_kernels_py.sign_l1_max``."""
    cdef int J = len(cell_w)
    cdef int na = len(row_w)
    cdef int nb = len(col_w)
    cdef long long *ca = <long long *> malloc(J * sizeof(long long))
    cdef long long *cb = <long long *> malloc(J * sizeof(long long))
    cdef long long *cw = <long long *> malloc(J * sizeof(long long))
    cdef long long *cf = <long long *> malloc(J * sizeof(long long))
    cdef long long *rw = <long long *> malloc(na * sizeof(long long))
    cdef long long *bw = <long long *> malloc(nb * sizeof(long long))
    cdef long long *U = <long long *> malloc(na * sizeof(long long))
    cdef long long *V = <long long *> malloc(nb * sizeof(long long))
    cdef long long best, v, t, w2
    cdef unsigned long long mask = 0, best_mask = 0, step, last
    cdef int k, c, a, b
    if J > 63:
        raise ValueError("at most 63 cells")
    try:
        for k in range(J):
            ca[k] = cell_a[k]
            cb[k] = cell_b[k]
            cw[k] = cell_w[k]
            cf[k] = coef[k]
        for a in range(na):
            rw[a] = row_w[a]
            U[a] = 0
        for b in range(nb):
            bw[b] = col_w[b]
            V[b] = 0
        for k in range(J):
            U[ca[k]] += cw[k]
            V[cb[k]] += cw[k]
        with nogil:
            best = 0
            for c in range(J):
                t = U[ca[c]] * bw[cb[c]] - V[cb[c]] * rw[ca[c]]
                best += cf[c] * (t if t >= 0 else -t)
            last = 1ULL << (J - 1)
            step = 1
            while step < last:
                k = 0
                while not ((step >> k) & 1ULL):
                    k += 1
                mask ^= 1ULL << k
                w2 = 2 * cw[k]
                if (mask >> k) & 1ULL:
                    U[ca[k]] -= w2
                    V[cb[k]] -= w2
                else:
                    U[ca[k]] += w2
                    V[cb[k]] += w2
                v = 0
                for c in range(J):
                    t = U[ca[c]] * bw[cb[c]] - V[cb[c]] * rw[ca[c]]
                    v += cf[c] * (t if t >= 0 else -t)
                if v > best or (v == best and mask < best_mask):
                    best = v
                    best_mask = mask
                step += 1
        return best, best_mask
    finally:
        free(ca)
        free(cb)
        free(cw)
        free(cf)
        free(rw)
        free(bw)
        free(U)
        free(V)
