"""Pure-Python enumeration kernels.

These accept any exact number type (ints, Fractions, quadratic-field
elements); the compiled twins in ``_kernels.pyx`` take int64 data and follow
the same search order, so both return the same witness.
"""


def subset_balance_max(weights, col_tot):
    """Maximize ``sum_b min(x_b, w_b - x_b)`` over subsets S of rows.

    ``weights[i][b]`` is the mass shared by row ``i`` and column ``b``;
    ``x_b = sum_{i in S} weights[i][b]``; ``col_tot[b]`` must equal the
    column sum, which makes S and its complement score alike.  Branch and bound over rows from
    the last to the first, excluding before including, with the admissible
    bound obtained by letting each column pick its best reachable value.
    The last row is never included, so the returned mask is the least integer mask among maximizers.

    Returns ``(value, mask, nodes)``.
    """
    n = len(weights)
    nb = len(col_tot)
    zero = col_tot[0] - col_tot[0] if nb else 0
    if n == 0 or nb == 0:
        return zero, 0, 0
    rows = [[(b, w) for b, w in enumerate(r) if w] for r in weights]
    # rem[i][b]: mass of column b in rows 0..i-1 (still undecided when row i-1 is next)
    rem = [[zero] * nb]
    for i in range(n):
        nxt = list(rem[-1])
        for b, w in rows[i]:
            nxt[b] = nxt[b] + w
        rem.append(nxt)
    x = [zero] * nb
    best = [None, 0]
    nodes = [0]

    def bound(undecided):
        r = rem[undecided]
        total2 = zero
        for b in range(nb):
            w = col_tot[b]
            lo2 = 2 * x[b]
            hi2 = 2 * (x[b] + r[b])
            if lo2 <= w <= hi2:
                total2 = total2 + w
            elif hi2 < w:
                total2 = total2 + hi2
            else:
                total2 = total2 + 2 * (w - x[b])
        return total2

    def leaf_value():
        total = zero
        for b in range(nb):
            v = x[b]
            u = col_tot[b] - v
            total = total + (v if v <= u else u)
        return total

    def visit(i, mask):
        # rows i-1, i-2, ..., 0 remain undecided
        nodes[0] += 1
        if i == 0:
            v = leaf_value()
            if best[0] is None or v > best[0]:
                best[0], best[1] = v, mask
            return
        if best[0] is not None and bound(i) <= 2 * best[0]:
            return
        row = i - 1
        visit(row, mask)
        if row == n - 1:
            return
        for b, w in rows[row]:
            x[b] = x[b] + w
        visit(row, mask | (1 << row))
        for b, w in rows[row]:
            x[b] = x[b] - w

    visit(n, 0)
    return best[0], best[1], nodes[0]


def sign_l1_max(cell_a, cell_b, cell_w, row_w, col_w, coef):
    """Maximize ``sum_c coef_c * |U_a(c) * col_w[b(c)] - V_b(c) * row_w[a(c)]|`` over signs.

    ``U_a = sum_{c in a} s_c cell_w[c]`` and ``V_b`` likewise, for sign
    vectors ``s`` in ``{-1, +1}**J`` with the last sign fixed to +1.  Bit
    ``k`` of a pattern mask set means ``s_k = -1``.  Gray-code order; ties
    resolved toward the least mask.

    Returns ``(value, mask)``.
    """
    J = len(cell_w)
    zero = cell_w[0] - cell_w[0]
    U = [zero] * len(row_w)
    V = [zero] * len(col_w)
    for k in range(J):
        U[cell_a[k]] = U[cell_a[k]] + cell_w[k]
        V[cell_b[k]] = V[cell_b[k]] + cell_w[k]

    def objective():
        total = zero
        for k in range(J):
            a, b = cell_a[k], cell_b[k]
            t = U[a] * col_w[b] - V[b] * row_w[a]
            total = total + coef[k] * (t if t >= 0 else -t)
        return total

    best, best_mask = objective(), 0
    mask = 0
    free = J - 1
    for step in range(1, 1 << free):
        k = (step & -step).bit_length() - 1
        mask ^= 1 << k
        w2 = 2 * cell_w[k]
        if (mask >> k) & 1:
            U[cell_a[k]] = U[cell_a[k]] - w2
            V[cell_b[k]] = V[cell_b[k]] - w2
        else:
            U[cell_a[k]] = U[cell_a[k]] + w2
            V[cell_b[k]] = V[cell_b[k]] + w2
        v = objective()
        if v > best or (v == best and mask < best_mask):
            best, best_mask = v, mask
    return best, best_mask
