"""Kernel dispatch: compiled int64 kernels when built and safe, Python otherwise.

Rational inputs are scaled to a common integer denominator first; the
compiled path is taken only when every intermediate provably fits in 63
bits.  Quadratic-field inputs always use the generic Python kernels.
"""

from __future__ import annotations

import math
import os
from fractions import Fraction

from . import _kernels_py

try:  # pragma: no cover - depends on the build
    from . import _kernels as _compiled
except ImportError:  # pragma: no cover
    _compiled = None

if os.environ.get("SIGMA_LAB_PURE_PYTHON"):
    _compiled = None

LIMIT = 2**62


def compiled_available():
    return _compiled is not None


def backend_name():
    return "cython" if _compiled is not None else "python"


def _common_scale(values):
    """Least common denominator of rational values, or None if any is irrational."""
    den = 1
    for v in values:
        if isinstance(v, int):
            continue
        if not isinstance(v, Fraction):
            return None
        den = den * v.denominator // math.gcd(den, v.denominator)
    return den


def _ints(values, scale):
    return [int(v * scale) for v in values]


def subset_balance_max(weights, col_tot, backend=None):
    """Branch-and-bound maximum of ``sum_b min(x_b, w_b - x_b)``; returns ``(value, mask)``.

    ``backend`` forces ``"python"`` or ``"cython"`` (benchmarks, tests).
    """
    flat = [w for row in weights for w in row] + list(col_tot)
    scale = _common_scale(flat)
    if scale is None:
        v, m, _ = _kernels_py.subset_balance_max(weights, col_tot)
        return v, m
    iw = [_ints(row, scale) for row in weights]
    ic = _ints(col_tot, scale)
    use_c = _choose(backend) and len(iw) <= 63 and 4 * sum(ic) < LIMIT
    kern = _compiled if use_c else _kernels_py
    v, m, _ = kern.subset_balance_max(iw, ic)
    return Fraction(v, scale), m


def sign_l1_max(cell_a, cell_b, cell_w, row_w, col_w, coef, backend=None):
    """Sign-pattern maximum of the weighted cut objective; returns ``(value, mask)``.

    The value is ``sum_c coef_c |U_a m_b - V_b m_a|`` in the caller's units.
    """
    scale = _common_scale(list(cell_w) + list(row_w) + list(col_w))
    cscale = _common_scale(coef)
    if scale is None or cscale is None:
        return _kernels_py.sign_l1_max(cell_a, cell_b, cell_w, row_w, col_w, coef)
    iw = _ints(cell_w, scale)
    ir = _ints(row_w, scale)
    ib = _ints(col_w, scale)
    ic = _ints(coef, cscale)
    # cell masses are scaled by s, so each |.| term carries s**2
    total = sum(iw)
    worst = 2 * total * max(ir + ib) * sum(ic)
    use_c = _choose(backend) and len(iw) <= 63 and worst < LIMIT
    kern = _compiled if use_c else _kernels_py
    v, m = kern.sign_l1_max(cell_a, cell_b, iw, ir, ib, ic)
    return Fraction(v, scale * scale * cscale), m


def _choose(backend):
    if backend == "python":
        return False
    if backend == "cython":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not built")
        return True
    return _compiled is not None
