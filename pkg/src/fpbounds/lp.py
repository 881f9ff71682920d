"""Small dense two-phase simplex over exact rationals.

Solves   min c.x   s.t.   A x = b,  x >= 0   with Fraction arithmetic and
Bland's anti-cycling rule.  Sized for desk-scale programs (tens of rows);
no sparsity, no revised factorizations.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import InfeasibleError, UnboundedError

ZERO = Fraction(0)
ONE = Fraction(1)


def _pivot(tableau, basis, row, col):
    piv = tableau[row][col]
    tableau[row] = [v / piv for v in tableau[row]]
    lead = tableau[row]
    for r, line in enumerate(tableau):
        if r != row and line[col]:
            f = line[col]
            tableau[r] = [a - f * b for a, b in zip(line, lead)]
    basis[row] = col


def _optimize(tableau, basis, ncols):
    """Run Bland-rule pivots until the bottom (objective) row is optimal."""
    obj = len(tableau) - 1
    while True:
        col = next((j for j in range(ncols) if tableau[obj][j] < ZERO), None)
        if col is None:
            return
        row = None
        best = None
        for r in range(obj):
            a = tableau[r][col]
            if a > ZERO:
                ratio = tableau[r][-1] / a
                if best is None or ratio < best or (ratio == best and basis[r] < basis[row]):
                    best = ratio
                    row = r
        if row is None:
            raise UnboundedError("objective is unbounded below")
        _pivot(tableau, basis, row, col)


def simplex_min(c, a_rows, b) -> tuple[Fraction, list[Fraction]]:
    """Minimize c.x subject to A x = b, x >= 0; returns (optimum, x)."""
    m = len(a_rows)
    n = len(c)
    c = [Fraction(v) for v in c]
    rows = [[Fraction(v) for v in row] for row in a_rows]
    b = [Fraction(v) for v in b]
    for i in range(m):
        if len(rows[i]) != n:
            raise ValueError("ragged constraint matrix")
        if b[i] < ZERO:
            rows[i] = [-v for v in rows[i]]
            b[i] = -b[i]

    # Phase 1: artificial variable per row, drive their sum to zero.
    total = n + m
    tableau = [rows[i] + [ONE if j == i else ZERO for j in range(m)] + [b[i]]
               for i in range(m)]
    basis = [n + i for i in range(m)]
    obj = [ZERO] * (total + 1)
    for i in range(m):
        for j in range(total + 1):
            obj[j] -= tableau[i][j]
    for i in range(m):
        obj[n + i] = ZERO
    tableau.append(obj)
    _optimize(tableau, basis, n)  # artificials are never re-entered
    if -tableau[-1][-1] != ZERO:
        raise InfeasibleError("phase 1 optimum is nonzero")
    # Pivot any artificial still in the basis out (degenerate rows).
    for r in range(m):
        if basis[r] >= n:
            col = next((j for j in range(n) if tableau[r][j]), None)
            if col is not None:
                _pivot(tableau, basis, r, col)
    keep = [r for r in range(m) if basis[r] < n]
    tableau = [[tableau[r][j] for j in range(n)] + [tableau[r][-1]] for r in keep]
    basis = [basis[r] for r in keep]

    # Phase 2: real objective reduced over the current basis.
    obj = c[:] + [ZERO]
    for r, bv in enumerate(basis):
        f = obj[bv]
        if f:
            obj = [a - f * t for a, t in zip(obj, tableau[r])]
    tableau.append(obj)
    _optimize(tableau, basis, n)

    x = [ZERO] * n
    for r, bv in enumerate(basis):
        x[bv] = tableau[r][-1]
    value = sum(ci * xi for ci, xi in zip(c, x))
    return value, x
