"""Pure-Python modular kernels; the reference the compiled module must match."""

from __future__ import annotations


def rref_modp(rows: list[list[int]], ncols: int, p: int) -> tuple[list[list[int]], list[int]]:
    """Reduced row-echelon form over F_p.

    Returns the nonzero rows of the RREF and their pivot columns.
    """
    a = [[v % p for v in row] for row in rows]
    nrows = len(a)
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        piv = next((i for i in range(r, nrows) if a[i][c]), -1)
        if piv < 0:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = pow(a[r][c], -1, p)
        pivot_row = [v * inv % p for v in a[r]]
        a[r] = pivot_row
        for i in range(nrows):
            if i != r:
                f = a[i][c]
                if f:
                    row = a[i]
                    a[i] = [(x - f * y) % p for x, y in zip(row, pivot_row)]
        pivots.append(c)
        r += 1
    return a[:r], pivots


def matmul_modp(a: list[list[int]], b: list[list[int]], ncols: int, p: int) -> list[list[int]]:
    """Product of an (m x l) and an (l x ncols) matrix over F_p."""
    cols = list(zip(*b)) if b else [()] * ncols
    return [[sum(x * y for x, y in zip(row, col)) % p for col in cols] for row in a]
