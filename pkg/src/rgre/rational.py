"""Exact rational linear algebra used to derive method and combination weights."""

from __future__ import annotations

from fractions import Fraction


def solve_linear_system(matrix, rhs) -> list[Fraction]:
    """Solve the square system A x = b exactly over the rationals.

    Entries of `matrix` and `rhs` may be ints, Fractions, or anything
    Fraction() accepts. Gaussian elimination with partial (first nonzero)
    pivoting; raises ValueError on a singular system.
    """
    n = len(matrix)
    if any(len(row) != n for row in matrix) or len(rhs) != n:
        raise ValueError("system is not square")
    a = [[Fraction(x) for x in row] + [Fraction(b)] for row, b in zip(matrix, rhs)]

    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot is None:
            raise ValueError("singular rational system")
        a[col], a[pivot] = a[pivot], a[col]
        for r in range(col + 1, n):
            if a[r][col] == 0:
                continue
            factor = a[r][col] / a[col][col]
            for c in range(col, n + 1):
                a[r][c] -= factor * a[col][c]

    x = [Fraction(0)] * n
    for r in range(n - 1, -1, -1):
        acc = a[r][n]
        for c in range(r + 1, n):
            acc -= a[r][c] * x[c]
        x[r] = acc / a[r][r]
    return x
