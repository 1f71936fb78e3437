"""Exact dense linear algebra over the integers and rationals."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence


def det_int(matrix: Sequence[Sequence[int]]) -> int:
    """Determinant of a square integer matrix by fraction-free Bareiss elimination."""
    n = len(matrix)
    if n == 0:
        return 1
    a = [list(map(int, row)) for row in matrix]
    if any(len(row) != n for row in a):
        raise ValueError("matrix is not square")
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        pivot = a[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * pivot - a[i][k] * a[k][j]) // prev
        prev = pivot
    return sign * a[n - 1][n - 1]


def solve(matrix: Sequence[Sequence[int]], rhs: Sequence[Fraction]) -> list[Fraction] | None:
    """Solve ``matrix @ x = rhs`` exactly; ``None`` if the matrix is singular."""
    n = len(matrix)
    if any(len(row) != n for row in matrix) or len(rhs) != n:
        raise ValueError("system is not square")
    a = [[Fraction(v) for v in row] + [Fraction(b)] for row, b in zip(matrix, rhs)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            return None
        a[col], a[piv] = a[piv], a[col]
        inv = 1 / a[col][col]
        row = a[col]
        for r in range(n):
            if r != col and a[r][col] != 0:
                factor = a[r][col] * inv
                target = a[r]
                for j in range(col, n + 1):
                    target[j] -= factor * row[j]
    return [a[i][n] / a[i][i] for i in range(n)]


def solve2(a11, a12, a21, a22, b1, b2) -> tuple[Fraction, Fraction] | None:
    det = a11 * a22 - a12 * a21
    if det == 0:
        return None
    x = Fraction(b1 * a22 - a12 * b2) / det
    y = Fraction(a11 * b2 - b1 * a21) / det
    return x, y
