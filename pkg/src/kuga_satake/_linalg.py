"""Small exact linear algebra over Fraction.

sympy's Matrix does the same job but is one to two orders of magnitude
slower on the few-hundred-entry systems the center oracle and the unit
inverse solve, so the elimination is done here directly.
"""

from fractions import Fraction
from typing import List, Optional, Sequence

Matrix = List[List[Fraction]]


def to_fraction_matrix(rows: Sequence[Sequence]) -> Matrix:
    return [[Fraction(x) for x in row] for row in rows]


def rref(rows: Sequence[Sequence]) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form and the pivot columns."""
    a = to_fraction_matrix(rows)
    if not a:
        return a, []
    m, n = len(a), len(a[0])
    pivots: list[int] = []
    r = 0
    for c in range(n):
        if r == m:
            break
        p = next((i for i in range(r, m) if a[i][c] != 0), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        inv = 1 / a[r][c]
        a[r] = [x * inv for x in a[r]]
        for i in range(m):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
    return a, pivots


def rank(rows: Sequence[Sequence]) -> int:
    return len(rref(rows)[1])


def nullspace(rows: Sequence[Sequence], ncols: Optional[int] = None) -> Matrix:
    """Basis of {x : A x = 0}, one vector per free column."""
    if not rows:
        n = ncols or 0
        return [[Fraction(int(i == j)) for i in range(n)] for j in range(n)]
    r, pivots = rref(rows)
    n = len(r[0])
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for row, pc in zip(r, pivots):
            v[pc] = -row[f]
        basis.append(v)
    return basis


def solve(rows: Sequence[Sequence], rhs: Sequence) -> Optional[list[Fraction]]:
    """A solution of A x = b, or None when the system is inconsistent."""
    aug = [list(row) + [b] for row, b in zip(rows, rhs)]
    r, pivots = rref(aug)
    n = len(aug[0]) - 1
    if n in pivots:
        return None
    x = [Fraction(0)] * n
    for row, pc in zip(r, pivots):
        x[pc] = row[n]
    return x


def determinant(rows: Sequence[Sequence]) -> Fraction:
    a = to_fraction_matrix(rows)
    n = len(a)
    det = Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if a[i][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            a[c], a[p] = a[p], a[c]
            det = -det
        det *= a[c][c]
        for i in range(c + 1, n):
            if a[i][c] != 0:
                f = a[i][c] / a[c][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    return det


def matmul(a: Sequence[Sequence], b: Sequence[Sequence]) -> Matrix:
    bt = list(zip(*b))
    return [[sum((x * y for x, y in zip(row, col)), Fraction(0)) for col in bt] for row in a]


def transpose(a: Sequence[Sequence]) -> Matrix:
    return [list(col) for col in zip(*a)]
