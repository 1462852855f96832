"""Rational quadratic forms: Gram matrices, congruence diagonalization, signature.

Everything here is exact. Coefficients are ``fractions.Fraction`` and no
floating point value is ever produced.
"""

from __future__ import annotations

import json
from math import isqrt
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable, Optional, Sequence

from sympy import factorint

from . import _linalg


class FormError(ValueError):
    """Malformed quadratic form input."""


class DegenerateFormError(FormError):
    """Well-formed input describing a degenerate (or otherwise unusable) form."""


def parse_rational(x: Any) -> Fraction:
    """Accept ints, Fractions and strings like ``"-3"`` or ``"5/4"``.

    Floats are refused so that exact data cannot be corrupted silently.
    """
    if isinstance(x, bool):
        raise FormError(f"not a rational: {x!r}")
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise FormError(f"not a rational: {x!r}") from exc
    raise FormError(f"not a rational: {x!r}")


def format_rational(q: Fraction) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def squarefree_part(q) -> int:
    """The squarefree integer in the class of ``q`` modulo nonzero rational squares."""
    q = Fraction(q)
    if q == 0:
        raise ValueError("zero has no squarefree part")
    n = q.numerator * q.denominator
    sign = -1 if n < 0 else 1
    out = 1
    for p, e in factorint(abs(n)).items():
        if e % 2:
            out *= p
    return sign * out


def is_rational_square(q) -> bool:
    q = Fraction(q)
    if q < 0:
        return False
    if q == 0:
        return True
    return squarefree_part(q) == 1


def rational_sqrt(q) -> Optional[Fraction]:
    """Exact square root of a rational square, else None."""
    q = Fraction(q)
    if q < 0:
        return None
    a, b = isqrt(q.numerator), isqrt(q.denominator)
    if a * a == q.numerator and b * b == q.denominator:
        return Fraction(a, b)
    return None


@dataclass(frozen=True)
class GramForm:
    entries: tuple[tuple[Fraction, ...], ...]

    def __init__(self, entries: Iterable[Iterable]):
        rows = tuple(tuple(parse_rational(x) for x in row) for row in entries)
        n = len(rows)
        if n == 0 or any(len(r) != n for r in rows):
            raise FormError("Gram matrix must be square and nonempty")
        for i in range(n):
            for j in range(i + 1, n):
                if rows[i][j] != rows[j][i]:
                    raise FormError("Gram matrix is not symmetric")
        if _linalg.determinant(rows) == 0:
            raise DegenerateFormError("degenerate form (determinant 0)")
        object.__setattr__(self, "entries", rows)

    @property
    def n(self) -> int:
        return len(self.entries)

    def __call__(self, v: Sequence, w: Optional[Sequence] = None) -> Fraction:
        w = v if w is None else w
        g = self.entries
        return sum(
            (Fraction(v[i]) * g[i][j] * Fraction(w[j]) for i in range(self.n) for j in range(self.n)),
            Fraction(0),
        )


@dataclass(frozen=True)
class DiagonalForm:
    """Q = d_1 X_1^2 + ... + d_n X_n^2.

    ``change_of_basis`` (columns are the new basis vectors in the old
    coordinates) is kept when the form came out of :func:`diagonalize` or
    :func:`squarefree_scale`.
    """

    d: tuple[Fraction, ...]
    change_of_basis: Optional[tuple[tuple[Fraction, ...], ...]] = None

    def __init__(self, d: Iterable, change_of_basis=None):
        coeffs = tuple(parse_rational(x) for x in d)
        if not coeffs:
            raise FormError("empty form")
        if any(x == 0 for x in coeffs):
            raise DegenerateFormError("degenerate form (zero diagonal coefficient)")
        object.__setattr__(self, "d", coeffs)
        if change_of_basis is not None:
            change_of_basis = tuple(tuple(Fraction(x) for x in row) for row in change_of_basis)
        object.__setattr__(self, "change_of_basis", change_of_basis)

    @property
    def n(self) -> int:
        return len(self.d)

    def __call__(self, v: Sequence, w: Optional[Sequence] = None) -> Fraction:
        w = v if w is None else w
        return sum((di * Fraction(x) * Fraction(y) for di, x, y in zip(self.d, v, w)), Fraction(0))

    def gram(self) -> list[list[Fraction]]:
        return [[self.d[i] if i == j else Fraction(0) for j in range(self.n)] for i in range(self.n)]

    def discriminant(self) -> Fraction:
        """(-1)^m d_1...d_n for n = 2m; the signed determinant for odd n."""
        p = Fraction(1)
        for x in self.d:
            p *= x
        return (-1) ** (self.n // 2) * p

    def is_kuga_satake_signature(self) -> bool:
        return self.n >= 2 and signature(self) == (2, self.n - 2) and self.d[0] < 0 and self.d[1] < 0

    def to_json(self) -> dict:
        return {"diag": [format_rational(x) for x in self.d]}


def signature(form: GramForm | DiagonalForm) -> tuple[int, int]:
    """(number of negative, number of positive) coefficients after diagonalization."""
    if isinstance(form, GramForm):
        form = diagonalize(form)
    neg = sum(1 for x in form.d if x < 0)
    return neg, form.n - neg


def _order_key(indexed: tuple[int, Fraction]):
    i, x = indexed
    return (x > 0, abs(x), i)


def diagonalize(form: GramForm) -> DiagonalForm:
    """Symmetric row/column elimination; returns d with Bᵀ G B = diag(d).

    Negative coefficients come first, each sign group sorted by magnitude.
    """
    n = form.n
    a = [list(row) for row in form.entries]
    b = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]

    def add_to(k: int, j: int, s: int) -> None:
        # basis vector k <- k + s * j
        for r in range(n):
            a[r][k] += s * a[r][j]
        for c in range(n):
            a[k][c] += s * a[j][c]
        for r in range(n):
            b[r][k] += s * b[r][j]

    for k in range(n):
        if a[k][k] == 0:
            j = next((j for j in range(k + 1, n) if a[k][j] != 0), None)
            if j is None:
                raise DegenerateFormError("degenerate form")
            add_to(k, j, 1 if 2 * a[k][j] + a[j][j] != 0 else -1)
        piv = a[k][k]
        for i in range(k + 1, n):
            if a[i][k] != 0:
                f = a[i][k] / piv
                for r in range(n):
                    a[r][i] -= f * a[r][k]
                for c in range(n):
                    a[i][c] -= f * a[k][c]
                for r in range(n):
                    b[r][i] -= f * b[r][k]

    order = [i for i, _ in sorted(enumerate(a[i][i] for i in range(n)), key=_order_key)]
    d = [a[i][i] for i in order]
    cob = [[b[r][i] for i in order] for r in range(n)]
    return DiagonalForm(d, cob)


def normalize_order(form: DiagonalForm) -> DiagonalForm:
    """Reorder an already diagonal form to negatives-first."""
    if form.change_of_basis is not None:
        base = form.change_of_basis
    else:
        base = [[Fraction(int(i == j)) for j in range(form.n)] for i in range(form.n)]
    order = [i for i, _ in sorted(enumerate(form.d), key=_order_key)]
    return DiagonalForm([form.d[i] for i in order], [[row[i] for i in order] for row in base])


def squarefree_scale(form: DiagonalForm) -> DiagonalForm:
    """Replace each d_i by its squarefree integer representative.

    Rescaling e_i by 1/c sends d_i to d_i / c^2, so the change of basis is
    updated column by column.
    """
    new_d, scales = [], []
    for x in form.d:
        s = squarefree_part(x)
        c = rational_sqrt(x / s)
        assert c is not None
        new_d.append(Fraction(s))
        scales.append(1 / c)
    base = form.change_of_basis
    if base is None:
        cob = [[scales[j] if i == j else Fraction(0) for j in range(form.n)] for i in range(form.n)]
    else:
        cob = [[row[j] * scales[j] for j in range(form.n)] for row in base]
    return DiagonalForm(new_d, cob)


def check_congruence(gram: GramForm, diag: DiagonalForm) -> bool:
    """Bᵀ G B == diag(d), exactly."""
    if diag.change_of_basis is None:
        return False
    b = diag.change_of_basis
    return _linalg.matmul(_linalg.matmul(_linalg.transpose(b), gram.entries), b) == diag.gram()


def form_from_json(data: dict | str) -> tuple[DiagonalForm, Optional[GramForm]]:
    """Parse ``{"diag": [...]}`` or ``{"gram": [[...], ...]}``.

    Returns the diagonal form (negatives first) and the originating Gram
    form when one was given.
    """
    if isinstance(data, str):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as exc:
            raise FormError(f"invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise FormError("form JSON must be an object")
    if "diag" in data:
        if not isinstance(data["diag"], list):
            raise FormError('"diag" must be a list')
        return DiagonalForm(data["diag"]), None
    if "gram" in data:
        rows = data["gram"]
        if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
            raise FormError('"gram" must be a list of rows')
        g = GramForm(rows)
        return diagonalize(g), g
    raise FormError('form JSON needs a "diag" or "gram" key')
