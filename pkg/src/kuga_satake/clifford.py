"""Sparse arithmetic in the Clifford algebra C(Q) of a diagonal form.

A basis blade e^a = e_1^{a_1} ... e_n^{a_n} is stored as the integer mask
with bit i-1 set iff a_i = 1. An element is a dict mask -> coefficient;
coefficients are either all ``Fraction`` (exact flavor) or all ``float``
(real flavor). The two flavors never mix; use :meth:`CliffordElement.to_float`
to promote.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from numbers import Number
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from . import _linalg
from .qform import DiagonalForm, format_rational, parse_rational


class CliffordError(ValueError):
    """Usage error: wrong parity, wrong grade, mismatched forms, non-units."""


@lru_cache(maxsize=1 << 16)
def reorder_sign(a: int, b: int) -> int:
    """Sign picked up moving the generators of e^b left past those of e^a.

    Counts pairs (j in a, i in b) with j > i.
    """
    a >>= 1
    swaps = 0
    while a:
        swaps += (a & b).bit_count()
        a >>= 1
    return -1 if swaps & 1 else 1


def _scale_tables(form: DiagonalForm) -> tuple[list, list]:
    """prod_{i in mask} d_i for every mask, exact and float, cached on the form."""
    cached = form.__dict__.get("_scale_tables")
    if cached is None:
        exact = [Fraction(1)]
        for di in form.d:
            exact += [x * di for x in exact]
        cached = (exact, [float(x) for x in exact])
        object.__setattr__(form, "_scale_tables", cached)
    return cached


def _overlap_scale(form: DiagonalForm, mask: int) -> Fraction:
    return _scale_tables(form)[0][mask]


def blade_product(a: int, b: int, form: DiagonalForm) -> tuple[int, Fraction, int]:
    """e^a e^b = sign * scale * e^(a xor b), scale = prod of d_i over a & b."""
    return reorder_sign(a, b), _overlap_scale(form, a & b), a ^ b


def grade(mask: int) -> int:
    return mask.bit_count()


def reversal_sign(mask: int) -> int:
    k = mask.bit_count()
    return -1 if (k * (k - 1) // 2) & 1 else 1


def even_blades(n: int) -> list[int]:
    """Masks of the standard basis of C^+(Q), in increasing mask order."""
    return [m for m in range(1 << n) if not m.bit_count() & 1]


def all_blades(n: int) -> list[int]:
    return list(range(1 << n))


def mask_to_bits(mask: int, n: int) -> str:
    return "".join("1" if mask >> i & 1 else "0" for i in range(n))


def bits_to_mask(bits: str) -> int:
    return sum(1 << i for i, ch in enumerate(bits) if ch == "1")


class CliffordElement:
    __slots__ = ("form", "coeffs", "exact")

    def __init__(self, form: DiagonalForm, coeffs: Optional[Mapping[int, object]] = None, exact: Optional[bool] = None):
        coeffs = dict(coeffs or {})
        limit = 1 << form.n
        kinds = set()
        clean = {}
        for m, c in coeffs.items():
            if not 0 <= m < limit:
                raise CliffordError(f"blade mask {m} does not fit n={form.n}")
            if isinstance(c, float):
                kinds.add(float)
            elif isinstance(c, (int, Fraction)) and not isinstance(c, bool):
                kinds.add(Fraction)
                c = Fraction(c)
            elif isinstance(c, np.floating):
                kinds.add(float)
                c = float(c)
            else:
                raise CliffordError(f"unsupported coefficient {c!r}")
            if c != 0:
                clean[m] = c
        if len(kinds) > 1:
            raise CliffordError("mixed exact and float coefficients; promote explicitly")
        if exact is None:
            exact = kinds != {float}
        elif kinds and (exact != (kinds == {Fraction})):
            raise CliffordError("coefficient flavor does not match requested flavor")
        self.form = form
        self.coeffs = clean
        self.exact = exact

    @classmethod
    def _trusted(cls, form: DiagonalForm, coeffs: dict, exact: bool) -> "CliffordElement":
        # internal results: coefficients already of the right flavor
        obj = cls.__new__(cls)
        obj.form = form
        obj.coeffs = {m: c for m, c in coeffs.items() if c != 0}
        obj.exact = exact
        return obj

    # -- construction helpers -------------------------------------------------

    @classmethod
    def blade(cls, form: DiagonalForm, mask: int, coeff=1) -> "CliffordElement":
        return cls(form, {mask: coeff})

    @classmethod
    def scalar(cls, form: DiagonalForm, c=1) -> "CliffordElement":
        return cls(form, {0: c}, exact=not isinstance(c, float))

    @classmethod
    def zero(cls, form: DiagonalForm, exact: bool = True) -> "CliffordElement":
        return cls(form, {}, exact=exact)

    @classmethod
    def generator(cls, form: DiagonalForm, i: int) -> "CliffordElement":
        """e_i, 1-based."""
        if not 1 <= i <= form.n:
            raise CliffordError(f"generator index {i} out of range")
        return cls(form, {1 << (i - 1): 1})

    @classmethod
    def vector(cls, form: DiagonalForm, coords: Sequence) -> "CliffordElement":
        """Embed v = sum v_i e_i; floats give a real element."""
        if len(coords) != form.n:
            raise CliffordError("vector length does not match form")
        if any(isinstance(x, (float, np.floating)) for x in coords):
            return cls(form, {1 << i: float(x) for i, x in enumerate(coords)}, exact=False)
        return cls(form, {1 << i: Fraction(x) for i, x in enumerate(coords)})

    @classmethod
    def from_vector(cls, form: DiagonalForm, coords: Sequence, basis: Sequence[int], exact: bool) -> "CliffordElement":
        """Element with coefficient coords[k] on blade basis[k]."""
        conv = Fraction if exact else float
        return cls(form, {m: conv(x) for m, x in zip(basis, coords)}, exact=exact)

    # -- flavor -----------------------------------------------------------------

    def to_float(self) -> "CliffordElement":
        return CliffordElement(self.form, {m: float(c) for m, c in self.coeffs.items()}, exact=False)

    def _zero(self):
        return Fraction(0) if self.exact else 0.0

    def _check(self, other: "CliffordElement") -> None:
        if self.form.d != other.form.d:
            raise CliffordError("elements live in different Clifford algebras")
        if self.exact != other.exact:
            raise CliffordError("mixed exact and float elements; promote explicitly")

    def _coerce(self, c):
        if self.exact:
            if isinstance(c, float):
                raise CliffordError("float scalar applied to exact element; promote explicitly")
            return Fraction(c)
        return float(c)

    # -- arithmetic -------------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, Number):
            other = CliffordElement(self.form, {0: self._coerce(other)}, exact=self.exact)
        self._check(other)
        out = dict(self.coeffs)
        for m, c in other.coeffs.items():
            out[m] = out.get(m, self._zero()) + c
        return CliffordElement(self.form, out, exact=self.exact)

    __radd__ = __add__

    def __neg__(self):
        return CliffordElement(self.form, {m: -c for m, c in self.coeffs.items()}, exact=self.exact)

    def __sub__(self, other):
        return self + (-other if isinstance(other, CliffordElement) else -other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Number):
            c = self._coerce(other)
            return CliffordElement(self.form, {m: v * c for m, v in self.coeffs.items()}, exact=self.exact)
        self._check(other)
        out: dict[int, object] = {}
        exact = self.exact
        scales = _scale_tables(self.form)[0 if exact else 1]
        for a, x in self.coeffs.items():
            for b, y in other.coeffs.items():
                v = x * y
                overlap = a & b
                if overlap:
                    v = v * scales[overlap]
                if reorder_sign(a, b) < 0:
                    v = -v
                m = a ^ b
                out[m] = out[m] + v if m in out else v
        return CliffordElement._trusted(self.form, out, exact)

    def __rmul__(self, other):
        if isinstance(other, Number):
            return self * other
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, Number):
            return self * (Fraction(1) / Fraction(other) if self.exact else 1.0 / float(other))
        return NotImplemented

    def __eq__(self, other):
        if isinstance(other, Number):
            other = CliffordElement(self.form, {0: self._coerce(other)}, exact=self.exact)
        if not isinstance(other, CliffordElement):
            return NotImplemented
        return self.form.d == other.form.d and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.form.d, frozenset(self.coeffs.items())))

    def __repr__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for m in sorted(self.coeffs):
            name = "".join(f"e{i + 1}" for i in range(self.form.n) if m >> i & 1) or "1"
            parts.append(f"{self.coeffs[m]}*{name}")
        return " + ".join(parts)

    # -- structure --------------------------------------------------------------

    def __getitem__(self, mask: int):
        return self.coeffs.get(mask, self._zero())

    def scalar_part(self):
        return self[0]

    def is_even(self) -> bool:
        return all(not m.bit_count() & 1 for m in self.coeffs)

    def is_vector(self) -> bool:
        return all(m.bit_count() == 1 for m in self.coeffs)

    def grade_part(self, k: int) -> "CliffordElement":
        return CliffordElement(self.form, {m: c for m, c in self.coeffs.items() if m.bit_count() == k}, exact=self.exact)

    def max_abs(self) -> float:
        return max((abs(float(c)) for c in self.coeffs.values()), default=0.0)

    def vector_coords(self) -> list:
        return [self[1 << i] for i in range(self.form.n)]

    def coords(self, basis: Sequence[int]) -> list:
        return [self[m] for m in basis]

    def to_json(self) -> dict:
        if self.exact:
            return {mask_to_bits(m, self.form.n): format_rational(c) for m, c in sorted(self.coeffs.items())}
        return {mask_to_bits(m, self.form.n): c for m, c in sorted(self.coeffs.items())}

    @classmethod
    def from_json(cls, form: DiagonalForm, data: Mapping[str, object]) -> "CliffordElement":
        if all(isinstance(v, float) for v in data.values()) and data:
            return cls(form, {bits_to_mask(k): float(v) for k, v in data.items()}, exact=False)
        return cls(form, {bits_to_mask(k): parse_rational(v) for k, v in data.items()})


def reversal(x: CliffordElement) -> CliffordElement:
    """The anti-involution iota reversing the order of generators."""
    return CliffordElement(x.form, {m: (c if reversal_sign(m) > 0 else -c) for m, c in x.coeffs.items()}, exact=x.exact)


def even_part(x: CliffordElement) -> CliffordElement:
    return CliffordElement(x.form, {m: c for m, c in x.coeffs.items() if not m.bit_count() & 1}, exact=x.exact)


def odd_part(x: CliffordElement) -> CliffordElement:
    return CliffordElement(x.form, {m: c for m, c in x.coeffs.items() if m.bit_count() & 1}, exact=x.exact)


def _require_even(*xs: CliffordElement) -> None:
    for x in xs:
        if not x.is_even():
            raise CliffordError("element must lie in the even Clifford algebra")


def trace(c: CliffordElement):
    """Trace of x -> c x on C^+(Q): 2^(n-1) times the identity-blade coefficient."""
    _require_even(c)
    return (1 << (c.form.n - 1)) * c.scalar_part()


def linear_map_matrix(f: Callable[[CliffordElement], CliffordElement], form: DiagonalForm, exact: bool, basis: Optional[Sequence[int]] = None):
    """Matrix of a linear map of C^+(Q) (or of the span of ``basis``) in blade coordinates.

    Columns are images of basis blades. Exact flavor gives a list of
    Fraction rows, float flavor a numpy array.
    """
    basis = even_blades(form.n) if basis is None else list(basis)
    index = {m: k for k, m in enumerate(basis)}
    N = len(basis)
    if exact:
        mat = [[Fraction(0)] * N for _ in range(N)]
    else:
        mat = np.zeros((N, N))
    for col, m in enumerate(basis):
        e = CliffordElement(form, {m: 1 if exact else 1.0}, exact=exact)
        img = f(e)
        for mm, c in img.coeffs.items():
            if mm not in index:
                raise CliffordError("linear map leaves the chosen subspace")
            mat[index[mm]][col] = c
    return mat


def left_mult_matrix(c: CliffordElement, basis: Optional[Sequence[int]] = None):
    return linear_map_matrix(lambda x: c * x, c.form, c.exact, basis)


def trace_via_matrix(c: CliffordElement):
    """Oracle for :func:`trace`: sum of the diagonal of the explicit matrix of x -> c x."""
    _require_even(c)
    mat = left_mult_matrix(c)
    return sum((mat[i][i] for i in range(len(mat))), Fraction(0) if c.exact else 0.0)


def bilinear_E(alpha: CliffordElement, v: CliffordElement, w: CliffordElement):
    """E(v, w) = Tr(alpha iota(v) w)."""
    _require_even(v, w)
    return trace(alpha * reversal(v) * w)


def center_of_even(form: DiagonalForm, bound: int = 6) -> list[CliffordElement]:
    """Basis of the center of C^+(Q) by an exact commutant solve.

    Brute-force oracle used to validate the structure theory; refuses n > bound.
    """
    n = form.n
    if n > bound:
        raise CliffordError(f"center oracle refuses n={n} > bound {bound}")
    basis = even_blades(n)
    index = {m: k for k, m in enumerate(basis)}
    # C^+ is generated by e_1 e_j (j >= 2); for n == 1 it is just the scalars
    gens = [1 | (1 << j) for j in range(1, n)]
    rows = []
    for g in gens:
        block = [[Fraction(0)] * len(basis) for _ in basis]
        for col, m in enumerate(basis):
            s1, k1, r1 = blade_product(g, m, form)
            s2, k2, r2 = blade_product(m, g, form)
            block[index[r1]][col] += s1 * k1
            block[index[r2]][col] -= s2 * k2
        rows.extend(block)
    null = _linalg.nullspace(rows, ncols=len(basis))
    return [CliffordElement.from_vector(form, v, basis, exact=True) for v in null]


def _inverse_by_solve(g: CliffordElement) -> CliffordElement:
    form = g.form
    basis = even_blades(form.n) if g.is_even() else all_blades(form.n)
    mat = left_mult_matrix(g, basis)
    rhs = [1 if m == 0 else 0 for m in basis]
    if g.exact:
        x = _linalg.solve(mat, rhs)
        if x is None:
            raise CliffordError("not a unit")
        return CliffordElement.from_vector(form, x, basis, exact=True)
    if np.linalg.matrix_rank(mat) < len(basis):
        raise CliffordError("not a unit")
    x = np.linalg.solve(mat, np.array(rhs, dtype=float))
    return CliffordElement.from_vector(form, x, basis, exact=False)


def inverse(g: CliffordElement, tol: float = 1e-12) -> CliffordElement:
    """Two-sided inverse; fast path when iota(g) g is a scalar."""
    if not g.coeffs:
        raise CliffordError("not a unit")
    nu = reversal(g) * g
    s = nu.scalar_part()
    rest = nu - s
    scalar_like = not rest.coeffs if g.exact else rest.max_abs() <= tol * max(1.0, abs(float(s)))
    if scalar_like and s != 0 and (g.exact or abs(s) > tol):
        return reversal(g) / s
    return _inverse_by_solve(g)


def conjugation_rho(g: CliffordElement, v: CliffordElement) -> CliffordElement:
    """g v g^-1."""
    return g * v * inverse(g)


def spinor_norm(g: CliffordElement, tol: float = 1e-9):
    """(scalar part of iota(g) g, whether iota(g) g is a scalar)."""
    _require_even(g)
    nu = reversal(g) * g
    s = nu.scalar_part()
    rest = nu - s
    if g.exact:
        return s, not rest.coeffs
    return s, rest.max_abs() <= tol * max(1.0, abs(s))


def embed_V(v: CliffordElement, pivot: int = 1):
    """Matrix of y -> v y e_pivot on C^+(Q) in the blade basis."""
    if not v.is_vector():
        raise CliffordError("embed_V needs a grade-one element")
    ep = CliffordElement(v.form, {1 << (pivot - 1): 1 if v.exact else 1.0}, exact=v.exact)
    return linear_map_matrix(lambda y: v * y * ep, v.form, v.exact)


def random_element(form: DiagonalForm, rng, density: float = 0.5, even: bool = False, exact: bool = True, height: int = 5) -> CliffordElement:
    """Random sparse element for property tests and sweeps."""
    masks = even_blades(form.n) if even else all_blades(form.n)
    coeffs = {}
    for m in masks:
        if rng.random() < density:
            if exact:
                coeffs[m] = Fraction(int(rng.integers(-height, height + 1)), int(rng.integers(1, height + 1)))
            else:
                coeffs[m] = float(rng.normal())
    return CliffordElement(form, coeffs, exact=exact)
