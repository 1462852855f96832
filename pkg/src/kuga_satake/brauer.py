"""Quaternion algebras over Q and the structure of the even Clifford algebra.

Quaternion algebras are tracked by their Brauer class, i.e. the (even) set
of places where they ramify. Tensor products of classes are symmetric
differences of these sets.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import isqrt
from typing import Optional, Union

from sympy import primefactors

from .qform import DiagonalForm, is_rational_square, squarefree_part

INF = "inf"
Place = Union[int, str]


class BrauerError(RuntimeError):
    """Internal inconsistency (e.g. odd ramification set)."""


def _place_key(p: Place):
    return (1, 0) if p == INF else (0, p)


def sort_places(places) -> list:
    return sorted(places, key=_place_key)


def _legendre(a: int, p: int) -> int:
    r = pow(a % p, (p - 1) // 2, p)
    return -1 if r == p - 1 else r


def _split_off(a: int, p: int) -> tuple[int, int]:
    v = 0
    while a % p == 0:
        a //= p
        v += 1
    return v, a


def hilbert_symbol(a, b, place: Place) -> int:
    """(a, b)_v: +1 iff z^2 = a x^2 + b y^2 has a nontrivial solution over Q_v."""
    a, b = Fraction(a), Fraction(b)
    if a == 0 or b == 0:
        raise ValueError("Hilbert symbol needs nonzero arguments")
    if place == INF:
        return -1 if a < 0 and b < 0 else 1
    p = int(place)
    # only square classes matter
    a, b = squarefree_part(a), squarefree_part(b)
    alpha, u = _split_off(a, p)
    beta, v = _split_off(b, p)
    if p == 2:
        eps = lambda x: ((x - 1) // 2) % 2
        omega = lambda x: ((x * x - 1) // 8) % 2
        e = eps(u) * eps(v) + alpha * omega(v) + beta * omega(u)
        return -1 if e % 2 else 1
    s = -1 if (alpha * beta * ((p - 1) // 2)) % 2 else 1
    if beta % 2:
        s *= _legendre(u, p)
    if alpha % 2:
        s *= _legendre(v, p)
    return s


@dataclass(frozen=True)
class QuaternionSymbol:
    """(a, b)_Q with a, b squarefree nonzero integers."""

    a: int
    b: int

    def __post_init__(self):
        for x in (self.a, self.b):
            if x == 0 or squarefree_part(x) != x:
                raise ValueError(f"quaternion symbol entries must be squarefree nonzero integers, got {x}")

    @classmethod
    def reduced(cls, a, b) -> "QuaternionSymbol":
        return cls(squarefree_part(a), squarefree_part(b))

    def __str__(self):
        return f"({self.a},{self.b})"


@dataclass(frozen=True)
class BrauerClass:
    ram: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "ram", frozenset(self.ram))
        if len(self.ram) % 2:
            raise BrauerError(f"odd ramification set {sort_places(self.ram)}")

    @property
    def is_split(self) -> bool:
        return not self.ram

    def places(self) -> list:
        return sort_places(self.ram)

    def __str__(self):
        if not self.ram:
            return "M2(Q)"
        return "D[" + ",".join(str(p) for p in self.places()) + "]"

    def to_json(self) -> dict:
        return {"ram": self.places()}


TRIVIAL = BrauerClass()


def ramification(sym: QuaternionSymbol) -> BrauerClass:
    places = [INF] + primefactors(2 * sym.a * sym.b)
    ram = {p for p in places if hilbert_symbol(sym.a, sym.b, p) == -1}
    if len(ram) % 2:
        raise BrauerError(f"odd ramification for {sym}: {sort_places(ram)} (Hilbert symbol bug)")
    return BrauerClass(ram)


def find_witness(a: int, b: int, height: int = 50) -> Optional[tuple[int, int, int]]:
    """Search a x^2 + b y^2 = a b z^2 with 0 <= x, z <= height, |y| <= height."""
    ab = a * b
    for z in range(height + 1):
        for x in range(height + 1):
            if x == 0 and z == 0:
                continue
            r = ab * z * z - a * x * x
            if r % b:
                continue
            y2 = r // b
            if y2 < 0:
                continue
            y = isqrt(y2)
            if y * y == y2 and y <= height:
                return x, y, z
    return None


@dataclass(frozen=True)
class SplitResult:
    split: bool
    ramification: BrauerClass
    witness: Optional[tuple[int, int, int]] = None


def is_split(sym: QuaternionSymbol, height: int = 50) -> SplitResult:
    """Split iff no place ramifies. When split, also look for a small
    nontrivial zero of a x^2 + b y^2 - a b z^2; not finding one is fine."""
    cls = ramification(sym)
    witness = None
    if cls.is_split:
        witness = find_witness(sym.a, sym.b, height)
        if witness is not None:
            x, y, z = witness
            assert sym.a * x * x + sym.b * y * y == sym.a * sym.b * z * z
    return SplitResult(cls.is_split, cls, witness)


def tensor(*classes: BrauerClass) -> BrauerClass:
    ram: frozenset = frozenset()
    for c in classes:
        ram = ram ^ c.ram
    return BrauerClass(ram)


def place_splits(place: Place, d: int) -> bool:
    """Whether the place splits (has two places above it) in Q(sqrt d), d squarefree, d != 1."""
    if place == INF:
        return d > 0
    p = int(place)
    if p == 2:
        return d % 8 == 1
    if d % p == 0:
        return False
    return _legendre(d, p) == 1


def splits_over_quadratic(cls: BrauerClass, d: int) -> bool:
    """D tensor Q(sqrt d) is M2 iff no ramified place of D splits in Q(sqrt d)."""
    d = squarefree_part(d)
    if d == 1:
        raise ValueError("d must not be a square")
    return not any(place_splits(p, d) for p in cls.ram)


@dataclass(frozen=True)
class AlgebraStructure:
    """C^+(Q) = M_k(D) over its center, possibly two copies."""

    n: int
    matrix_size: int
    center: str  # "Q", "Q(sqrt d)" or "QxQ"
    discriminant: Optional[int]  # squarefree representative of (-1)^m d_1...d_n, even n only
    quaternion: Optional[BrauerClass]  # class over Q; None when n <= 2
    base_field: Optional[int]  # d when D is the base change of `quaternion` to Q(sqrt d)
    is_split: bool  # quaternion part (over the center) is a matrix algebra, or absent
    symbols: tuple = ()

    @property
    def center_degree(self) -> int:
        return 1 if self.center == "Q" else 2

    @property
    def reduced_matrix_size(self) -> int:
        """Size of the full matrix algebra once a split quaternion part is absorbed."""
        if self.quaternion is not None and self.is_split:
            return 2 * self.matrix_size
        return self.matrix_size

    def dimension(self) -> int:
        quat = 4 if self.quaternion is not None else 1
        return self.matrix_size ** 2 * quat * self.center_degree

    def center_label(self) -> str:
        if self.center == "Q(sqrt d)":
            return f"Q(sqrt {self.discriminant})"
        return self.center

    def describe(self) -> str:
        k = self.reduced_matrix_size
        if self.quaternion is None or self.is_split:
            inner = "Q" if self.center == "Q" else ("Q" if self.center == "QxQ" else self.center_label())
            if self.center == "QxQ":
                return f"M{k}(Q) x M{k}(Q)"
            return f"M{k}({inner})"
        if self.center == "QxQ":
            return f"M{k}({self.quaternion}) x M{k}({self.quaternion})"
        if self.center == "Q":
            return f"M{k}({self.quaternion})"
        return f"M{k}({self.quaternion} over {self.center_label()})"

    def to_json(self) -> dict:
        center = "Q(sqrt {})".format(self.discriminant) if self.center == "Q(sqrt d)" else self.center
        return {
            "matrix_size": self.matrix_size,
            "reduced_matrix_size": self.reduced_matrix_size,
            "center": center,
            "quaternion": None if self.quaternion is None else self.quaternion.to_json(),
            "quaternion_base_field": None if self.base_field is None else f"Q(sqrt {self.base_field})",
            "split": self.is_split,
            "description": self.describe(),
            "symbols": [[s.a, s.b] for s in self.symbols],
            "assumes_generic": True,
        }


def peel(coeffs: list[int]) -> tuple[QuaternionSymbol, list[int]]:
    """C(<d1,d2,d3,...>) = (-d1d2, -d2d3) (x) C(<-d1d2d3, d4, ...>)."""
    d1, d2, d3 = coeffs[:3]
    sym = QuaternionSymbol.reduced(-d1 * d2, -d2 * d3)
    return sym, [squarefree_part(-d1 * d2 * d3)] + list(coeffs[3:])


def even_clifford_structure(form: DiagonalForm) -> AlgebraStructure:
    n = form.n
    if n < 1:
        raise ValueError("n must be positive")
    coeffs = [squarefree_part(x) for x in form.d]
    symbols = []
    while len(coeffs) >= 3:
        sym, coeffs = peel(coeffs)
        symbols.append(sym)
    D = tensor(*(ramification(s) for s in symbols))
    quat = D if symbols else None

    if n % 2:
        m = n // 2
        k = 1 << (m - 1) if m >= 1 else 1
        out = AlgebraStructure(n, k, "Q", None, quat, None, quat is None or quat.is_split, tuple(symbols))
    else:
        m = n // 2
        k = 1 << (m - 2) if m >= 2 else 1
        c1, c2 = coeffs
        disc = form.discriminant()
        if squarefree_part(-c1 * c2) != squarefree_part(disc):
            raise BrauerError("discriminant bookkeeping mismatch")
        if is_rational_square(disc):
            out = AlgebraStructure(n, k, "QxQ", 1, quat, None, quat is None or quat.is_split, tuple(symbols))
        else:
            d = squarefree_part(disc)
            split = quat is None or splits_over_quadratic(quat, d)
            out = AlgebraStructure(n, k, "Q(sqrt d)", d, quat, d if quat is not None else None, split, tuple(symbols))
    if out.dimension() != 1 << (n - 1):
        raise BrauerError(f"structure {out.describe()} has wrong dimension")
    return out


@dataclass(frozen=True)
class IsogenyFactor:
    multiplicity: int
    dimension: int
    endomorphisms: str  # algebra contained in End(A_i) (x) Q
    label: str  # distinguishes non-isogenous factors

    @property
    def kind(self) -> str:
        if self.dimension == 1:
            return "elliptic curve"
        if self.dimension == 2:
            return "abelian surface"
        return f"abelian {self.dimension}-fold"

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "multiplicity": self.multiplicity,
            "dimension": self.dimension,
            "kind": self.kind,
            "endomorphisms_contain": self.endomorphisms,
        }


@dataclass(frozen=True)
class IsogenyDecomposition:
    ks_dim: int
    factors: tuple[IsogenyFactor, ...]
    assumes_generic: bool = True

    def summary(self) -> str:
        fs = self.factors
        if len(fs) == 1:
            f = fs[0]
            if f.multiplicity == 1:
                return f"simple {f.kind}"
            if f.multiplicity == 2 and f.dimension == 1:
                return "product of two isogenous elliptic curves"
            return f"A^{f.multiplicity}, dim A = {f.dimension}, {f.endomorphisms} ⊆ End(A)"
        parts = [f"{f.label}^{f.multiplicity} (dim {f.dimension}, {f.endomorphisms} ⊆ End)" for f in fs]
        return " x ".join(parts) + ", non-isogenous factors"

    def to_json(self) -> dict:
        return {
            "ks_dim": self.ks_dim,
            "factors": [f.to_json() for f in self.factors],
            "summary": self.summary(),
            "assumes_generic": self.assumes_generic,
        }


def isogeny_decomposition(structure: AlgebraStructure, n: Optional[int] = None) -> IsogenyDecomposition:
    """End(A) (x) Q = C^+(Q) = prod M_{n_i}(D_i)  ->  A ~ prod A_i^{n_i}.

    Valid when the Mumford-Tate group of V is all of GO(Q).
    """
    n = structure.n if n is None else n
    if n < 3:
        raise ValueError("Kuga-Satake decomposition needs n >= 3")
    g = 1 << (n - 2)
    k = structure.matrix_size
    q = structure.quaternion
    if structure.center == "Q(sqrt d)":
        field_label = structure.center_label()
        if structure.is_split:
            factors = [IsogenyFactor(2 * k, g // (2 * k), field_label, "A")]
        else:
            factors = [IsogenyFactor(k, g // k, f"{q} over {field_label}", "A")]
    else:
        copies = 2 if structure.center == "QxQ" else 1
        gg = g // copies
        if q is None or q.is_split:
            mk = lambda lab: IsogenyFactor(2 * k, gg // (2 * k), "Q", lab)
        else:
            mk = lambda lab: IsogenyFactor(k, gg // k, str(q), lab)
        factors = [mk("A")] if copies == 1 else [mk("A1"), mk("A2")]
    out = IsogenyDecomposition(g, tuple(factors))
    if sum(f.multiplicity * f.dimension for f in out.factors) != g:
        raise BrauerError("factor dimensions do not add up")
    return out
