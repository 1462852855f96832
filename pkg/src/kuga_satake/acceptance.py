"""Acceptance criteria, runnable from pytest and from ``kuga-satake selftest``.

Each criterion returns a :class:`CriterionResult`; a criterion passes only
when every check holds at its tolerance and the wall time is under its limit.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np
from sympy import primefactors

from . import brauer, clifford as cl, hodge, variety
from .clifford import CliffordElement
from .config import RunConfig
from .qform import DiagonalForm, is_rational_square, rational_sqrt, squarefree_part


NO_LIMIT = math.inf


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    elapsed: float
    limit: float
    failures: list = field(default_factory=list)
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f" ({self.detail})" if self.detail else ""
        limit = "no limit" if math.isinf(self.limit) else f"limit {self.limit:g}s"
        return f"[{status}] {self.number}. {self.name}: {self.elapsed:.2f}s ({limit}){extra}"

    def to_json(self) -> dict:
        return {
            "criterion": self.number,
            "name": self.name,
            "pass": self.passed,
            "elapsed": round(self.elapsed, 3),
            "limit": None if math.isinf(self.limit) else self.limit,
            "failures": self.failures[:20],
            "detail": self.detail,
        }


def _timed(number: int, name: str, limit: float, body: Callable[[list], str]) -> CriterionResult:
    failures: list = []
    t0 = time.perf_counter()
    try:
        detail = body(failures)
    except (ArithmeticError, ValueError) as exc:
        # an overtight tolerance can make a construction refuse to proceed
        failures.append({"check": "exception", "error": f"{type(exc).__name__}: {exc}"})
        detail = "aborted"
    elapsed = time.perf_counter() - t0
    if elapsed >= limit:
        failures.append({"check": "runtime", "elapsed": elapsed, "limit": limit})
    return CriterionResult(number, name, not failures, elapsed, limit, failures, detail)


def _random_form(rng, n: int, neg=(-1, -2, -3), pos=(1, 2, 3)) -> DiagonalForm:
    k = min(2, n)
    d = [int(rng.choice(neg)) for _ in range(k)] + [int(rng.choice(pos)) for _ in range(n - k)]
    return DiagonalForm(d)


# 1 -----------------------------------------------------------------------------


def trace_lemma(cfg: RunConfig, forms_per_n: int = 2, max_n: int = 8) -> CriterionResult:
    def body(failures):
        rng = np.random.default_rng(cfg.seed)
        pairs = 0
        for n in range(1, max_n + 1):
            for _ in range(forms_per_n):
                d = [int(rng.choice([-3, -2, -1, 1, 2, 3])) for _ in range(n)]
                form = DiagonalForm(d)
                top = 1 << (n - 1)
                blades = [CliffordElement.blade(form, m) for m in range(1 << n)]
                revs = [cl.reversal(b) for b in blades]
                for a in range(1 << n):
                    for b in range(1 << n):
                        if (a.bit_count() + b.bit_count()) & 1:
                            continue
                        got = cl.trace(revs[a] * blades[b])
                        if a != b:
                            want = Fraction(0)
                        else:
                            want = Fraction(top)
                            for i in range(n):
                                if a >> i & 1:
                                    want *= form.d[i]
                        pairs += 1
                        if got != want:
                            failures.append({"form": d, "a": a, "b": b, "got": str(got), "want": str(want)})
        return f"{pairs} blade pairs"

    return _timed(1, "trace lemma Tr(iota(e^a) e^b)", 5.0, body)


# 2 -----------------------------------------------------------------------------

CLASSIFICATION_GOLDENS = [
    ((-1, -1, 1), {"center": "Q", "reduced_matrix_size": 2, "split": True}),
    ((-1, -1, 3), {"center": "Q", "reduced_matrix_size": 1, "split": False}),
    ((-1, -1, 7), {"center": "Q", "reduced_matrix_size": 1, "split": False}),
    ((-1, -1, 11), {"center": "Q", "reduced_matrix_size": 1, "split": False}),
] + [
    ((-1, -1, 1, 1, 1, d), {"center": f"Q(sqrt {-d})", "reduced_matrix_size": 4, "split": True})
    for d in (1, 2, 3, 5)
]


def classification_goldens(cfg: RunConfig) -> CriterionResult:
    def body(failures):
        for d, want in CLASSIFICATION_GOLDENS:
            got = brauer.even_clifford_structure(DiagonalForm(d)).to_json()
            for key, val in want.items():
                if got[key] != val:
                    failures.append({"form": list(d), "key": key, "got": got[key], "want": val})
        return f"{len(CLASSIFICATION_GOLDENS)} forms"

    return _timed(2, "classification goldens", 1.0, body)


# 3 -----------------------------------------------------------------------------


def center_oracle_prediction(form: DiagonalForm, bound: int) -> tuple[int, bool | None]:
    """(dim of center, whether it is Q x Q) from the commutant solve alone."""
    basis = cl.center_of_even(form, bound)
    if len(basis) == 1:
        return 1, None
    one = CliffordElement.scalar(form, 1)
    # a central element with no identity component
    z = next(b - b.scalar_part() for b in basis if (b - b.scalar_part()).coeffs)
    sq = z * z
    if (sq - sq.scalar_part()).coeffs:
        raise AssertionError("central element does not square to a scalar")
    s = sq.scalar_part()
    # a + b z idempotent with b != 0 forces a = 1/2 and b^2 s = 1/4
    has_idempotent = is_rational_square(s)
    if has_idempotent:
        b = 1 / (2 * rational_sqrt(s))
        e = one * Fraction(1, 2) + z * b
        assert e * e == e
    return 2, has_idempotent


def center_oracle(cfg: RunConfig) -> CriterionResult:
    coeffs_neg = (-1, -2, -3, -5)
    coeffs_pos = (1, 2, 3, 5)
    top = min(5, cfg.oracle_bound)

    def body(failures):
        count = 0
        for n in range(2, top + 1):
            for neg in itertools.product(coeffs_neg, repeat=2):
                for pos in itertools.product(coeffs_pos, repeat=n - 2):
                    form = DiagonalForm(neg + pos)
                    struct = brauer.even_clifford_structure(form)
                    dim, split_center = center_oracle_prediction(form, cfg.oracle_bound)
                    predicted_dim = struct.center_degree
                    predicted_split = None if struct.center == "Q" else struct.center == "QxQ"
                    count += 1
                    if dim != predicted_dim or split_center != predicted_split:
                        failures.append({"form": list(neg + pos), "oracle": [dim, split_center], "brauer": [predicted_dim, predicted_split]})
        return f"{count} forms, n <= {top}"

    return _timed(3, "center oracle equivalence", 60.0, body)


# 4 -----------------------------------------------------------------------------


def random_squarefree(rng, bound: int = 2000) -> int:
    while True:
        x = int(rng.integers(-bound, bound + 1))
        if x:
            return squarefree_part(x)


def hilbert_product_formula(cfg: RunConfig, pairs: int = 500) -> CriterionResult:
    def body(failures):
        rng = np.random.default_rng(cfg.seed)
        for _ in range(pairs):
            a, b = random_squarefree(rng), random_squarefree(rng)
            places = [brauer.INF] + primefactors(2 * a * b)
            prod = 1
            for p in places:
                prod *= brauer.hilbert_symbol(a, b, p)
            if prod != 1:
                failures.append({"a": a, "b": b, "check": "product formula"})
            try:
                brauer.ramification(brauer.QuaternionSymbol(a, b))
            except brauer.BrauerError as exc:
                failures.append({"a": a, "b": b, "check": str(exc)})
        return f"{pairs} pairs"

    return _timed(4, "Hilbert product formula", 5.0, body)


# 5 -----------------------------------------------------------------------------


def hodge_sweep(cfg: RunConfig, planes: int = 20, ns=range(3, 9)) -> CriterionResult:
    def body(failures):
        rng = np.random.default_rng(cfg.seed)
        total = 0
        for n in ns:
            form = _random_form(rng, n, pos=(1, 2, 3, 5))
            for _ in range(planes):
                hs = hodge.random_plane(form, rng)
                for c in hodge.hodge_report(hs, rng, cfg.tolerance):
                    if not c.passed:
                        failures.append({"n": n, "form": [str(x) for x in form.d], **c.to_json()})
                total += 1
        return f"{total} planes"

    return _timed(5, "Hodge verification sweep", 120.0, body)


# 6 -----------------------------------------------------------------------------

ALIGNED_FORMS = [
    (-1, -1, 1),
    (-2, -8, 3, 5),  # d1 d2 = 16, exact path
    (-1, -2, 1, 3),
    (-3, -3, 2, 5, 7),  # exact path
    (-1, -3, 1, 2, 2, 5),
    (-2, -5, 1, 1, 3, 3, 7),
    (-1, -1, 1, 2, 3, 5, 7, 11),
    (-2, -3, 1, 2, 3, 1, 2, 3),
]


def aligned_closed_form(cfg: RunConfig) -> CriterionResult:
    def body(failures):
        for d in ALIGNED_FORMS:
            form = DiagonalForm(d)
            pol = hodge.polarization_E(hodge.aligned(form))
            want = hodge.closed_form_gram(form)
            N = len(want)
            G = pol.gram
            scale = max(1.0, max(abs(float(w)) for w in want))
            res = max(abs(G[i, j] - (float(want[i]) if i == j else 0.0)) for i in range(N) for j in range(N)) / scale
            if res >= cfg.tolerance:
                failures.append({"form": list(d), "residual": res})
            if pol.sign != 1:
                failures.append({"form": list(d), "check": "alpha sign", "got": pol.sign})
            if is_rational_square(form.d[0] * form.d[1]):
                exact = pol.exact_gram
                if exact is None or any(exact[i][j] != (want[i] if i == j else 0) for i in range(N) for j in range(N)):
                    failures.append({"form": list(d), "check": "exact closed form"})
        return f"{len(ALIGNED_FORMS)} forms"

    return _timed(6, "aligned-plane closed form", NO_LIMIT, body)


# 7 -----------------------------------------------------------------------------


def ks_reports(cfg: RunConfig) -> CriterionResult:
    def body(failures):
        rng = np.random.default_rng(cfg.seed)
        cases = [
            ((-1, -1, 1), lambda dec: "two isogenous elliptic curves" in dec.summary()),
            ((-1, -1, 3), lambda dec: dec.summary() == "simple abelian surface"),
            (
                (-1, -1, 1, 1, 1, 3),
                lambda dec: len(dec.factors) == 1
                and dec.factors[0].multiplicity == 4
                and dec.factors[0].dimension == 4
                and dec.factors[0].endomorphisms == "Q(sqrt -3)",
            ),
        ]
        for d, ok in cases:
            form = DiagonalForm(d)
            for plane in (hodge.aligned(form), hodge.random_plane(form, rng)):
                rep = variety.ks_report(form, plane, cfg.tolerance)
                if not ok(rep.factors):
                    failures.append({"form": list(d), "summary": rep.factors.summary()})
                if rep.ks_dim != 1 << (form.n - 2) or 2 * rep.ks_dim != rep.structure.dimension():
                    failures.append({"form": list(d), "check": "ks_dim"})
                if sum(f.multiplicity * f.dimension for f in rep.factors.factors) != rep.ks_dim:
                    failures.append({"form": list(d), "check": "factor dimension sum"})
                for c in rep.checks:
                    if not c.passed:
                        failures.append({"form": list(d), **c.to_json()})
        return "n=3 split, n=3 d=3, n=6 Weil-type form"

    return _timed(7, "Kuga-Satake reports", NO_LIMIT, body)


# 8 -----------------------------------------------------------------------------


def embedding_equivariance(cfg: RunConfig, triples: int = 10) -> CriterionResult:
    def body(failures):
        rng = np.random.default_rng(cfg.seed)
        worst = 0.0
        for n in range(3, 7):
            form = _random_form(rng, n, pos=(1, 2, 3, 5))
            for _ in range(triples):
                plane = hodge.random_plane(form, rng)
                J = hodge.weil_element(plane).J
                z = complex(*rng.normal(size=2))
                v = CliffordElement.vector(form, [float(x) for x in rng.normal(size=n)])
                r = variety.embedding_residual(plane, J, z, v)
                worst = max(worst, r)
                if r >= cfg.tolerance:
                    failures.append({"n": n, "residual": r})
            if variety.embedding_rank(form) != n:
                failures.append({"n": n, "check": "v -> M_v injective"})
        return f"max residual {worst:.2e}"

    return _timed(8, "embedding equivariance", NO_LIMIT, body)


CRITERIA = [
    trace_lemma,
    classification_goldens,
    center_oracle,
    hilbert_product_formula,
    hodge_sweep,
    aligned_closed_form,
    ks_reports,
    embedding_equivariance,
]


def run_all(cfg: RunConfig) -> list[CriterionResult]:
    return [crit(cfg) for crit in CRITERIA]
