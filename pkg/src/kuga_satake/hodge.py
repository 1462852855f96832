"""Weight-two Hodge structures with h^{2,0} = 1 and their weight-one Kuga-Satake partner.

A weight-two structure on (V, Q) of signature (2-, (n-2)+) is the same as an
oriented negative definite plane in V_R. From an oriented orthonormal basis
f1, f2 (Q(f_i) = -1) we get the Weil element J = f1 f2, the complex
structure h_s(a + bi) = a - bJ acting on C^+(Q)_R by left multiplication,
and the polarization E(v, w) = Tr(alpha iota(v) w) with alpha = +-e1 e2.

All of this is floating point, except that J and the E-Gram matrix are
kept exact when the plane is rational and Q(f1)Q(f2) is a rational square
before normalization.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import _linalg, clifford as cl
from .clifford import CliffordElement
from .qform import DiagonalForm, rational_sqrt

DEFAULT_TOL = 1e-9
PIVOT_TOL = 1e-12


class VerificationError(ValueError):
    """A numerical check failed at the requested tolerance."""


class HodgeError(ValueError):
    """Invalid plane or Hodge input."""


def _is_rational_vec(v: Sequence) -> bool:
    return all(isinstance(x, (int, Fraction)) and not isinstance(x, bool) for x in v)


@dataclass(frozen=True, eq=False)
class HodgeStructure2:
    form: DiagonalForm
    f1: np.ndarray
    f2: np.ndarray
    exact_J: Optional[CliffordElement] = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.form.n

    def q(self, x, y=None) -> float:
        y = x if y is None else y
        d = np.array([float(t) for t in self.form.d])
        return float(np.sum(d * np.asarray(x, float) * np.asarray(y, float)))

    def normalization_residual(self) -> float:
        return max(abs(self.q(self.f1) + 1), abs(self.q(self.f2) + 1), abs(self.q(self.f1, self.f2)))

    def to_json(self) -> dict:
        return {"f1": [float(x) for x in self.f1], "f2": [float(x) for x in self.f2]}


def from_plane(form: DiagonalForm, v: Sequence, w: Sequence, tol: float = PIVOT_TOL) -> HodgeStructure2:
    """Orthonormalize the oriented plane span(v, w) with respect to -Q."""
    n = form.n
    if len(v) != n or len(w) != n:
        raise HodgeError("plane vectors must have length n")
    exact = _is_rational_vec(v) and _is_rational_vec(w)
    if exact:
        v = [Fraction(x) for x in v]
        w = [Fraction(x) for x in w]
        qv, qw, qvw = form(v), form(w), form(v, w)
        det = qv * qw - qvw * qvw
        if det == 0:
            raise HodgeError("plane vectors are linearly dependent or the plane is degenerate")
    else:
        v = [float(x) for x in v]
        w = [float(x) for x in w]
        d = [float(x) for x in form.d]
        qv = sum(di * x * x for di, x in zip(d, v))
        qw = sum(di * x * x for di, x in zip(d, w))
        qvw = sum(di * x * y for di, x, y in zip(d, v, w))
        det = qv * qw - qvw * qvw
        nv = math.sqrt(sum(x * x for x in v))
        nw = math.sqrt(sum(x * x for x in w))
        cross = math.sqrt(max(0.0, sum((v[i] * w[j] - v[j] * w[i]) ** 2 for i in range(n) for j in range(i + 1, n))))
        if nv == 0 or nw == 0 or cross <= tol * nv * nw:
            raise HodgeError("plane vectors are linearly dependent")
    if not (qv < 0 and det > 0):
        raise HodgeError("plane fails (2-) condition: Q is not negative definite on it")

    # w' = w - (Q(v,w)/Q(v)) v is Q-orthogonal to v and keeps the orientation
    t = qvw / qv
    wp = [y - t * x for x, y in zip(v, w)]
    qwp = qw - t * qvw
    fv = np.array([float(x) for x in v]) / math.sqrt(-float(qv))
    fw = np.array([float(x) for x in wp]) / math.sqrt(-float(qwp))

    exact_J = None
    if exact:
        r = rational_sqrt(qv * qwp)
        if r is not None:
            vv = CliffordElement.vector(form, v)
            ww = CliffordElement.vector(form, wp)
            exact_J = (vv * ww).grade_part(2) / r
    return HodgeStructure2(form, fv, fw, exact_J)


def from_parameters(form: DiagonalForm, a: Sequence, b: Sequence) -> HodgeStructure2:
    """Plane spanned by (1, 0, a') and (0, 1, b') in coordinates where Q = -X1^2 - X2^2 + X3^2 + ...

    For a form with |d_i| != 1 the coordinates are rescaled by 1/sqrt|d_i|.
    """
    n = form.n
    if len(a) != n - 2 or len(b) != n - 2:
        raise HodgeError("need n-2 parameters for each spanning vector")
    if not (form.d[0] < 0 and form.d[1] < 0 and all(x > 0 for x in form.d[2:])):
        raise HodgeError("form must be ordered with signature (2-, (n-2)+)")
    y1 = [1, 0, *a]
    y2 = [0, 1, *b]
    if all(abs(x) == 1 for x in form.d) and _is_rational_vec(y1 + y2):
        return from_plane(form, y1, y2)
    s = [1 / math.sqrt(abs(float(x))) for x in form.d]
    return from_plane(form, [float(x) * si for x, si in zip(y1, s)], [float(x) * si for x, si in zip(y2, s)])


def aligned(form: DiagonalForm) -> HodgeStructure2:
    """The plane <e1, e2>, oriented by (e1, e2)."""
    n = form.n
    return from_plane(form, [1] + [0] * (n - 1), [0, 1] + [0] * (n - 2))


def random_plane(form: DiagonalForm, rng, spread: float = 0.4, tries: int = 1000) -> HodgeStructure2:
    """A random admissible plane, rejection-sampled around <e1, e2>."""
    n = form.n
    for _ in range(tries):
        a = rng.normal(0.0, spread, n - 2)
        b = rng.normal(0.0, spread, n - 2)
        try:
            return from_parameters(form, [float(x) for x in a], [float(x) for x in b])
        except HodgeError:
            continue
    raise HodgeError("could not sample an admissible plane")


def hodge_action(hs: HodgeStructure2, z: complex) -> np.ndarray:
    """h(z) on V_R in e-coordinates.

    |z|^2 times: on the plane, f1 + i f2 is an eigenvector with eigenvalue
    (z/|z|)^2; on the Q-orthogonal complement, the identity.
    """
    z = complex(z)
    if z == 0:
        raise HodgeError("h is defined on C^*")
    r2 = abs(z) ** 2
    phi = cmath.phase(z)
    c, s = math.cos(2 * phi), math.sin(2 * phi)
    d = np.array([float(x) for x in hs.form.d])
    F = np.column_stack([hs.f1, hs.f2])
    # plane coordinates of x: -Q(x, f_i) since Q(f_i) = -1
    proj = -(F.T * d)
    rot = np.array([[c, s], [-s, c]])
    n = hs.n
    return r2 * (np.eye(n) + F @ (rot - np.eye(2)) @ proj)


@dataclass(frozen=True, eq=False)
class WeilElement:
    J: CliffordElement
    exact: Optional[CliffordElement] = None


def weil_element(hs: HodgeStructure2, tol: float = DEFAULT_TOL) -> WeilElement:
    """J = f1 f2 (grade two, J^2 = -1)."""
    f1 = CliffordElement.vector(hs.form, [float(x) for x in hs.f1])
    f2 = CliffordElement.vector(hs.form, [float(x) for x in hs.f2])
    full = f1 * f2
    J = full.grade_part(2)
    if hs.exact_J is not None:
        J = hs.exact_J.to_float()
    sq = J * J + 1.0
    scale = max(1.0, J.max_abs() ** 2)
    if sq.max_abs() > tol * scale:
        raise VerificationError(f"J^2 != -1 (residual {sq.max_abs():.3e}); normalization bug")
    return WeilElement(J, hs.exact_J)


def hs_element(J: CliffordElement, z: complex) -> CliffordElement:
    """h_s(a + bi) = a - bJ."""
    z = complex(z)
    return J * (-z.imag) + z.real


def hs_action(J: CliffordElement, z: complex, x: CliffordElement) -> CliffordElement:
    if not x.is_even():
        raise cl.CliffordError("h_s acts on the even Clifford algebra")
    if x.exact:
        x = x.to_float()
    return hs_element(J, z) * x


def e1e2(form: DiagonalForm) -> CliffordElement:
    return CliffordElement.blade(form, 0b11)


def E_matrix(alpha: CliffordElement) -> list:
    """Exact matrix E(e^a, e^b) = Tr(alpha iota(e^a) e^b) on the even blade basis."""
    form = alpha.form
    basis = cl.even_blades(form.n)
    index = {m: k for k, m in enumerate(basis)}
    N = len(basis)
    top = 1 << (form.n - 1)
    zero = Fraction(0) if alpha.exact else 0.0
    P = [[zero] * N for _ in range(N)]
    for i, a in enumerate(basis):
        y = alpha * cl.reversal(CliffordElement.blade(form, a, 1 if alpha.exact else 1.0))
        for c, coef in y.coeffs.items():
            if c in index:
                sign, scale, _ = cl.blade_product(c, c, form)
                val = coef * sign * (scale if alpha.exact else float(scale))
                P[i][index[c]] += top * val
    return P


def is_positive_definite(G: np.ndarray, pivot_tol: float = PIVOT_TOL) -> bool:
    """Cholesky with a relative pivot threshold on the symmetric part."""
    S = 0.5 * (np.asarray(G, float) + np.asarray(G, float).T)
    N = S.shape[0]
    scale = max(np.max(np.abs(S)), 1e-300)
    L = np.zeros_like(S)
    for j in range(N):
        piv = S[j, j] - L[j, :j] @ L[j, :j]
        if piv <= pivot_tol * scale:
            return False
        L[j, j] = math.sqrt(piv)
        if j + 1 < N:
            L[j + 1 :, j] = (S[j + 1 :, j] - L[j + 1 :, :j] @ L[j, :j]) / L[j, j]
    return True


@dataclass(frozen=True, eq=False)
class Polarization:
    alpha: CliffordElement  # exact, +-e1e2
    sign: int
    E: list  # exact E(e^a, e^b)
    gram: np.ndarray  # E(e^a, h_s(i) e^b), float
    exact_gram: Optional[list] = None


def polarization_E(hs: HodgeStructure2, weil: Optional[WeilElement] = None) -> Polarization:
    """Pick alpha = s e1e2 so that (x, y) -> E(x, h_s(i) y) is positive definite."""
    weil = weil or weil_element(hs)
    form = hs.form
    P = E_matrix(e1e2(form))
    Pf = np.array([[float(x) for x in row] for row in P])
    minus_J = cl.left_mult_matrix(-weil.J)
    G = Pf @ minus_J
    for s in (1, -1):
        if is_positive_definite(s * G):
            exact_gram = None
            if weil.exact is not None:
                mJ = cl.left_mult_matrix(-weil.exact)
                exact_gram = [[s * x for x in row] for row in _linalg.matmul(P, mJ)]
            return Polarization(
                e1e2(form) * s,
                s,
                [[s * x for x in row] for row in P],
                s * G,
                exact_gram,
            )
    raise VerificationError("polarization failure: neither sign of alpha gives a positive definite form")


def closed_form_gram(form: DiagonalForm) -> list:
    """Diagonal of E(e^a, h_s(i) e^a) for the plane <e1, e2>, alpha = e1e2, J = c e1e2.

    2^(n-1) (c d1 d2) (-1)^(a1+a2) d1^a1 d2^a2 d3^a3 ... dn^an with c = (d1 d2)^(-1/2).
    Returned as floats; exact when d1 d2 is a square.
    """
    d = form.d
    c_exact = rational_sqrt(1 / (d[0] * d[1]))
    out = []
    for a in cl.even_blades(form.n):
        prod = Fraction(1)
        for i in range(form.n):
            if a >> i & 1:
                prod *= d[i]
        sign = -1 if ((a & 1) + (a >> 1 & 1)) % 2 else 1
        base = (1 << (form.n - 1)) * d[0] * d[1] * sign * prod
        if c_exact is not None:
            out.append(c_exact * base)
        else:
            out.append(float(base) / math.sqrt(float(d[0] * d[1])))
    return out


@dataclass
class Check:
    name: str
    max_deviation: float
    tolerance: float
    passed: Optional[bool] = None

    def __post_init__(self):
        if self.passed is None:
            self.passed = bool(self.max_deviation < self.tolerance)

    def to_json(self) -> dict:
        return {"name": self.name, "max_deviation": self.max_deviation, "tolerance": self.tolerance, "pass": self.passed}


def unit(z: complex) -> complex:
    return z / abs(z)


def verify_cspin(hs: HodgeStructure2, zs: Sequence[complex], tol: float = DEFAULT_TOL, weil: Optional[WeilElement] = None) -> list[Check]:
    """h_s(z) normalizes V, induces h(z)/|z|^2 on it, and has spinor norm |z|^2."""
    weil = weil or weil_element(hs, tol)
    J = weil.J
    n = hs.n
    gens = [CliffordElement.vector(hs.form, [1.0 if j == i else 0.0 for j in range(n)]) for i in range(n)]
    memb = rot = norm = 0.0
    for z in zs:
        g = hs_element(J, z)
        ginv = cl.inverse(g)
        rho = np.zeros((n, n))
        for i, e in enumerate(gens):
            img = g * e * ginv
            off = cl.CliffordElement(hs.form, {m: c for m, c in img.coeffs.items() if m.bit_count() != 1}, exact=False)
            memb = max(memb, off.max_abs())
            rho[:, i] = [img[1 << k] for k in range(n)]
        h = hodge_action(hs, z) / abs(z) ** 2
        rot = max(rot, float(np.max(np.abs(rho - h))))
        nu, _ = cl.spinor_norm(g, tol)
        nu_el = cl.reversal(g) * g
        dev = max(abs(nu - abs(z) ** 2), (nu_el - nu).max_abs()) / max(1.0, abs(z) ** 2)
        norm = max(norm, dev)
    return [
        Check("cspin_membership", memb, tol),
        Check("rho_hs_equals_h", rot, tol),
        Check("spinor_norm", norm, tol),
    ]


def riemann_residual(hs: HodgeStructure2, pol: Polarization, weil: WeilElement, zs, xs, ys) -> float:
    """max |E(h_s(z)x, h_s(z)y) - |z|^2 E(x, y)| relative to |z|^2 |x| |y|."""
    Pf = np.array([[float(v) for v in row] for row in pol.E])
    basis = cl.even_blades(hs.n)
    worst = 0.0
    for z, x, y in zip(zs, xs, ys):
        xv = np.array((hs_action(weil.J, z, x)).coords(basis), float)
        yv = np.array((hs_action(weil.J, z, y)).coords(basis), float)
        x0 = np.array(x.to_float().coords(basis) if x.exact else x.coords(basis), float)
        y0 = np.array(y.to_float().coords(basis) if y.exact else y.coords(basis), float)
        lhs = xv @ Pf @ yv
        rhs = abs(z) ** 2 * (x0 @ Pf @ y0)
        scale = abs(z) ** 2 * max(1.0, np.abs(Pf).max()) * max(1.0, np.linalg.norm(x0) * np.linalg.norm(y0))
        worst = max(worst, abs(lhs - rhs) / scale)
    return worst


def symmetry_residual(pol: Polarization) -> float:
    G = pol.gram
    return float(np.max(np.abs(G - G.T)) / max(1.0, np.max(np.abs(G))))


def alternating_residual(pol: Polarization) -> Fraction:
    """E(x, y) + E(y, x) on blades; exactly zero for a weight-one polarization."""
    P = pol.E
    N = len(P)
    return max((abs(P[i][j] + P[j][i]) for i in range(N) for j in range(N)), default=Fraction(0))


def hodge_report(hs: HodgeStructure2, rng, tol: float = DEFAULT_TOL, samples: int = 10) -> list[Check]:
    """The full numerical check list for one plane."""
    checks: list[Check] = [Check("plane_normalization", hs.normalization_residual(), tol)]
    weil = weil_element(hs, tol)
    JJ = (weil.J * weil.J + 1.0).max_abs()
    checks.append(Check("J_squared_plus_one", JJ, tol))
    try:
        pol = polarization_E(hs, weil)
    except VerificationError:
        checks.append(Check("polarization_sign", float("inf"), tol, False))
        return checks
    checks.append(Check("polarization_sign", 0.0, tol, True))
    checks.append(Check("E_alternating", float(alternating_residual(pol)), tol))
    checks.append(Check("E_hs_i_symmetric", symmetry_residual(pol), tol))
    checks.append(Check("E_hs_i_positive_definite", 0.0 if is_positive_definite(pol.gram) else 1.0, tol))
    zs = [complex(*rng.normal(size=2)) for _ in range(samples)]
    xs = [cl.random_element(hs.form, rng, even=True, exact=False) for _ in range(samples)]
    ys = [cl.random_element(hs.form, rng, even=True, exact=False) for _ in range(samples)]
    checks.append(Check("riemann_relation", riemann_residual(hs, pol, weil, zs, xs, ys), 10 * tol))
    phis = [float(p) for p in rng.uniform(0, 2 * math.pi, samples)]
    checks.extend(verify_cspin(hs, [cmath.exp(1j * p) for p in phis], tol, weil))
    return checks
