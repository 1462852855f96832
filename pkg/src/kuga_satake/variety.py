"""Kuga-Satake abelian variety data: dimension, periods, Riemann form, isogeny factors.

We work with the torus C^+(Q)_R / Gamma, Gamma the lattice of integer
combinations of even blades, with complex structure h_s(i) = -J acting by
left multiplication. This is isogenous to the variety built on the dual
space, and only isogeny invariants are reported.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Optional, Sequence

import numpy as np

from . import brauer, clifford as cl, hodge
from .clifford import CliffordElement
from .hodge import Check, HodgeStructure2
from .qform import DegenerateFormError, DiagonalForm, signature


@dataclass(eq=False)
class KugaSatakeReport:
    n: int
    ks_dim: int
    structure: brauer.AlgebraStructure
    factors: brauer.IsogenyDecomposition
    period_matrix: np.ndarray  # ks_dim x 2^(n-1), complex
    eigenbasis: np.ndarray  # 2^(n-1) x ks_dim, columns span C^+(Q)^{1,0}
    complex_structure: np.ndarray  # h_s(i) on C^+(Q)_R in blade coordinates
    polarization_matrix: list  # integer, alternating
    polarization_scale: Fraction  # polarization_matrix = scale * E on blades
    alpha_sign: int
    checks: list = field(default_factory=list)
    assumes_generic: bool = True
    plane: Optional[HodgeStructure2] = None
    J: Optional[CliffordElement] = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self, include_matrices: bool = True) -> dict:
        out = {
            "n": self.n,
            "ks_dim": self.ks_dim,
            "structure": self.structure.to_json(),
            "isogeny": self.factors.to_json(),
            "alpha": f"{'+' if self.alpha_sign > 0 else '-'}e1e2",
            "checks": [c.to_json() for c in self.checks],
            "assumes_generic": self.assumes_generic,
        }
        if self.plane is not None:
            out["plane"] = self.plane.to_json()
        if include_matrices:
            out["period_matrix"] = [[[float(z.real), float(z.imag)] for z in row] for row in self.period_matrix]
            out["polarization_matrix"] = self.polarization_matrix
            out["polarization_scale"] = str(self.polarization_scale)
        return out


def _complex_basis(Jc: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Real vectors u_k, taken greedily from the blade basis, with u_k, Jc u_k a real basis."""
    N = Jc.shape[0]
    cols: list[np.ndarray] = []
    us = []
    for m in range(N):
        e = np.zeros(N)
        e[m] = 1.0
        trial = cols + [e, Jc @ e]
        if np.linalg.matrix_rank(np.column_stack(trial), tol=tol) == len(trial):
            cols = trial
            us.append(e)
        if len(us) == N // 2:
            break
    return np.column_stack(us)


def _clear_denominators(P: Sequence[Sequence[Fraction]]) -> tuple[list, Fraction]:
    den = 1
    for row in P:
        for x in row:
            den = lcm(den, Fraction(x).denominator)
    ints = [[int(Fraction(x) * den) for x in row] for row in P]
    return ints, Fraction(den)


def ks_report(form: DiagonalForm, plane: HodgeStructure2, tol: float = hodge.DEFAULT_TOL) -> KugaSatakeReport:
    n = form.n
    if n < 3:
        raise DegenerateFormError("Kuga-Satake report needs n >= 3")
    if signature(form) != (2, n - 2) or not (form.d[0] < 0 and form.d[1] < 0):
        raise DegenerateFormError("form must have signature (2-, (n-2)+) with d1, d2 < 0")
    if plane.form.d != form.d:
        raise DegenerateFormError("plane lives on a different form")

    structure = brauer.even_clifford_structure(form)
    factors = brauer.isogeny_decomposition(structure, n)
    ks_dim = 1 << (n - 2)
    N = 1 << (n - 1)

    weil = hodge.weil_element(plane, tol)
    pol = hodge.polarization_E(plane, weil)
    Jc = np.asarray(cl.left_mult_matrix(-weil.J))

    U = _complex_basis(Jc)
    B = U - 1j * (Jc @ U)  # columns span the +i eigenspace of h_s(i)
    proj = 0.5 * (np.eye(N) - 1j * Jc)  # projection of a real vector onto C^+(Q)^{1,0}
    Pi, *_ = np.linalg.lstsq(B, proj, rcond=None)

    P_int, scale = _clear_denominators(pol.E)
    P = np.array(P_int, dtype=float)
    pnorm = max(1.0, np.max(np.abs(P)))

    checks = [Check("J_squared_plus_one", (weil.J * weil.J + 1.0).max_abs(), tol)]
    checks.append(Check("complex_structure_squared", float(np.max(np.abs(Jc @ Jc + np.eye(N)))), tol))
    checks.append(Check("period_projection", float(np.max(np.abs(B @ Pi - proj))), 10 * tol))
    skew = max(abs(P_int[i][j] + P_int[j][i]) for i in range(N) for j in range(N))
    checks.append(Check("polarization_alternating", float(skew), 0.5))
    checks.append(Check("E_J_invariant", float(np.max(np.abs(Jc.T @ P @ Jc - P))) / pnorm, 10 * tol))
    G = P @ Jc
    checks.append(Check("E_hs_i_symmetric", float(np.max(np.abs(G - G.T))) / pnorm, 10 * tol))
    checks.append(Check("E_hs_i_positive", 0.0 if hodge.is_positive_definite(G) else 1.0, 10 * tol))
    iso = B.T @ P @ B
    bn = max(1.0, float(np.max(np.abs(B))) ** 2)
    checks.append(Check("riemann_isotropy", float(np.max(np.abs(iso))) / (pnorm * bn), 10 * tol))
    H = -1j * (B.T @ P @ B.conj())
    Hh = 0.5 * (H + H.conj().T)
    min_eig = float(np.min(np.linalg.eigvalsh(Hh)))
    checks.append(Check("riemann_positivity", max(0.0, -min_eig), 10 * tol, min_eig > 0))
    crank = int(np.linalg.matrix_rank(Pi, tol=1e-8))
    checks.append(Check("period_rank", float(abs(crank - ks_dim)), 0.5))
    lattice = np.vstack([Pi.real, Pi.imag])
    rrank = int(np.linalg.matrix_rank(lattice, tol=1e-8))
    checks.append(Check("lattice_rank", float(abs(rrank - N)), 0.5))

    return KugaSatakeReport(
        n=n,
        ks_dim=ks_dim,
        structure=structure,
        factors=factors,
        period_matrix=Pi,
        eigenbasis=B,
        complex_structure=Jc,
        polarization_matrix=P_int,
        polarization_scale=scale,
        alpha_sign=pol.sign,
        checks=checks,
        assumes_generic=True,
        plane=plane,
        J=weil.J,
    )


def embedding_residual(plane: HodgeStructure2, J: CliffordElement, z: complex, v: CliffordElement) -> float:
    """|| L_g M_v L_g^-1 - M_{rho(g) v} || for g = h_s(z), relative to ||M_v||."""
    g = hodge.hs_element(J, z)
    ginv = cl.inverse(g)
    vf = v.to_float() if v.exact else v
    Mv = np.asarray(cl.embed_V(vf))
    if not vf.coeffs:
        return 0.0
    lhs = np.asarray(cl.left_mult_matrix(g)) @ Mv @ np.asarray(cl.left_mult_matrix(ginv))
    rho_v = (g * vf * ginv).grade_part(1)
    rhs = np.asarray(cl.embed_V(rho_v))
    return float(np.max(np.abs(lhs - rhs))) / max(1.0, float(np.max(np.abs(Mv))))


def verify_embedding(report: KugaSatakeReport, form: DiagonalForm, plane: HodgeStructure2, zs: Sequence[complex] = (), vs: Sequence[CliffordElement] = ()) -> float:
    """Max intertwining residual of v -> M_v = [y -> v y e1] with h_s.

    With no samples given, checks every basis vector e_i at z = e^{i pi/4}
    and 2 - i.
    """
    J = report.J if report.J is not None else hodge.weil_element(plane).J
    if not vs:
        vs = [CliffordElement.vector(form, [1.0 if j == i else 0.0 for j in range(form.n)]) for i in range(form.n)]
    if not zs:
        zs = [cmath.exp(1j * math.pi / 4), 2 - 1j]
    worst = 0.0
    for z in zs:
        for v in vs:
            worst = max(worst, embedding_residual(plane, J, z, v))
    return worst


def embedding_rank(form: DiagonalForm) -> int:
    """Rank of v -> M_v on the basis e_1..e_n (n when injective)."""
    mats = [np.asarray(cl.embed_V(CliffordElement.vector(form, [1.0 if j == i else 0.0 for j in range(form.n)]))).ravel() for i in range(form.n)]
    return int(np.linalg.matrix_rank(np.vstack(mats)))
