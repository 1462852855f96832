import cmath
from fractions import Fraction

import numpy as np
import pytest

from kuga_satake import hodge, variety
from kuga_satake.clifford import CliffordElement
from kuga_satake.qform import DegenerateFormError, DiagonalForm

FORMS = [(-1, -1, 1), (-1, -1, 3), (-2, -3, 5, 7), (-1, -2, 1, 3, 5), (-1, -1, 1, 1, 1, 3)]


@pytest.fixture(scope="module", params=FORMS)
def report(request):
    f = DiagonalForm(request.param)
    hs = hodge.random_plane(f, np.random.default_rng(21))
    return f, hs, variety.ks_report(f, hs)


def test_report_passes(report):
    f, _, r = report
    assert r.passed, [c.to_json() for c in r.checks if not c.passed]
    assert r.ks_dim == 2 ** (f.n - 2)
    assert r.period_matrix.shape == (r.ks_dim, 2 ** (f.n - 1))
    assert np.linalg.matrix_rank(r.period_matrix) == r.ks_dim
    assert sum(x.multiplicity * x.dimension for x in r.factors.factors) == r.ks_dim


def test_classical_riemann_relations(report):
    # Pi P^-1 Pi^T = 0 and -i Pi P^-1 conj(Pi)^T > 0, from the period matrix alone
    _, _, r = report
    Pi = r.period_matrix
    Pinv = np.linalg.inv(np.array(r.polarization_matrix, dtype=float))
    assert np.abs(Pi @ Pinv @ Pi.T).max() < 1e-8
    H = -1j * Pi @ Pinv @ Pi.conj().T
    assert np.abs(H - H.conj().T).max() < 1e-8
    assert np.linalg.eigvalsh(H).min() > 0


def test_period_matrix_is_linear_in_lattice(report):
    # a real vector x has C^+(Q)^{1,0} coordinates Pi x; J acts as i there
    _, _, r = report
    N = r.period_matrix.shape[1]
    x = np.random.default_rng(0).normal(size=N)
    np.testing.assert_allclose(r.period_matrix @ (r.complex_structure @ x), 1j * (r.period_matrix @ x), atol=1e-9)


def test_polarization_matrix_integral(report):
    f, hs, r = report
    P = r.polarization_matrix
    assert all(isinstance(x, int) for row in P for x in row)
    pol = hodge.polarization_E(hs)
    assert all(Fraction(P[i][j]) == r.polarization_scale * pol.E[i][j] for i in range(len(P)) for j in range(len(P)))


def test_to_json(report):
    _, _, r = report
    js = r.to_json()
    assert js["ks_dim"] == r.ks_dim and js["assumes_generic"] is True
    assert len(js["period_matrix"]) == r.ks_dim and len(js["period_matrix"][0][0]) == 2
    assert "period_matrix" not in r.to_json(include_matrices=False)


def test_summaries():
    expect = {
        (-1, -1, 1): "product of two isogenous elliptic curves",
        (-1, -1, 3): "simple abelian surface",
        (-1, -1, 1, 1, 1, 3): "A^4, dim A = 4, Q(sqrt -3) ⊆ End(A)",
    }
    for d, s in expect.items():
        f = DiagonalForm(d)
        assert variety.ks_report(f, hodge.aligned(f)).factors.summary() == s


def test_errors():
    f = DiagonalForm([-1, -1])
    with pytest.raises(DegenerateFormError):
        variety.ks_report(f, hodge.aligned(f))
    g = DiagonalForm([-1, 1, 1])
    with pytest.raises(DegenerateFormError):
        variety.ks_report(g, hodge.aligned(DiagonalForm([-1, -1, 1])))
    h = DiagonalForm([-1, -1, 3])
    with pytest.raises(DegenerateFormError):
        variety.ks_report(h, hodge.aligned(DiagonalForm([-1, -1, 5])))


@pytest.mark.parametrize("d", [(-1, -1, 1), (-2, -1, 3, 5), (-1, -3, 1, 2, 7), (-1, -1, 1, 1, 2, 3)])
def test_embedding_equivariance(d):
    f = DiagonalForm(d)
    rng = np.random.default_rng(13)
    hs = hodge.random_plane(f, rng)
    r = variety.ks_report(f, hs)
    assert variety.verify_embedding(r, f, hs) < 1e-9
    zs = [cmath.exp(1j * rng.uniform(0, 6.3)) for _ in range(3)] + [complex(*rng.normal(size=2))]
    vs = [CliffordElement.vector(f, list(rng.normal(size=f.n))) for _ in range(3)]
    assert variety.verify_embedding(r, f, hs, zs, vs) < 1e-9
    assert variety.embedding_rank(f) == f.n


def test_embedding_zero_vector():
    f = DiagonalForm([-1, -1, 3])
    hs = hodge.aligned(f)
    J = hodge.weil_element(hs).J
    assert variety.embedding_residual(hs, J, 1 + 1j, CliffordElement.vector(f, [0.0, 0.0, 0.0])) == 0.0
