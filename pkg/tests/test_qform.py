from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kuga_satake.qform import (
    DegenerateFormError,
    DiagonalForm,
    FormError,
    GramForm,
    check_congruence,
    diagonalize,
    form_from_json,
    format_rational,
    parse_rational,
    signature,
    squarefree_part,
    squarefree_scale,
)


def test_signature_examples():
    assert signature(DiagonalForm([-1, -1, 1, 1, 1, 3])) == (2, 4)
    assert signature(GramForm(np.eye(4, dtype=int).tolist())) == (0, 4)
    assert signature(GramForm([[0, 1], [1, 0]])) == (1, 1)


def test_diagonalize_already_diagonal():
    d = diagonalize(GramForm([[-1, 0, 0], [0, -1, 0], [0, 0, 3]]))
    assert d.d == (-1, -1, 3)
    assert d.change_of_basis == tuple(tuple(Fraction(int(i == j)) for j in range(3)) for i in range(3))


def test_diagonalize_hyperbolic_plane():
    g = GramForm([[0, 1], [1, 0]])
    d = diagonalize(g)
    assert d.d[0] * d.d[1] < 0
    assert check_congruence(g, d)


def test_diagonalize_reorders_negatives_first():
    g = GramForm([[3, 0, 0], [0, -1, 0], [0, 0, -1]])
    d = diagonalize(g)
    assert d.d == (-1, -1, 3)
    assert check_congruence(g, d)


def test_squarefree_scale_examples():
    assert squarefree_scale(DiagonalForm([-4, -9, 8])).d == (-1, -1, 2)
    assert squarefree_scale(DiagonalForm([-1, -1, 3])).d == (-1, -1, 3)
    assert squarefree_scale(DiagonalForm([-18, -2, 50])).d == (-2, -2, 2)


def test_squarefree_scale_tracks_basis():
    f = DiagonalForm([Fraction(-4, 9), 12, Fraction(5, 2)])
    g = squarefree_scale(f)
    cob = g.change_of_basis
    for j in range(3):
        col = [cob[i][j] for i in range(3)]
        assert f(col) == g.d[j]


def test_squarefree_part():
    assert squarefree_part(12) == 3
    assert squarefree_part(Fraction(-8, 3)) == -6
    assert squarefree_part(49) == 1


def test_parse_rational_refuses_floats():
    assert parse_rational("5/4") == Fraction(5, 4)
    assert parse_rational(" -3 ") == -3
    with pytest.raises(FormError):
        parse_rational(0.5)
    with pytest.raises(FormError):
        parse_rational("1/0")
    with pytest.raises(FormError):
        parse_rational(True)
    assert format_rational(Fraction(-6, 4)) == "-3/2"
    assert format_rational(Fraction(7)) == "7"


def test_errors():
    with pytest.raises(DegenerateFormError):
        DiagonalForm([1, 0])
    with pytest.raises(DegenerateFormError):
        GramForm([[1, 1], [1, 1]])
    with pytest.raises(FormError):
        GramForm([[1, 2], [3, 1]])
    with pytest.raises(FormError):
        GramForm([[1, 2]])
    with pytest.raises(FormError):
        form_from_json({"nope": 1})
    with pytest.raises(FormError):
        form_from_json("{not json")


def test_form_from_json():
    f, g = form_from_json({"diag": ["-1", "-1", "3/2"]})
    assert g is None and f.d == (-1, -1, Fraction(3, 2))
    f, g = form_from_json('{"gram": [[0, 2, 0], [2, 0, 0], [0, 0, -5]]}')
    assert check_congruence(g, f)
    assert signature(f) == (2, 1)


def test_discriminant():
    assert DiagonalForm([-1, -1, 1, 1, 1, 3]).discriminant() == -3
    assert DiagonalForm([-1, -1, 1, 1]).discriminant() == 1


small = st.integers(-4, 4)


@st.composite
def gram_matrices(draw):
    n = draw(st.integers(1, 6))
    a = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            a[i][j] = a[j][i] = draw(small)
    return a


@settings(max_examples=150, deadline=None)
@given(gram_matrices())
def test_diagonalize_congruence_and_sylvester(rows):
    # oracle for the signature: eigenvalue signs of the real symmetric matrix
    ev = np.linalg.eigvalsh(np.array(rows, dtype=float))
    if np.min(np.abs(ev)) < 1e-9:
        with pytest.raises(DegenerateFormError):
            GramForm(rows)
        return
    g = GramForm(rows)
    d = diagonalize(g)
    assert check_congruence(g, d)
    assert signature(d) == (int(np.sum(ev < 0)), int(np.sum(ev > 0)))
    negs = [x for x in d.d if x < 0]
    assert list(d.d[: len(negs)]) == negs
