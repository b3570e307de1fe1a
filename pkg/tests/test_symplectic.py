import random

import gmpy2
import numpy as np
import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from symcurve import linalg
from symcurve.curves import standard_J
from symcurve.diagrams import Box, ReducedDiagram, build_double_diagram
from symcurve.errors import RankDeficientInput, ShapeMismatch
from symcurve.scalars import EXACT, FloatBackend
from symcurve.symplectic import (BlockEndomorphism, SpCoordinates, SymplecticModel, ad_delta,
                                 darboux_model, degree_split, delta_normal, skew_complement,
                                 sp_check)

from strategies import reduced_diagrams

Q = gmpy2.mpq


def model_of(*rows):
    return darboux_model(build_double_diagram(ReducedDiagram(list(rows))))


def as_sympy(M):
    return sympy.Matrix(M.shape[0], M.shape[1], lambda i, j: sympy.Rational(str(M[i, j])))


def random_sp(model, rng, height=4):
    coords = SpCoordinates(model)
    vec = {k: Q(rng.randint(-height, height), rng.randint(1, height)) for k in range(coords.n)}
    return coords.to_endo(vec)


def test_one_box_form():
    model = model_of((1, 1))
    assert np.array_equal(model.J, np.array([[0, 1], [-1, 0]], dtype=object))


def test_row_of_two_pairs_opposite_columns():
    model = model_of((2, 1))
    dd = model.diagram
    for b in dd.boxes:
        for a in dd.boxes:
            x = model.J[dd.offsets[b], dd.offsets[a]]
            if a == dd.mirror(b):
                assert abs(x) == 1
                assert x == (1 if b.col < 0 else -1)
            else:
                assert x == 0


def test_multiplicity_two_has_two_pairings():
    model = model_of((1, 2))
    assert model.dim == 4
    assert sum(1 for x in model.J.flat if x == 1) == 2


@given(reduced_diagrams(8))
def test_form_is_skew_and_invertible(red):
    model = SymplecticModel(build_double_diagram(red))
    J = model.J
    assert np.array_equal(J.T, -J)
    assert set(J.flat) <= {-1, 0, 1}
    assert as_sympy(J).det() != 0
    assert np.array_equal(J.dot(model.Jinv), linalg.identity(model.dim, EXACT))


@given(reduced_diagrams(8))
def test_standard_map_is_symplectic(red):
    model = SymplecticModel(build_double_diagram(red))
    T = model.standard_map
    assert np.array_equal(T.T.dot(standard_J(model.m)).dot(T), model.J)


def test_delta_one_box():
    delta = delta_normal(model_of((1, 1)))
    assert np.array_equal(delta.mat, np.array([[0, 0], [1, 0]], dtype=object))


def test_delta_row_of_two_signs():
    model = model_of((2, 1))
    delta = delta_normal(model)
    signs = [delta.mat[i + 1, i] for i in range(3)]
    assert signs == [1, 1, -1]
    assert sp_check(delta).ok
    assert delta.degrees() == [-1]


def test_delta_multiplicity_block():
    model = model_of((1, 2))
    delta = delta_normal(model)
    assert np.array_equal(delta.block(Box(1, 1), Box(1, -1)), linalg.identity(2, EXACT))


@given(reduced_diagrams(10))
def test_delta_always_in_sp_of_degree_minus_one(red):
    delta = delta_normal(SymplecticModel(build_double_diagram(red)))
    assert sp_check(delta).ok
    assert delta.degrees() in ([-1], [])


def test_identity_is_not_in_sp():
    model = model_of((1, 1))
    res = sp_check(BlockEndomorphism(model, linalg.identity(2, EXACT)))
    assert not res.ok
    assert res.pair is not None


def test_sp_check_requires_endomorphism():
    with pytest.raises(ShapeMismatch):
        sp_check(np.zeros((2, 2)))


@given(reduced_diagrams(8), st.integers(0, 10 ** 6))
def test_generated_elements_pass_both_membership_tests(red, seed):
    model = SymplecticModel(build_double_diagram(red))
    X = random_sp(model, random.Random(seed))
    assert sp_check(X).ok
    JX = model.J.dot(X.mat)
    assert np.array_equal(JX, JX.T)


@given(reduced_diagrams(8), st.integers(0, 10 ** 6))
def test_bracket_closure_and_grading(red, seed):
    model = SymplecticModel(build_double_diagram(red))
    rng = random.Random(seed)
    X, Y = random_sp(model, rng), random_sp(model, rng)
    assert sp_check(X.bracket(Y)).ok
    parts_x, parts_y = degree_split(X), degree_split(Y)
    assert parts_x.total(model) == X
    for k, A in parts_x.items():
        for l, B in parts_y.items():
            Z = A.bracket(B)
            assert Z.degrees() in ([], [k + l])


def test_degree_split_examples():
    model = model_of((1, 1))
    assert list(degree_split(delta_normal(model))) == [-1]
    X = BlockEndomorphism(model)
    X.set_block(Box(1, -1), Box(1, 1), [[Q(1)]])
    assert list(degree_split(X)) == [1]
    I = BlockEndomorphism(model, linalg.identity(2, EXACT))
    assert list(degree_split(I)) == [0]


def test_ad_delta_matches_commutator():
    model = model_of((2, 1), (1, 2))
    X = random_sp(model, random.Random(3))
    delta = delta_normal(model)
    assert np.array_equal(ad_delta(model, X.mat), delta.bracket(X).mat)


def test_definiteness_sign_is_negative():
    for red in ([(1, 1)], [(2, 1)], [(3, 1), (1, 2)]):
        assert model_of(*red).definiteness_sign == -1


def test_skew_complement_of_whole_space():
    model = model_of((1, 1))
    out = skew_complement(linalg.identity(2, EXACT), model)
    assert out.shape == (2, 0)


def test_skew_complement_of_isotropic_line():
    model = model_of((1, 1))
    S = np.array([[Q(1)], [Q(0)]], dtype=object)
    out = skew_complement(S, model)
    assert out.shape == (2, 1)
    assert out[1, 0] == 0 and out[0, 0] != 0


@pytest.mark.parametrize("seed", range(5))
def test_skew_complement_against_sympy_nullspace(seed):
    rng = random.Random(seed)
    model = model_of((3, 1))
    S = np.array([[Q(rng.randint(-3, 3)) for _ in range(2)] for _ in range(6)], dtype=object)
    if linalg.exact_rank(S) < 2:
        S[0, 0], S[1, 1], S[0, 1], S[1, 0] = Q(1), Q(1), Q(0), Q(0)
    out = skew_complement(S, model)
    assert out.shape[1] == 4
    oracle = (as_sympy(model.J).T * as_sympy(S)).T.nullspace()
    assert len(oracle) == 4
    assert as_sympy(out).rank() == 4
    for v in oracle:
        assert as_sympy(out).row_join(v).rank() == 4
    back = skew_complement(out, model)
    assert as_sympy(back).row_join(as_sympy(S)).rank() == 2


def test_skew_complement_float_backend():
    be = FloatBackend()
    model = model_of((2, 1))
    S = linalg.coerce_matrix(np.array([[1], [2], [0], [1]], dtype=object), be)
    out = skew_complement(S, model, be)
    assert out.shape[1] == 3
    with be.context():
        assert linalg.max_abs(S.T.dot(model.J_as(be)).dot(out)) < be.tolerance


def test_skew_complement_rejects_dependent_columns():
    model = model_of((1, 1))
    S = np.array([[Q(1), Q(2)], [Q(1), Q(2)]], dtype=object)
    with pytest.raises(RankDeficientInput):
        skew_complement(S, model)
