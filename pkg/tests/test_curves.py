import random

import gmpy2
import numpy as np
import pytest
import sympy

from symcurve import linalg
from symcurve.curves import (adapted_lift, classify_form, curve_diagram, curve_from_columns,
                             flag_dimensions, load_curve, orient, osculating_flag,
                             regularity_report, standard_J, symbol_at, velocity_form)
from symcurve.diagrams import ReducedDiagram
from symcurve.errors import BadFormat, NotLagrangian, NotMonotone
from symcurve.frames import flat_curve, random_curve, random_symplectic
from symcurve.prolongation import graded_algebra
from symcurve.scalars import EXACT

Q = gmpy2.mpq


def tan_curve(K=10):
    t = sympy.symbols("t")
    coeffs = sympy.Poly(sympy.series(sympy.tan(t), t, 0, K + 1).removeO(), t).all_coeffs()[::-1]
    return curve_from_columns([[[str(c) for c in coeffs], ["1"]]], jet_order=K, name="tan")


def test_line_in_the_plane_is_lagrangian():
    c = curve_from_columns([[["1"], ["0", "1"]]])
    assert c.m == 1
    assert c.order == 1


def test_graph_of_scalar_matrix():
    c = curve_from_columns([[["1"], ["0"], ["0", "1"], ["0"]],
                            [["0"], ["1"], ["0"], ["0", "1"]]])
    assert c.m == 2


def test_column_count_mismatch():
    with pytest.raises(BadFormat):
        load_curve({"m": 1, "frame_columns": [[["1"], ["0"]], [["0"], ["1"]]]})
    with pytest.raises(BadFormat):
        load_curve({"m": 1, "frame_columns": [[["1"]]]})
    with pytest.raises(BadFormat):
        load_curve("{")


def test_non_lagrangian_reports_the_pair():
    with pytest.raises(NotLagrangian) as err:
        curve_from_columns([[["1"], ["0"], ["0"], ["0"]], [["0"], ["0"], ["1"], ["0"]]])
    assert "col_0, col_1" in str(err.value)


def test_json_roundtrip():
    c = random_curve(ReducedDiagram([(2, 1)]), seed=3).curve
    back = load_curve(c.to_json())
    assert all(np.array_equal(a, b) for a, b in zip(c.frame.coeffs, back.frame.coeffs))


def test_velocity_form_signs():
    up = curve_from_columns([[["0", "1"], ["1"]]])
    down = curve_from_columns([[["1"], ["0", "1"]]])
    const = curve_from_columns([[["1"], ["0"]]], jet_order=2)
    assert velocity_form(up)[0, 0] == 1
    assert velocity_form(down)[0, 0] == -1
    assert velocity_form(const)[0, 0] == 0
    assert classify_form(velocity_form(up), EXACT)[0] == "nondecreasing"
    assert classify_form(velocity_form(down), EXACT)[0] == "nonincreasing"
    assert classify_form(velocity_form(const), EXACT)[0] == "constant"


def test_indefinite_curve_is_rejected():
    # span{e1 + t f1, e2 - t f2}
    c = curve_from_columns([[["1"], ["0"], ["0", "1"], ["0"]],
                            [["0"], ["1"], ["0"], ["0", "-1"]]])
    with pytest.raises(NotMonotone):
        orient(c)


def test_flag_dimensions_examples():
    line = curve_from_columns([[["1"], ["0", "1"]]])
    assert flag_dimensions(line.frame, 1, EXACT) == [1, 2]
    graph = curve_from_columns([[["1"], ["0"], ["0", "1"], ["0"]],
                                [["0"], ["1"], ["0"], ["0", "1"]]])
    assert flag_dimensions(graph.frame, 2, EXACT) == [2, 4]
    rank1 = random_curve(ReducedDiagram([(2, 1)]), seed=11).curve
    assert flag_dimensions(rank1.frame, 2, EXACT) == [2, 3, 4]


def test_regular_graph_has_one_column():
    graph = curve_from_columns([[["1"], ["0"], ["0", "1"], ["0"]],
                                [["0"], ["1"], ["0"], ["0", "1"]]])
    rep = regularity_report(graph)
    assert rep.equiregular and rep.ample
    assert rep.young_diagram.column_counts == (2,)
    assert curve_diagram(graph)[0].rows == ((1, 2),)


def test_rank_drop_at_base_point():
    # span{e + t^2 f}: the derivative vanishes at t0 only
    c = curve_from_columns([[["1"], ["0", "0", "1"]]])
    rep = regularity_report(c)
    assert not rep.equiregular
    assert not rep.ample
    dims = set(tuple(d) for d in rep.sampled_dims.values())
    assert dims == {(1, 1), (1, 2)}


@pytest.mark.parametrize("rows", [[(1, 1)], [(2, 1)], [(2, 1), (1, 1)], [(3, 1), (1, 2)]])
def test_generated_curve_has_generator_diagram(rows):
    red = ReducedDiagram(rows)
    rep = regularity_report(flat_curve(red))
    assert rep.equiregular and rep.ample
    assert rep.monotone == "nonincreasing"
    gen = random_curve(red, seed=4).curve
    assert curve_diagram(gen)[0] == red


def test_osculating_flag_is_skew_symmetric():
    red = ReducedDiagram([(2, 1), (1, 1)])
    c = random_curve(red, seed=5).curve
    flag = osculating_flag(c)
    m = c.m
    be = flag[0][0].backend
    J = standard_J(m, be)
    for j in range(1, 3):
        A, da = flag[j]
        B, db = flag[-j]
        assert da + db == 2 * m
        if A is None:
            continue
        with be.context():
            assert linalg.max_abs(A.coeffs[0].T.dot(J).dot(B.coeffs[0])) < be.tolerance
    dims = [flag[j][1] for j in range(-2, 3)]
    assert dims == sorted(dims, reverse=True)
    # m = 3 and the first column of the diagram holds two boxes
    assert [flag[j][1] for j in (0, -1, -2)] == [3, 5, 6]


def test_symbol_of_regular_graph():
    graph = curve_from_columns([[["1"], ["0"], ["0", "1"], ["0"]],
                                [["0"], ["1"], ["0"], ["0", "1"]]], jet_order=3)
    s = symbol_at(graph)
    assert s.reduced.rows == ((1, 2),)
    assert s.commutation_defect <= 1e-30
    assert s.symplectic_defect <= 1e-30
    assert s.grading_defect <= 1e-30


def test_symbol_of_transformed_rank_one_curve():
    red = ReducedDiagram([(3, 1)])
    c = flat_curve(red)
    A = random_symplectic(c.m, random.Random(9))
    s = symbol_at(c.transformed(A), t=Q(1, 7))
    assert s.commutation_defect <= 1e-30
    assert s.symplectic_defect <= 1e-30
    assert s.grading_defect <= 1e-30


def test_adapted_lift_of_tan_curve():
    c, reflected = orient(tan_curve())
    assert reflected
    lift = adapted_lift(c)
    alg = graded_algebra(lift.reduced)
    be = lift.backend
    delta = linalg.coerce_matrix(alg.delta.mat, be)
    mask = alg.model.entry_degrees == -1
    assert np.array_equal(lift.C.coeffs[0][mask], delta[mask])
    for M in lift.C.coeffs[1:]:
        assert all(x == 0 for x in M[mask])


def test_adapted_lift_requires_orientation():
    with pytest.raises(NotMonotone):
        adapted_lift(tan_curve())


def test_adapted_lift_of_generated_curve_is_symplectic():
    red = ReducedDiagram([(2, 1)])
    lift = adapted_lift(random_curve(red, seed=2).curve)
    be = lift.backend
    J = standard_J(2, be)
    G = lift.gamma
    P = G.T @ G.__rmatmul__(J)
    with be.context():
        for n, M in enumerate(P.coeffs):
            target = graded_algebra(red).model.J if n == 0 else np.zeros_like(M)
            assert linalg.max_abs(M - linalg.coerce_matrix(target, be)) < 1e-40
