import pytest
from sympy.functions.combinatorial.numbers import partition
from hypothesis import given

from symcurve.diagrams import (Box, ReducedDiagram, YoungDiagram, admissible_pairs,
                               build_double_diagram, is_mirror_pair, is_shifted_mirror_pair,
                               pair_chain, parse_diagram, partitions, phi0, reduce_diagram,
                               reduced_diagrams_up_to)
from symcurve.errors import (BadFormat, BoxOutOfRange, EmptyDiagram, InvalidDiagram, NotLastBox,
                             RowOrderViolated)

from strategies import reduced_diagrams


def dd_of(*rows):
    return build_double_diagram(ReducedDiagram(list(rows)))


def test_partition_counts_match_sympy():
    for n in range(1, 11):
        assert len(partitions(n)) == partition(n)
    assert len(reduced_diagrams_up_to(8)) == sum(partition(n) for n in range(1, 9))


def test_column_of_boxes_is_one_short_row():
    red = reduce_diagram(YoungDiagram([4]))
    assert red.rows == ((1, 4),)


def test_single_row():
    red = reduce_diagram(YoungDiagram([1, 1, 1]))
    assert red.rows == ((3, 1),)


def test_grouping_rows():
    red = reduce_diagram(YoungDiagram.from_row_lengths([3, 3, 1]))
    assert red.rows == ((3, 2), (1, 1))
    assert red.m == 7


def test_empty_and_invalid():
    with pytest.raises(EmptyDiagram):
        YoungDiagram([])
    with pytest.raises(InvalidDiagram):
        YoungDiagram([1, 2])
    with pytest.raises(InvalidDiagram):
        ReducedDiagram([(1, 1), (2, 1)])


def test_parse_both_forms():
    a = parse_diagram('{"rows":[{"length":3,"multiplicity":2},{"length":1,"multiplicity":1}]}')
    b = parse_diagram({"columns": [3, 2, 2]})
    assert a == b
    with pytest.raises(BadFormat):
        parse_diagram({"shape": [1]})
    with pytest.raises(BadFormat):
        parse_diagram("{not json")


def test_smallest_double_diagram():
    dd = dd_of((1, 1))
    assert dd.boxes == (Box(1, -1), Box(1, 1))
    assert [dd.deg(b) for b in dd.boxes] == [0, -1]
    assert [dd.eps(b) for b in dd.boxes] == [1, -1]


def test_degrees_of_row_of_two():
    dd = dd_of((2, 1))
    assert [dd.deg(b) for b in dd.boxes] == [1, 0, -1, -2]
    for b in dd.boxes:
        rb = dd.r(b)
        if rb is not None:
            assert dd.deg(rb) == dd.deg(b) - 1


def test_two_row_mirror():
    dd = dd_of((2, 1), (1, 1))
    assert len(dd.boxes) == 6
    assert dd.mirror(Box(1, 2)) == Box(1, -2)


def test_box_out_of_range():
    dd = dd_of((2, 1))
    with pytest.raises(BoxOutOfRange):
        dd.check((1, 3))
    with pytest.raises(BoxOutOfRange):
        dd.check((2, 1))


@given(reduced_diagrams(10))
def test_box_map_invariants(red):
    dd = build_double_diagram(red)
    for b in dd.boxes:
        mb = dd.mirror(b)
        assert dd.mirror(mb) == b
        assert dd.eps(b) * dd.eps(mb) == -1
        assert dd.deg(b) + dd.deg(mb) == -1
        assert (dd.eps(b) == -1) == (b.col > 0)
        assert (dd.r(b) is None) == (b.col == dd.length(b))
        assert (dd.l(b) is None) == (b.col == -dd.length(b))
        if dd.r(b) is not None:
            assert dd.l(dd.r(b)) == b
    half = sum(dd.size(b) for b in dd.boxes if dd.deg(b) >= 0)
    assert half == red.m == sum(p * r for p, r in red.rows)


def test_chain_in_row_of_two_runs_to_the_first_box():
    # the left shifts continue while both boxes have a left neighbour
    dd = dd_of((2, 1))
    chain = pair_chain(dd, (1, 1), (1, 2))
    assert chain == [(Box(1, 1), Box(1, 2)), (Box(1, -1), Box(1, 1)), (Box(1, -2), Box(1, -1))]


def test_singleton_chain():
    dd = dd_of((1, 1))
    assert pair_chain(dd, (1, -1), (1, 1)) == [(Box(1, -1), Box(1, 1))]


def test_cross_row_chain_length():
    dd = dd_of((2, 1), (1, 1))
    assert len(pair_chain(dd, (2, 1), (1, 2))) == 2


def test_chain_argument_errors():
    dd = dd_of((2, 1), (1, 1))
    with pytest.raises(NotLastBox):
        pair_chain(dd, (1, -1), (1, 1))
    with pytest.raises(RowOrderViolated):
        pair_chain(dd, (1, 1), (2, 1))


def test_phi0_odd_position_picks_mirror_pair():
    dd = dd_of((2, 1))
    assert phi0(dd, (1, 1), (1, 2)) == (Box(1, -1), Box(1, 1))


def test_phi0_even_position_picks_shifted_pair():
    dd = dd_of((2, 1))
    pair = phi0(dd, (1, -1), (1, 2))
    assert is_shifted_mirror_pair(dd, pair)
    assert pair == (Box(1, -2), Box(1, 1))


def test_phi0_singleton():
    dd = dd_of((1, 1))
    assert phi0(dd, (1, -1), (1, 1)) == (Box(1, -1), Box(1, 1))


def test_chain_shape_counts_exhaustive():
    # same-row chains: one mirror pair when b sits at an odd position,
    # one shifted mirror pair when it sits at an even position
    for red in reduced_diagrams_up_to(10):
        dd = build_double_diagram(red)
        for b, rho in admissible_pairs(dd):
            chain = pair_chain(dd, b, rho)
            assert phi0(dd, b, rho) in chain
            if b.row != rho.row:
                continue
            mirrors = sum(is_mirror_pair(dd, p) for p in chain)
            shifted = sum(is_shifted_mirror_pair(dd, p) for p in chain)
            if dd.position(b) % 2 == 1:
                assert mirrors == 1
            else:
                assert shifted == 1
            assert shifted <= 1
