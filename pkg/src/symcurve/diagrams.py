"""Young diagrams and the mirrored double diagram.

A reduced diagram lists distinct row lengths p_1 > ... > p_s with
multiplicities r_i. The double diagram glues the mirror image of each row to
its left, so row i has boxes with signed columns -p_i..-1 (mirror side) and
1..p_i. Boxes are ordered row-major with the mirror side first; this order
fixes every basis used elsewhere in the package.
"""

import json
from collections import namedtuple
from functools import cached_property

from .errors import (AssignmentAmbiguous, BadFormat, BoxOutOfRange, EmptyDiagram,
                     InvalidDiagram, NotLastBox, RowOrderViolated)


class Box(namedtuple("Box", "row col")):
    __slots__ = ()

    def __repr__(self):
        return "(%d,%d)" % (self.row, self.col)

    def key(self):
        return "(%d,%d)" % (self.row, self.col)


class YoungDiagram:
    """Diagram given by its column heights, leftmost column first."""

    def __init__(self, column_counts):
        cols = tuple(int(c) for c in column_counts)
        if not cols:
            raise EmptyDiagram("a Young diagram needs at least one column")
        if any(c <= 0 for c in cols):
            raise InvalidDiagram("column heights must be positive")
        if any(a < b for a, b in zip(cols, cols[1:])):
            raise InvalidDiagram("column heights must be non-increasing")
        self.column_counts = cols

    @classmethod
    def from_row_lengths(cls, lengths):
        lengths = sorted((int(x) for x in lengths if int(x) > 0), reverse=True)
        if not lengths:
            raise EmptyDiagram("a Young diagram needs at least one row")
        return cls([sum(1 for p in lengths if p > j) for j in range(lengths[0])])

    @property
    def row_lengths(self):
        return tuple(sum(1 for c in self.column_counts if c > i)
                     for i in range(self.column_counts[0]))

    @property
    def size(self):
        return sum(self.column_counts)

    def __eq__(self, other):
        return isinstance(other, YoungDiagram) and other.column_counts == self.column_counts

    def __hash__(self):
        return hash(self.column_counts)

    def __repr__(self):
        return "YoungDiagram(columns=%s)" % (list(self.column_counts),)


class ReducedDiagram:
    """Distinct row lengths (strictly decreasing) with multiplicities."""

    def __init__(self, rows):
        rows = tuple((int(p), int(r)) for p, r in rows)
        if not rows:
            raise EmptyDiagram("a reduced diagram needs at least one row")
        if any(p <= 0 or r <= 0 for p, r in rows):
            raise InvalidDiagram("row lengths and multiplicities must be positive")
        if any(a[0] <= b[0] for a, b in zip(rows, rows[1:])):
            raise InvalidDiagram("row lengths must be strictly decreasing")
        self.rows = rows

    @property
    def lengths(self):
        return tuple(p for p, _ in self.rows)

    @property
    def multiplicities(self):
        return tuple(r for _, r in self.rows)

    @property
    def m(self):
        return sum(p * r for p, r in self.rows)

    @property
    def multiplicity_one(self):
        return all(r == 1 for _, r in self.rows)

    def young(self):
        lengths = []
        for p, r in self.rows:
            lengths += [p] * r
        return YoungDiagram.from_row_lengths(lengths)

    def __eq__(self, other):
        return isinstance(other, ReducedDiagram) and other.rows == self.rows

    def __hash__(self):
        return hash(self.rows)

    def __repr__(self):
        return "ReducedDiagram(%s)" % (list(self.rows),)

    def to_json(self):
        return {"rows": [{"length": p, "multiplicity": r} for p, r in self.rows]}

    def label(self):
        return "+".join("%dx%d" % (p, r) if r > 1 else str(p) for p, r in self.rows)


def reduce_diagram(D):
    if not isinstance(D, YoungDiagram):
        D = YoungDiagram(D)
    grouped = []
    for p in D.row_lengths:
        if grouped and grouped[-1][0] == p:
            grouped[-1][1] += 1
        else:
            grouped.append([p, 1])
    return ReducedDiagram(grouped)


def partitions(n):
    """All partitions of n as non-increasing tuples, largest first part first."""
    def rec(rest, cap):
        if rest == 0:
            yield ()
            return
        for first in range(min(rest, cap), 0, -1):
            for tail in rec(rest - first, first):
                yield (first,) + tail
    return list(rec(n, n))


def reduced_diagrams_up_to(max_boxes):
    """Reduced diagrams of every Young diagram with 1..max_boxes boxes."""
    out = []
    for n in range(1, max_boxes + 1):
        for part in partitions(n):
            out.append(reduce_diagram(YoungDiagram.from_row_lengths(part)))
    return out


def parse_diagram(data):
    """Read diagram JSON (a dict or a string) in either accepted form."""
    if isinstance(data, str):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as exc:
            raise BadFormat("diagram is not valid JSON: %s" % exc)
    if not isinstance(data, dict):
        raise BadFormat("diagram JSON must be an object")
    if "rows" in data:
        try:
            rows = [(int(r["length"]), int(r.get("multiplicity", 1))) for r in data["rows"]]
        except (TypeError, KeyError, ValueError):
            raise BadFormat("rows must be objects with 'length' and 'multiplicity'")
        rows.sort(key=lambda x: -x[0])
        merged = []
        for p, r in rows:
            if merged and merged[-1][0] == p:
                merged[-1][1] += r
            else:
                merged.append([p, r])
        return ReducedDiagram(merged)
    if "columns" in data:
        try:
            cols = [int(c) for c in data["columns"]]
        except (TypeError, ValueError):
            raise BadFormat("columns must be a list of integers")
        return reduce_diagram(YoungDiagram(cols))
    raise BadFormat("diagram JSON needs a 'rows' or 'columns' key")


class DoubleDiagram:
    """The mirrored diagram with its box maps, signs and degrees."""

    def __init__(self, reduced):
        self.reduced = reduced
        self.lengths = reduced.lengths
        self.mults = reduced.multiplicities
        self.s = len(self.lengths)
        boxes = []
        for i, p in enumerate(self.lengths, start=1):
            boxes += [Box(i, c) for c in range(-p, 0)]
            boxes += [Box(i, c) for c in range(1, p + 1)]
        self.boxes = tuple(boxes)
        self.index = {b: k for k, b in enumerate(boxes)}
        offsets, pos = {}, 0
        for b in boxes:
            offsets[b] = pos
            pos += self.size(b)
        self.offsets = offsets
        self.dim = pos

    def __eq__(self, other):
        return isinstance(other, DoubleDiagram) and other.reduced == self.reduced

    def __hash__(self):
        return hash(("double", self.reduced))

    def __repr__(self):
        return "DoubleDiagram(%s)" % (list(self.reduced.rows),)

    @property
    def m(self):
        return self.dim // 2

    @property
    def p1(self):
        return self.lengths[0]

    @property
    def top_degree(self):
        """Largest degree of a nonzero graded piece of the Lie algebra."""
        return 2 * self.p1 - 1

    def check(self, b):
        if not isinstance(b, tuple) or len(b) != 2:
            raise BoxOutOfRange("not a box: %r" % (b,))
        i, c = b
        if not 1 <= i <= self.s or c == 0 or abs(c) > self.lengths[i - 1]:
            raise BoxOutOfRange("box %r is not in the diagram" % (b,))
        return Box(i, c)

    def size(self, b):
        return self.mults[b[0] - 1]

    def length(self, b):
        return self.lengths[b[0] - 1]

    def r(self, b):
        i, c = b
        if c == self.lengths[i - 1]:
            return None
        return Box(i, 1 if c == -1 else c + 1)

    def l(self, b):
        i, c = b
        if c == -self.lengths[i - 1]:
            return None
        return Box(i, -1 if c == 1 else c - 1)

    @staticmethod
    def mirror(b):
        return Box(b[0], -b[1])

    @staticmethod
    def eps(b):
        return -1 if b[1] > 0 else 1

    @staticmethod
    def deg(b):
        c = b[1]
        return -c - 1 if c < 0 else -c

    def position(self, b):
        """1-based position of the box in its row, counted from the left."""
        c, p = b[1], self.length(b)
        return c + p + 1 if c < 0 else c + p

    def first_box(self, row):
        return Box(row, -self.lengths[row - 1])

    def last_box(self, row):
        return Box(row, self.lengths[row - 1])

    def last_boxes(self):
        return [self.last_box(i) for i in range(1, self.s + 1)]

    def is_last(self, b):
        return b[1] == self.length(b)

    def block_degree(self, b, a):
        return self.deg(b) - self.deg(a)

    def positive_boxes(self):
        return [b for b in self.boxes if b[1] > 0]

    @cached_property
    def pairs_by_degree(self):
        out = {}
        for b in self.boxes:
            for a in self.boxes:
                out.setdefault(self.block_degree(b, a), []).append((b, a))
        return out

    def column_sort_key(self, b):
        return b[1]


def build_double_diagram(reduced):
    if isinstance(reduced, YoungDiagram):
        reduced = reduce_diagram(reduced)
    return DoubleDiagram(reduced)


def _check_chain_args(dd, b, rho):
    b, rho = dd.check(b), dd.check(rho)
    if not dd.is_last(rho):
        raise NotLastBox("%r is not the last box of its row" % (rho,))
    if b.row < rho.row:
        raise RowOrderViolated("%r lies in a higher row than %r" % (b, rho))
    return b, rho


def pair_chain(dd, b, rho):
    """Pairs (l^j(b), l^j(rho)) for j = 0, 1, ... while both shifts exist."""
    b, rho = _check_chain_args(dd, b, rho)
    out = [(b, rho)]
    x, y = b, rho
    while True:
        x, y = dd.l(x), dd.l(y)
        if x is None or y is None:
            return out
        out.append((x, y))


def admissible_pairs(dd):
    """All (b, rho) with rho a last box, b not higher than rho and b != rho."""
    out = []
    for rho in dd.last_boxes():
        for b in dd.boxes:
            if b.row >= rho.row and b != rho:
                out.append((b, rho))
    return out


def is_mirror_pair(dd, pair):
    """Pair of the form (m(e), e) with e on the positive side."""
    x, y = pair
    return y[1] > 0 and x == dd.mirror(y)


def is_shifted_mirror_pair(dd, pair):
    """Pair of the form (m(r(e)), e) with e on the positive side."""
    x, y = pair
    if y[1] <= 0:
        return False
    ry = dd.r(y)
    return ry is not None and x == dd.mirror(ry)


def phi0(dd, b, rho):
    """The classical assignment picking one pair from each chain.

    Same row: the (m(e), e) pair when b's position k is odd and the
    (m(r(e)), e) pair when k is even. Different rows: start from the pair
    (c, d) whose first entry c opens b's row; keep it when m(c) lies left of
    d, otherwise take the unique pair whose entries sit in mirrored columns
    or in columns shifted by one.
    """
    chain = pair_chain(dd, b, rho)
    b, rho = chain[0]
    if b.row == rho.row:
        k = dd.position(b)
        test = is_mirror_pair if k % 2 == 1 else is_shifted_mirror_pair
        hits = [pair for pair in chain if test(dd, pair)]
    else:
        c, d = chain[-1]
        if c != dd.first_box(b.row):
            raise AssignmentAmbiguous("chain of %r does not reach the first box of its row" % ((b, rho),))
        if dd.mirror(c)[1] < d[1]:
            return (c, d)
        hits = []
        for x, y in chain:
            lm = dd.l(dd.mirror(x))
            if -x[1] == y[1] or (lm is not None and lm[1] == y[1]):
                hits.append((x, y))
    if len(hits) != 1:
        raise AssignmentAmbiguous("assignment rule selects %d pairs in the chain of %r"
                                  % (len(hits), (b, rho)))
    return hits[0]
