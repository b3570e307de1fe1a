"""Symplectic space indexed by a double diagram and the graded algebra sp(V).

Basis vectors are the boxes of the double diagram, each expanded into as many
vectors as its row multiplicity, in box order. The form pairs box a with its
mirror: sigma(e_{m(a)}^i, e_a^j) = delta_ij for a on the positive side.

Elements of sp(V) are kept as dense object matrices; ``BlockEndomorphism``
adds box-indexed block access on top. ``SpCoordinates`` parametrizes sp(V)
by one block per orbit of the block relation, which is the basis in which
all exact subspace computations are done.
"""

from collections import namedtuple
from functools import cached_property

import numpy as np

from . import linalg
from .diagrams import DoubleDiagram, build_double_diagram
from .errors import ModelMismatch, RankDeficientInput, ShapeMismatch
from .scalars import EXACT


class SymplecticModel:
    def __init__(self, dd):
        if not isinstance(dd, DoubleDiagram):
            dd = build_double_diagram(dd)
        self.diagram = dd
        self.dim = dd.dim
        self.m = dd.m
        J = linalg.zeros(self.dim, self.dim, EXACT)
        for a in dd.positive_boxes():
            ma = dd.mirror(a)
            for i in range(dd.size(a)):
                J[dd.offsets[ma] + i, dd.offsets[a] + i] = EXACT.one
                J[dd.offsets[a] + i, dd.offsets[ma] + i] = -EXACT.one
        self.J = J
        self.Jinv = J.T.copy()
        # degree of each basis vector and of each matrix entry
        self.vector_degrees = np.array([dd.deg(b) for b in dd.boxes for _ in range(dd.size(b))])
        self.entry_degrees = self.vector_degrees[:, None] - self.vector_degrees[None, :]
        self.vector_boxes = [b for b in dd.boxes for _ in range(dd.size(b))]

    def __eq__(self, other):
        return isinstance(other, SymplecticModel) and other.diagram == self.diagram

    def __hash__(self):
        return hash(("model", self.diagram))

    def __repr__(self):
        return "SymplecticModel(%r)" % (self.diagram,)

    def slice(self, b):
        o = self.diagram.offsets[b]
        return slice(o, o + self.diagram.size(b))

    def sigma(self, x, y, backend=EXACT):
        with backend.context():
            return np.asarray(x, dtype=object).dot(self.J.dot(np.asarray(y, dtype=object)))

    def J_as(self, backend):
        return linalg.coerce_matrix(self.J, backend)

    @cached_property
    def standard_map(self):
        """Matrix T whose columns are the diagram basis vectors in standard coordinates.

        The standard basis is (e_1..e_m, f_1..f_m) with sigma(e_k, f_k) = 1.
        Mirror-side vector e_{m(a)}^i goes to e_k and e_a^i to f_k, with k
        enumerating the pairs (a, i) for positive-side a in box order.
        """
        dd = self.diagram
        T = linalg.zeros(self.dim, self.dim, EXACT)
        k = 0
        for a in dd.positive_boxes():
            ma = dd.mirror(a)
            for i in range(dd.size(a)):
                T[k, dd.offsets[ma] + i] = EXACT.one
                T[self.m + k, dd.offsets[a] + i] = EXACT.one
                k += 1
        return T

    @cached_property
    def mirror_columns(self):
        """Basis indices of the nonnegative-degree (mirror-side) vectors."""
        return [j for j, d in enumerate(self.vector_degrees) if d >= 0]

    @cached_property
    def definiteness_sign(self):
        """Sign s with s*sigma(delta x, x) positive definite on the degree-0 part."""
        idx = [j for j, d in enumerate(self.vector_degrees) if d == 0]
        delta = delta_normal(self).mat
        # Gram matrix of sigma(delta e_i, e_j), symmetric on this block
        G = delta.T.dot(self.J)[np.ix_(idx, idx)]
        for s in (1, -1):
            if _positive_definite(G * s):
                return s
        raise AssertionError("velocity pairing on the degree-0 part is indefinite")


def _positive_definite(G):
    """Sylvester criterion by exact elimination."""
    G = np.array(G, dtype=object)
    n = G.shape[0]
    for k in range(n):
        piv = G[k, k]
        if piv <= 0:
            return False
        for i in range(k + 1, n):
            f = G[i, k] / piv
            G[i, k:] = G[i, k:] - f * G[k, k:]
    return True


def darboux_model(dd):
    return SymplecticModel(dd)


class BlockEndomorphism:
    """An endomorphism of V stored densely with box-indexed block access."""

    __slots__ = ("model", "mat", "backend")

    def __init__(self, model, mat=None, backend=EXACT):
        self.model = model
        self.backend = backend
        if mat is None:
            mat = linalg.zeros(model.dim, model.dim, backend)
        mat = np.asarray(mat, dtype=object)
        if mat.shape != (model.dim, model.dim):
            raise ShapeMismatch("matrix shape %s does not match dim %d" % (mat.shape, model.dim))
        self.mat = mat

    @classmethod
    def from_blocks(cls, model, blocks, backend=EXACT):
        out = cls(model, None, backend)
        for (b, a), B in blocks.items():
            out.set_block(b, a, B)
        return out

    def block(self, b, a):
        return self.mat[self.model.slice(b), self.model.slice(a)]

    def set_block(self, b, a, B):
        dd = self.model.diagram
        B = linalg.coerce_matrix(B, self.backend)
        if B.shape != (dd.size(b), dd.size(a)):
            raise ShapeMismatch("block (%r,%r) must be %dx%d" % (b, a, dd.size(b), dd.size(a)))
        self.mat[self.model.slice(b), self.model.slice(a)] = B

    def blocks(self):
        """Nonzero blocks keyed by (b, a)."""
        dd = self.model.diagram
        out = {}
        for b in dd.boxes:
            for a in dd.boxes:
                B = self.block(b, a)
                if not linalg.is_zero_matrix(B, self.backend):
                    out[(b, a)] = B.copy()
        return out

    def _same(self, other):
        if not isinstance(other, BlockEndomorphism) or other.model != self.model:
            raise ModelMismatch("endomorphisms belong to different models")
        if other.backend != self.backend:
            raise ModelMismatch("endomorphisms use different backends")

    def __add__(self, other):
        self._same(other)
        with self.backend.context():
            return BlockEndomorphism(self.model, self.mat + other.mat, self.backend)

    def __sub__(self, other):
        self._same(other)
        with self.backend.context():
            return BlockEndomorphism(self.model, self.mat - other.mat, self.backend)

    def __neg__(self):
        with self.backend.context():
            return BlockEndomorphism(self.model, -self.mat, self.backend)

    def scale(self, s):
        with self.backend.context():
            return BlockEndomorphism(self.model, self.mat * self.backend.coerce(s), self.backend)

    def bracket(self, other):
        self._same(other)
        with self.backend.context():
            return BlockEndomorphism(self.model, self.mat.dot(other.mat) - other.mat.dot(self.mat),
                                     self.backend)

    def is_zero(self):
        return linalg.is_zero_matrix(self.mat, self.backend)

    def __eq__(self, other):
        return (isinstance(other, BlockEndomorphism) and other.model == self.model
                and np.array_equal(self.mat, other.mat))

    def __repr__(self):
        return "BlockEndomorphism(%r, %d nonzero blocks)" % (self.model.diagram, len(self.blocks()))

    def degrees(self):
        """Degrees carrying a nonzero entry."""
        degs = self.model.entry_degrees
        return sorted({int(degs[i, j]) for (i, j), x in np.ndenumerate(self.mat) if x != 0})

    def component(self, k):
        mask = self.model.entry_degrees == k
        out = linalg.zeros(self.model.dim, self.model.dim, self.backend)
        out[mask] = self.mat[mask]
        return BlockEndomorphism(self.model, out, self.backend)

    def in_nonnegative_degrees(self):
        return all(x == 0 for x in self.mat[self.model.entry_degrees < 0])


SpCheck = namedtuple("SpCheck", "ok pair")


def sp_check(X):
    """Check membership in sp(V) blockwise and through symmetry of J X.

    Returns ``SpCheck(ok, pair)`` with the first violating block pair in box
    order. The two tests must agree; a disagreement is a bug.
    """
    if not isinstance(X, BlockEndomorphism):
        raise ShapeMismatch("sp_check expects a BlockEndomorphism")
    model, be = X.model, X.backend
    dd = model.diagram
    scale = linalg.max_abs(X.mat)
    first = None
    with be.context():
        for b in dd.boxes:
            for a in dd.boxes:
                sign = -dd.eps(a) * dd.eps(b)
                diff = X.block(a, b) - sign * X.block(dd.mirror(b), dd.mirror(a)).T
                if not linalg.is_zero_matrix(diff, be, scale):
                    first = (a, b)
                    break
            if first:
                break
        JX = model.J_as(be).dot(X.mat)
        sym_ok = linalg.is_zero_matrix(JX - JX.T, be, scale)
    if sym_ok != (first is None):
        raise AssertionError("blockwise and matrix membership tests disagree")
    return SpCheck(first is None, first)


class GradedDecomposition(dict):
    """Degree -> component; components sum to the original endomorphism."""

    def total(self, model, backend=EXACT):
        out = BlockEndomorphism(model, None, backend)
        for comp in self.values():
            out = out + comp
        return out


def degree_split(X):
    out = GradedDecomposition()
    for k in X.degrees():
        out[k] = X.component(k)
    return out


def delta_normal(dd):
    """The normal-form symbol: E_a goes to eps(a) E_{r(a)}."""
    model = dd if isinstance(dd, SymplecticModel) else SymplecticModel(dd)
    dd = model.diagram
    X = BlockEndomorphism(model)
    for a in dd.boxes:
        ra = dd.r(a)
        if ra is not None:
            X.set_block(ra, a, linalg.identity(dd.size(a), EXACT) * dd.eps(a))
    return X


def ad_delta(model, M):
    """[delta, M] for a dense matrix M, by shifting row and column blocks."""
    dd = model.diagram
    M = np.asarray(M, dtype=object)
    out = np.zeros_like(M)
    out[...] = 0
    for a in dd.boxes:
        ra = dd.r(a)
        if ra is None:
            continue
        sa, sra = model.slice(a), model.slice(ra)
        e = dd.eps(a)
        # delta M: row block r(a) receives eps(a) * row block a
        out[sra, :] = out[sra, :] + M[sa, :] * e
        # M delta: column block a receives eps(a) * column block r(a)
        out[:, sa] = out[:, sa] - M[:, sra] * e
    return out


def skew_complement(S, model, backend=EXACT):
    """Basis (as columns) of the skew-orthogonal complement of span(S)."""
    S = linalg.coerce_matrix(S, backend)
    n = model.dim
    if S.ndim != 2 or S.shape[0] != n:
        raise ShapeMismatch("spanning columns must have %d rows" % n)
    k = S.shape[1]
    if k == 0:
        return linalg.identity(n, backend)
    if linalg.numerical_rank(S, backend) != k:
        raise RankDeficientInput("spanning columns are dependent")
    with backend.context():
        rows = (model.J_as(backend).dot(S)).T
    if backend.kind == "exact":
        basis = linalg.nullspace([linalg.sparse(r) for r in rows], n)
        out = linalg.zeros(n, len(basis), backend)
        for j, v in enumerate(basis):
            for i, x in v.items():
                out[i, j] = x
        return out
    return linalg.float_nullspace(rows, backend)


class SpCoordinates:
    """Coordinates on sp(V): one block per orbit of the block relation.

    For a block pair (b, a) the partner is (m(a), m(b)) and the partner block
    equals -eps(a) eps(b) times the transpose. The representative is the
    pair that comes first in box order; self-partnered pairs keep their
    upper-triangular entries only. Coordinates are ordered lexicographically
    by (block pair, entry).
    """

    def __init__(self, model):
        self.model = model
        dd = model.diagram
        idx = dd.index
        coords = []
        for b in dd.boxes:
            for a in dd.boxes:
                pb, pa = dd.mirror(a), dd.mirror(b)
                if (idx[pb], idx[pa]) < (idx[b], idx[a]):
                    continue
                fixed = (pb, pa) == (b, a)
                for i in range(dd.size(b)):
                    for j in range(dd.size(a)):
                        if fixed and j < i:
                            continue
                        coords.append((b, a, i, j))
        self.coords = coords
        self.position = {c: k for k, c in enumerate(coords)}
        self.n = len(coords)
        self.degree = [dd.block_degree(b, a) for b, a, _, _ in coords]
        self.by_degree = {}
        for k, d in enumerate(self.degree):
            self.by_degree.setdefault(d, []).append(k)
        # dense entries written by each coordinate: (row, col, coefficient)
        self.entries = []
        off = dd.offsets
        for b, a, i, j in coords:
            sign = -dd.eps(a) * dd.eps(b)
            row, col = off[b] + i, off[a] + j
            prow, pcol = off[dd.mirror(a)] + j, off[dd.mirror(b)] + i
            if (prow, pcol) == (row, col):
                self.entries.append(((row, col, 1),))
            else:
                self.entries.append(((row, col, 1), (prow, pcol, sign)))

    def degrees(self):
        return sorted(self.by_degree)

    def dim(self, k=None):
        if k is None:
            return self.n
        return len(self.by_degree.get(k, ()))

    def to_matrix(self, vec, backend=EXACT):
        """Sparse coordinate dict -> dense matrix in sp(V)."""
        M = linalg.zeros(self.model.dim, self.model.dim, backend)
        with backend.context():
            for k, x in vec.items():
                x = backend.coerce(x)
                for r, c, s in self.entries[k]:
                    M[r, c] = M[r, c] + x * s
        return M

    def to_endo(self, vec, backend=EXACT):
        return BlockEndomorphism(self.model, self.to_matrix(vec, backend), backend)

    def from_matrix(self, M, exact=True):
        """Read coordinates of a matrix assumed to lie in sp(V)."""
        M = np.asarray(M, dtype=object)
        out = {}
        for k, entry in enumerate(self.entries):
            r, c, _ = entry[0]
            x = M[r, c]
            if x != 0:
                out[k] = x
        return out

    def from_endo(self, X):
        return self.from_matrix(X.mat)

    def basis_element(self, k, backend=EXACT):
        return self.to_endo({k: 1}, backend)

    @cached_property
    def ad_delta_images(self):
        """Sparse coordinates of [delta, E_k] for each coordinate basis vector."""
        out = []
        for k in range(self.n):
            M = self.to_matrix({k: EXACT.one})
            out.append(self.from_matrix(ad_delta(self.model, M)))
        return out
