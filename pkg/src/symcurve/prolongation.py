"""Exact graded-algebra computations around the normal-form symbol.

Everything here runs over the rationals in the coordinates of
``SpCoordinates``: subspaces are sparse echelon bases, linear maps are lists
of sparse images. The main results are

* the prolongation u(delta) and its unparametrized variant,
* the D-operator and the coboundary test with an explicit preimage,
* normalization spaces N_phi, their projectors and audits.
"""

import random
from collections import namedtuple
from functools import lru_cache

import gmpy2
import numpy as np

from . import linalg
from .diagrams import (DoubleDiagram, admissible_pairs, build_double_diagram, pair_chain,
                       phi0)
from .errors import (ClosedFormMismatch, InconsistentReconstruction,
                     ModelMismatch, NotComplementary)
from .linalg import Echelon
from .scalars import EXACT
from .symplectic import (BlockEndomorphism, SpCoordinates, SymplecticModel, ad_delta,
                         delta_normal, sp_check)

Q = gmpy2.mpq


class GradedAlgebra:
    """sp(V) for one diagram with its coordinates and the normal-form symbol."""

    def __init__(self, dd):
        if not isinstance(dd, DoubleDiagram):
            dd = build_double_diagram(dd)
        self.diagram = dd
        self.model = SymplecticModel(dd)
        self.coords = SpCoordinates(self.model)
        self.delta = delta_normal(self.model)
        self.top = dd.top_degree
        self.entry_map = {}
        for k, entry in enumerate(self.coords.entries):
            for r, c, s in entry:
                self.entry_map[(r, c)] = (k, s)

    def degree_indices(self, k):
        return self.coords.by_degree.get(k, [])

    def dim(self, k):
        return self.coords.dim(k)

    def ad_image(self, k):
        return self.coords.ad_delta_images[k]

    def vec(self, X):
        if isinstance(X, BlockEndomorphism):
            X = X.mat
        return self.coords.from_matrix(X)

    def endo(self, vec):
        return self.coords.to_endo(vec)

    def ad(self, vec):
        """[delta, .] on a sparse coordinate vector."""
        out = {}
        for k, x in vec.items():
            for j, y in self.ad_image(k).items():
                val = out.get(j, 0) + x * y
                if val:
                    out[j] = val
                else:
                    out.pop(j, None)
        return out


@lru_cache(maxsize=None)
def graded_algebra(reduced):
    return GradedAlgebra(build_double_diagram(reduced))


def algebra_for(obj):
    if isinstance(obj, GradedAlgebra):
        return obj
    if isinstance(obj, SymplecticModel):
        return graded_algebra(obj.diagram.reduced)
    if isinstance(obj, DoubleDiagram):
        return graded_algebra(obj.reduced)
    if isinstance(obj, BlockEndomorphism):
        return graded_algebra(obj.model.diagram.reduced)
    return graded_algebra(obj)


def _axpy(out, coef, vec):
    for k, x in vec.items():
        val = out.get(k, 0) + coef * x
        if val:
            out[k] = val
        else:
            out.pop(k, None)
    return out


# ---------------------------------------------------------------------------
# brackets with the symbol


def bracket_blocks(delta, X):
    """[delta, X] assembled block by block from the shift formula.

    Y_{ba} = eps(l(b)) X_{l(b) a} - eps(a) X_{b r(a)}, dropping terms whose
    boxes do not exist.
    """
    if delta.model != X.model:
        raise ModelMismatch("delta and X live on different models")
    dd = X.model.diagram
    if not np.array_equal(delta.mat, delta_normal(X.model).mat):
        raise ModelMismatch("bracket_blocks needs the normal-form symbol")
    Y = BlockEndomorphism(X.model, None, X.backend)
    with X.backend.context():
        for b in dd.boxes:
            lb = dd.l(b)
            for a in dd.boxes:
                ra = dd.r(a)
                acc = None
                if lb is not None:
                    acc = X.block(lb, a) * dd.eps(lb)
                if ra is not None:
                    term = X.block(b, ra) * (-dd.eps(a))
                    acc = term if acc is None else acc + term
                if acc is not None:
                    Y.mat[X.model.slice(b), X.model.slice(a)] = acc
    return Y


# ---------------------------------------------------------------------------
# prolongations


class GradedSubspace:
    """Degree -> exact basis (sparse coordinate vectors) inside sp(V)."""

    def __init__(self, algebra, basis):
        self.algebra = algebra
        self.basis = {k: list(v) for k, v in basis.items()}

    def dim(self, k=None):
        if k is None:
            return sum(len(v) for v in self.basis.values())
        return len(self.basis.get(k, ()))

    def dims(self):
        return {k: len(v) for k, v in sorted(self.basis.items())}

    def elements(self, k=None):
        keys = sorted(self.basis) if k is None else [k]
        return [self.algebra.endo(v) for kk in keys for v in self.basis.get(kk, ())]

    def all_vectors(self):
        return [v for k in sorted(self.basis) for v in self.basis[k]]

    def echelon(self):
        E = Echelon(self.algebra.coords.n)
        for v in self.all_vectors():
            E.add(v)
        return E

    def contains(self, X):
        vec = self.algebra.vec(X) if not isinstance(X, dict) else X
        return self.echelon().contains(vec)


def _preimage_step(alg, k, target):
    """Basis of {x in g_k : [delta, x] in span(target)}."""
    idx = alg.degree_indices(k)
    if not idx:
        return []
    E = Echelon(alg.coords.n)
    for v in target:
        E.add(v)
    images = [E.residual(alg.ad_image(i)) for i in idx]
    kernel = linalg.linear_map_kernel(images, len(idx))
    return [{idx[i]: x for i, x in z.items()} for z in kernel]


def _reduced_basis(vectors, n):
    E = Echelon(n)
    for v in vectors:
        E.add(v)
    return E.basis()


def closed_form_u(alg):
    """Equal skew diagonal blocks along each row: a basis of so(r_1)+...+so(r_s)."""
    dd = alg.diagram
    out = []
    for row, r in enumerate(dd.mults, start=1):
        boxes = [b for b in dd.boxes if b.row == row]
        for i in range(r):
            for j in range(i + 1, r):
                X = BlockEndomorphism(alg.model)
                S = linalg.zeros(r, r, EXACT)
                S[i, j], S[j, i] = Q(1), Q(-1)
                for b in boxes:
                    X.set_block(b, b, S)
                out.append(alg.vec(X))
    return out


def prolongation(obj):
    """u(delta) by kernel recursion, checked against the closed form."""
    alg = algebra_for(obj)
    n = alg.coords.n
    idx0 = alg.degree_indices(0)
    kern = linalg.linear_map_kernel([alg.ad_image(i) for i in idx0], len(idx0))
    basis = {0: _reduced_basis([{idx0[i]: x for i, x in z.items()} for z in kern], n)}
    for k in range(1, alg.top + 1):
        basis[k] = _reduced_basis(_preimage_step(alg, k, basis[k - 1]), n)
    U = GradedSubspace(alg, {d: v for d, v in basis.items() if v or d == 0})
    _check_closed_form(alg, U)
    return U


def _check_closed_form(alg, U):
    expected = sum(r * (r - 1) // 2 for r in alg.diagram.mults)
    if U.dim(0) != expected:
        raise ClosedFormMismatch("dim u_0 = %d, closed form gives %d" % (U.dim(0), expected))
    for k, v in U.basis.items():
        if k >= 1 and v:
            raise ClosedFormMismatch("u_%d is nonzero (dim %d)" % (k, len(v)))
    E = U.echelon()
    closed = closed_form_u(alg)
    if any(not E.contains(v) for v in closed) or linalg.span_dim(closed, alg.coords.n) != U.dim():
        raise ClosedFormMismatch("u_0 differs from the equal-skew-diagonal subspace")


def unparametrized_prolongation(obj):
    """Recursion seeded with span{delta} in degree -1."""
    alg = algebra_for(obj)
    n = alg.coords.n
    basis = {-1: [alg.vec(alg.delta)]}
    for k in range(0, alg.top + 1):
        basis[k] = _reduced_basis(_preimage_step(alg, k, basis[k - 1]), n)
    return GradedSubspace(alg, {d: v for d, v in basis.items() if v})


def flat_symmetry_check(y, delta=None):
    """True iff y and all its iterated brackets with delta have nonnegative degrees."""
    model = y.model
    if delta is None:
        delta = delta_normal(model)
    bound = 2 * model.diagram.p1
    z = y.mat
    for _ in range(bound + 1):
        if any(x != 0 for x in z[model.entry_degrees < 0]):
            return False
        z = ad_delta(model, z)
    return True


# ---------------------------------------------------------------------------
# D-operator and coboundaries


def _d_chain(dd, b, a):
    """Pairs (l^j b, l^j a) with their coefficients in the D-sum."""
    out = [(b, a, 1)]
    coef = 1
    x, y = b, a
    while True:
        x, y = dd.l(x), dd.l(y)
        if x is None or y is None:
            return out
        coef *= dd.eps(x) * dd.eps(y)
        out.append((x, y, coef))


def d_operator(Y, b, a):
    """D(Y)_{ba}: signed sum of the blocks along the simultaneous left shifts of (b, a)."""
    dd = Y.model.diagram
    b, a = dd.check(b), dd.check(a)
    acc = linalg.zeros(dd.size(b), dd.size(a), Y.backend)
    with Y.backend.context():
        for x, y, coef in _d_chain(dd, b, a):
            acc = acc + Y.block(x, y) * coef
    return acc


def coboundary_pairs(dd):
    """(b, rho) with rho a last box and b not higher than rho, b = rho included."""
    out = []
    for rho in dd.last_boxes():
        for b in dd.boxes:
            if b.row >= rho.row:
                out.append((b, rho))
    return out


def d_rows(alg, b, a):
    """Linear functionals (sparse rows over coordinates) giving the entries of D(.)_{ba}."""
    dd, model = alg.diagram, alg.model
    rows = []
    chain = _d_chain(dd, b, a)
    for i in range(dd.size(b)):
        for j in range(dd.size(a)):
            row = {}
            for x, y, coef in chain:
                r = model.slice(x).start + i
                c = model.slice(y).start + j
                k, s = alg.entry_map[(r, c)]
                _axpy(row, Q(coef * s), {k: Q(1)})
            rows.append(row)
    return rows


def d_condition_kernel(obj, k):
    """Basis of {Y in g_k : D(Y)_{b rho} = 0 for every coboundary pair}."""
    alg = algebra_for(obj)
    idx = alg.degree_indices(k)
    pos = {g: i for i, g in enumerate(idx)}
    rows = []
    for b, rho in coboundary_pairs(alg.diagram):
        if alg.diagram.block_degree(b, rho) != k:
            continue
        for row in d_rows(alg, b, rho):
            rows.append({pos[g]: x for g, x in row.items() if g in pos})
    kern = linalg.nullspace(rows, len(idx))
    return [{idx[i]: x for i, x in z.items()} for z in kern]


def coboundary_image(obj, k):
    """Basis of [delta, g_{k+1}] inside g_k."""
    alg = algebra_for(obj)
    return _reduced_basis([alg.ad_image(i) for i in alg.degree_indices(k + 1)], alg.coords.n)


CoboundaryCertificate = namedtuple("CoboundaryCertificate", "verdict preimage witness value")


def coboundary_test(Y):
    """Decide whether Y in g^0 is a bracket [delta, X] with X in g^0.

    On success the preimage is rebuilt from the D-values and the block
    relation, and [delta, X] = Y is verified exactly.
    """
    model = Y.model
    dd = model.diagram
    if not Y.in_nonnegative_degrees():
        raise ModelMismatch("coboundary_test expects an element of nonnegative degree")
    for b, rho in coboundary_pairs(dd):
        D = d_operator(Y, b, rho)
        if not linalg.is_zero_matrix(D, Y.backend):
            return CoboundaryCertificate(False, None, (b, rho), D)
    X = _reconstruct_preimage(Y)
    return CoboundaryCertificate(True, X, None, None)


def _reconstruct_preimage(Y):
    model = Y.model
    dd = model.diagram
    X = BlockEndomorphism(model)
    assigned = {}

    def put(b, a, B):
        key = (b, a)
        if key in assigned:
            if not np.array_equal(assigned[key], B):
                raise InconsistentReconstruction("conflicting values for block %r" % (key,))
            return
        assigned[key] = B
        X.set_block(b, a, B)

    for a in dd.boxes:
        ra = dd.r(a)
        if ra is None:
            continue
        for b in dd.boxes:
            if b.row >= a.row and b.col <= ra.col:
                B = d_operator(Y, b, a) * (-dd.eps(a))
                put(b, ra, B)
    # close up under the block relation: partner of (b, a) is (m(a), m(b))
    for (b, a), B in list(assigned.items()):
        sign = -dd.eps(a) * dd.eps(b)
        put(dd.mirror(a), dd.mirror(b), (B.T * sign).copy())
    # degree-zero part is free (it lies in the kernel); blocks never assigned stay zero
    if not sp_check(X).ok:
        raise InconsistentReconstruction("reconstructed preimage is not in sp(V)")
    if not X.in_nonnegative_degrees():
        raise InconsistentReconstruction("reconstructed preimage has negative degree")
    if not np.array_equal(ad_delta(model, X.mat), Y.mat):
        raise InconsistentReconstruction("[delta, X] differs from Y")
    return X


# ---------------------------------------------------------------------------
# normalization spaces


def random_assignment(dd, rng):
    return {(b, rho): rng.choice(pair_chain(dd, b, rho)) for b, rho in admissible_pairs(dd)}


def phi0_assignment(dd):
    return {(b, rho): phi0(dd, b, rho) for b, rho in admissible_pairs(dd)}


def _free_vectors(alg, b, rho, pair):
    """Coordinate vectors spanning the free blocks attached to one chain choice."""
    dd, model = alg.diagram, alg.model
    x, y = pair
    rx, ry = dd.size(x), dd.size(y)
    out = []
    if b.row != rho.row:
        for i in range(rx):
            for j in range(ry):
                k, s = alg.entry_map[(model.slice(x).start + i, model.slice(y).start + j)]
                out.append({k: Q(s)})
        return out
    parity_odd = dd.position(b) % 2 == 1
    for i in range(rx):
        for j in range(i if parity_odd else i + 1, ry):
            X = BlockEndomorphism(model)
            B = linalg.zeros(rx, ry, EXACT)
            B[i, j] = Q(1)
            B[j, i] = Q(1) if parity_odd else Q(-1)
            X.set_block(x, y, B)
            px, py = dd.mirror(y), dd.mirror(x)
            if (px, py) != (x, y):
                X.set_block(px, py, B.T * (-dd.eps(x) * dd.eps(y)))
            out.append(alg.vec(X))
    return out


def mirror_coupling(dd, b, pair):
    """Sign s with Y at the partner block equal to s * Y at the chosen block."""
    x, y = pair
    transpose_sign = 1 if dd.position(b) % 2 == 1 else -1
    return -dd.eps(x) * dd.eps(y) * transpose_sign


class NormalizationSpace:
    """Graded complement N to u + [delta, g^0] in nonnegative degrees, with projectors."""

    def __init__(self, algebra, assignment, basis, u, images, label):
        self.algebra = algebra
        self.assignment = assignment
        self.basis = basis
        self.u = u
        self.images = images
        self.label = label
        self._split = {}

    @property
    def diagram(self):
        return self.algebra.diagram

    def degrees(self):
        return list(range(0, self.algebra.top + 1))

    def dim(self, k=None):
        if k is None:
            return sum(len(v) for v in self.basis.values())
        return len(self.basis.get(k, ()))

    def dims(self):
        return {k: self.dim(k) for k in self.degrees()}

    def elements(self, k):
        return [self.algebra.endo(v) for v in self.basis.get(k, ())]

    def echelon(self, k):
        E = Echelon(self.algebra.coords.n)
        for v in self.basis.get(k, ()):
            E.add(v)
        return E

    def contains(self, X):
        vec = X if isinstance(X, dict) else self.algebra.vec(X)
        by_deg = {}
        for i, x in vec.items():
            by_deg.setdefault(self.algebra.coords.degree[i], {})[i] = x
        for k, v in by_deg.items():
            if k < 0 or not self.echelon(k).contains(v):
                return False
        return True

    def splitting(self, k):
        """Exact data for splitting g_k = u_k + [delta, g_{k+1}] + N_k.

        Returns a dict with the degree-k coordinate indices, the inverse of the
        combined basis matrix, the three block sizes, and the preimage matrix
        sending image coefficients to coordinates of g_{k+1}.
        """
        if k in self._split:
            return self._split[k]
        alg = self.algebra
        idx = alg.degree_indices(k)
        pos = {g: i for i, g in enumerate(idx)}
        u = self.u.get(k, [])
        im_vecs, im_pre = self.images[k]
        N = self.basis.get(k, [])
        cols = u + im_vecs + N
        n = len(idx)
        if len(cols) != n:
            raise NotComplementary("degree %d: %d basis vectors for dimension %d"
                                   % (k, len(cols), n), k)
        B = linalg.zeros(n, n, EXACT)
        for j, v in enumerate(cols):
            for g, x in v.items():
                B[pos[g], j] = x
        try:
            Binv = linalg.inverse(B, EXACT)
        except Exception:
            raise NotComplementary("degree %d: the three subspaces are not independent" % k, k)
        idx1 = alg.degree_indices(k + 1)
        pos1 = {g: i for i, g in enumerate(idx1)}
        pre = linalg.zeros(len(idx1), len(im_vecs), EXACT)
        for j, v in enumerate(im_pre):
            for g, x in v.items():
                pre[pos1[g], j] = x
        data = {
            "indices": idx,
            "next_indices": idx1,
            "basis": B,
            "inverse": Binv,
            "sizes": (len(u), len(im_vecs), len(N)),
            "preimage": pre,
        }
        self._split[k] = data
        return data

    def project(self, vec, k):
        """Split a degree-k coordinate vector into (u, image, N) parts plus a preimage."""
        data = self.splitting(k)
        idx = data["indices"]
        v = np.array([vec.get(g, Q(0)) for g in idx], dtype=object)
        c = data["inverse"].dot(v) if len(idx) else v
        nu, ni, nn = data["sizes"]
        B = data["basis"]

        def part(lo, hi):
            out = {}
            if hi > lo:
                w = B[:, lo:hi].dot(c[lo:hi])
                for i, g in enumerate(idx):
                    if w[i] != 0:
                        out[g] = w[i]
            return out

        pre = {}
        if ni:
            w = data["preimage"].dot(c[nu:nu + ni])
            for i, g in enumerate(data["next_indices"]):
                if w[i] != 0:
                    pre[g] = w[i]
        return part(0, nu), part(nu, nu + ni), part(nu + ni, nu + ni + nn), pre


def _image_basis(alg, k):
    """Independent images [delta, E_i] for E_i in g_{k+1}, with their preimages."""
    E = Echelon(alg.coords.n)
    vecs, pres = [], []
    for i in alg.degree_indices(k + 1):
        img = alg.ad_image(i)
        if E.add(img):
            vecs.append(dict(img))
            pres.append({i: Q(1)})
    return vecs, pres


def normalization_space(obj, phi="phi0", strict=True):
    """N_phi for an assignment (``"phi0"``, a dict, or a seeded ``random.Random``).

    Assignment values may also be lists of pairs, which is only useful for
    building deliberately broken spaces for the audit.
    """
    alg = algebra_for(obj)
    dd = alg.diagram
    if isinstance(phi, str):
        if phi != "phi0":
            raise ValueError("unknown assignment %r" % phi)
        assignment, label = phi0_assignment(dd), "phi0"
    elif isinstance(phi, random.Random):
        assignment, label = random_assignment(dd, phi), "random"
    else:
        assignment, label = dict(phi), "custom"
    basis = {}
    for (b, rho), choice in assignment.items():
        chain = pair_chain(dd, b, rho)
        choices = choice if isinstance(choice, list) else [choice]
        for pair in choices:
            pair = (dd.check(pair[0]), dd.check(pair[1]))
            if pair not in chain:
                raise NotComplementary("pair %r is not in the chain of %r" % (pair, (b, rho)),
                                       dd.block_degree(b, rho))
            k = dd.block_degree(*pair)
            basis.setdefault(k, []).extend(_free_vectors(alg, b, rho, pair))
    U = prolongation(alg)
    u = {k: U.basis.get(k, []) for k in range(alg.top + 1)}
    images = {k: _image_basis(alg, k) for k in range(alg.top + 1)}
    N = NormalizationSpace(alg, assignment, basis, u, images, label)
    if strict:
        for k in N.degrees():
            N.splitting(k)
    return N


def cayley(S):
    """Rational orthogonal matrix (I - S)(I + S)^{-1} for skew S."""
    n = S.shape[0]
    I = linalg.identity(n, EXACT)
    return (I - S).dot(linalg.inverse(I + S, EXACT))


def residual_group_element(dd, rng, scale=3):
    """Block-diagonal Cayley-orthogonal element acting by U_i on each box of row i."""
    model = SymplecticModel(dd) if isinstance(dd, DoubleDiagram) else dd
    dd = model.diagram
    Us = []
    for r in dd.mults:
        S = linalg.zeros(r, r, EXACT)
        for i in range(r):
            for j in range(i + 1, r):
                x = Q(rng.randint(-scale, scale), rng.randint(1, scale))
                S[i, j], S[j, i] = x, -x
        Us.append(cayley(S))
    G = linalg.zeros(model.dim, model.dim, EXACT)
    for b in dd.boxes:
        G[model.slice(b), model.slice(b)] = Us[b.row - 1]
    return G, Us


AuditRow = namedtuple("AuditRow", "degree g u image N sum_ok independent")


def complementarity_audit(N, ad_samples=0, rng=None):
    """Per-degree dimension/independence checks plus optional Ad-invariance sampling."""
    alg = N.algebra
    rows = []
    ok = True
    for k in N.degrees():
        u = N.u.get(k, [])
        im = N.images[k][0]
        nb = N.basis.get(k, [])
        g = alg.dim(k)
        E = Echelon(alg.coords.n)
        for v in u + im:
            E.add(v)
        inner = E.dim
        for v in nb:
            E.add(v)
        independent = E.dim == inner + len(nb) and inner == len(u) + len(im)
        sum_ok = inner + len(nb) == g and E.dim == g
        rows.append(AuditRow(k, g, len(u), len(im), len(nb), sum_ok, independent))
        ok = ok and sum_ok and independent
    failures = [r.degree for r in rows if not (r.sum_ok and r.independent)]
    ad_failures = 0
    if ad_samples and ok:
        rng = rng or random.Random(0)
        for _ in range(ad_samples):
            G, _ = residual_group_element(alg.model, rng)
            Ginv = G.T.copy()  # orthogonal blocks
            for k in N.degrees():
                for v in N.basis.get(k, []):
                    M = alg.coords.to_matrix(v)
                    W = G.dot(M).dot(Ginv)
                    if not N.contains(alg.vec(W)):
                        ad_failures += 1
        ok = ok and ad_failures == 0
    return {"ok": ok, "rows": rows, "failed_degrees": failures,
            "ad_samples": ad_samples, "ad_failures": ad_failures}


# ---------------------------------------------------------------------------
# dense coordinate access and right inverses, used by the jet pipeline


class DegreeIO:
    """Read/write the degree-k coordinates of dense matrices with fancy indexing."""

    def __init__(self, alg, k):
        self.indices = alg.degree_indices(k)
        entries = [alg.coords.entries[g] for g in self.indices]
        self.rows = np.array([e[0][0] for e in entries], dtype=int)
        self.cols = np.array([e[0][1] for e in entries], dtype=int)
        paired = [(i, e[1]) for i, e in enumerate(entries) if len(e) > 1]
        self.pidx = np.array([i for i, _ in paired], dtype=int)
        self.prows = np.array([p[0] for _, p in paired], dtype=int)
        self.pcols = np.array([p[1] for _, p in paired], dtype=int)
        self.psign = np.array([p[2] for _, p in paired], dtype=object)
        self.dim = alg.model.dim
        self.degree = k

    def read(self, M):
        if not len(self.indices):
            return np.zeros(0, dtype=object)
        return M[self.rows, self.cols]

    def write(self, vec, backend):
        M = linalg.zeros(self.dim, self.dim, backend)
        if len(self.indices):
            vec = np.asarray(vec, dtype=object)
            M[self.rows, self.cols] = vec
            if len(self.pidx):
                M[self.prows, self.pcols] = vec[self.pidx] * self.psign
        return M


@lru_cache(maxsize=None)
def degree_io(reduced, k):
    return DegreeIO(graded_algebra(reduced), k)


@lru_cache(maxsize=None)
def ad_right_inverse(reduced, k):
    """Exact matrix sending degree-k coordinates to degree-(k+1) coordinates.

    On the image of ad(delta) it returns a preimage; the component along a
    fixed complement spanned by unit coordinate vectors is discarded.
    """
    alg = graded_algebra(reduced)
    idx = alg.degree_indices(k)
    idx1 = alg.degree_indices(k + 1)
    n = len(idx)
    vecs, pres = _image_basis(alg, k)
    E = Echelon(alg.coords.n)
    for v in vecs:
        E.add(v)
    cols = list(vecs)
    for g in idx:
        if E.add({g: Q(1)}):
            cols.append({g: Q(1)})
    pos = {g: i for i, g in enumerate(idx)}
    B = linalg.zeros(n, n, EXACT)
    for j, v in enumerate(cols):
        for g, x in v.items():
            B[pos[g], j] = x
    Binv = linalg.inverse(B, EXACT) if n else B
    pos1 = {g: i for i, g in enumerate(idx1)}
    pre = linalg.zeros(len(idx1), len(vecs), EXACT)
    for j, v in enumerate(pres):
        for g, x in v.items():
            pre[pos1[g], j] = x
    if not len(vecs):
        return linalg.zeros(len(idx1), n, EXACT)
    return pre.dot(Binv[:len(vecs), :])


def diagram_audit(reduced):
    """Exact algebra checks for one diagram, as a flat dict of verdicts."""
    alg = graded_algebra(reduced)
    n = alg.coords.n
    out = {"diagram": reduced.label(), "boxes": reduced.m}
    try:
        U = prolongation(alg)
        out["closed_form"] = True
        out["dim_u"] = U.dim()
    except ClosedFormMismatch as exc:
        out["closed_form"] = False
        out["closed_form_error"] = str(exc)
        U = None
    if U is not None:
        E = U.echelon()
        elems = [alg.endo(v) for v in U.all_vectors()]
        out["bracket_closed"] = all(E.contains(alg.vec(x.bracket(y))) for x in elems for y in elems)
    ut = unparametrized_prolongation(alg)
    out["dim_u_unparametrized"] = ut.dim()
    out["sl2_quotient"] = U is not None and ut.dim() - U.dim() == 3
    cob = True
    for k in range(0, alg.top + 1):
        ker = d_condition_kernel(alg, k)
        img = coboundary_image(alg, k)
        Ek, Ei = Echelon(n), Echelon(n)
        for v in ker:
            Ek.add(v)
        for v in img:
            Ei.add(v)
        same = (Ek.dim == Ei.dim and all(Ek.contains(v) for v in img)
                and all(Ei.contains(v) for v in ker))
        cob = cob and same
    out["coboundary_kernel_equals_image"] = cob
    try:
        audit = complementarity_audit(normalization_space(alg, "phi0"))
        out["complementarity_phi0"] = audit["ok"]
    except NotComplementary as exc:
        out["complementarity_phi0"] = False
        out["complementarity_error"] = str(exc)
    out["ok"] = all(out[k] for k in ("closed_form", "sl2_quotient", "coboundary_kernel_equals_image",
                                      "complementarity_phi0")) and out.get("bracket_closed", False)
    return out
