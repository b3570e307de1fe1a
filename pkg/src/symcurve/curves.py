"""Curves of Lagrangian subspaces given by polynomial frames.

A curve is a 2m x m matrix polynomial whose columns span Lambda(t), written
in the standard symplectic basis (e_1..e_m, f_1..f_m) with sigma(e_i, f_j)
equal to the Kronecker delta. Analysis happens on its Taylor jet at t0.

The flag-adapted frame built here is a Darboux frame, indexed by the double
diagram, whose columns of degree >= j span the osculating subspace of index
j. Its structure function has no components below degree -1; conjugating
its degree -1 part to the normal-form symbol gives the adapted lift.
"""

import json
import random
from collections import namedtuple
from fractions import Fraction

import mpmath
import numpy as np

from . import linalg
from .diagrams import YoungDiagram, build_double_diagram, reduce_diagram
from .errors import (BadFormat, JetOrderTooLow, NotAmple, NotEquiregular, NotLagrangian,
                     NotMonotone, PrecisionExhausted, RankDeficientFrame,
                     StageResidualTooLarge)
from .jets import MatrixJet, matjet_recenter
from .prolongation import ad_right_inverse, degree_io, graded_algebra
from .scalars import EXACT, FloatBackend, format_rational, parse_rational

SAMPLE_COUNT = 4


def standard_J(m, backend=EXACT):
    J = linalg.zeros(2 * m, 2 * m, backend)
    for i in range(m):
        J[i, m + i] = backend.one
        J[m + i, i] = -backend.one
    return J


class CurveSpec:
    """A validated curve: frame jet of shape 2m x m at t0."""

    def __init__(self, frame, name=None, check=True):
        if frame.shape[0] != 2 * frame.shape[1]:
            raise BadFormat("frame must have shape 2m x m, got %s" % (frame.shape,))
        self.frame = frame
        self.m = frame.shape[1]
        self.name = name
        if check:
            _check_lagrangian(self)

    @property
    def t0(self):
        return self.frame.t0

    @property
    def order(self):
        return self.frame.order

    @property
    def backend(self):
        return self.frame.backend

    def transformed(self, A, name=None):
        """The curve A . Lambda(t) for a constant matrix A in standard coordinates."""
        return CurveSpec(self.frame.__rmatmul__(A), name or self.name)

    def with_order(self, K):
        """The same polynomial frame viewed as a jet of order K (zero padding or truncation)."""
        F = self.frame
        if K <= F.order:
            return CurveSpec(F.truncate(K), self.name, check=False)
        zero = linalg.zeros(2 * self.m, self.m, self.backend)
        return CurveSpec(MatrixJet(F.coeffs + [zero.copy() for _ in range(K - F.order)],
                                   self.backend, self.t0, coerce=False), self.name, check=False)

    def reflected(self):
        """Image under f -> -f, which swaps nondecreasing and nonincreasing curves."""
        R = linalg.identity(2 * self.m, self.backend)
        for i in range(self.m, 2 * self.m):
            R[i, i] = -self.backend.one
        return CurveSpec(self.frame.__rmatmul__(R), self.name, check=False)

    def to_json(self):
        if self.backend.kind != "exact":
            raise BadFormat("only rational curves can be written to the curve format")
        cols = []
        for j in range(self.m):
            col = []
            for i in range(2 * self.m):
                col.append([format_rational(c[i, j]) for c in self.frame.coeffs])
            cols.append(col)
        out = {"schema": "symcurve/1", "m": self.m, "t0": format_rational(self.t0),
               "jet_order": self.order, "frame_columns": cols}
        if self.name:
            out["name"] = self.name
        return out


def _check_lagrangian(curve):
    F = curve.frame
    be = F.backend
    m = curve.m
    F0 = F.coeffs[0]
    if linalg.numerical_rank(F0, be) != m:
        raise RankDeficientFrame("frame columns are dependent at t0")
    J = standard_J(m, be)
    G = F.T @ (F.__rmatmul__(J))
    scale = max(linalg.max_abs(F0), 1) ** 2
    for n, M in enumerate(G.coeffs):
        for (i, j), x in np.ndenumerate(M):
            if j > i and not be.is_zero(x, scale):
                where = "at t0" if n == 0 else "in Taylor coefficient %d" % n
                raise NotLagrangian("sigma(col_%d, col_%d) = %s %s" % (i, j, be.to_string(x), where),
                                    (i, j), x)


def load_curve(data, jet_order=None):
    """Build a CurveSpec from curve JSON (dict or string)."""
    if isinstance(data, str):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as exc:
            raise BadFormat("curve is not valid JSON: %s" % exc)
    if not isinstance(data, dict):
        raise BadFormat("curve JSON must be an object")
    try:
        m = int(data["m"])
        cols = data["frame_columns"]
    except (KeyError, TypeError, ValueError):
        raise BadFormat("curve JSON needs integer 'm' and 'frame_columns'")
    if m <= 0:
        raise BadFormat("m must be positive")
    if not isinstance(cols, list) or len(cols) != m:
        raise BadFormat("expected %d frame columns, got %s" % (m, len(cols) if isinstance(cols, list) else "none"))
    t0 = parse_rational(str(data.get("t0", "0")))
    polys = []
    for col in cols:
        if not isinstance(col, list) or len(col) != 2 * m:
            raise BadFormat("each frame column needs %d entries" % (2 * m))
        entries = []
        for e in col:
            if isinstance(e, (str, int)):
                e = [e]
            if not isinstance(e, list) or not e:
                raise BadFormat("polynomial entries must be nonempty coefficient lists")
            try:
                entries.append([parse_rational(str(c)) for c in e])
            except Exception:
                raise BadFormat("bad coefficient in %r" % (e,))
        polys.append(entries)
    degree = max(len(e) for col in polys for e in col) - 1
    K = int(data.get("jet_order", degree)) if jet_order is None else int(jet_order)
    if degree > K:
        raise BadFormat("polynomial degree %d exceeds jet order %d" % (degree, K))
    coeffs = []
    for n in range(K + 1):
        M = linalg.zeros(2 * m, m, EXACT)
        for j, col in enumerate(polys):
            for i, e in enumerate(col):
                if n < len(e):
                    M[i, j] = e[n]
        coeffs.append(M)
    return CurveSpec(MatrixJet(coeffs, EXACT, t0, coerce=False), data.get("name"))


def curve_from_columns(columns, t0=0, jet_order=None, name=None):
    """Convenience constructor from nested lists of coefficients."""
    m = len(columns)
    return load_curve({"m": m, "t0": str(t0), "frame_columns": [[[str(c) for c in e] for e in col]
                                                                for col in columns],
                       **({"jet_order": jet_order} if jet_order is not None else {}),
                       **({"name": name} if name else {})})


# ---------------------------------------------------------------------------
# pointwise analysis


def _at(curve, t):
    """The frame jet re-expanded at t (no-op when t is None or t0)."""
    if t is None:
        return curve.frame
    be = curve.backend
    with be.context():
        h = be.coerce(t) - curve.t0
    if h == 0:
        return curve.frame
    return matjet_recenter(curve.frame, h)


def velocity_form(curve, t=None):
    """Matrix of l -> sigma(l', l) on Lambda(t) in the column basis."""
    F = _at(curve, t)
    be = F.backend
    J = standard_J(curve.m, be)
    if F.order < 1:
        raise JetOrderTooLow("velocity form needs a first-order jet")
    with be.context():
        return F.coeffs[1].T.dot(J).dot(F.coeffs[0])


def classify_form(Q, backend):
    """('nondecreasing' | 'nonincreasing' | 'indefinite', eigenvalues)."""
    prec = backend.precision or 256
    with mpmath.workprec(prec):
        M = linalg.to_mpmath(Q, backend)
        M = (M + M.T) / 2
        ev = sorted(mpmath.eigsy(M, eigvals_only=True))
        top = max([abs(x) for x in ev] + [mpmath.mpf(1)])
        tol = mpmath.mpf(2) ** (-(prec // 2)) * top
        neg = any(x < -tol for x in ev)
        pos = any(x > tol for x in ev)
        evs = [mpmath.nstr(x, 20) for x in ev]
    if neg and pos:
        return "indefinite", evs
    if neg:
        return "nonincreasing", evs
    if pos:
        return "nondecreasing", evs
    return "constant", evs


def flag_dimensions(F, m, backend):
    """dims of the extensions Lambda^(-j) at the base point, j = 0, 1, ..."""
    dims = []
    blocks = []
    for j in range(F.order + 1):
        blocks.append(F.coeffs[j])
        d = linalg.numerical_rank(np.concatenate(blocks, axis=1), backend)
        dims.append(d)
        if d == 2 * m or (j > 0 and d == dims[-2]):
            return dims
    return dims


def young_from_dims(dims, m):
    if dims[-1] != 2 * m:
        raise NotAmple("osculating flag stops at dimension %d < %d; reduce to Lambda(t)/V~^angle first"
                       % (dims[-1], 2 * m))
    cols = [dims[c] - dims[c - 1] for c in range(1, len(dims))]
    return YoungDiagram(cols)


RegularityReport = namedtuple(
    "RegularityReport",
    "equiregular sampled_dims ample ample_p monotone eigenvalues young_diagram probabilistic")


def sample_offsets(seed=0, count=SAMPLE_COUNT):
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        h = Fraction(rng.randint(-100, 100), 1000)
        if h != 0 and h not in out:
            out.append(h)
    return out


def regularity_report(curve, sample_points=None, seed=0):
    """Equiregularity (sampled), ampleness, monotonicity and the Young diagram."""
    m = curve.m
    be = curve.backend
    if sample_points is None:
        sample_points = [curve.t0 + parse_rational(str(h)) if be.kind == "exact" else None
                         for h in sample_offsets(seed)]
        if be.kind != "exact":
            with be.context():
                sample_points = [curve.t0 + be.coerce(parse_rational(str(h)))
                                 for h in sample_offsets(seed)]
    dims0 = flag_dimensions(curve.frame, m, be)
    sampled = {be.to_string(curve.t0): dims0}
    equi = True
    for t in sample_points:
        d = flag_dimensions(_at(curve, t), m, be)
        sampled[be.to_string(be.coerce(t))] = d
        if d != dims0:
            equi = False
    ample = dims0[-1] == 2 * m
    ample_p = len(dims0) - 1 if ample else None
    kind, evs = classify_form(velocity_form(curve), be)
    diagram = None
    if ample:
        try:
            diagram = young_from_dims(dims0, m)
        except Exception:
            diagram = None
    return RegularityReport(equi, sampled, ample, ample_p, kind, evs, diagram, True)


# ---------------------------------------------------------------------------
# flag-adapted Darboux frame


def _select_columns(F, m, backend, ncols):
    """Greedy choice at t0 of derivative columns extending the osculating flag."""
    chosen = []
    basis = [F.coeffs[0][:, j] for j in range(m)]
    if backend.kind == "exact":
        E = linalg.Echelon(2 * m)
        for v in basis:
            E.add(linalg.sparse(v))
    for c in range(1, len(ncols) + 1):
        picks = []
        A = F.coeffs[c]
        for j in range(m):
            v = A[:, j]
            if backend.kind == "exact":
                ok = E.add(linalg.sparse(v))
            else:
                cand = np.stack(basis + [v], axis=1)
                ok = linalg.numerical_rank(cand, backend) == len(basis) + 1
                if ok:
                    basis.append(v)
            if ok:
                picks.append(j)
            if len(picks) == ncols[c - 1]:
                break
        if len(picks) != ncols[c - 1]:
            raise NotEquiregular("column %d of the diagram could not be filled at t0" % c)
        chosen.append(picks)
    return chosen


FlagFrame = namedtuple("FlagFrame", "gamma diagram reduced selection order backend")


def curve_diagram(curve):
    dims = flag_dimensions(curve.frame, curve.m, curve.backend)
    return reduce_diagram(young_from_dims(dims, curve.m)), dims


def flag_frame(curve, backend=None, reduced=None):
    """Darboux frame jet adapted to the osculating flag (standard coordinates)."""
    if reduced is None:
        reduced, _ = curve_diagram(curve)
    dd = build_double_diagram(reduced)
    m = curve.m
    p = dd.p1
    ncols = list(reduced.young().column_counts)
    selection = _select_columns(curve.frame, m, curve.backend, ncols)
    if backend is None:
        backend = FloatBackend() if curve.backend.kind == "exact" else curve.backend
    if curve.order < p + 1:
        raise JetOrderTooLow("jet order %d is too low for a diagram with rows of length %d"
                             % (curve.order, p))
    F = curve.frame.to_backend(backend)
    L = curve.order - p
    ders = [F]
    for _ in range(p):
        ders.append(ders[-1].differentiate())
    ders = [d.truncate(L) for d in ders]
    F = ders[0]
    J = standard_J(m, backend)
    Wt_prev = None
    Vm_prev = None
    col_vectors = []
    half = None
    with backend.context():
        half = backend.one / 2
    for c in range(1, p + 1):
        W = ders[c].submatrix(range(2 * m), selection[c - 1])
        n_c = W.shape[1]
        if Wt_prev is not None:
            S = Vm_prev.T @ (W.__rmatmul__(J))
            W = W - Wt_prev @ S
            stack = Wt_prev.hstack(W)
        else:
            stack = W
        M = -(stack.T @ (F.__rmatmul__(J)))
        n = M.shape[0]
        E = linalg.zeros(n, n_c, backend)
        for i in range(n_c):
            E[n - n_c + i, i] = backend.one
        Y = M.T @ ((M @ M.T).inverse() @ E)
        Vm = F @ Y
        JW = W.__rmatmul__(J)
        G2 = W.T @ JW
        Wt = W - (Vm @ G2.T).scale(half)
        if Wt_prev is not None:
            G1 = W.T @ (Wt_prev.__rmatmul__(J))
            Wt = Wt - Vm_prev @ G1.T
            Wt_prev = Wt_prev.hstack(Wt)
            Vm_prev = Vm_prev.hstack(Vm)
        else:
            Wt_prev, Vm_prev = Wt, Vm
        col_vectors.append((Wt, Vm))
    # arrange columns in box order
    index = {}
    for c in range(1, p + 1):
        Wt, Vm = col_vectors[c - 1]
        k = 0
        for i, (pi, ri) in enumerate(reduced.rows, start=1):
            if pi >= c:
                index[(i, c)] = (Wt, list(range(k, k + ri)))
                index[(i, -c)] = (Vm, list(range(k, k + ri)))
                k += ri
    cols = []
    for b in dd.boxes:
        src, idx = index[(b.row, b.col)]
        cols.append(src.submatrix(range(2 * m), idx))
    G = cols[0]
    for blk in cols[1:]:
        G = G.hstack(blk)
    return FlagFrame(G, dd, reduced, selection, L, backend)


def frame_inverse(G, reduced):
    """Inverse of a Darboux frame: J_diagram^{-1} G^T J_std."""
    alg = graded_algebra(reduced)
    be = G.backend
    m = G.shape[0] // 2
    Jinv = linalg.coerce_matrix(alg.model.Jinv, be)
    Jstd = standard_J(m, be)
    return (G.T.__rmatmul__(Jinv)) @ Jstd


def structure_of_frame(G, reduced):
    """Gamma^{-1} Gamma' using the symplectic inverse."""
    return frame_inverse(G, reduced).truncate(G.order - 1) @ G.differentiate()


def symplectic_defect(G, reduced, order=0):
    alg = graded_algebra(reduced)
    be = G.backend
    m = G.shape[0] // 2
    with be.context():
        M = G.coeffs[0]
        D = M.T.dot(standard_J(m, be)).dot(M) - linalg.coerce_matrix(alg.model.J, be)
    return linalg.max_abs(D)


def osculating_flag(curve, backend=None):
    """Degree -> (MatrixJet spanning Lambda^(j), dimension) for every nontrivial j."""
    ff = flag_frame(curve, backend)
    alg = graded_algebra(ff.reduced)
    degs = alg.model.vector_degrees
    out = {}
    for j in range(-ff.diagram.p1, ff.diagram.p1 + 1):
        idx = [i for i, d in enumerate(degs) if d >= j]
        if idx:
            out[j] = (ff.gamma.submatrix(range(2 * curve.m), idx), len(idx))
        else:
            out[j] = (None, 0)
    return out


# ---------------------------------------------------------------------------
# symbol and its normal form


def degree_part(M, alg, k):
    mask = alg.model.entry_degrees == k
    out = np.zeros_like(M)
    out[...] = 0 * M[0, 0]
    out[mask] = M[mask]
    return out


def _gram_schmidt_step(cands, basis, gram, backend, scale):
    """Extend a gram-orthonormal list by candidates, returning new unit vectors."""
    out = []
    tol = backend.tolerance * scale
    for v in cands:
        w = v.copy()
        for u in basis + out:
            w = w - u * (u.dot(gram.dot(w)))
        nrm = w.dot(gram.dot(w))
        if abs(nrm) <= tol:
            continue
        if nrm < 0:
            raise NotMonotone("the symbol pairing is not definite: the curve is not monotone of the "
                              "audited sign")
        out.append(w * (backend.one / backend.sqrt(nrm)))
    return out


def normal_form_conjugator(A, reduced, backend):
    """Graded symplectic Q with A Q = Q delta, built row by row from the top degree.

    A is the symbol as a dense degree -1 matrix in a graded Darboux basis.
    """
    alg = graded_algebra(reduced)
    dd = alg.diagram
    model = alg.model
    sstar = model.definiteness_sign
    J = linalg.coerce_matrix(model.J, backend)
    n = model.dim
    new = {}
    scale = max(linalg.max_abs(A), 1)
    with backend.context():
        for j in range(dd.p1 - 1, -1, -1):
            idx = [i for i, d in enumerate(model.vector_degrees) if d == j]
            # gram matrix of s*(-1)^j sigma(A^(2j+1) x, y)
            P = linalg.identity(n, backend)
            for _ in range(2 * j + 1):
                P = A.dot(P)
            gram = P.T.dot(J) * (sstar * (-1) ** j)
            gram = (gram + gram.T) * (backend.one / 2)
            pushed = []
            for i in range(1, dd.s + 1):
                b = (i, -(j + 1))
                if dd.lengths[i - 1] > j + 1:
                    prev = new[(i, -(j + 2))]
                    new[b] = [A.dot(v) for v in prev]
                    pushed += new[b]
            cands = []
            for i in idx:
                v = linalg.zeros(n, 1, backend)[:, 0]
                v[i] = backend.one
                cands.append(v)
            for i in range(1, dd.s + 1):
                if dd.lengths[i - 1] == j + 1:
                    r = dd.mults[i - 1]
                    found = []
                    for v in cands:
                        if len(found) == r:
                            break
                        got = _gram_schmidt_step([v], pushed + found, gram, backend, scale ** (2 * j + 1))
                        found += got
                    if len(found) != r:
                        raise PrecisionExhausted("could not complete an orthonormal tuple in degree %d" % j)
                    new[(i, -(j + 1))] = found
                    pushed += found
        for b in dd.boxes:
            if b.col > 0:
                c = b.col
                P = linalg.identity(n, backend)
                for _ in range(2 * c - 1):
                    P = A.dot(P)
                new[b] = [P.dot(v) * ((-1) ** (c - 1)) for v in new[(b.row, -c)]]
        Qm = linalg.zeros(n, n, backend)
        k = 0
        for b in dd.boxes:
            for v in new[b]:
                Qm[:, k] = v
                k += 1
    return Qm


SymbolResult = namedtuple("SymbolResult", "symbol conjugator delta commutation_defect symplectic_defect "
                                          "grading_defect reduced")


def symbol_at(curve, t=None, backend=None):
    """The symbol of the curve at t in a flag-adapted frame and its conjugator to delta."""
    if t is not None:
        shifted = CurveSpec(_at(curve, t), curve.name, check=False)
    else:
        shifted = curve
    shifted, _ = orient(shifted)
    reduced, _ = curve_diagram(shifted)
    dd = build_double_diagram(reduced)
    p = dd.p1
    low = CurveSpec(shifted.frame.truncate(min(shifted.order, p + 1)), check=False)
    ff = flag_frame(low, backend, reduced)
    be = ff.backend
    alg = graded_algebra(reduced)
    C = structure_of_frame(ff.gamma, reduced)
    A = degree_part(C.coeffs[0], alg, -1)
    Qm = normal_form_conjugator(A, reduced, be)
    delta = linalg.coerce_matrix(alg.delta.mat, be)
    J = linalg.coerce_matrix(alg.model.J, be)
    with be.context():
        comm = linalg.max_abs(A.dot(Qm) - Qm.dot(delta))
        symp = linalg.max_abs(Qm.T.dot(J).dot(Qm) - J)
        off = Qm[alg.model.entry_degrees != 0]
        grad = max([abs(x) for x in off] + [be.zero])
    return SymbolResult(A, Qm, delta, comm, symp, grad, reduced)


# ---------------------------------------------------------------------------
# adapted lift


AdaptedLift = namedtuple("AdaptedLift", "gamma C reduced order backend")


def _cayley_jet(q, backend):
    n = q.shape[0]
    with backend.context():
        half = q.scale(backend.one / 2)
    I = MatrixJet.identity(n, q.order, backend, q.t0)
    return (I - half).inverse() @ (I + half)


def conjugate_symbol(A, reduced, backend, tol=None):
    """Jet Q in the degree-0 group with Q^{-1} A Q = delta, by Newton steps."""
    alg = graded_algebra(reduced)
    model = alg.model
    Q0 = normal_form_conjugator(A.coeffs[0], reduced, backend)
    Q = MatrixJet.constant(Q0, A.order, backend, A.t0)
    J = linalg.coerce_matrix(model.J, backend)
    Jinv = linalg.coerce_matrix(model.Jinv, backend)
    delta = linalg.coerce_matrix(alg.delta.mat, backend)
    P = linalg.coerce_matrix(ad_right_inverse(reduced, -1), backend)
    io_m1 = degree_io(reduced, -1)
    io_0 = degree_io(reduced, 0)
    scale = max(A.max_abs(), 1)
    if tol is None:
        tol = backend.tolerance * scale
    floor = backend.tolerance ** 2 * scale * 2 ** 32
    best = None
    for _ in range(2 * max(1, A.order).bit_length() + 8):
        Qinv = (Q.T.__rmatmul__(Jinv)) @ J
        R = Qinv @ A @ Q
        with backend.context():
            R.coeffs[0] = R.coeffs[0] - delta
        res = R.max_abs()
        # jet Newton doubles the number of correct coefficients, so the max norm
        # can fall slowly; stop only at working precision or when it stops falling
        if res <= floor or (best is not None and res >= best):
            if res <= tol:
                return Q
            break
        best = res
        qc = []
        with backend.context():
            for M in R.coeffs:
                r = io_m1.read(degree_part(M, alg, -1))
                x = -P.dot(r) if len(r) else np.zeros(0, dtype=object)
                qc.append(io_0.write(x, backend))
        q = MatrixJet(qc, backend, A.t0, coerce=False)
        Q = Q @ _cayley_jet(q, backend)
    raise StageResidualTooLarge("symbol conjugation did not converge", -1)


def orient(curve):
    """(curve, reflected): nondecreasing curves are moved to the nonincreasing class.

    The normal-form symbol generates nonincreasing curves. A nondecreasing
    curve is replaced by its image under the anti-symplectic map f -> -f,
    which conjugates Sp(V) to itself, so equivalence questions carry over.
    """
    kind, _ = classify_form(velocity_form(curve), curve.backend)
    if kind == "indefinite":
        raise NotMonotone("the velocity form is indefinite")
    if kind == "nondecreasing":
        return curve.reflected(), True
    return curve, False


def adapted_lift(curve, backend=None, reduced=None):
    """Lift Gamma_0 (standard coordinates) whose structure function has degree -1 part delta.

    The curve must already be nonincreasing; see ``orient``.
    """
    if reduced is None:
        reduced, _ = curve_diagram(curve)
    kind, _ = classify_form(velocity_form(curve), curve.backend)
    if kind == "nondecreasing":
        raise NotMonotone("the velocity form is positive semidefinite; pass the curve through orient()")
    if kind == "indefinite":
        raise NotMonotone("the velocity form is indefinite")
    ff = flag_frame(curve, backend, reduced)
    be = ff.backend
    alg = graded_algebra(reduced)
    C1 = structure_of_frame(ff.gamma, reduced)
    scale = max(C1.max_abs(), 1)
    with be.context():
        for M in C1.coeffs:
            low = [abs(x) for x in M[alg.model.entry_degrees < -1]]
            if low and max(low) > be.tolerance * scale * 2 ** 20:
                raise StageResidualTooLarge("flag frame has structure below degree -1", -2)
    A = C1.map(lambda M: degree_part(M, alg, -1))
    Q = conjugate_symbol(A, reduced, be)
    G = ff.gamma.truncate(Q.order) @ Q
    C = structure_of_frame(G, reduced)
    delta = linalg.coerce_matrix(alg.delta.mat, be)
    mask_low = alg.model.entry_degrees < 0
    with be.context():
        for n, M in enumerate(C.coeffs):
            M[mask_low] = delta[mask_low] if n == 0 else be.zero
    return AdaptedLift(G.truncate(C.order), C, reduced, C.order, be)
