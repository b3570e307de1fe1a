"""Structure functions, normal frames and the invariants they carry.

``normalize`` takes the adapted lift of a curve and fixes the gauge degree by
degree. At stage k the degree-k part of the structure function splits as
u_k + [delta, g_{k+1}] + N_k; right-multiplying the frame by exp(x) with
x in g_{k+1} removes the middle term. At stage 0 a u_0-valued rotation,
obtained from a linear jet ODE, removes the first term as well.

Jet orders shrink along the way: the degree-k part of the final structure
function is valid to order K - p1 - 2 - k for an input curve jet of order K.
"""

import itertools
import random
from collections import namedtuple
from fractions import Fraction
from functools import lru_cache

import gmpy2
import numpy as np

from . import linalg
from .curves import CurveSpec, adapted_lift, curve_diagram, orient
from .diagrams import ReducedDiagram, build_double_diagram
from .errors import (JetOrderTooLow, ShapeMismatch, StageResidualTooLarge,
                     StepSizeTooLarge)
from .jets import LeftMultiply, MatrixJet, RightMultiply, jet_ode_solve, matjet_exp_nilpotent
from .prolongation import degree_io, graded_algebra, normalization_space
from .scalars import EXACT, FloatBackend

Q = gmpy2.mpq


def default_jet_order(reduced):
    p = reduced.lengths[0]
    return max(2 * p + 4, 3 * p + 2)


def valid_orders(K, p1):
    """Per-degree jet order of the normalized structure function."""
    return {k: K - p1 - 2 - k for k in range(0, 2 * p1)}


# ---------------------------------------------------------------------------
# structure functions and reconstruction


def structure_function(gamma, J=None):
    """C = Gamma^{-1} Gamma'; when J is given, membership in sp(J) is asserted."""
    if gamma.shape[0] != gamma.shape[1]:
        raise ShapeMismatch("a frame must be square")
    inv = gamma.truncate(gamma.order - 1).inverse()
    C = inv @ gamma.differentiate()
    if J is not None and not in_sp(C, J):
        raise ShapeMismatch("structure function is not in sp(J); the frame is not symplectic")
    return C


def in_sp(C, J):
    be = C.backend
    J = linalg.coerce_matrix(J, be)
    scale = max(C.max_abs(), 1)
    with be.context():
        for M in C.coeffs:
            if not linalg.is_zero_matrix(M.T.dot(J) + J.dot(M), be, scale):
                return False
    return True


def reconstruct(C, initial):
    """Jet solution of Gamma' = Gamma C with Gamma(t0) = initial (exact on rationals)."""
    return jet_ode_solve(RightMultiply(C), initial, C.order + 1, C.backend, C.t0)


SampledFrame = namedtuple("SampledFrame", "times frames defects")


def reconstruct_sampled(C, initial, t0, t1, steps, J=None, backend=None, budget=None):
    """Fixed-step RK4 for Gamma' = Gamma C(t) with a symplectic-defect monitor.

    ``C`` is a callable t -> matrix or a MatrixJet evaluated as a polynomial.
    """
    if isinstance(C, MatrixJet):
        backend = backend or C.backend
        jet = C.to_backend(backend)

        def C(t):
            return jet.evaluate(t - jet.t0)
    backend = backend or FloatBackend()
    with backend.context():
        G = linalg.coerce_matrix(initial, backend)
        t0, t1 = backend.coerce(t0), backend.coerce(t1)
        h = (t1 - t0) / steps
        Jm = linalg.coerce_matrix(J, backend) if J is not None else None
        ref = G.T.dot(Jm).dot(G) if Jm is not None else None
        if budget is None:
            budget = backend.coerce(Fraction(1, 10 ** 8))
        times, frames, defects = [t0], [G], [backend.zero]
        t = t0
        for _ in range(steps):
            k1 = G.dot(_coerce_callable(C, t, backend))
            k2 = (G + k1 * (h / 2)).dot(_coerce_callable(C, t + h / 2, backend))
            k3 = (G + k2 * (h / 2)).dot(_coerce_callable(C, t + h / 2, backend))
            k4 = (G + k3 * h).dot(_coerce_callable(C, t + h, backend))
            G = G + (k1 + k2 * 2 + k3 * 2 + k4) * (h / 6)
            t = t + h
            d = linalg.max_abs(G.T.dot(Jm).dot(G) - ref) if Jm is not None else backend.zero
            if d > budget * max(linalg.max_abs(ref), 1):
                raise StepSizeTooLarge("symplectic defect %s exceeds the budget at t = %s"
                                       % (backend.to_string(d), backend.to_string(t)))
            times.append(t)
            frames.append(G)
            defects.append(d)
    return SampledFrame(times, frames, defects)


def _coerce_callable(C, t, backend):
    return linalg.coerce_matrix(C(t), backend)


# ---------------------------------------------------------------------------
# float views of the normalization space


class _FloatSplit:
    """Per-degree split data of a NormalizationSpace in a float backend."""

    def __init__(self, N, k, backend):
        data = N.splitting(k)
        reduced = N.algebra.diagram.reduced
        self.io = degree_io(reduced, k)
        self.io_next = degree_io(reduced, k + 1)
        self.sizes = data["sizes"]
        self.B = linalg.coerce_matrix(data["basis"], backend)
        self.Binv = linalg.coerce_matrix(data["inverse"], backend)
        self.pre = linalg.coerce_matrix(data["preimage"], backend)
        self.backend = backend

    def coefficients(self, M):
        v = self.io.read(M)
        if not len(v):
            return v
        with self.backend.context():
            return self.Binv.dot(v)

    def parts(self, M):
        """(u matrix, x matrix in g_{k+1} cancelling the image part, N coefficients)."""
        be = self.backend
        c = self.coefficients(M)
        nu, ni, nn = self.sizes
        with be.context():
            u = self.io.write(self.B[:, :nu].dot(c[:nu]), be) if nu else None
            x = self.io_next.write(-self.pre.dot(c[nu:nu + ni]), be) if ni else None
        return u, x, c[nu + ni:]

    def n_matrix(self, coeffs):
        be = self.backend
        nu, ni, nn = self.sizes
        with be.context():
            return self.io.write(self.B[:, nu + ni:].dot(coeffs), be)


@lru_cache(maxsize=None)
def _phi0_space(reduced):
    return normalization_space(reduced, "phi0")


def _split_cache(N, backend):
    key = ("_float", backend.precision)
    cache = N._split.setdefault(key, {})
    return cache


def _float_split(N, k, backend):
    cache = _split_cache(N, backend)
    if k not in cache:
        cache[k] = _FloatSplit(N, k, backend)
    return cache[k]


# ---------------------------------------------------------------------------
# normalization


GaugeStage = namedtuple("GaugeStage", "degree residual_gauge_dim correction residual order")

CanonicalFrameResult = namedtuple(
    "CanonicalFrameResult",
    "gamma C free orders trace fiber_choice reduced N reflected backend jet_order")


def fiber_matrix(reduced, Us, backend=EXACT):
    """Block-diagonal element acting by U_i on every box of row i."""
    alg = graded_algebra(reduced)
    model = alg.model
    G = linalg.zeros(model.dim, model.dim, backend)
    for b in alg.diagram.boxes:
        U = linalg.coerce_matrix(np.asarray(Us[b.row - 1], dtype=object), backend)
        G[model.slice(b), model.slice(b)] = U
    return G


def gauge_trace_dims(reduced):
    """Residual-gauge dimension after each stage: kernel of ad(delta) up to k plus dim g^{k+1}."""
    alg = graded_algebra(reduced)
    top = alg.top
    out = {}
    kernel = 0
    for k in range(0, top + 1):
        images = [alg.ad_image(i) for i in alg.degree_indices(k)]
        rank = linalg.span_dim(images, alg.coords.n)
        kernel += alg.dim(k) - rank
        out[k] = kernel + sum(alg.dim(j) for j in range(k + 1, top + 1))
    return out


def _budget(backend, scale):
    with backend.context():
        return gmpy2.mpfr(2) ** (-(3 * backend.precision) // 8) * max(scale, backend.one)


def _deg_mask(alg, lo, hi=None):
    d = alg.model.entry_degrees
    return (d >= lo) if hi is None else ((d >= lo) & (d <= hi))


def normalize(curve, N=None, fiber_choice=None, jet_order=None, backend=None):
    """Normal frame of a curve: structure function delta + n with n in N at every order.

    ``fiber_choice`` is a list of orthogonal matrices, one per row group of the
    diagram, fixing the frame at t0 relative to the adapted lift.
    """
    curve, reflected = orient(curve)
    reduced, _ = curve_diagram(curve)
    if N is None:
        N = _phi0_space(reduced)
    elif N.algebra.diagram.reduced != reduced:
        raise ShapeMismatch("normalization space belongs to diagram %s, curve has %s"
                            % (N.algebra.diagram.reduced.label(), reduced.label()))
    p1 = reduced.lengths[0]
    top = 2 * p1 - 1
    K = default_jet_order(reduced) if jet_order is None else int(jet_order)
    if K - 3 * p1 - 1 < 0:
        raise JetOrderTooLow("jet order %d is too low: the top degree needs order >= %d"
                             % (K, 3 * p1 + 1))
    curve = curve.with_order(K)
    lift = adapted_lift(curve, backend, reduced)
    be = lift.backend
    alg = graded_algebra(reduced)
    delta = linalg.coerce_matrix(alg.delta.mat, be)
    Gam, C = lift.gamma, lift.C
    base = K - p1 - 2
    if C.order < base:
        raise JetOrderTooLow("adapted lift has order %d < %d" % (C.order, base))
    C = C.truncate(base)
    Gam = Gam.truncate(base)
    if fiber_choice is None:
        fiber_choice = [linalg.identity(r, EXACT) for r in reduced.multiplicities]
    G0 = fiber_matrix(reduced, fiber_choice, be)
    trace_dims = gauge_trace_dims(reduced)
    scale = max(C.max_abs(), 1)
    free = {}
    trace = []
    for k in range(0, top + 1):
        omega = base - k
        C = C.truncate(omega)
        Gam = Gam.truncate(omega)
        sp = _float_split(N, k, be)
        us, xs, ns = [], [], []
        for M in C.coeffs:
            u, x, nc = sp.parts(M)
            us.append(u)
            xs.append(x)
            ns.append(nc)
        correction = be.zero
        if k < top and xs[0] is not None:
            x = MatrixJet(xs, be, C.t0, coerce=False)
            correction = x.max_abs()
            bound = top // (k + 1) + 1
            E = matjet_exp_nilpotent(x, bound)
            Einv = matjet_exp_nilpotent(-x, bound)
            lower = omega - 1
            C = (Einv.truncate(lower) @ C.truncate(lower) @ E.truncate(lower)) + \
                (Einv.truncate(lower) @ E.differentiate())
            Gam = Gam @ E
        if k == 0:
            if us[0] is not None:
                U = MatrixJet(us, be, C.t0, coerce=False)
                g = jet_ode_solve(LeftMultiply(-U), G0, omega, be, C.t0)
                correction = max(correction, U.max_abs())
            else:
                U = None
                g = MatrixJet.constant(G0, omega, be, C.t0)
            ginv = g.T  # values in a product of orthogonal groups
            n0 = MatrixJet([sp.n_matrix(c) for c in ns], be, C.t0, coerce=False)
            n0 = ginv @ n0 @ g
            ns = [sp.coefficients(M)[sum(sp.sizes[:2]):] for M in n0.coeffs]
            lower = C.order
            Cs = C if U is None else C - U.truncate(lower)
            C = ginv.truncate(lower) @ Cs @ g.truncate(lower)
            Gam = Gam.truncate(lower) @ g.truncate(lower)
        free[k] = ns
        residual = _stage_residual(C, alg, k, delta, sp, ns, be)
        if residual > _budget(be, scale):
            raise StageResidualTooLarge("stage %d left a residual of %s" % (k, be.to_string(residual)), k)
        trace.append(GaugeStage(k, trace_dims[k], correction, residual, omega))
    orders = valid_orders(K, p1)
    # the final structure function, with exact delta in degree -1
    with be.context():
        for n, M in enumerate(C.coeffs):
            mask = alg.model.entry_degrees < 0
            M[mask] = delta[mask] if n == 0 else be.zero
    return CanonicalFrameResult(Gam, C, free, orders, trace, fiber_choice, reduced, N,
                                reflected, be, K)


def _stage_residual(C, alg, k, delta, sp, ns, be):
    """Largest deviation from normal form in degrees -1..k after stage k."""
    worst = be.zero
    with be.context():
        for n, M in enumerate(C.coeffs):
            if n == 0:
                d = linalg.max_abs((M - delta)[alg.model.entry_degrees == -1])
            else:
                d = linalg.max_abs(M[alg.model.entry_degrees == -1])
            worst = max(worst, d)
            c = sp.coefficients(M)
            nu, ni, _ = sp.sizes
            if nu + ni:
                worst = max(worst, max(abs(v) for v in c[:nu + ni]))
            if n < len(ns) and len(ns[n]):
                worst = max(worst, max(abs(a - b) for a, b in zip(c[nu + ni:], ns[n])))
    return worst


def free_matrix(result, k, n):
    """Degree-k part of the normalized structure function at jet coefficient n."""
    sp = _float_split(result.N, k, result.backend)
    return sp.n_matrix(result.free[k][n])


def curvature_maps(result):
    """Nonzero blocks of the normal structure function keyed by box pair.

    Keys read "(row_b,c_b)x(row_a,c_a)" for the block in row-box b and
    column-box a. Each value is a list of per-order block matrices.
    """
    alg = graded_algebra(result.reduced)
    dd = alg.diagram
    model = alg.model
    be = result.backend
    out = {}
    for k in sorted(result.free):
        mats = [free_matrix(result, k, n) for n in range(len(result.free[k]))]
        for b in dd.boxes:
            for a in dd.boxes:
                if dd.block_degree(b, a) != k:
                    continue
                blocks = [M[model.slice(b), model.slice(a)] for M in mats]
                if any(not linalg.is_zero_matrix(B, be) for B in blocks):
                    out["%sx%s" % (b.key(), a.key())] = blocks
    return out


def free_blocks(N):
    """Box pairs carrying free coordinates of N, in a fixed order."""
    dd = N.algebra.diagram
    out = []
    for (b, rho), choice in sorted(N.assignment.items(), key=lambda kv: (dd.index[kv[0][1]], dd.index[kv[0][0]])):
        pairs = choice if isinstance(choice, list) else [choice]
        out += [tuple(p) for p in pairs]
    return out


# ---------------------------------------------------------------------------
# invariants


Fingerprint = namedtuple("Fingerprint", "kind values orders reflected reduced")


def _coordinate_rows(N):
    """Row pair (row x, row y) of each free coordinate of N, per degree."""
    alg = N.algebra
    rows = {}
    for k, vecs in N.basis.items():
        out = []
        for v in vecs:
            g = min(v)
            b, a, _, _ = alg.coords.coords[g]
            out.append((b.row, a.row))
        rows[k] = out
    return rows


def _canonical_signs(result, tol):
    """Row signs making the first clearly nonzero coefficient of linking coordinates positive."""
    s = len(result.reduced.rows)
    rows = _coordinate_rows(result.N)
    links = []
    for k in sorted(result.free):
        for idx, (i, j) in enumerate(rows.get(k, [])):
            if i == j:
                continue
            first = None
            for vec in result.free[k]:
                if abs(vec[idx]) > tol:
                    first = vec[idx]
                    break
            if first is not None:
                links.append((i, j, 1 if first > 0 else -1))
    signs = {}
    while len(signs) < s:
        progress = True
        while progress:
            progress = False
            for i, j, sg in links:
                if (i in signs) != (j in signs):
                    if i in signs:
                        signs[j] = sg * signs[i]
                    else:
                        signs[i] = sg * signs[j]
                    progress = True
        for r in range(1, s + 1):
            if r not in signs:
                signs[r] = 1
                break
    return signs


def _signed_free(result, signs):
    rows = _coordinate_rows(result.N)
    be = result.backend
    out = {}
    with be.context():
        for k, seq in result.free.items():
            factor = [signs[i] * signs[j] for i, j in rows.get(k, [])]
            out[k] = [np.array([x * f for x, f in zip(vec, factor)], dtype=object) for vec in seq]
    return out


def _tolerance(be):
    with be.context():
        return gmpy2.mpfr(2) ** (-(be.precision // 3))


def _word_traces(result, cap=500):
    """Traces of closed words of length <= 4 in free blocks, transposes included."""
    alg = graded_algebra(result.reduced)
    model = alg.model
    be = result.backend
    gens = []
    for x, y in free_blocks(result.N):
        k = alg.diagram.block_degree(x, y)
        for n in range(len(result.free[k])):
            M = free_matrix(result, k, n)
            B = M[model.slice(x), model.slice(y)]
            gens.append((x.row, y.row, B))
            gens.append((y.row, x.row, B.T.copy()))
    values = []
    with be.context():
        for length in range(1, 5):
            for word in itertools.product(range(len(gens)), repeat=length):
                if len(values) >= cap:
                    return values
                ok = all(gens[word[i]][1] == gens[word[i + 1]][0] for i in range(length - 1))
                if not ok or gens[word[-1]][1] != gens[word[0]][0]:
                    continue
                P = gens[word[0]][2]
                for w in word[1:]:
                    P = P.dot(gens[w][2])
                values.append(sum(P[i, i] for i in range(P.shape[0])))
    return values


def invariant_fingerprint(result):
    """Sign-canonical free jets for multiplicity-one diagrams, trace invariants otherwise."""
    be = result.backend
    if result.reduced.multiplicity_one:
        signs = _canonical_signs(result, _tolerance(be))
        values = _signed_free(result, signs)
        return Fingerprint("complete", values, dict(result.orders), result.reflected, result.reduced)
    return Fingerprint("partial", _word_traces(result), dict(result.orders), result.reflected,
                       result.reduced)


def _free_distance(a, b, orders):
    worst = 0
    for k, seq in a.items():
        for n in range(min(len(seq), len(b[k]), orders[k] + 1)):
            for x, y in zip(seq[n], b[k][n]):
                worst = max(worst, abs(x - y))
    return worst


def fingerprint_distance(f1, f2):
    if f1.kind == "complete":
        orders = {k: min(f1.orders[k], f2.orders[k]) for k in f1.orders}
        return _free_distance(f1.values, f2.values, orders)
    n = min(len(f1.values), len(f2.values))
    return max([abs(x - y) for x, y in zip(f1.values[:n], f2.values[:n])] + [0])


Verdict = namedtuple("Verdict", "verdict reason distance complete")


def equivalence_test(c1, c2, jet_order=None, backend=None):
    """Decide whether A . c1 = c2 for some A in Sp(V)."""
    d1, _ = curve_diagram(c1)
    d2, _ = curve_diagram(c2)
    if d1 != d2:
        return Verdict("inequivalent", "diagrams differ: %s vs %s" % (d1.label(), d2.label()), None, True)
    if jet_order is None:
        jet_order = default_jet_order(d1)
    r1 = normalize(c1, jet_order=jet_order, backend=backend)
    r2 = normalize(c2, jet_order=jet_order, backend=backend)
    if r1.reflected != r2.reflected:
        return Verdict("inequivalent", "velocity forms have opposite signs", None, True)
    be = r1.backend
    tol = _tolerance(be)
    scale = max(r1.C.max_abs(), r2.C.max_abs(), 1)
    if d1.multiplicity_one:
        orders = {k: min(r1.orders[k], r2.orders[k]) for k in r1.orders}
        s = len(d1.rows)
        best = None
        for tail in itertools.product((1, -1), repeat=s - 1):
            signs = dict(enumerate((1,) + tail, start=1))
            dist = _free_distance(r1.free, _signed_free(r2, signs), orders)
            best = dist if best is None else min(best, dist)
        if best <= tol * scale:
            return Verdict("equivalent", "normal structure functions agree up to the sign group",
                           best, True)
        return Verdict("inequivalent", "no sign vector matches the normal structure functions",
                       best, True)
    f1, f2 = invariant_fingerprint(r1), invariant_fingerprint(r2)
    dist = fingerprint_distance(f1, f2)
    if dist > tol * scale ** 4:
        return Verdict("inequivalent", "trace invariants differ", dist, True)
    return Verdict("undecided-partial", "trace invariants agree; they are not known to be complete",
                   dist, False)


# ---------------------------------------------------------------------------
# test-curve generation


def random_free_coefficients(N, rng, poly_degree, height=3):
    """Rational polynomial coefficients for every free coordinate of N."""
    out = {}
    for k in N.degrees():
        out[k] = [[Q(rng.randint(-height, height), rng.randint(1, height)) for _ in range(N.dim(k))]
                  for _ in range(poly_degree + 1)]
    return out


def structure_from_free(N, coeffs, order):
    """Exact jet delta + n(t) from per-degree polynomial coefficients in the N basis."""
    alg = N.algebra
    delta = alg.delta.mat
    mats = []
    for n in range(order + 1):
        M = delta.copy() if n == 0 else linalg.zeros(alg.model.dim, alg.model.dim, EXACT)
        for k, seq in coeffs.items():
            if n < len(seq):
                for c, v in zip(seq[n], N.basis.get(k, [])):
                    if c:
                        M = M + alg.coords.to_matrix({g: x * c for g, x in v.items()})
        mats.append(M)
    return MatrixJet(mats, EXACT, 0, coerce=False)


GeneratedCurve = namedtuple("GeneratedCurve", "curve C gamma coefficients N")


def curve_from_structure(C, reduced, K):
    """Curve spanned by the nonnegative-degree columns of the lift with structure C."""
    model = graded_algebra(reduced).model
    I = linalg.identity(model.dim, EXACT)
    gamma = jet_ode_solve(RightMultiply(C), I, K, EXACT, C.t0)
    T = model.standard_map
    frame = gamma.submatrix(range(model.dim), model.mirror_columns).__rmatmul__(T)
    return CurveSpec(frame), gamma


def random_curve(reduced, seed=0, poly_degree=2, jet_order=None, height=3, zero=False):
    """Exact curve whose normal structure function is delta + n(t), n drawn in N_phi0."""
    if not isinstance(reduced, ReducedDiagram):
        reduced = build_double_diagram(reduced).reduced
    N = _phi0_space(reduced)
    K = default_jet_order(reduced) if jet_order is None else int(jet_order)
    rng = random.Random(seed)
    coeffs = random_free_coefficients(N, rng, poly_degree, height)
    if zero:
        coeffs = {k: [[Q(0)] * len(v) for v in seq] for k, seq in coeffs.items()}
    C = structure_from_free(N, coeffs, K - 1)
    curve, gamma = curve_from_structure(C, reduced, K)
    return GeneratedCurve(curve, C, gamma, coeffs, N)


def flat_curve(reduced, jet_order=None):
    return random_curve(reduced, jet_order=jet_order, zero=True).curve


def random_symplectic(m, rng, height=2, rounds=2):
    """Rational symplectic matrix built from shears and block-diagonal factors."""
    A = linalg.identity(2 * m, EXACT)

    def sym():
        S = linalg.zeros(m, m, EXACT)
        for i in range(m):
            for j in range(i, m):
                S[i, j] = S[j, i] = Q(rng.randint(-height, height), rng.randint(1, height))
        return S

    for _ in range(rounds):
        U = linalg.identity(2 * m, EXACT)
        U[:m, m:] = sym()
        L = linalg.identity(2 * m, EXACT)
        L[m:, :m] = sym()
        M = linalg.identity(m, EXACT)
        for i in range(m):
            for j in range(i):
                M[i, j] = Q(rng.randint(-height, height), rng.randint(1, height))
        D = linalg.zeros(2 * m, 2 * m, EXACT)
        D[:m, :m] = M
        D[m:, m:] = linalg.inverse(M, EXACT).T
        A = A.dot(U).dot(L).dot(D)
    return A


def recovered_fiber(result, gamma_true):
    """U = Gamma_true(t0)^{-1} Gamma_normal(t0) in diagram coordinates."""
    be = result.backend
    reduced = result.reduced
    model = graded_algebra(reduced).model
    T = linalg.coerce_matrix(model.standard_map, be)
    with be.context():
        lhs = linalg.coerce_matrix(gamma_true.coeffs[0], be)
        return linalg.solve(T.dot(lhs), result.gamma.coeffs[0], be)
