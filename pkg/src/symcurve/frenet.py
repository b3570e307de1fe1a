"""Frenet frames of curves in Euclidean space, computed on jets.

The frame comes from Gram-Schmidt applied to the derivatives gamma', ...,
gamma^(n). Its structure function R = E^T E' is skew with support on the two
diagonals next to the main one; the curvatures are the entries R[j+1, j].
"""

import json
from collections import namedtuple

import numpy as np

from . import linalg
from .errors import BadFormat, NotArcLength, RegularityFailed, StepSizeTooLarge
from .jets import Jet, MatrixJet, RightMultiply, jet_ode_solve
from .scalars import EXACT, FloatBackend, parse_rational


class EuclideanCurve:
    """Column jet gamma(t) in R^n; ``arc_length`` records a unit-speed parameter."""

    def __init__(self, components, arc_length=None):
        self.components = list(components)
        self.n = len(self.components)
        if self.n < 2:
            raise BadFormat("a Euclidean curve needs at least two components")
        self.arc_length = arc_length

    @property
    def backend(self):
        return self.components[0].backend

    @property
    def order(self):
        return self.components[0].order

    @property
    def t0(self):
        return self.components[0].t0

    def as_matrix_jet(self):
        return MatrixJet.from_entries([[c] for c in self.components])

    def transformed(self, U, a):
        """x -> a + U x."""
        be = self.backend
        U = linalg.coerce_matrix(U, be)
        out = []
        with be.context():
            for i in range(self.n):
                acc = Jet.constant(be.coerce(a[i]), self.order, be, self.t0)
                for j in range(self.n):
                    acc = acc + self.components[j] * U[i, j]
                out.append(acc)
        return EuclideanCurve(out, self.arc_length)

    def to_backend(self, backend):
        return EuclideanCurve([Jet(c.coeffs, backend, c.t0) for c in self.components], self.arc_length)


def load_euclidean_curve(data):
    if isinstance(data, str):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as exc:
            raise BadFormat("curve is not valid JSON: %s" % exc)
    if not isinstance(data, dict) or data.get("space") != "euclidean":
        raise BadFormat("a Euclidean curve needs \"space\": \"euclidean\"")
    comps = data.get("components")
    if not isinstance(comps, list) or len(comps) < 2:
        raise BadFormat("'components' must list at least two coefficient lists")
    try:
        polys = [[parse_rational(str(c)) for c in comp] for comp in comps]
    except Exception:
        raise BadFormat("bad coefficient in components")
    K = int(data.get("jet_order", max(len(p) for p in polys) - 1))
    t0 = parse_rational(str(data.get("t0", "0")))
    out = []
    for p in polys:
        if len(p) > K + 1:
            raise BadFormat("polynomial degree exceeds jet order")
        out.append(Jet(p + [0] * (K + 1 - len(p)), EXACT, t0))
    return EuclideanCurve(out)


def _dot(u, v):
    acc = u[0] * v[0]
    for a, b in zip(u[1:], v[1:]):
        acc = acc + a * b
    return acc


def compose(f, tau):
    """f(t0 + tau(s)) for a jet tau with zero constant term."""
    acc = Jet.constant(f.coeffs[-1], tau.order, tau.backend, tau.t0)
    for c in reversed(f.coeffs[:-1]):
        acc = acc * tau + c
    return acc


def reversion(s):
    """tau with s(t0 + tau(x)) - s(t0) = x, for a jet s with nonzero slope."""
    be = s.backend
    K = s.order
    slope = s.coeffs[1]
    shifted = Jet([be.zero] + list(s.coeffs[1:]), be, be.zero)
    x = Jet.variable(K, be, be.zero)
    tau = x / slope
    for _ in range(K):
        tau = tau + (x - compose(shifted, tau)) / slope
    return tau


def arc_length_reparametrize(curve):
    """The curve in an arc-length parameter s with s = 0 at t0."""
    be = curve.backend
    d = [c.differentiate() for c in curve.components]
    speed = _dot(d, d).sqrt()
    s = speed.integrate(0)
    tau = reversion(Jet(s.coeffs, be, be.zero))
    comps = [compose(Jet(c.coeffs[:s.order + 1], be, be.zero), tau) for c in curve.components]
    return EuclideanCurve(comps, arc_length=True)


def is_arc_length(curve):
    be = curve.backend
    d = [c.differentiate() for c in curve.components]
    sq = _dot(d, d)
    with be.context():
        dev = [sq.coeffs[0] - 1] + list(sq.coeffs[1:])
    return all(be.is_zero(x) for x in dev)


FrenetResult = namedtuple("FrenetResult", "frame R curvatures affine reparametrized order")


def frenet_frame(curve, reparametrize=True, backend=None):
    """Frenet frame, structure function, curvatures and the affine lift of a curve."""
    if backend is None:
        backend = curve.backend if curve.backend.kind == "float" else FloatBackend()
    curve = curve.to_backend(backend)
    reparam = False
    if not is_arc_length(curve):
        if not reparametrize:
            raise NotArcLength("the curve is not parametrized by arc length")
        curve = arc_length_reparametrize(curve)
        reparam = True
    n = curve.n
    if curve.order < n + 1:
        raise RegularityFailed("jet order %d is too low for %d derivatives" % (curve.order, n))
    ders = []
    cur = curve.components
    for _ in range(n):
        cur = [c.differentiate() for c in cur]
        ders.append(cur)
    L = curve.order - n
    ders = [[c.truncate(L) for c in d] for d in ders]
    scale = max(abs(x) for d in ders for c in d for x in c.coeffs[:1]) or backend.one
    basis = []
    with backend.context():
        for j, v in enumerate(ders):
            w = list(v)
            for e in basis:
                p = _dot(w, e)
                w = [a - b * p for a, b in zip(w, e)]
            nrm2 = _dot(w, w)
            if nrm2.coeffs[0] <= backend.tolerance * scale ** 2:
                raise RegularityFailed("derivatives up to order %d are dependent at t0" % (j + 1))
            inv = nrm2.sqrt().invert()
            basis.append([a * inv for a in w])
    E = MatrixJet.from_entries([[basis[j][i] for j in range(n)] for i in range(n)])
    R = E.T.truncate(L - 1) @ E.differentiate()
    curv = [R.entry(j + 1, j) for j in range(n - 1)]
    affine = affine_structure(R)
    return FrenetResult(E, R, curv, affine, reparam, L - 1)


def affine_structure(R):
    """Structure function [[0, 0], [e_1, R]] of the lift t -> [[1, 0], [gamma, E]]."""
    n = R.shape[0]
    be = R.backend
    out = []
    for k, M in enumerate(R.coeffs):
        A = linalg.zeros(n + 1, n + 1, be)
        A[1:, 1:] = M
        if k == 0:
            A[1, 0] = be.one
        out.append(A)
    return MatrixJet(out, be, R.t0, coerce=False)


def frenet_reconstruct(R, frame0=None, point0=None):
    """Curve whose Frenet data is R, by exact jet integration of the frame ODE."""
    n = R.shape[0]
    be = R.backend
    E0 = linalg.identity(n, be) if frame0 is None else frame0
    E = jet_ode_solve(RightMultiply(R), E0, R.order + 1, be, R.t0)
    x0 = [be.zero] * n if point0 is None else point0
    comps = []
    for i in range(n):
        comps.append(E.entry(i, 0).integrate(x0[i]))
    return EuclideanCurve(comps, arc_length=True)


def frenet_reconstruct_sampled(curvatures, frame0, point0, s1, steps, backend=None):
    """RK4 integration of the affine lift with an orthogonality monitor.

    ``curvatures`` maps s to the list of n - 1 curvature values.
    Returns the sampled points.
    """
    backend = backend or FloatBackend()
    n = len(point0)
    with backend.context():
        G = linalg.zeros(n + 1, n + 1, backend)
        G[0, 0] = backend.one
        for i in range(n):
            G[i + 1, 0] = backend.coerce(point0[i])
        G[1:, 1:] = linalg.coerce_matrix(frame0, backend)
        h = backend.coerce(s1) / steps

        def field(s):
            k = curvatures(s)
            A = linalg.zeros(n + 1, n + 1, backend)
            A[1, 0] = backend.one
            for j, kj in enumerate(k):
                A[j + 2, j + 1] = backend.coerce(kj)
                A[j + 1, j + 2] = -backend.coerce(kj)
            return A

        s = backend.zero
        points = [G[1:, 0].copy()]
        for _ in range(steps):
            k1 = G.dot(field(s))
            k2 = (G + k1 * (h / 2)).dot(field(s + h / 2))
            k3 = (G + k2 * (h / 2)).dot(field(s + h / 2))
            k4 = (G + k3 * h).dot(field(s + h))
            G = G + (k1 + k2 * 2 + k3 * 2 + k4) * (h / 6)
            s = s + h
            E = G[1:, 1:]
            defect = linalg.max_abs(E.T.dot(E) - linalg.identity(n, backend))
            if defect > backend.coerce("1/1000000"):
                raise StepSizeTooLarge("frame orthogonality defect %s at s = %s"
                                       % (backend.to_string(defect), backend.to_string(s)))
            points.append(G[1:, 0].copy())
    return np.array(points, dtype=object)
