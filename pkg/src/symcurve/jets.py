"""Truncated Taylor jets of scalars and matrices.

A jet of order K at a base point t0 stores the Taylor coefficients
c_0, ..., c_K of a function of t around t0. Products are truncated to order
K, and differentiation lowers the order by one, so an order always records
how many coefficients of a result are actually known.

``MatrixJet`` keeps one coefficient matrix per order instead of a grid of
scalar jets; ``entry`` exposes the grid view.
"""

from math import comb

import numpy as np

from . import linalg
from .errors import (BackendMismatch, NilpotencyViolated, NonInvertibleJet,
                     OrderMismatch, ShapeMismatch)
from .scalars import EXACT


def _check_compatible(a, b):
    if a.backend != b.backend:
        raise BackendMismatch("cannot mix %r and %r" % (a.backend, b.backend))
    if a.t0 != b.t0:
        raise OrderMismatch("jets are based at different points")
    if a.order != b.order:
        raise OrderMismatch("jet orders differ (%d vs %d)" % (a.order, b.order))


class Jet:
    __slots__ = ("backend", "t0", "coeffs")

    def __init__(self, coeffs, backend=EXACT, t0=0):
        if len(coeffs) == 0:
            raise OrderMismatch("a jet needs at least one coefficient")
        self.backend = backend
        with backend.context():
            self.t0 = backend.coerce(t0)
            self.coeffs = tuple(backend.coerce(c) for c in coeffs)

    @property
    def order(self):
        return len(self.coeffs) - 1

    @classmethod
    def constant(cls, value, order, backend=EXACT, t0=0):
        return cls([value] + [0] * order, backend, t0)

    @classmethod
    def variable(cls, order, backend=EXACT, t0=0):
        """The jet of t - t0."""
        c = [0] * (order + 1)
        if order >= 1:
            c[1] = 1
        return cls(c, backend, t0)

    def _new(self, coeffs):
        out = object.__new__(Jet)
        out.backend = self.backend
        out.t0 = self.t0
        out.coeffs = tuple(coeffs)
        return out

    def __repr__(self):
        return "Jet(%s, t0=%s)" % ([self.backend.to_string(c) for c in self.coeffs],
                                   self.backend.to_string(self.t0))

    def __eq__(self, other):
        return (isinstance(other, Jet) and self.backend == other.backend
                and self.t0 == other.t0 and self.coeffs == other.coeffs)

    def __hash__(self):
        return hash((self.backend, self.coeffs))

    def __add__(self, other):
        other = self._lift(other)
        _check_compatible(self, other)
        with self.backend.context():
            return self._new(a + b for a, b in zip(self.coeffs, other.coeffs))

    __radd__ = __add__

    def __neg__(self):
        with self.backend.context():
            return self._new(-a for a in self.coeffs)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, Jet):
            with self.backend.context():
                s = self.backend.coerce(other)
                return self._new(a * s for a in self.coeffs)
        _check_compatible(self, other)
        a, b = self.coeffs, other.coeffs
        with self.backend.context():
            out = []
            for n in range(len(a)):
                acc = self.backend.zero
                for k in range(n + 1):
                    acc += a[k] * b[n - k]
                out.append(acc)
            return self._new(out)

    __rmul__ = __mul__

    def _lift(self, other):
        if isinstance(other, Jet):
            return other
        return Jet.constant(other, self.order, self.backend, self.t0)

    def invert(self):
        a = self.coeffs
        c0 = a[0]
        if self.backend.is_zero(c0):
            raise NonInvertibleJet("constant coefficient vanishes")
        with self.backend.context():
            inv0 = self.backend.one / c0
            out = [inv0]
            for n in range(1, len(a)):
                acc = self.backend.zero
                for k in range(1, n + 1):
                    acc += a[k] * out[n - k]
                out.append(-acc * inv0)
            return self._new(out)

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.invert()
        with self.backend.context():
            return self * (self.backend.one / self.backend.coerce(other))

    def differentiate(self):
        if self.order == 0:
            raise OrderMismatch("cannot differentiate an order-0 jet")
        with self.backend.context():
            return self._new(k * self.coeffs[k] for k in range(1, len(self.coeffs)))

    def integrate(self, constant=0):
        """Antiderivative with the given value at t0; raises the order by one."""
        with self.backend.context():
            out = [self.backend.coerce(constant)]
            out += [c / (k + 1) for k, c in enumerate(self.coeffs)]
            return self._new(out)

    def truncate(self, order):
        if order > self.order:
            raise OrderMismatch("cannot raise the order of a jet by truncation")
        return self._new(self.coeffs[:order + 1])

    def evaluate(self, h):
        """Value of the Taylor polynomial at t0 + h."""
        with self.backend.context():
            h = self.backend.coerce(h)
            acc = self.backend.zero
            for c in reversed(self.coeffs):
                acc = acc * h + c
            return acc

    def sqrt(self):
        a = self.coeffs
        if not a[0] > 0:
            raise NonInvertibleJet("square root needs a positive constant coefficient")
        with self.backend.context():
            s0 = self.backend.sqrt(a[0])
            out = [s0]
            two_s0 = 2 * s0
            for n in range(1, len(a)):
                acc = a[n]
                for k in range(1, n):
                    acc -= out[k] * out[n - k]
                out.append(acc / two_s0)
            return self._new(out)

    def recenter(self, h):
        """Re-expand the Taylor polynomial around t0 + h (exact for polynomials)."""
        with self.backend.context():
            h = self.backend.coerce(h)
            out = []
            for k in range(len(self.coeffs)):
                acc = self.backend.zero
                for n in range(k, len(self.coeffs)):
                    acc += comb(n, k) * self.coeffs[n] * h ** (n - k)
                out.append(acc)
            res = Jet(out, self.backend, self.t0 + h)
        return res


def jet_field_ops(kind, a, b=None):
    """Field operation on scalar jets: ``add``, ``mul``, ``invert`` or ``differentiate``."""
    if kind == "add":
        return a + b
    if kind == "mul":
        if not isinstance(b, Jet):
            raise OrderMismatch("mul expects two jets")
        return a * b
    if kind == "invert":
        return a.invert()
    if kind == "differentiate":
        return a.differentiate()
    raise ValueError("unknown jet operation %r" % (kind,))


class MatrixJet:
    """Matrix-valued jet: coefficient matrices A_0..A_K sharing t0 and K."""

    __slots__ = ("backend", "t0", "coeffs")

    def __init__(self, coeffs, backend=EXACT, t0=0, coerce=True):
        if len(coeffs) == 0:
            raise OrderMismatch("a matrix jet needs at least one coefficient")
        self.backend = backend
        if coerce:
            with backend.context():
                self.t0 = backend.coerce(t0)
            self.coeffs = [linalg.coerce_matrix(c, backend) for c in coeffs]
            shape = self.coeffs[0].shape
            if len(shape) != 2 or any(c.shape != shape for c in self.coeffs):
                raise ShapeMismatch("coefficient matrices must share one 2-d shape")
        else:
            self.t0 = t0
            self.coeffs = list(coeffs)

    def _new(self, coeffs):
        return MatrixJet(coeffs, self.backend, self.t0, coerce=False)

    @property
    def order(self):
        return len(self.coeffs) - 1

    @property
    def shape(self):
        return self.coeffs[0].shape

    @classmethod
    def constant(cls, M, order, backend=EXACT, t0=0):
        M = linalg.coerce_matrix(M, backend)
        z = linalg.zeros(M.shape[0], M.shape[1], backend)
        with backend.context():
            t0 = backend.coerce(t0)
        return cls([M] + [z.copy() for _ in range(order)], backend, t0, coerce=False)

    @classmethod
    def identity(cls, n, order, backend=EXACT, t0=0):
        return cls.constant(linalg.identity(n, backend), order, backend, t0)

    @classmethod
    def zeros(cls, rows, cols, order, backend=EXACT, t0=0):
        return cls.constant(linalg.zeros(rows, cols, backend), order, backend, t0)

    @classmethod
    def from_entries(cls, grid):
        """Build from a rectangular grid of scalar Jets sharing t0 and order."""
        rows = len(grid)
        cols = len(grid[0]) if rows else 0
        if rows == 0 or cols == 0 or any(len(r) != cols for r in grid):
            raise ShapeMismatch("entry grid must be rectangular and nonempty")
        first = grid[0][0]
        for r in grid:
            for e in r:
                _check_compatible(first, e)
        coeffs = []
        for n in range(first.order + 1):
            M = np.empty((rows, cols), dtype=object)
            for i in range(rows):
                for j in range(cols):
                    M[i, j] = grid[i][j].coeffs[n]
            coeffs.append(M)
        return cls(coeffs, first.backend, first.t0, coerce=False)

    def entry(self, i, j):
        out = object.__new__(Jet)
        out.backend = self.backend
        out.t0 = self.t0
        out.coeffs = tuple(c[i, j] for c in self.coeffs)
        return out

    def __repr__(self):
        return "MatrixJet(shape=%s, order=%d, %r)" % (self.shape, self.order, self.backend)

    def _check(self, other):
        if not isinstance(other, MatrixJet):
            raise ShapeMismatch("expected a MatrixJet")
        _check_compatible(self, other)

    def __add__(self, other):
        self._check(other)
        if self.shape != other.shape:
            raise ShapeMismatch("shapes %s and %s differ" % (self.shape, other.shape))
        with self.backend.context():
            return self._new([a + b for a, b in zip(self.coeffs, other.coeffs)])

    def __sub__(self, other):
        self._check(other)
        if self.shape != other.shape:
            raise ShapeMismatch("shapes %s and %s differ" % (self.shape, other.shape))
        with self.backend.context():
            return self._new([a - b for a, b in zip(self.coeffs, other.coeffs)])

    def __neg__(self):
        with self.backend.context():
            return self._new([-a for a in self.coeffs])

    def scale(self, s):
        with self.backend.context():
            s = self.backend.coerce(s)
            return self._new([a * s for a in self.coeffs])

    def __matmul__(self, other):
        if not isinstance(other, MatrixJet):
            # constant matrix on the right
            M = linalg.coerce_matrix(other, self.backend)
            with self.backend.context():
                return self._new([a.dot(M) for a in self.coeffs])
        self._check(other)
        if self.shape[1] != other.shape[0]:
            raise ShapeMismatch("inner dimensions differ")
        A, B = self.coeffs, other.coeffs
        with self.backend.context():
            out = []
            for n in range(len(A)):
                acc = A[0].dot(B[n])
                for k in range(1, n + 1):
                    acc = acc + A[k].dot(B[n - k])
                out.append(acc)
            return self._new(out)

    def __rmatmul__(self, other):
        M = linalg.coerce_matrix(other, self.backend)
        with self.backend.context():
            return self._new([M.dot(a) for a in self.coeffs])

    @property
    def T(self):
        return self._new([a.T.copy() for a in self.coeffs])

    def differentiate(self):
        if self.order == 0:
            raise OrderMismatch("cannot differentiate an order-0 jet")
        with self.backend.context():
            return self._new([self.coeffs[k] * k for k in range(1, len(self.coeffs))])

    def truncate(self, order):
        if order > self.order:
            raise OrderMismatch("cannot raise the order of a jet by truncation")
        if order < 0:
            raise OrderMismatch("negative jet order")
        return self._new(self.coeffs[:order + 1])

    def coefficient(self, n):
        return self.coeffs[n]

    def value(self):
        return self.coeffs[0]

    def evaluate(self, h):
        with self.backend.context():
            h = self.backend.coerce(h)
            acc = self.coeffs[-1].copy()
            for c in reversed(self.coeffs[:-1]):
                acc = acc * h + c
            return acc

    def map(self, fn):
        with self.backend.context():
            return self._new([fn(a) for a in self.coeffs])

    def submatrix(self, rows, cols):
        rows = np.asarray(rows, dtype=int)
        cols = np.asarray(cols, dtype=int)
        return self._new([a[np.ix_(rows, cols)].copy() for a in self.coeffs])

    def hstack(self, other):
        self._check(other)
        return self._new([np.concatenate([a, b], axis=1) for a, b in zip(self.coeffs, other.coeffs)])

    def inverse(self):
        A = self.coeffs
        try:
            B0 = linalg.inverse(A[0], self.backend)
        except Exception:
            raise NonInvertibleJet("constant coefficient matrix is singular")
        with self.backend.context():
            out = [B0]
            for n in range(1, len(A)):
                acc = A[1].dot(out[n - 1])
                for k in range(2, n + 1):
                    acc = acc + A[k].dot(out[n - k])
                out.append(-B0.dot(acc))
            return self._new(out)

    def max_abs(self):
        return max(linalg.max_abs(a) for a in self.coeffs)

    def is_zero(self, scale=None):
        return all(linalg.is_zero_matrix(a, self.backend, scale) for a in self.coeffs)

    def equals(self, other):
        if not isinstance(other, MatrixJet) or self.backend != other.backend:
            return False
        if self.order != other.order or self.shape != other.shape or self.t0 != other.t0:
            return False
        return all(np.array_equal(a, b) for a, b in zip(self.coeffs, other.coeffs))

    def to_backend(self, backend):
        if backend == self.backend:
            return self
        with backend.context():
            return MatrixJet([linalg.coerce_matrix(a, backend) for a in self.coeffs],
                             backend, backend.coerce(self.t0), coerce=False)


def matjet_exp_nilpotent(x, nilpotency_bound):
    """``sum_{i<q} x^i / i!`` for a jet whose constant part satisfies x^q = 0."""
    q = int(nilpotency_bound)
    if q < 1:
        raise NilpotencyViolated("nilpotency bound must be positive")
    n = x.shape[0]
    if x.shape != (n, n):
        raise ShapeMismatch("exponential needs a square matrix jet")
    backend = x.backend
    with backend.context():
        P = linalg.identity(n, backend)
        for _ in range(q):
            P = P.dot(x.coeffs[0])
    scale = x.max_abs()
    if not linalg.is_zero_matrix(P, backend, scale ** q if scale else None):
        raise NilpotencyViolated("x^%d does not vanish at the constant coefficient" % q)
    result = MatrixJet.identity(n, x.order, backend, x.t0)
    term = MatrixJet.identity(n, x.order, backend, x.t0)
    for i in range(1, q):
        term = (term @ x).scale(backend.one / i)
        result = result + term
    return result


class RightMultiply:
    """Right-hand side A' = A C for a given matrix jet C."""

    def __init__(self, C):
        self.C = C

    def coefficient(self, A_coeffs, n):
        C = self.C.coeffs
        acc = A_coeffs[0].dot(C[n])
        for k in range(1, n + 1):
            acc = acc + A_coeffs[k].dot(C[n - k])
        return acc


class LeftMultiply:
    """Right-hand side A' = C A for a given matrix jet C."""

    def __init__(self, C):
        self.C = C

    def coefficient(self, A_coeffs, n):
        C = self.C.coeffs
        acc = C[n].dot(A_coeffs[0])
        for k in range(1, n + 1):
            acc = acc + C[n - k].dot(A_coeffs[k])
        return acc


def jet_ode_solve(rhs, initial, K, backend=None, t0=None):
    """Jet solution of the linear system A' = rhs(A), A(t0) = initial.

    ``rhs`` is a RightMultiply / LeftMultiply instance or any callable taking
    a MatrixJet of order K and returning one; the order-k coefficient of
    rhs(A) may only depend on A_0..A_k. The recursion A_{k+1} = rhs_k / (k+1)
    then determines every coefficient.
    """
    if backend is None:
        backend = rhs.C.backend if hasattr(rhs, "C") else EXACT
    if t0 is None:
        t0 = rhs.C.t0 if hasattr(rhs, "C") else 0
    if hasattr(rhs, "C"):
        if rhs.C.order < K - 1:
            raise OrderMismatch("right-hand side jet is too short for order %d" % K)
        if rhs.C.backend != backend:
            raise BackendMismatch("rhs and solution backends differ")
    A0 = linalg.coerce_matrix(initial, backend)
    coeffs = [A0]
    zero = linalg.zeros(A0.shape[0], A0.shape[1], backend)
    with backend.context():
        for n in range(K):
            if hasattr(rhs, "coefficient"):
                r = rhs.coefficient(coeffs, n)
            else:
                partial = MatrixJet(coeffs + [zero.copy() for _ in range(K + 1 - len(coeffs))],
                                    backend, t0, coerce=False)
                r = rhs(partial).coeffs[n]
            coeffs.append(r * (backend.one / (n + 1)))
    with backend.context():
        t0 = backend.coerce(t0)
    return MatrixJet(coeffs, backend, t0, coerce=False)


def matjet_recenter(A, h):
    """Re-expand a matrix polynomial (given by its jet) around t0 + h."""
    backend = A.backend
    with backend.context():
        h = backend.coerce(h)
        K = A.order
        out = []
        for k in range(K + 1):
            acc = A.coeffs[k].copy()
            for n in range(k + 1, K + 1):
                acc = acc + A.coeffs[n] * (comb(n, k) * h ** (n - k))
            out.append(acc)
        return MatrixJet(out, backend, A.t0 + h, coerce=False)
