"""Scalar backends.

Two coefficient fields are supported. The exact backend stores rationals as
``gmpy2.mpq``; the float backend stores binary floats as ``gmpy2.mpfr`` at a
fixed precision. Every jet and matrix carries its backend explicitly, and the
arithmetic layers refuse to combine values from different backends.

gmpy2 evaluates mpfr arithmetic at the precision of the *active context*
rather than that of the operands, so float computations must run inside
``backend.context()``.
"""

import contextlib
import os
from fractions import Fraction

import gmpy2

from .errors import BackendMismatch, SymcurveError

DEFAULT_PRECISION = 192


def default_precision():
    """Precision in bits, honouring ``SYMCURVE_PRECISION`` when it is set."""
    raw = os.environ.get("SYMCURVE_PRECISION")
    if raw is None:
        return DEFAULT_PRECISION
    try:
        value = int(raw)
    except ValueError:
        raise SymcurveError("SYMCURVE_PRECISION must be an integer, got %r" % raw)
    if value < 64:
        raise SymcurveError("precision must be at least 64 bits")
    return value


def parse_rational(text):
    """Parse ``"p/q"``, an integer string or a decimal string into an mpq."""
    if isinstance(text, (int, Fraction)):
        return gmpy2.mpq(text)
    if isinstance(text, type(gmpy2.mpq())):
        return text
    if not isinstance(text, str):
        raise SymcurveError("cannot read %r as a rational" % (text,))
    try:
        return gmpy2.mpq(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError):
        raise SymcurveError("cannot read %r as a rational" % (text,))


def format_rational(q):
    q = gmpy2.mpq(q)
    if q.denominator == 1:
        return str(q.numerator)
    return "%d/%d" % (q.numerator, q.denominator)


class ExactBackend:
    kind = "exact"
    precision = None

    def __init__(self):
        self.zero = gmpy2.mpq(0)
        self.one = gmpy2.mpq(1)

    def __eq__(self, other):
        return isinstance(other, ExactBackend)

    def __hash__(self):
        return hash("exact")

    def __repr__(self):
        return "ExactBackend()"

    def context(self):
        return contextlib.nullcontext()

    def coerce(self, x):
        if isinstance(x, type(self.zero)):
            return x
        if isinstance(x, type(gmpy2.mpfr(0))):
            raise BackendMismatch("float value passed to the exact backend")
        if isinstance(x, float):
            raise BackendMismatch("python float passed to the exact backend")
        if isinstance(x, str):
            return parse_rational(x)
        return gmpy2.mpq(x)

    def is_zero(self, x, scale=None):
        return x == 0

    @property
    def tolerance(self):
        return self.zero

    def sqrt(self, x):
        x = self.coerce(x)
        if x < 0:
            raise SymcurveError("square root of a negative rational")
        num, den = gmpy2.isqrt_rem(x.numerator), gmpy2.isqrt_rem(x.denominator)
        if num[1] or den[1]:
            raise SymcurveError("square root leaves the rationals; use the float backend")
        return gmpy2.mpq(num[0], den[0])

    def to_string(self, x):
        return format_rational(x)

    def to_float_backend(self, precision=None):
        return FloatBackend(precision or default_precision())


class FloatBackend:
    kind = "float"

    def __init__(self, precision=None, rank_tol=None):
        if precision is None:
            precision = default_precision()
        if precision < 64:
            raise SymcurveError("precision must be at least 64 bits")
        self.precision = int(precision)
        self.rank_tol = None if rank_tol is None else parse_rational(str(rank_tol))
        with self.context():
            self.zero = gmpy2.mpfr(0)
            self.one = gmpy2.mpfr(1)

    def __eq__(self, other):
        return (isinstance(other, FloatBackend) and other.precision == self.precision
                and other.rank_tol == self.rank_tol)

    def __hash__(self):
        return hash(("float", self.precision, self.rank_tol))

    def __repr__(self):
        return "FloatBackend(%d)" % self.precision

    def context(self):
        return gmpy2.context(precision=self.precision)

    def coerce(self, x):
        if isinstance(x, str):
            x = parse_rational(x)
        with self.context():
            if isinstance(x, type(self.zero)) and x.precision == self.precision:
                return x
            return gmpy2.mpfr(x, self.precision)

    @property
    def tolerance(self):
        """Rank / zero tolerance, ``2**(-precision/2)`` unless overridden."""
        with self.context():
            if self.rank_tol is not None:
                return gmpy2.mpfr(self.rank_tol)
            return gmpy2.mpfr(2) ** (-(self.precision // 2))

    def is_zero(self, x, scale=None):
        ref = self.one if scale is None else max(self.one, abs(scale))
        return abs(x) <= self.tolerance * ref

    def sqrt(self, x):
        with self.context():
            return gmpy2.sqrt(self.coerce(x))

    def to_string(self, x):
        with self.context():
            return str(gmpy2.mpfr(x))

    def to_float_backend(self, precision=None):
        if precision is None or precision == self.precision:
            return self
        return FloatBackend(precision)


EXACT = ExactBackend()


def check_same(*backends):
    first = backends[0]
    for b in backends[1:]:
        if b != first:
            raise BackendMismatch("cannot mix %r and %r" % (first, b))
    return first
