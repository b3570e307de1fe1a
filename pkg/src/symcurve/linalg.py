"""Linear algebra over the two scalar backends.

Dense matrices are numpy object arrays whose entries are backend scalars.
Exact subspace work (kernels, spans, preimages) goes through ``Echelon``, an
incremental reduced row echelon form over sparse rational vectors. Numerical
rank decisions use singular values computed by mpmath.
"""

import gmpy2
import mpmath
import numpy as np

from .errors import PrecisionExhausted, RankDeficientInput, ShapeMismatch
from .scalars import EXACT


def zeros(rows, cols, backend):
    return np.full((rows, cols), backend.zero, dtype=object)


def identity(n, backend):
    out = zeros(n, n, backend)
    for i in range(n):
        out[i, i] = backend.one
    return out


def coerce_matrix(M, backend):
    M = np.asarray(M, dtype=object)
    out = np.empty(M.shape, dtype=object)
    with backend.context():
        for idx, x in np.ndenumerate(M):
            out[idx] = backend.coerce(x)
    return out


def max_abs(M):
    M = np.asarray(M, dtype=object)
    if M.size == 0:
        return 0
    return max(abs(x) for x in M.flat)


def is_zero_matrix(M, backend, scale=None):
    if backend.kind == "exact":
        return all(x == 0 for x in np.asarray(M, dtype=object).flat)
    return backend.is_zero(max_abs(M), scale)


# ---------------------------------------------------------------------------
# dense elimination (both backends)


def _pivot_row(A, col, start, backend):
    best, best_val = None, None
    for r in range(start, A.shape[0]):
        x = A[r, col]
        if backend.kind == "exact":
            if x != 0:
                return r
        else:
            if best_val is None or abs(x) > best_val:
                best, best_val = r, abs(x)
    if backend.kind == "float" and best_val is not None and best_val > 0:
        return best
    return None


def solve(A, B, backend):
    """Solve ``A X = B`` for square invertible ``A``."""
    A = np.array(A, dtype=object)
    B = np.array(B, dtype=object)
    vector = B.ndim == 1
    if vector:
        B = B.reshape(-1, 1)
    n = A.shape[0]
    if A.shape != (n, n) or B.shape[0] != n:
        raise ShapeMismatch("solve needs a square system")
    scale = max_abs(A) if n else 0
    with backend.context():
        M = np.concatenate([A, B], axis=1)
        for col in range(n):
            piv = _pivot_row(M, col, col, backend)
            if piv is None or (backend.kind == "float" and backend.is_zero(M[piv, col], scale)):
                raise RankDeficientInput("singular matrix in solve")
            if piv != col:
                M[[col, piv]] = M[[piv, col]]
            inv = backend.one / M[col, col]
            M[col] = M[col] * inv
            for r in range(n):
                if r != col and M[r, col] != 0:
                    M[r] = M[r] - M[r, col] * M[col]
        X = M[:, n:]
    return X.reshape(-1) if vector else X


def inverse(A, backend):
    return solve(A, identity(A.shape[0], backend), backend)


def to_mpmath(M, backend):
    """Convert to an mpmath matrix exactly (binary floats and rationals)."""
    M = np.asarray(M, dtype=object)
    prec = backend.precision or 256
    with mpmath.workprec(prec):
        out = mpmath.matrix(M.shape[0], M.shape[1])
        for (i, j), x in np.ndenumerate(M):
            if backend.kind == "exact":
                out[i, j] = mpmath.mpf(int(x.numerator)) / int(x.denominator)
            else:
                num, den = x.as_integer_ratio()
                out[i, j] = mpmath.mpf(int(num)) / int(den)
    return out


def singular_values(M, backend):
    M = np.asarray(M, dtype=object)
    if M.size == 0:
        return []
    prec = backend.precision or 256
    with mpmath.workprec(prec):
        S = mpmath.svd_r(to_mpmath(M, backend), compute_uv=False)
        return sorted((S[i] for i in range(S.rows)), reverse=True)


def numerical_rank(M, backend, tol=None, band=None):
    """Rank by singular-value thresholding relative to the largest value.

    Values below ``tol`` count as zero and values above ``band`` as nonzero.
    Anything in between means the decision is not supported by the working
    precision and raises PrecisionExhausted.
    """
    if backend.kind == "exact":
        return exact_rank(M)
    M = np.asarray(M, dtype=object)
    if M.size == 0:
        return 0
    prec = backend.precision
    if tol is None:
        tol = mpmath.mpf(str(backend.tolerance))
    if band is None:
        band = max(mpmath.mpf(2) ** (-(prec // 4)), tol)
    sv = singular_values(M, backend)
    top = sv[0]
    if top == 0:
        return 0
    rank = 0
    for s in sv:
        rel = s / top
        if rel > band:
            rank += 1
        elif rel > tol:
            raise PrecisionExhausted(
                "singular value ratio %s lies inside the tolerance band" % mpmath.nstr(rel, 5))
    return rank


# ---------------------------------------------------------------------------
# exact sparse echelon form


class Echelon:
    """Reduced row echelon basis of a subspace of Q^n, built incrementally.

    Each stored row remembers which inserted vectors it is a combination of,
    so ``express`` can write a member of the span in terms of the inputs.
    """

    def __init__(self, n):
        self.n = n
        self.rows = {}
        self.combos = {}
        self.count = 0

    def __len__(self):
        return len(self.rows)

    @property
    def dim(self):
        return len(self.rows)

    def _reduce(self, vec, combo=None):
        v = dict(vec)
        c = dict(combo) if combo is not None else None
        for p in sorted(set(v) & set(self.rows)):
            coef = v.get(p)
            if not coef:
                continue
            row = self.rows[p]
            for k, x in row.items():
                val = v.get(k, 0) - coef * x
                if val:
                    v[k] = val
                else:
                    v.pop(k, None)
            if c is not None:
                for k, x in self.combos[p].items():
                    val = c.get(k, 0) - coef * x
                    if val:
                        c[k] = val
                    else:
                        c.pop(k, None)
        return v, c

    def add(self, vec):
        """Insert a sparse vector (dict index->mpq). Returns True if it was new."""
        tag = self.count
        self.count += 1
        v, c = self._reduce(vec, {tag: gmpy2.mpq(1)})
        if not v:
            return False
        p = min(v)
        inv = 1 / gmpy2.mpq(v[p])
        v = {k: x * inv for k, x in v.items()}
        c = {k: x * inv for k, x in c.items()}
        for q, row in self.rows.items():
            coef = row.get(p)
            if coef:
                for k, x in v.items():
                    val = row.get(k, 0) - coef * x
                    if val:
                        row[k] = val
                    else:
                        row.pop(k, None)
                cq = self.combos[q]
                for k, x in c.items():
                    val = cq.get(k, 0) - coef * x
                    if val:
                        cq[k] = val
                    else:
                        cq.pop(k, None)
        self.rows[p] = v
        self.combos[p] = c
        return True

    def contains(self, vec):
        v, _ = self._reduce(vec)
        return not v

    def residual(self, vec):
        return self._reduce(vec)[0]

    def express(self, vec):
        """Coefficients (by insertion index) writing ``vec`` in the span, or None."""
        v, _ = self._reduce(vec)
        if v:
            return None
        out = {}
        # in reduced form the coefficient of the row with pivot p is vec[p]
        for p in self.rows:
            coef = vec.get(p, 0)
            if coef:
                for k, x in self.combos[p].items():
                    val = out.get(k, 0) + coef * x
                    if val:
                        out[k] = val
                    else:
                        out.pop(k, None)
        return out

    def basis(self):
        return [dict(self.rows[p]) for p in sorted(self.rows)]


def sparse(vec):
    """Dense sequence -> sparse dict (exact nonzeros only)."""
    return {i: gmpy2.mpq(x) for i, x in enumerate(vec) if x != 0}


def densify(vec, n, backend=EXACT):
    out = [backend.zero] * n
    for i, x in vec.items():
        out[i] = x
    return out


def span_dim(vectors, n):
    E = Echelon(n)
    for v in vectors:
        E.add(v)
    return E.dim


def exact_rank(M):
    M = np.asarray(M, dtype=object)
    if M.size == 0:
        return 0
    return span_dim([sparse(row) for row in M], M.shape[1])


def nullspace(M, n_cols=None):
    """Basis of the kernel of a matrix given as a list of sparse rows.

    Returns sparse vectors in Q^{n_cols}; the basis is the standard one
    attached to the free columns of the reduced row echelon form.
    """
    if n_cols is None:
        raise ShapeMismatch("nullspace needs the column count")
    E = Echelon(n_cols)
    for row in M:
        E.add(row)
    pivots = set(E.rows)
    out = []
    for free in range(n_cols):
        if free in pivots:
            continue
        v = {free: gmpy2.mpq(1)}
        for p, row in E.rows.items():
            x = row.get(free)
            if x:
                v[p] = -x
        out.append(v)
    return out


def linear_map_kernel(images, n_domain):
    """Kernel of the map sending domain basis vector i to ``images[i]`` (sparse)."""
    rows = {}
    for i, img in enumerate(images):
        for k, x in img.items():
            rows.setdefault(k, {})[i] = x
    return nullspace(list(rows.values()), n_domain)


def intersect(basis_a, basis_b, n):
    """Intersection of two spans (lists of sparse vectors) as a sparse basis."""
    # solve sum x_i a_i = sum y_j b_j
    images = list(basis_a) + [{k: -x for k, x in b.items()} for b in basis_b]
    kern = linear_map_kernel(images, len(images))
    out = Echelon(n)
    for z in kern:
        v = {}
        for i, coef in z.items():
            if i < len(basis_a):
                for k, x in basis_a[i].items():
                    val = v.get(k, 0) + coef * x
                    if val:
                        v[k] = val
                    else:
                        v.pop(k, None)
        out.add(v)
    return out.basis()


def float_nullspace(rows, backend, tol=None, band=None):
    """Kernel basis (as columns) of a float matrix via the SVD."""
    A = np.asarray(rows, dtype=object)
    n = A.shape[1]
    rank = numerical_rank(A, backend, tol, band) if A.size else 0
    prec = backend.precision
    with mpmath.workprec(prec):
        if A.shape[0] < n:
            pad = np.concatenate([A, zeros(n - A.shape[0], n, backend)], axis=0)
        else:
            pad = A
        _, _, V = mpmath.svd_r(to_mpmath(pad, backend), full_matrices=True)
        out = zeros(n, n - rank, backend)
        with backend.context():
            for j in range(n - rank):
                for i in range(n):
                    out[i, j] = backend.coerce(_mpf_to_mpq(V[rank + j, i]))
    return out


def _mpf_to_mpq(x):
    p, q = mpmath.libmp.to_rational(mpmath.mpf(x)._mpf_)
    return gmpy2.mpq(int(p), int(q))
