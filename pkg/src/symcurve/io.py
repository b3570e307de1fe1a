"""JSON serialization and report rendering.

Numbers are written as strings: rationals as "p/q", floats in full
precision. Reports are rendered with sorted keys so that equal inputs give
byte-identical output.
"""

import json

import numpy as np

from . import linalg
from .diagrams import ReducedDiagram
from .errors import BadFormat
from .jets import MatrixJet
from .scalars import EXACT, format_rational, parse_rational

SCHEMA = "symcurve/1"


def scalar_str(x, backend=EXACT):
    if backend.kind == "exact":
        return format_rational(x)
    return backend.to_string(x)


def matrix_json(M, backend=EXACT):
    M = np.asarray(M, dtype=object)
    return [[scalar_str(x, backend) for x in row] for row in M]


def jet_json(J):
    return {"t0": scalar_str(J.t0, J.backend), "order": J.order,
            "coefficients": [matrix_json(c, J.backend) for c in J.coeffs]}


def read_matrix(rows):
    try:
        return np.array([[parse_rational(str(x)) for x in row] for row in rows], dtype=object)
    except Exception:
        raise BadFormat("matrix entries must be rational strings")


def load_structure(data):
    """Read a structure-function file: exact coefficient matrices plus an optional initial frame."""
    if isinstance(data, str):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as exc:
            raise BadFormat("structure function is not valid JSON: %s" % exc)
    if not isinstance(data, dict) or "coefficients" not in data:
        raise BadFormat("structure-function JSON needs 'coefficients'")
    coeffs = [read_matrix(c) for c in data["coefficients"]]
    if not coeffs:
        raise BadFormat("at least one coefficient matrix is required")
    n = coeffs[0].shape[0]
    if any(c.shape != (n, n) for c in coeffs):
        raise BadFormat("coefficient matrices must be square and of equal size")
    t0 = parse_rational(str(data.get("t0", "0")))
    C = MatrixJet(coeffs, EXACT, t0, coerce=False)
    initial = read_matrix(data["initial"]) if "initial" in data else linalg.identity(n, EXACT)
    if initial.shape != (n, n):
        raise BadFormat("initial frame has the wrong shape")
    return C, initial


def structure_json(C, initial=None):
    out = {"schema": SCHEMA, "kind": "structure_function", "dim": C.shape[0],
           "t0": scalar_str(C.t0, C.backend),
           "coefficients": [matrix_json(c, C.backend) for c in C.coeffs]}
    if initial is not None:
        out["initial"] = matrix_json(initial, C.backend)
    return out


def convention_audit(reduced=None):
    """Sign conventions of the diagram model and the monotonicity class they generate.

    The Darboux pairing, the sign function and the normal-form symbol fix the
    sign of sigma(delta x, x) on the degree-0 part. The audit records it and
    checks it on the flat curve.
    """
    from .curves import classify_form, velocity_form
    from .frames import flat_curve
    from .prolongation import graded_algebra

    if reduced is None:
        reduced = ReducedDiagram([(1, 1)])
    model = graded_algebra(reduced).model
    sign = model.definiteness_sign
    kind, _ = classify_form(velocity_form(flat_curve(reduced, jet_order=2)), EXACT)
    expected = "nonincreasing" if sign < 0 else "nondecreasing"
    return {
        "diagram": reduced.label(),
        "darboux_pairing": "sigma(e_m(a), e_a) = +1 for a on the positive side",
        "definiteness_sign": sign,
        "flat_curve_monotone": kind,
        "consistent": kind == expected,
        "nondecreasing_inputs": "reflected by f -> -f before normalization",
    }


def backend_block(backend):
    if backend.kind == "exact":
        return {"backend": "exact", "precision_bits": None, "rank_tolerance": "0"}
    return {"backend": "float", "precision_bits": backend.precision,
            "rank_tolerance": backend.to_string(backend.tolerance)}


def _text_lines(value, prefix=""):
    if isinstance(value, dict):
        for k in sorted(value, key=str):
            yield from _text_lines(value[k], "%s%s." % (prefix, k))
    elif isinstance(value, list) and value and all(isinstance(v, (dict, list)) for v in value):
        for i, v in enumerate(value):
            yield from _text_lines(v, "%s%d." % (prefix, i))
    else:
        yield "%s %s" % (prefix.rstrip("."), json.dumps(value, sort_keys=True))


def render(report, fmt="json"):
    if fmt == "json":
        return json.dumps(report, sort_keys=True, indent=2) + "\n"
    if fmt == "text":
        return "\n".join(_text_lines(report)) + "\n"
    raise BadFormat("unknown output format %r" % fmt)
