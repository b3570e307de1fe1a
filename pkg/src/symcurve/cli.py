"""Command-line front end.

Exit status: 0 on success, 2 for an "inequivalent" verdict or a failed
audit, 1 for analysis errors, 64 for usage errors and 66 for unreadable
input files.
"""

import json
import os
import random
from concurrent.futures import ProcessPoolExecutor

import click

from . import io
from .curves import (curve_diagram, load_curve, osculating_flag, regularity_report, symbol_at)
from .diagrams import parse_diagram, reduced_diagrams_up_to
from .errors import SymcurveError
from .frames import (curvature_maps, default_jet_order, equivalence_test, flat_curve,
                     invariant_fingerprint, normalize, random_curve, reconstruct,
                     reconstruct_sampled)
from .frenet import frenet_frame, load_euclidean_curve
from .prolongation import (complementarity_audit, diagram_audit,
                           normalization_space, prolongation, unparametrized_prolongation)
from .scalars import EXACT, FloatBackend, default_precision

EXIT_VERDICT = 2
EXIT_USAGE = 64
EXIT_FILE = 66


class InputFileError(Exception):
    pass


def _read_json(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise InputFileError("cannot read %s: %s" % (path, exc.strerror))
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SymcurveError("%s is not valid JSON: %s" % (path, exc))


def _diagram_arg(text):
    if os.path.exists(text):
        return parse_diagram(_read_json(text))
    return parse_diagram(text)


def common_options(fn):
    opts = [
        click.option("--precision-bits", type=int, default=None,
                     help="Float precision in bits (default 192 or $SYMCURVE_PRECISION)."),
        click.option("--jet-order", type=int, default=None, help="Jet order K used for curves."),
        click.option("--rank-tol", type=str, default=None, help="Override the rank tolerance."),
        click.option("--seed", type=int, default=0, show_default=True),
        click.option("--format", "fmt", type=click.Choice(["json", "text"]), default="json",
                     show_default=True),
        click.option("--out", type=click.Path(dir_okay=False), default=None,
                     help="Write the report here instead of stdout."),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


class Config:
    def __init__(self, precision_bits, jet_order, rank_tol, seed, fmt, out):
        precision = precision_bits or default_precision()
        self.backend = FloatBackend(precision, rank_tol)
        self.jet_order = jet_order
        self.seed = seed
        self.fmt = fmt
        self.out = out


def _emit(cfg, report, reduced=None, backend=None):
    report = dict(report)
    report["schema"] = io.SCHEMA
    report["convention_audit"] = io.convention_audit(reduced)
    report.update(io.backend_block(backend or cfg.backend))
    text = io.render(report, cfg.fmt)
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


def _emit_raw(cfg, data):
    text = json.dumps(data, sort_keys=True, indent=2) + "\n"
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


@click.group()
def cli():
    """Invariants of curves in the Lagrangian Grassmannian."""


@cli.command()
@click.option("--curve", "curve_path", required=True)
@common_options
def analyze(curve_path, **kw):
    """Regularity, osculating flag and Young diagram of a curve."""
    cfg = Config(**kw)
    curve = load_curve(_read_json(curve_path), cfg.jet_order)
    rep = regularity_report(curve, seed=cfg.seed)
    out = {
        "command": "analyze",
        "m": curve.m,
        "equiregular": rep.equiregular,
        "equiregular_is_probabilistic": rep.probabilistic,
        "sampled_flag_dimensions": rep.sampled_dims,
        "ample": rep.ample,
        "ample_p": rep.ample_p,
        "monotone": rep.monotone,
        "velocity_eigenvalues": rep.eigenvalues,
        "young_columns": list(rep.young_diagram.column_counts) if rep.young_diagram else None,
    }
    reduced = None
    if rep.young_diagram is not None:
        reduced, _ = curve_diagram(curve)
        out["diagram"] = reduced.to_json()
        flag = osculating_flag(curve, cfg.backend)
        out["osculating_dimensions"] = {str(j): d for j, (_, d) in sorted(flag.items())}
    _emit(cfg, out, reduced)
    return 0


@cli.command()
@click.option("--curve", "curve_path", required=True)
@click.option("--t", "t", default=None, help="Parameter value (rational string).")
@common_options
def symbol(curve_path, t, **kw):
    """Symbol of the curve and its conjugator to the normal form."""
    cfg = Config(**kw)
    curve = load_curve(_read_json(curve_path), cfg.jet_order)
    res = symbol_at(curve, t, cfg.backend)
    be = cfg.backend
    _emit(cfg, {
        "command": "symbol",
        "diagram": res.reduced.to_json(),
        "symbol": io.matrix_json(res.symbol, be),
        "conjugator": io.matrix_json(res.conjugator, be),
        "commutation_defect": be.to_string(res.commutation_defect),
        "symplectic_defect": be.to_string(res.symplectic_defect),
        "grading_defect": be.to_string(res.grading_defect),
    }, res.reduced)
    return 0


@cli.command(name="prolongation")
@click.option("--diagram", "diagram", required=True, help="Diagram JSON or a file containing it.")
@common_options
def prolongation_cmd(diagram, **kw):
    """Universal algebraic prolongation of the normal-form symbol."""
    cfg = Config(**kw)
    reduced = _diagram_arg(diagram)
    U = prolongation(reduced)
    ut = unparametrized_prolongation(reduced)
    _emit(cfg, {
        "command": "prolongation",
        "diagram": reduced.to_json(),
        "dim_u": U.dim(),
        "dims_by_degree": {str(k): v for k, v in sorted(U.dims().items())},
        "closed_form_dim": sum(r * (r - 1) // 2 for r in reduced.multiplicities),
        "dim_u_unparametrized": ut.dim(),
    }, reduced, EXACT)
    return 0


@cli.command(name="normalization-space")
@click.option("--diagram", "diagram", required=True)
@click.option("--phi", type=click.Choice(["phi0", "random"]), default="phi0", show_default=True)
@click.option("--ad-samples", type=int, default=0, show_default=True)
@common_options
def normalization_space_cmd(diagram, phi, ad_samples, **kw):
    """Normalization space N and its complementarity audit."""
    cfg = Config(**kw)
    reduced = _diagram_arg(diagram)
    choice = "phi0" if phi == "phi0" else random.Random(cfg.seed)
    N = normalization_space(reduced, choice)
    audit = complementarity_audit(N, ad_samples, random.Random(cfg.seed))
    _emit(cfg, {
        "command": "normalization-space",
        "diagram": reduced.to_json(),
        "assignment": {"%sx%s" % (b.key(), r.key()): "%sx%s" % (p[0].key(), p[1].key())
                       for (b, r), p in sorted(N.assignment.items())},
        "dims_by_degree": {str(k): v for k, v in N.dims().items()},
        "audit_ok": audit["ok"],
        "audit_rows": [r._asdict() for r in audit["rows"]],
        "ad_failures": audit["ad_failures"],
    }, reduced, EXACT)
    return 0 if audit["ok"] else EXIT_VERDICT


def _result_report(res):
    be = res.backend
    fp = invariant_fingerprint(res)
    free = {str(k): [[be.to_string(x) for x in v] for v in seq] for k, seq in sorted(res.free.items())}
    maps = {k: [io.matrix_json(B, be) for B in blocks] for k, blocks in sorted(curvature_maps(res).items())}
    if fp.kind == "complete":
        fvals = {str(k): [[be.to_string(x) for x in v] for v in seq] for k, seq in sorted(fp.values.items())}
    else:
        fvals = [be.to_string(x) for x in fp.values]
    return {
        "diagram": res.reduced.to_json(),
        "jet_order": res.jet_order,
        "valid_orders": {str(k): v for k, v in sorted(res.orders.items())},
        "reflected": res.reflected,
        "free_coordinates": free,
        "curvature_maps": maps,
        "curvature_map_keys": "(row_b,c_b)x(row_a,c_a) is the block mapping E_a into E_b",
        "gauge_trace": [{"degree": s.degree, "residual_gauge_dim": s.residual_gauge_dim,
                         "correction": be.to_string(s.correction), "residual": be.to_string(s.residual),
                         "order": s.order} for s in res.trace],
        "fingerprint": {"kind": fp.kind, "values": fvals},
    }


@cli.command(name="normalize")
@click.option("--curve", "curve_path", required=True)
@common_options
def normalize_cmd(curve_path, **kw):
    """Normal frame, curvature maps and gauge trace of a curve."""
    cfg = Config(**kw)
    curve = load_curve(_read_json(curve_path))
    res = normalize(curve, jet_order=cfg.jet_order, backend=cfg.backend)
    out = {"command": "normalize"}
    out.update(_result_report(res))
    _emit(cfg, out, res.reduced)
    return 0


@cli.command()
@click.option("--curve", "curve_path", required=True)
@common_options
def invariants(curve_path, **kw):
    """Invariant fingerprint of a curve."""
    cfg = Config(**kw)
    curve = load_curve(_read_json(curve_path))
    res = normalize(curve, jet_order=cfg.jet_order, backend=cfg.backend)
    rep = _result_report(res)
    _emit(cfg, {"command": "invariants", "diagram": rep["diagram"], "fingerprint": rep["fingerprint"],
                "valid_orders": rep["valid_orders"], "reflected": rep["reflected"]}, res.reduced)
    return 0


@cli.command()
@click.argument("first")
@click.argument("second")
@common_options
def equivalent(first, second, **kw):
    """Decide whether two curves differ by a symplectic transformation."""
    cfg = Config(**kw)
    c1 = load_curve(_read_json(first))
    c2 = load_curve(_read_json(second))
    v = equivalence_test(c1, c2, cfg.jet_order, cfg.backend)
    reduced, _ = curve_diagram(c1)
    _emit(cfg, {"command": "equivalent", "verdict": v.verdict, "reason": v.reason,
                "distance": None if v.distance is None else cfg.backend.to_string(v.distance),
                "complete_decision": v.complete}, reduced)
    return EXIT_VERDICT if v.verdict == "inequivalent" else 0


@cli.command()
@click.option("--diagram", "diagram", required=True)
@common_options
def flat(diagram, **kw):
    """Write the flat curve of a diagram in the curve format."""
    cfg = Config(**kw)
    reduced = _diagram_arg(diagram)
    K = cfg.jet_order or default_jet_order(reduced)
    curve = flat_curve(reduced, K)
    data = curve.to_json()
    data["name"] = "flat %s" % reduced.label()
    _emit_raw(cfg, data)
    return 0


@cli.command(name="random-curve")
@click.option("--diagram", "diagram", required=True)
@click.option("--poly-degree", type=int, default=2, show_default=True)
@common_options
def random_curve_cmd(diagram, poly_degree, **kw):
    """Write a curve with a random polynomial normal structure function."""
    cfg = Config(**kw)
    reduced = _diagram_arg(diagram)
    gen = random_curve(reduced, cfg.seed, poly_degree, cfg.jet_order)
    data = gen.curve.to_json()
    data["name"] = "random %s seed %d" % (reduced.label(), cfg.seed)
    _emit_raw(cfg, data)
    return 0


@cli.command(name="reconstruct")
@click.option("--structure", "structure_path", required=True)
@click.option("--mode", type=click.Choice(["jet", "sampled"]), default="jet", show_default=True)
@click.option("--t1", default="1", show_default=True, help="End parameter for sampled mode.")
@click.option("--steps", type=int, default=100, show_default=True)
@common_options
def reconstruct_cmd(structure_path, mode, t1, steps, **kw):
    """Integrate Gamma' = Gamma C from a structure-function file."""
    cfg = Config(**kw)
    C, initial = io.load_structure(_read_json(structure_path))
    if mode == "jet":
        G = reconstruct(C, initial)
        _emit(cfg, {"command": "reconstruct", "mode": "jet", "frame": io.jet_json(G)}, None, EXACT)
        return 0
    from .curves import standard_J
    J = None
    if C.shape[0] % 2 == 0:
        J = initial.T.dot(standard_J(C.shape[0] // 2)).dot(initial)
    path = reconstruct_sampled(C, initial, C.t0, t1, steps, J, cfg.backend)
    be = cfg.backend
    _emit(cfg, {"command": "reconstruct", "mode": "sampled",
                "times": [be.to_string(t) for t in path.times],
                "final_frame": io.matrix_json(path.frames[-1], be),
                "symplectic_defects": [be.to_string(d) for d in path.defects]})
    return 0


@cli.command()
@click.option("--curve", "curve_path", required=True)
@common_options
def frenet(curve_path, **kw):
    """Frenet frame and curvatures of a Euclidean curve."""
    cfg = Config(**kw)
    curve = load_euclidean_curve(_read_json(curve_path))
    res = frenet_frame(curve, backend=cfg.backend)
    be = cfg.backend
    _emit(cfg, {"command": "frenet", "n": curve.n, "reparametrized": res.reparametrized,
                "order": res.order,
                "curvatures": [[be.to_string(x) for x in k.coeffs] for k in res.curvatures],
                "structure_function": io.jet_json(res.R)})
    return 0


@cli.command()
@click.option("--max-boxes", type=int, default=6, show_default=True)
@click.option("--jobs", type=int, default=1, show_default=True)
@common_options
def audit(max_boxes, jobs, **kw):
    """Exact algebra audit over every diagram with at most --max-boxes boxes."""
    cfg = Config(**kw)
    diagrams = []
    for d in reduced_diagrams_up_to(max_boxes):
        if d not in diagrams:
            diagrams.append(d)
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            rows = list(pool.map(diagram_audit, diagrams))
    else:
        rows = [diagram_audit(d) for d in diagrams]
    ok = all(r["ok"] for r in rows)
    _emit(cfg, {"command": "audit", "max_boxes": max_boxes, "diagrams": rows, "ok": ok}, None, EXACT)
    return 0 if ok else EXIT_VERDICT


def main(argv=None):
    try:
        rv = cli.main(args=argv, prog_name="symcurve", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return 1
    except click.UsageError as exc:
        exc.show()
        return EXIT_USAGE
    except InputFileError as exc:
        click.echo("error: %s" % exc, err=True)
        return EXIT_FILE
    except SymcurveError as exc:
        click.echo("error: %s: %s" % (type(exc).__name__, exc), err=True)
        return exc.exit_code
    if isinstance(rv, int):
        return rv
    return 0


