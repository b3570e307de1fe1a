"""Canonical frames and invariants of curves in the Lagrangian Grassmannian."""

from .curves import (CurveSpec, adapted_lift, load_curve, osculating_flag, regularity_report,
                     symbol_at, velocity_form)
from .diagrams import (DoubleDiagram, ReducedDiagram, YoungDiagram, build_double_diagram,
                       pair_chain, parse_diagram, phi0)
from .errors import SymcurveError
from .frames import (curvature_maps, equivalence_test, flat_curve, invariant_fingerprint,
                     normalize, random_curve, random_symplectic, reconstruct, structure_function)
from .frenet import EuclideanCurve, frenet_frame, frenet_reconstruct
from .jets import Jet, MatrixJet, jet_ode_solve
from .prolongation import (coboundary_test, normalization_space, prolongation,
                           unparametrized_prolongation)
from .scalars import EXACT, FloatBackend
from .symplectic import SymplecticModel, delta_normal, sp_check

__all__ = [
    "CurveSpec", "DoubleDiagram", "EXACT", "EuclideanCurve", "FloatBackend", "Jet", "MatrixJet",
    "ReducedDiagram", "SymcurveError", "SymplecticModel", "YoungDiagram", "adapted_lift",
    "build_double_diagram", "coboundary_test", "curvature_maps", "delta_normal",
    "equivalence_test", "flat_curve", "frenet_frame", "frenet_reconstruct",
    "invariant_fingerprint", "jet_ode_solve", "load_curve", "normalization_space", "normalize",
    "osculating_flag", "pair_chain", "parse_diagram", "phi0", "prolongation", "random_curve",
    "random_symplectic", "reconstruct", "regularity_report", "sp_check", "structure_function",
    "symbol_at", "unparametrized_prolongation", "velocity_form",
]
