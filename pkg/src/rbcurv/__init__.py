"""Curvature data of explicit Hermitian metrics, sign certification of the
real bisectional quadratic form over the PSD cone, and Schwarz-lemma
verification at desk scale."""

__version__ = "0.1.0"

from . import certify, curvature, linalg, metric, sampling, schwarz, wirtinger
from .certify import Budget, PsdDirection, Region, Verdict, certify_sign, scan
from .curvature import (ChernTensor, FrameWeights, RicciTriple, at_point,
                        chern_tensor, hsc, quad_form, rbc_value, ricci,
                        symmetry_report, to_frame, torsion)
from .linalg import UnitaryFrame, eigh, invert_pd, random_unitary, unitary_frame
from .metric import MetricJet, MetricSpec, catalog, jet, validate
from .schwarz import MapSpec, SchwarzBounds, bochner_residual, map_jet, trace_u
from .wirtinger import Expr, fd_jet2, jet2, parse

__all__ = [
    "__version__",
    "Budget", "ChernTensor", "Expr", "FrameWeights", "MapSpec", "MetricJet",
    "MetricSpec", "PsdDirection", "Region", "RicciTriple", "SchwarzBounds",
    "UnitaryFrame", "Verdict",
    "at_point", "bochner_residual", "catalog", "certify", "certify_sign",
    "chern_tensor", "curvature", "eigh", "fd_jet2", "hsc", "invert_pd",
    "jet", "jet2", "linalg", "map_jet", "metric", "parse", "quad_form",
    "random_unitary", "rbc_value", "ricci", "sampling", "scan", "schwarz",
    "symmetry_report", "to_frame", "torsion", "trace_u", "unitary_frame",
    "validate", "wirtinger",
]
