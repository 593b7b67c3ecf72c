"""Reconstruction of local stray fields from graph-state stabilizer statistics."""

__version__ = "0.1.0"

from .channel import FieldConfig, LogicalBasis, apply_depolarizing, delta_p_general, delta_p_promise, delta_p_rotated
from .errors import DegenerateRate, EmptyCandidateSet, NumericalError, SingularSystem, StabfieldError
from .graphs import Axis, Graph, build_graph, closed_chain, generate, ghz_complete, ghz_star, lattice, open_chain, promise_matrix
from .reconstruct import reconstruct_fields
from .simulator import closed_form_is_exact, sample_syndromes, statevector_delta_p
from .spectra import solvability_report

__all__ = [
    "Axis",
    "DegenerateRate",
    "EmptyCandidateSet",
    "FieldConfig",
    "Graph",
    "LogicalBasis",
    "NumericalError",
    "SingularSystem",
    "StabfieldError",
    "apply_depolarizing",
    "build_graph",
    "closed_chain",
    "closed_form_is_exact",
    "delta_p_general",
    "delta_p_promise",
    "delta_p_rotated",
    "generate",
    "ghz_complete",
    "ghz_star",
    "lattice",
    "open_chain",
    "promise_matrix",
    "reconstruct_fields",
    "sample_syndromes",
    "solvability_report",
    "statevector_delta_p",
]
