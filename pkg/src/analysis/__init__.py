from src.analysis.transfer import (CellLocator, space_evaluator, transfer_evaluator, callable_evaluator,
                                   difference, same_macro, mesh_signature)
from src.analysis.norms import NormSet, function_norms, discrete_norms
from src.analysis.reference import ReferenceSolution, build_reference, reference_key
from src.analysis.errors import ErrorReport, error_norms, CSV_COLUMNS
from src.analysis.projection import Projection, weighted_l2_projection

__all__ = [
    "CellLocator", "space_evaluator", "transfer_evaluator", "callable_evaluator", "difference",
    "same_macro", "mesh_signature", "NormSet", "function_norms", "discrete_norms",
    "ReferenceSolution", "build_reference", "reference_key",
    "ErrorReport", "error_norms", "CSV_COLUMNS", "Projection", "weighted_l2_projection",
]
