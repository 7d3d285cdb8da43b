from src.system.problem import ProblemData, example_problem, EXAMPLES
from src.system.assembly import SparseSystem, assemble, element_matrix, element_geometry
from src.system.solver import solve, HAS_CHOLMOD

__all__ = [
    "ProblemData", "example_problem", "EXAMPLES",
    "SparseSystem", "assemble", "element_matrix", "element_geometry",
    "solve", "HAS_CHOLMOD",
]
