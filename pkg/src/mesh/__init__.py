from .params import MeshParams, compute_kappa
from .patterns import (
    PatternMesh, build_pattern, corner_cells, expected_cell_count, cell_aspect_ratio, quad_area,
    TRIVIAL, BOUNDARY_LAYER, TENSOR_PRODUCT, MIXED, GEOMETRIC, PATTERN_KINDS,
    LARGE, ANISO, CORNER_LAYER, REGION_TAGS,
)
from .generator import (
    Element, Mesh, generate_mesh, mesh_from_patterns, assemble_mesh, default_assignment,
    load_assignment, validate_assignment, merge_vertices, DEFAULT_PATTERNS_PATH,
)
from .conformity import ConformityReport, check_conformity, omega0_distance
from .refine import build_reference_mesh, closure_marks

__all__ = [
    'MeshParams', 'compute_kappa',
    'PatternMesh', 'build_pattern', 'corner_cells', 'expected_cell_count', 'cell_aspect_ratio', 'quad_area',
    'TRIVIAL', 'BOUNDARY_LAYER', 'TENSOR_PRODUCT', 'MIXED', 'GEOMETRIC', 'PATTERN_KINDS',
    'LARGE', 'ANISO', 'CORNER_LAYER', 'REGION_TAGS',
    'Element', 'Mesh', 'generate_mesh', 'mesh_from_patterns', 'assemble_mesh', 'default_assignment',
    'load_assignment', 'validate_assignment', 'merge_vertices', 'DEFAULT_PATTERNS_PATH',
    'ConformityReport', 'check_conformity', 'omega0_distance',
    'build_reference_mesh', 'closure_marks',
]
