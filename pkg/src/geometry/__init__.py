from src.geometry.patch_map import (PatchMap, map_point, map_jacobian, bilinear_points,
                                    bilinear_jacobian, bilinear_inverse, UNIT_SQUARE)
from src.geometry.macro import (MacroElement, MacroTriangulation, build_lshape_macro, LOCAL_EDGES,
                                CONTACT_NONE, CONTACT_VERTEX, CONTACT_EDGE, CONTACT_TWO_EDGES)

__all__ = [
    "PatchMap", "map_point", "map_jacobian", "bilinear_points", "bilinear_jacobian",
    "bilinear_inverse", "UNIT_SQUARE", "MacroElement", "MacroTriangulation", "build_lshape_macro",
    "LOCAL_EDGES", "CONTACT_NONE", "CONTACT_VERTEX", "CONTACT_EDGE", "CONTACT_TWO_EDGES",
]
