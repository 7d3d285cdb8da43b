from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Set, Tuple
import json
import logging

import numpy as np

from src.core.exceptions import GeometryError
from src.geometry.patch_map import PatchMap

logger = logging.getLogger(__name__)

# Local edges of the reference square: bottom, right, top, left.
# Each edge is given by its two local vertex indices and its reference endpoints.
LOCAL_EDGES = ((0, 1), (1, 2), (3, 2), (0, 3))
LOCAL_EDGE_ENDPOINTS = (
    ((0.0, 0.0), (1.0, 0.0)),
    ((1.0, 0.0), (1.0, 1.0)),
    ((0.0, 1.0), (1.0, 1.0)),
    ((0.0, 0.0), (0.0, 1.0)),
)

CONTACT_NONE = "none"
CONTACT_VERTEX = "vertex"
CONTACT_EDGE = "edge"
CONTACT_TWO_EDGES = "two_edges"


@dataclass(frozen=True, eq=False)
class MacroElement:
    """
    One quadrilateral of the macro-triangulation

    vertices are global vertex indices in the order F(0,0), F(1,0), F(1,1), F(0,1).
    """
    index: int
    vertices: Tuple[int, int, int, int]
    patch_map: PatchMap
    boundary_edges: Tuple[int, ...]
    boundary_vertices: Tuple[int, ...]

    @property
    def contact(self) -> str:
        n_edges = len(self.boundary_edges)
        if n_edges == 2:
            return CONTACT_TWO_EDGES
        if n_edges == 1:
            return CONTACT_EDGE
        if len(self.boundary_vertices) == 1:
            return CONTACT_VERTEX
        return CONTACT_NONE


class MacroTriangulation:
    """
    Fixed coarse decomposition of a polygonal domain into mapped quadrilaterals
    """

    def __init__(self, vertices: np.ndarray, macro_elements: List[MacroElement],
                 boundary_segments: Set[Tuple[int, int]], domain_corners: List[int]):
        self.vertices = np.asarray(vertices, dtype=float)
        self.macro_elements = list(macro_elements)
        self.boundary_segments = set(boundary_segments)
        self.domain_corners = list(domain_corners)

    def __len__(self) -> int:
        return len(self.macro_elements)

    @classmethod
    def from_quadrilaterals(cls, vertices, quads: Sequence[Sequence[int]]) -> "MacroTriangulation":
        """
        Builds a macro-triangulation from counter-clockwise quadrilaterals with straight edges

        Steps:
        1. Find boundary segments (edges owned by exactly one quadrilateral)
        2. Find domain corners (boundary vertices where the boundary turns)
        3. Rotate every quadrilateral's vertex list so that its reference frame meets
           the orientation rules (boundary edge at (0,1)x{0}, corner at (0,0))
        4. Attach affine maps (bilinear for non-parallelograms)
        """
        vertices = np.asarray(vertices, dtype=float)
        owners: Dict[Tuple[int, int], int] = {}
        for quad in quads:
            for a, b in zip(quad, list(quad[1:]) + [quad[0]]):
                key = (min(a, b), max(a, b))
                owners[key] = owners.get(key, 0) + 1
        boundary_segments = {edge for edge, count in owners.items() if count == 1}
        domain_corners = _find_corners(vertices, boundary_segments)

        macro_elements = []
        for index, quad in enumerate(quads):
            ordered = _orient(list(quad), boundary_segments)
            patch_map = PatchMap.from_corners(vertices[list(ordered)])
            macro_elements.append(_make_element(index, ordered, patch_map, boundary_segments))

        triangulation = cls(vertices, macro_elements, boundary_segments, domain_corners)
        logger.info(f"Macro-triangulation built: {len(macro_elements)} elements, "
                    f"{len(boundary_segments)} boundary segments, {len(domain_corners)} corners")
        return triangulation

    def boundary_vertex_set(self) -> Set[int]:
        return {v for segment in self.boundary_segments for v in segment}

    def area(self, order: int = 4) -> float:
        return float(sum(macro.patch_map.area(order) for macro in self.macro_elements))

    def layer_scale(self, samples: int = 3) -> float:
        """
        Smallest stretching factor of the macro maps that touch the boundary

        A reference strip of width kappa along a boundary edge is at least
        layer_scale() * kappa wide in physical coordinates.
        """
        grid = np.linspace(0.0, 1.0, samples)
        xi = np.array([[x, y] for x in grid for y in grid])
        scales = [
            np.linalg.svd(macro.patch_map.jacobians(xi), compute_uv=False)[:, -1].min()
            for macro in self.macro_elements if macro.contact != CONTACT_NONE
        ]
        if not scales:
            return 1.0
        return float(min(scales))

    def boundary_segment_points(self) -> np.ndarray:
        """
        Boundary segments as an array of shape (M, 2, 2)
        """
        segments = sorted(self.boundary_segments)
        return np.array([[self.vertices[a], self.vertices[b]] for a, b in segments])

    def validate(self) -> List[str]:
        """
        Checks the macro-level rules: orientation, boundary contact cases and shared edges

        Returns a list of violations (empty when valid).
        """
        violations = []
        corners = set(self.domain_corners)
        for macro in self.macro_elements:
            det = np.linalg.det(macro.patch_map.jacobians(np.array([[0, 0], [1, 0], [1, 1], [0, 1], [0.5, 0.5]])))
            if np.any(det <= 0):
                violations.append(f"macro {macro.index}: map is not orientation preserving")
            n_edges = len(macro.boundary_edges)
            n_vertices = len(macro.boundary_vertices)
            if n_edges == 0 and n_vertices > 1:
                violations.append(f"macro {macro.index}: touches the boundary in {n_vertices} isolated vertices")
            elif n_edges == 1 and n_vertices != 2:
                violations.append(f"macro {macro.index}: one boundary edge plus extra boundary vertices")
            elif n_edges == 2:
                shared = set(LOCAL_EDGES[macro.boundary_edges[0]]) & set(LOCAL_EDGES[macro.boundary_edges[1]])
                if not shared or n_vertices != 3 or macro.vertices[shared.pop()] not in corners:
                    violations.append(f"macro {macro.index}: two boundary edges not meeting at a domain corner")
            elif n_edges > 2:
                violations.append(f"macro {macro.index}: {n_edges} edges on the boundary")
            if n_edges == 1 and macro.boundary_edges != (0,):
                violations.append(f"macro {macro.index}: boundary edge is not the reference edge (0,1)x{{0}}")
            if n_edges == 2 and set(macro.boundary_edges) != {0, 3}:
                violations.append(f"macro {macro.index}: boundary edges are not the reference edges at (0,0)")
            if n_edges == 0 and n_vertices == 1 and macro.vertices[0] != macro.boundary_vertices[0]:
                violations.append(f"macro {macro.index}: boundary vertex is not the reference vertex (0,0)")
        violations.extend(self._check_shared_edges())
        return violations

    def _check_shared_edges(self) -> List[str]:
        violations = []
        incident: Dict[Tuple[int, int], List[Tuple[int, int]]] = {}
        for macro in self.macro_elements:
            for local, (a, b) in enumerate(LOCAL_EDGES):
                ga, gb = macro.vertices[a], macro.vertices[b]
                incident.setdefault((min(ga, gb), max(ga, gb)), []).append((macro.index, local))
        for key, owners in incident.items():
            if len(owners) > 2:
                violations.append(f"edge {key}: shared by {len(owners)} macro elements")
            if len(owners) != 2:
                continue
            samples = []
            for macro_index, local in owners:
                macro = self.macro_elements[macro_index]
                start, end = (np.array(p) for p in LOCAL_EDGE_ENDPOINTS[local])
                pts = macro.patch_map.points(np.array([start, 0.5 * (start + end), end]))
                samples.append(pts)
            first, second = samples
            same = np.allclose(first, second, atol=1e-13)
            flipped = np.allclose(first, second[::-1], atol=1e-13)
            if not (same or flipped):
                violations.append(f"edge {key}: incompatible parametrizations")
        return violations

    def to_dict(self) -> Dict:
        return {
            "vertices": self.vertices.tolist(),
            "macro_elements": [
                {
                    "vertices": list(macro.vertices),
                    "map": macro.patch_map.to_dict(),
                    "boundary_edges": list(macro.boundary_edges),
                }
                for macro in self.macro_elements
            ],
            "boundary_segments": sorted(list(s) for s in self.boundary_segments),
            "domain_corners": list(self.domain_corners),
        }

    def to_json(self, indent: Optional[int] = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_dict(cls, data: Dict) -> "MacroTriangulation":
        vertices = np.asarray(data["vertices"], dtype=float)
        segments = {tuple(s) for s in data["boundary_segments"]}
        macro_elements = [
            _make_element(index, tuple(entry["vertices"]), PatchMap.from_dict(entry["map"]), segments)
            for index, entry in enumerate(data["macro_elements"])
        ]
        return cls(vertices, macro_elements, segments, list(data["domain_corners"]))

    @classmethod
    def from_json(cls, text: str) -> "MacroTriangulation":
        return cls.from_dict(json.loads(text))


def _find_corners(vertices: np.ndarray, boundary_segments: Set[Tuple[int, int]]) -> List[int]:
    neighbours: Dict[int, List[int]] = {}
    for a, b in boundary_segments:
        neighbours.setdefault(a, []).append(b)
        neighbours.setdefault(b, []).append(a)
    corners = []
    for vertex, adjacent in sorted(neighbours.items()):
        if len(adjacent) != 2:
            raise GeometryError(f"Boundary vertex {vertex} has {len(adjacent)} boundary neighbours")
        d1 = vertices[adjacent[0]] - vertices[vertex]
        d2 = vertices[adjacent[1]] - vertices[vertex]
        cross = d1[0] * d2[1] - d1[1] * d2[0]
        if abs(cross) > 1e-12 * np.linalg.norm(d1) * np.linalg.norm(d2):
            corners.append(vertex)
    return corners


def _is_boundary(a: int, b: int, boundary_segments: Set[Tuple[int, int]]) -> bool:
    return (min(a, b), max(a, b)) in boundary_segments


def _orient(quad: List[int], boundary_segments: Set[Tuple[int, int]]) -> Tuple[int, ...]:
    """
    Cyclically rotates a counter-clockwise vertex list so that the boundary contact
    sits at the reference edge (0,1)x{0} and/or the reference vertex (0,0)
    """
    boundary_vertices = {v for segment in boundary_segments for v in segment}
    on_boundary = [_is_boundary(quad[k], quad[(k + 1) % 4], boundary_segments) for k in range(4)]
    n_edges = sum(on_boundary)
    shift = 0
    if n_edges == 2:
        for k in range(4):
            if on_boundary[k] and on_boundary[(k - 1) % 4]:
                shift = k
                break
    elif n_edges == 1:
        shift = on_boundary.index(True)
    else:
        touching = [k for k in range(4) if quad[k] in boundary_vertices]
        if len(touching) == 1:
            shift = touching[0]
    return tuple(quad[shift:] + quad[:shift])


def _make_element(index: int, ordered: Tuple[int, ...], patch_map: PatchMap,
                  boundary_segments: Set[Tuple[int, int]]) -> MacroElement:
    boundary_vertices = {v for segment in boundary_segments for v in segment}
    edges = tuple(local for local, (a, b) in enumerate(LOCAL_EDGES)
                  if _is_boundary(ordered[a], ordered[b], boundary_segments))
    touching = tuple(v for v in ordered if v in boundary_vertices)
    return MacroElement(index, tuple(ordered), patch_map, edges, touching)


def build_lshape_macro() -> MacroTriangulation:
    """
    Macro-triangulation of the L-shaped domain (0,1)^2 minus [1/2,1)x[1/2,1)

    Twelve squares of side 1/4. A coarser layout with squares of side 1/2 would put
    three edges of the square (1/2,1)x(0,1/2) on the boundary.
    """
    h = 0.25
    index_of: Dict[Tuple[int, int], int] = {}
    vertices: List[Tuple[float, float]] = []

    def vertex(i: int, j: int) -> int:
        if (i, j) not in index_of:
            index_of[(i, j)] = len(vertices)
            vertices.append((i * h, j * h))
        return index_of[(i, j)]

    quads = []
    for j in range(4):
        for i in range(4):
            if i >= 2 and j >= 2:
                continue
            quads.append([vertex(i, j), vertex(i + 1, j), vertex(i + 1, j + 1), vertex(i, j + 1)])
    return MacroTriangulation.from_quadrilaterals(np.array(vertices), quads)
