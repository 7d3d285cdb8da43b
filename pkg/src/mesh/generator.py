from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple
import json
import logging
import os

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from src.core.exceptions import AssignmentError, ConformityError, MeshError
from src.core.utils import load_config
from src.geometry.macro import (
    CONTACT_EDGE, CONTACT_NONE, CONTACT_TWO_EDGES, CONTACT_VERTEX, LOCAL_EDGES, MacroTriangulation,
)
from src.geometry.patch_map import PatchMap
from src.mesh.conformity import check_conformity, point_segment_distances
from src.mesh.params import MeshParams
from src.mesh.patterns import (
    BOUNDARY_LAYER, GEOMETRIC, MIXED, PATTERN_KINDS, REGION_TAGS, TENSOR_PRODUCT, TRIVIAL,
    PatternMesh, build_pattern,
)

logger = logging.getLogger(__name__)

DEFAULT_PATTERNS_PATH = os.path.join(os.path.dirname(__file__), '..', '..', 'config', 'lshape_patterns.yaml')

# vertex merge tolerance relative to the domain diameter
MERGE_RTOL = 1e-14
MIN_SIZE_FACTOR = 1e3

ALLOWED_PATTERNS = {
    CONTACT_TWO_EDGES: (TENSOR_PRODUCT,),
    CONTACT_EDGE: (BOUNDARY_LAYER, MIXED),
    CONTACT_VERTEX: (TENSOR_PRODUCT, MIXED, GEOMETRIC),
    CONTACT_NONE: (TRIVIAL,),
}


@dataclass(frozen=True, eq=False)
class Element:
    """
    One cell of the global mesh

    The element map is F_K = F_macro o G with G the map of the pattern cell in the
    macro reference square. Jacobians are composed, never differenced in physical
    coordinates.
    """
    index: int
    macro_id: int
    cell: np.ndarray
    tag: str
    vertices: Tuple[int, int, int, int]
    cell_map: PatchMap
    macro_map: PatchMap
    parent: Optional[int] = None

    def points(self, xi: np.ndarray) -> np.ndarray:
        return self.macro_map.points(self.cell_map.points(xi))

    def reference_points(self, xi: np.ndarray) -> np.ndarray:
        """
        Images of local points in the macro reference square
        """
        return self.cell_map.points(xi)

    def jacobians(self, xi: np.ndarray) -> np.ndarray:
        inner = self.cell_map.jacobians(xi)
        outer = self.macro_map.jacobians(self.cell_map.points(xi))
        return np.einsum('nij,njk->nik', outer, inner)

    def inverse(self, x: np.ndarray) -> np.ndarray:
        return self.cell_map.inverse(self.macro_map.inverse(x))

    def corners(self) -> np.ndarray:
        return self.macro_map.points(self.cell)

    def diameter(self) -> float:
        pts = self.corners()
        return float(np.max(np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)))

    def area(self, order: int = 4) -> float:
        from src.basis.quadrature import tensor_rule
        rule_points, rule_weights = tensor_rule(order)
        return float(np.sum(rule_weights * np.linalg.det(self.jacobians(rule_points))))


class Mesh:
    """
    Conforming quadrilateral mesh obtained by applying refinement patterns to a
    macro-triangulation
    """

    def __init__(self, macro: MacroTriangulation, params: MeshParams, assignment: Sequence[str],
                 elements: List[Element], vertices: np.ndarray, tolerance: float):
        self.macro = macro
        self.params = params
        self.assignment = tuple(assignment)
        self.elements = list(elements)
        self.vertices = np.asarray(vertices, dtype=float)
        self.tolerance = tolerance
        self._segments = None
        self.edge_owners = self._collect_edges()
        self.boundary_edges = {key for key, owners in self.edge_owners.items()
                               if len(owners) == 1 and self._on_boundary(*key)}
        self.boundary_vertices = {v for key in self.boundary_edges for v in key}

    def __len__(self) -> int:
        return len(self.elements)

    def _collect_edges(self) -> Dict[Tuple[int, int], List[Tuple[int, int]]]:
        owners: Dict[Tuple[int, int], List[Tuple[int, int]]] = {}
        for element in self.elements:
            for local, (a, b) in enumerate(LOCAL_EDGES):
                ga, gb = element.vertices[a], element.vertices[b]
                owners.setdefault((min(ga, gb), max(ga, gb)), []).append((element.index, local))
        return owners

    def _on_boundary(self, a: int, b: int) -> bool:
        if self._segments is None:
            self._segments = self.macro.boundary_segment_points()
        segments = self._segments
        pts = self.vertices[[a, b]]
        candidates = np.vstack([pts, pts.mean(axis=0, keepdims=True)])
        distances = point_segment_distances(candidates, segments[:, 0], segments[:, 1])
        return bool(np.any(np.all(distances <= self.tolerance, axis=0)))

    def elements_with_tag(self, tag: str) -> List[Element]:
        return [element for element in self.elements if element.tag == tag]

    def tag_counts(self) -> Dict[str, int]:
        return {tag: len(self.elements_with_tag(tag)) for tag in REGION_TAGS}

    def area(self, order: int = 4) -> float:
        return float(sum(element.area(order) for element in self.elements))

    def min_element_size(self) -> float:
        return min(element.diameter() for element in self.elements)

    def to_dict(self, report=None) -> Dict:
        data = {
            "params": self.params.to_dict(),
            "assignment": list(self.assignment),
            "elements": [
                {
                    "macro_id": element.macro_id,
                    "reference_corners": element.cell.tolist(),
                    "tag": element.tag,
                    "vertices": list(element.vertices),
                    "parent": element.parent,
                }
                for element in self.elements
            ],
        }
        if report is not None:
            data["conformity"] = report.to_dict()
        return data

    def to_json(self, report=None, indent: Optional[int] = 2) -> str:
        return json.dumps(self.to_dict(report), indent=indent)


def merge_vertices(points: np.ndarray, tolerance: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Identifies coincident points

    Returns (unique coordinates, index of the unique point for every input point).
    Numbering follows the first occurrence.
    """
    tree = cKDTree(points)
    pairs = tree.query_pairs(r=tolerance, output_type='ndarray')
    n = len(points)
    graph = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n))
    _, labels = connected_components(graph, directed=False)
    _, first, inverse = np.unique(labels, return_index=True, return_inverse=True)
    order = np.argsort(first)
    rank = np.empty_like(order)
    rank[order] = np.arange(len(order))
    ids = rank[inverse]
    return points[first[order]], ids


def default_assignment(macro: MacroTriangulation) -> List[str]:
    """
    Pattern per macro element from its boundary contact

    two edges -> tensor product; one edge -> boundary layer, or mixed when an end of the
    edge is a domain corner; vertex only -> geometric at a domain corner, tensor product
    otherwise; no contact -> trivial.
    """
    corners = set(macro.domain_corners)
    assignment = []
    for element in macro.macro_elements:
        contact = element.contact
        if contact == CONTACT_TWO_EDGES:
            assignment.append(TENSOR_PRODUCT)
        elif contact == CONTACT_EDGE:
            a, b = LOCAL_EDGES[element.boundary_edges[0]]
            touches = element.vertices[a] in corners or element.vertices[b] in corners
            assignment.append(MIXED if touches else BOUNDARY_LAYER)
        elif contact == CONTACT_VERTEX:
            assignment.append(GEOMETRIC if element.boundary_vertices[0] in corners else TENSOR_PRODUCT)
        else:
            assignment.append(TRIVIAL)
    return assignment


def load_assignment(path: str = DEFAULT_PATTERNS_PATH) -> List[str]:
    config = load_config(path)
    patterns = config.get('patterns')
    if not patterns:
        raise AssignmentError(f"No pattern assignment found in {path}")
    return [str(kind) for kind in patterns]


def validate_assignment(macro: MacroTriangulation, assignment: Sequence[str]) -> None:
    """
    Raises AssignmentError unless every macro element carries a pattern admissible for
    its boundary contact
    """
    if len(assignment) != len(macro):
        raise AssignmentError(f"Assignment has {len(assignment)} entries for {len(macro)} macro elements")
    for element, kind in zip(macro.macro_elements, assignment):
        if kind not in PATTERN_KINDS:
            raise AssignmentError(f"macro {element.index}: unknown pattern kind {kind}")
        allowed = ALLOWED_PATTERNS[element.contact]
        if kind not in allowed:
            raise AssignmentError(
                f"macro {element.index}: pattern {kind} not admissible for boundary contact "
                f"'{element.contact}' (allowed: {', '.join(allowed)})")


def _is_mirrored(macro: MacroTriangulation, index: int, kind: str) -> bool:
    if kind != MIXED:
        return False
    element = macro.macro_elements[index]
    corners = set(macro.domain_corners)
    return element.vertices[0] not in corners and element.vertices[1] in corners


def macro_patterns(macro: MacroTriangulation, assignment: Sequence[str], params: MeshParams) -> List[PatternMesh]:
    layers = params.layers or (0,) * len(macro)
    if len(layers) != len(macro):
        raise MeshError(f"Layer vector has {len(layers)} entries for {len(macro)} macro elements")
    return [
        build_pattern(kind, params.kappa, params.sigma, layers[index], _is_mirrored(macro, index, kind))
        for index, kind in enumerate(assignment)
    ]


def mesh_from_patterns(macro: MacroTriangulation, patterns: Sequence[PatternMesh], params: MeshParams,
                       assignment: Optional[Sequence[str]] = None) -> Mesh:
    """
    Places one pattern in every macro element and merges coincident vertices

    No conformity check is made here.
    """
    cells, tags, owners = [], [], []
    for macro_id, pattern in enumerate(patterns):
        for cell, tag in zip(pattern.cells, pattern.tags):
            cells.append(cell)
            tags.append(tag)
            owners.append(macro_id)
    if assignment is None:
        assignment = [pattern.kind for pattern in patterns]
    return assemble_mesh(macro, params, assignment, owners, cells, tags)


def assemble_mesh(macro: MacroTriangulation, params: MeshParams, assignment: Sequence[str],
                  owners: Sequence[int], cells: Sequence[np.ndarray], tags: Sequence[str],
                  parents: Optional[Sequence[int]] = None) -> Mesh:
    """
    Builds a mesh from cells given in macro reference coordinates
    """
    physical = np.concatenate([
        macro.macro_elements[owner].patch_map.points(cell) for owner, cell in zip(owners, cells)
    ])
    extent = macro.vertices.max(axis=0) - macro.vertices.min(axis=0)
    tolerance = MERGE_RTOL * float(np.linalg.norm(extent))
    vertices, ids = merge_vertices(physical, tolerance)
    ids = ids.reshape(-1, 4)
    if parents is None:
        parents = [None] * len(cells)

    elements = [
        Element(index, owner, np.asarray(cell, dtype=float), tag, tuple(int(v) for v in ids[index]),
                PatchMap.from_corners(cell), macro.macro_elements[owner].patch_map, parent)
        for index, (owner, cell, tag, parent) in enumerate(zip(owners, cells, tags, parents))
    ]
    return Mesh(macro, params, assignment, elements, vertices, tolerance)


def generate_mesh(macro: MacroTriangulation, assignment: Optional[Sequence[str]], params: MeshParams,
                  check: bool = True) -> Mesh:
    """
    Generates the spectral boundary layer mesh T(kappa, L)

    Steps:
    1. Validate the pattern assignment against the boundary contact of every macro
    2. Build the patterns (mixed patterns mirrored when their corner is at (1,0))
    3. Map cells to physical space and merge vertices
    4. Reject meshes with hanging nodes or cells below the merge resolution
    """
    if assignment is None:
        assignment = default_assignment(macro)
    validate_assignment(macro, assignment)
    patterns = macro_patterns(macro, assignment, params)
    mesh = mesh_from_patterns(macro, patterns, params, assignment)

    if mesh.min_element_size() < MIN_SIZE_FACTOR * mesh.tolerance:
        raise MeshError(f"Smallest element ({mesh.min_element_size():.3e}) is below the vertex "
                        f"merge resolution; reduce L")
    if check:
        report = check_conformity(mesh)
        if not report.passed:
            raise ConformityError(f"Mesh is not conforming: {'; '.join(report.violations[:5])}")
    logger.info(f"Mesh generated: {len(mesh)} elements ({mesh.tag_counts()}), kappa={params.kappa:.3e}")
    return mesh
