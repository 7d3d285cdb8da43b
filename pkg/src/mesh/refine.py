from typing import Dict, List, Set, Tuple
import logging

import numpy as np

from src.core.exceptions import ConformityError
from src.geometry.macro import LOCAL_EDGES
from src.mesh.conformity import check_conformity
from src.mesh.generator import Mesh, assemble_mesh
from src.mesh.patterns import ANISO, corner_cells

logger = logging.getLogger(__name__)

SPLIT_S = "s"
SPLIT_T = "t"
# local edges cut by a split in each direction
CUT_EDGES = {SPLIT_S: (0, 2), SPLIT_T: (1, 3)}


def _edge_key(element, local: int) -> Tuple[int, int]:
    a, b = LOCAL_EDGES[local]
    ga, gb = element.vertices[a], element.vertices[b]
    return min(ga, gb), max(ga, gb)


def _short_direction(element) -> str:
    pts = element.corners()
    along_s = np.linalg.norm(pts[1] - pts[0]) + np.linalg.norm(pts[2] - pts[3])
    along_t = np.linalg.norm(pts[3] - pts[0]) + np.linalg.norm(pts[2] - pts[1])
    return SPLIT_T if along_t < along_s else SPLIT_S


def closure_marks(mesh: Mesh) -> Dict[int, Set[str]]:
    """
    Split directions of every element after conforming closure

    Anisotropic elements are cut through the middle parallel to their long edges; any
    element with a cut edge is cut across it, until no edge is cut on one side only.
    """
    marks: Dict[int, Set[str]] = {element.index: set() for element in mesh.elements}
    for element in mesh.elements_with_tag(ANISO):
        marks[element.index].add(_short_direction(element))

    changed = True
    while changed:
        changed = False
        cut: Set[Tuple[int, int]] = set()
        for element in mesh.elements:
            for direction in marks[element.index]:
                cut.update(_edge_key(element, local) for local in CUT_EDGES[direction])
        for element in mesh.elements:
            for direction, locals_ in CUT_EDGES.items():
                if direction in marks[element.index]:
                    continue
                if any(_edge_key(element, local) in cut for local in locals_):
                    marks[element.index].add(direction)
                    changed = True
    return marks


def _intervals(split: bool) -> List[Tuple[float, float]]:
    return [(0.0, 0.5), (0.5, 1.0)] if split else [(0.0, 1.0)]


def _flip(cell: np.ndarray, flip_s: bool, flip_t: bool) -> np.ndarray:
    """
    Reflects a local cell layout so that its (0,0) corner moves to another vertex,
    keeping counter-clockwise vertex order
    """
    out = cell.copy()
    if flip_s:
        out[:, 0] = 1.0 - out[:, 0]
        out = out[[1, 0, 3, 2]]
    if flip_t:
        out[:, 1] = 1.0 - out[:, 1]
        out = out[[3, 2, 1, 0]]
    return out


# (flip_s, flip_t) moving local vertex k to (0,0)
CORNER_FLIPS = {0: (False, False), 1: (True, False), 2: (True, True), 3: (False, True)}


def build_reference_mesh(mesh: Mesh, corner_rings: int = 2) -> Mesh:
    """
    Fine mesh nested in the given mesh, used for reference solutions

    Steps:
    1. Mark anisotropic elements and close the marking (see closure_marks)
    2. Replace every element by its 1, 2 or 4 children
    3. Grade children touching a domain corner with corner_rings further geometric layers
    4. Merge vertices and verify conformity

    Every fine element records the index of its coarse parent and inherits its tag.
    """
    marks = closure_marks(mesh)
    corners = mesh.macro.vertices[mesh.macro.domain_corners]
    sigma = mesh.params.sigma

    owners, cells, tags, parents = [], [], [], []
    for element in mesh.elements:
        directions = marks[element.index]
        for s0, s1 in _intervals(SPLIT_S in directions):
            for t0, t1 in _intervals(SPLIT_T in directions):
                local = np.array([[s0, t0], [s1, t0], [s1, t1], [s0, t1]])
                pieces = [local]
                physical = element.points(local)
                dist = np.linalg.norm(physical[:, None, :] - corners[None, :, :], axis=2)
                touching = np.flatnonzero(np.any(dist <= mesh.tolerance, axis=1))
                if corner_rings > 0 and len(touching) > 0:
                    flip_s, flip_t = CORNER_FLIPS[int(touching[0])]
                    origin, scale = np.array([s0, t0]), np.array([s1 - s0, t1 - t0])
                    pieces = [origin + scale * _flip(np.array(ring), flip_s, flip_t)
                              for ring in corner_cells(1.0, sigma, corner_rings)]
                for piece in pieces:
                    owners.append(element.macro_id)
                    cells.append(element.reference_points(piece))
                    tags.append(element.tag)
                    parents.append(element.index)

    fine = assemble_mesh(mesh.macro, mesh.params, mesh.assignment, owners, cells, tags, parents)
    report = check_conformity(fine)
    if not report.passed:
        raise ConformityError(f"Reference mesh is not conforming: {'; '.join(report.violations[:5])}")
    split = sum(1 for directions in marks.values() if directions)
    logger.info(f"Reference mesh built: {len(fine)} elements from {len(mesh)} ({split} split)")
    return fine
