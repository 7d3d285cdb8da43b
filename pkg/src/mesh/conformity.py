from dataclasses import dataclass, field
from typing import Dict, List
import logging

import numpy as np

from src.mesh.patterns import LARGE

logger = logging.getLogger(__name__)

AREA_RTOL = 1e-12


def point_segment_distances(points: np.ndarray, starts: np.ndarray, ends: np.ndarray) -> np.ndarray:
    """
    Distances of points (N, 2) to segments (M, 2)->(M, 2), shape (N, M)
    """
    direction = ends - starts
    length2 = np.maximum(np.sum(direction ** 2, axis=1), np.finfo(float).tiny)
    rel = points[:, None, :] - starts[None, :, :]
    t = np.clip(np.sum(rel * direction[None], axis=2) / length2[None], 0.0, 1.0)
    nearest = starts[None] + t[..., None] * direction[None]
    return np.linalg.norm(points[:, None, :] - nearest, axis=2)


def segment_distance(a0: np.ndarray, a1: np.ndarray, b0: np.ndarray, b1: np.ndarray) -> float:
    """
    Minimum distance between non-crossing segment families (endpoints to segments both ways)
    """
    d_ab = point_segment_distances(np.vstack([a0, a1]), b0, b1)
    d_ba = point_segment_distances(np.vstack([b0, b1]), a0, a1)
    return float(min(d_ab.min(), d_ba.min()))


def _element_outline(element, samples: int) -> np.ndarray:
    """
    Polyline of the element boundary (exact for straight images)
    """
    t = np.linspace(0.0, 1.0, samples)
    zeros, ones = np.zeros_like(t), np.ones_like(t)
    sides = [
        np.column_stack([t, zeros]), np.column_stack([ones, t]),
        np.column_stack([t[::-1], ones]), np.column_stack([zeros, t[::-1]]),
    ]
    return element.points(np.vstack(sides))


def omega0_distance(mesh) -> float:
    """
    dist(Omega_0, boundary) with Omega_0 the union of large elements
    """
    large = mesh.elements_with_tag(LARGE)
    if not large:
        return float('inf')
    segments = mesh.macro.boundary_segment_points()
    starts, ends = [], []
    for element in large:
        samples = 2 if element.macro_map.kind == "affine" and element.cell_map.kind == "affine" else 9
        outline = _element_outline(element, samples)
        starts.append(outline)
        ends.append(np.roll(outline, -1, axis=0))
    return segment_distance(np.vstack(starts), np.vstack(ends), segments[:, 0], segments[:, 1])


@dataclass
class ConformityReport:
    passed: bool
    violations: List[str] = field(default_factory=list)
    omega0_distance: float = float('inf')
    area: float = 0.0
    n_elements: int = 0
    n_edges: int = 0

    def to_dict(self) -> Dict:
        return {
            "passed": self.passed,
            "violations": list(self.violations),
            "omega0_distance": self.omega0_distance,
            "area": self.area,
            "n_elements": self.n_elements,
            "n_edges": self.n_edges,
        }


def check_conformity(mesh) -> ConformityReport:
    """
    Verifies that the mesh has no hanging nodes

    Every edge must be shared by exactly two elements with matching traces, or lie on
    the domain boundary. Also reports the distance of Omega_0 to the boundary and checks
    that element areas add up to the area of the macro-triangulation.
    """
    violations = []
    for key, owners in sorted(mesh.edge_owners.items()):
        if len(owners) > 2:
            violations.append(f"edge {key}: shared by {len(owners)} elements")
        elif len(owners) == 1 and key not in mesh.boundary_edges:
            element, local = owners[0]
            a, b = mesh.vertices[list(key)]
            violations.append(f"edge {key} of element {element} (local {local}) from "
                              f"({a[0]:.6g}, {a[1]:.6g}) to ({b[0]:.6g}, {b[1]:.6g}) has no neighbour")
        elif len(owners) == 2:
            midpoints = [mesh.elements[e].points(np.array([_edge_midpoint(local)]))[0] for e, local in owners]
            if np.linalg.norm(midpoints[0] - midpoints[1]) > 1e3 * mesh.tolerance:
                violations.append(f"edge {key}: traces of elements {owners[0][0]} and {owners[1][0]} differ")
    for element in mesh.elements:
        det = np.linalg.det(element.jacobians(np.array([[0, 0], [1, 0], [1, 1], [0, 1], [0.5, 0.5]], dtype=float)))
        if np.any(det <= 0):
            violations.append(f"element {element.index}: map is not orientation preserving")

    area = mesh.area()
    expected = mesh.macro.area()
    if abs(area - expected) > AREA_RTOL * expected:
        violations.append(f"element areas sum to {area:.15g}, domain area is {expected:.15g}")

    report = ConformityReport(
        passed=not violations, violations=violations, omega0_distance=omega0_distance(mesh),
        area=area, n_elements=len(mesh), n_edges=len(mesh.edge_owners),
    )
    if report.passed:
        logger.info(f"Conformity check passed: {report.n_elements} elements, {report.n_edges} edges, "
                    f"dist(Omega_0, boundary)={report.omega0_distance:.3e}")
    else:
        logger.warning(f"Conformity check failed with {len(violations)} violations")
    return report


def _edge_midpoint(local: int):
    return ((0.5, 0.0), (1.0, 0.5), (0.5, 1.0), (0.0, 0.5))[local]
