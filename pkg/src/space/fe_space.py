from typing import Dict, Set, Tuple
import logging

import numpy as np

from src.basis.shape import local_index_layout, tensor_tables
from src.core.exceptions import SpaceError
from src.geometry.macro import LOCAL_EDGES

logger = logging.getLogger(__name__)


def _local_edge_slots(p: int) -> Dict[int, Tuple[int, ...]]:
    """
    Local indices of the modes k = 2..p of every local edge
    """
    n_edge = p - 1
    return {edge: tuple(4 + edge * n_edge + k for k in range(n_edge)) for edge in range(4)}


class FESpace:
    """
    Continuous mapped Q_p space on a conforming quadrilateral mesh with homogeneous
    Dirichlet conditions

    Global numbering: vertices, then edge modes (edges sorted by vertex pair), then cell
    interiors. Edge modes follow the direction from the lower to the higher vertex id;
    odd modes change sign when an element traverses the edge the other way.
    dof_map holds free indices, -1 for constrained ones.
    """

    def __init__(self, mesh, p: int, dof_map: np.ndarray, signs: np.ndarray, full_map: np.ndarray,
                 dirichlet_set: Set[int], n_total: int):
        self.mesh = mesh
        self.p = p
        self.dof_map = dof_map
        self.signs = signs
        self.full_map = full_map
        self.dirichlet_set = frozenset(dirichlet_set)
        self.n_total = n_total
        self.n_dofs = int(np.max(dof_map) + 1) if dof_map.size and np.max(dof_map) >= 0 else 0
        self.layout = local_index_layout(p)

    @property
    def n_local(self) -> int:
        return (self.p + 1) ** 2

    def __repr__(self) -> str:
        return f"FESpace(p={self.p}, elements={len(self.mesh)}, n_dofs={self.n_dofs})"

    def local_coefficients(self, coeffs: np.ndarray, element_index: int) -> np.ndarray:
        """
        Signed coefficients of the local basis of one element (zero on constrained modes)
        """
        dofs = self.dof_map[element_index]
        local = np.zeros(self.n_local)
        free = dofs >= 0
        local[free] = coeffs[dofs[free]] * self.signs[element_index, free]
        return local

    def _check_length(self, coeffs: np.ndarray) -> np.ndarray:
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (self.n_dofs,):
            raise SpaceError(f"Coefficient vector has shape {coeffs.shape}, expected ({self.n_dofs},)")
        return coeffs

    def evaluate_points(self, coeffs, element_index: int, xi: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """
        Values (N,) and physical gradients (N, 2) of u_N at local points xi (N, 2)
        """
        coeffs = self._check_length(coeffs)
        xi = np.atleast_2d(np.asarray(xi, dtype=float))
        element = self.mesh.elements[element_index]
        values, ref_grads = tensor_tables(self.p, xi)
        local = self.local_coefficients(coeffs, element_index)
        u = values @ local
        ref_grad = np.einsum('nkd,k->nd', ref_grads, local)
        jac = element.jacobians(xi)
        grad = np.linalg.solve(np.transpose(jac, (0, 2, 1)), ref_grad[..., None])[..., 0]
        return u, grad

    def evaluate(self, coeffs, element_index: int, xhat) -> Tuple[float, np.ndarray]:
        """
        u_N(F_K(xhat)) and its physical gradient at a single local point
        """
        u, grad = self.evaluate_points(coeffs, element_index, np.asarray(xhat, dtype=float).reshape(1, 2))
        return float(u[0]), grad[0]

    def expand(self, coeffs) -> np.ndarray:
        """
        Coefficients over all global DOFs including constrained ones (which are zero)
        """
        coeffs = self._check_length(coeffs)
        full = np.zeros(self.n_total)
        free_full = self.full_map[self.dof_map >= 0]
        free = self.dof_map[self.dof_map >= 0]
        full[free_full] = coeffs[free]
        return full


def _ensure_conforming(mesh) -> None:
    for key, owners in mesh.edge_owners.items():
        if len(owners) > 2 or (len(owners) == 1 and key not in mesh.boundary_edges):
            raise SpaceError(f"Mesh is not conforming at edge {key}")


def build_space(mesh, p: int) -> FESpace:
    """
    Enumerates the DOFs of S^{p,1}_0 on a conforming mesh

    Steps:
    1. Number vertices, edge modes and interior modes globally
    2. Attach per-element local-to-global maps and edge orientation signs
    3. Constrain every DOF whose function has a trace on the boundary
    4. Renumber the remaining DOFs consecutively in global order
    """
    if p < 1:
        raise SpaceError(f"Polynomial degree must be >= 1, got {p}")
    _ensure_conforming(mesh)

    n_vertices = len(mesh.vertices)
    edge_keys = sorted(mesh.edge_owners)
    edge_index = {key: i for i, key in enumerate(edge_keys)}
    n_edge_modes = p - 1
    n_interior = (p - 1) ** 2
    edge_base = n_vertices
    cell_base = edge_base + len(edge_keys) * n_edge_modes
    n_total = cell_base + len(mesh) * n_interior

    n_local = (p + 1) ** 2
    full_map = np.zeros((len(mesh), n_local), dtype=np.int64)
    signs = np.ones((len(mesh), n_local))
    slots = _local_edge_slots(p)
    for element in mesh.elements:
        row = full_map[element.index]
        row[:4] = element.vertices
        for local_edge, (a, b) in enumerate(LOCAL_EDGES):
            ga, gb = element.vertices[a], element.vertices[b]
            base = edge_base + edge_index[(min(ga, gb), max(ga, gb))] * n_edge_modes
            for offset, slot in enumerate(slots[local_edge]):
                k = offset + 2
                row[slot] = base + offset
                if ga > gb and k % 2 == 1:
                    signs[element.index, slot] = -1.0
        start = 4 + 4 * n_edge_modes
        row[start:] = cell_base + element.index * n_interior + np.arange(n_interior)

    dirichlet = set(int(v) for v in mesh.boundary_vertices)
    for key in mesh.boundary_edges:
        base = edge_base + edge_index[key] * n_edge_modes
        dirichlet.update(range(base, base + n_edge_modes))

    renumber = -np.ones(n_total, dtype=np.int64)
    free = np.array(sorted(set(range(n_total)) - dirichlet), dtype=np.int64)
    renumber[free] = np.arange(len(free))
    dof_map = renumber[full_map]

    space = FESpace(mesh, p, dof_map, signs, full_map, dirichlet, n_total)
    logger.info(f"Space built: p={p}, {n_total} DOFs, {space.n_dofs} free, {len(dirichlet)} Dirichlet")
    return space
