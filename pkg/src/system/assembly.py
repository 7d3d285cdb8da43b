from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Tuple
import logging
import os
import time

import numpy as np
from scipy.sparse import coo_matrix, csr_matrix

from src.basis.quadrature import tensor_rule
from src.basis.shape import tensor_tables
from src.core.exceptions import DegenerateMapError
from src.core.utils import ensure_directory

logger = logging.getLogger(__name__)


@lru_cache(maxsize=64)
def _reference_tables(p: int, n: int):
    points, weights = tensor_rule(n)
    values, grads = tensor_tables(p, points)
    return points, weights, values, grads


def element_geometry(element, n: int, p: int):
    """
    Quadrature data of one element: physical points, weights times |det J|, basis
    values and physical gradients
    """
    points, weights, values, ref_grads = _reference_tables(p, n)
    jac = element.jacobians(points)
    det = np.linalg.det(jac)
    if np.any(det <= 0.0):
        raise DegenerateMapError(f"Element {element.index}: non-positive Jacobian (min {np.min(det):.3e})")
    inv_t = np.transpose(np.linalg.inv(jac), (0, 2, 1))
    grads = np.einsum('nij,nkj->nki', inv_t, ref_grads)
    return element.points(points), weights * det, values, grads


def element_matrix(element, space, problem, quad_order: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Local matrix eps^2 (A grad phi_j, grad phi_i) + (c phi_j, phi_i) and load (f, phi_i)
    in the unsigned local basis
    """
    n = quad_order if quad_order is not None else space.p + problem.quad_boost
    x, wdet, values, grads = element_geometry(element, n, space.p)
    a = problem.diffusion(x)
    c = problem.reaction(x)
    f = problem.load(x)
    flux = np.einsum('nij,nkj->nki', a, grads)
    stiffness = np.einsum('nki,nli,n->kl', grads, flux, wdet)
    mass = np.einsum('nk,nl,n->kl', values, values, wdet * c)
    matrix = problem.eps ** 2 * stiffness + mass
    matrix = 0.5 * (matrix + matrix.T)
    load = values.T @ (wdet * f)
    return matrix, load


@dataclass
class SparseSystem:
    matrix: csr_matrix
    rhs: np.ndarray
    assembly_time: float = 0.0

    @property
    def n_dofs(self) -> int:
        return self.matrix.shape[0]

    def residual(self, coeffs: np.ndarray) -> float:
        """
        Relative residual ||A x - b|| / ||b|| (absolute when b = 0)
        """
        norm_b = np.linalg.norm(self.rhs)
        r = np.linalg.norm(self.matrix @ coeffs - self.rhs)
        return float(r / norm_b) if norm_b > 0 else float(r)

    def energy(self, coeffs: np.ndarray) -> float:
        return float(coeffs @ (self.matrix @ coeffs))

    def symmetry_error(self) -> float:
        diff = abs(self.matrix - self.matrix.T)
        scale = abs(self.matrix).max() if self.matrix.nnz else 1.0
        return float(diff.max() / scale) if diff.nnz else 0.0

    def export_coo(self, path: str) -> None:
        """
        Writes the matrix as 'row col value' lines (0-based) after a 'n n nnz' header
        """
        directory = os.path.dirname(path)
        if directory:
            ensure_directory(directory)
        coo = self.matrix.tocoo()
        order = np.lexsort((coo.col, coo.row))
        with open(path, 'w') as f:
            f.write(f"{self.n_dofs} {self.n_dofs} {coo.nnz}\n")
            for i, j, v in zip(coo.row[order], coo.col[order], coo.data[order]):
                f.write(f"{i} {j} {v:.17e}\n")
        logger.info(f"Matrix exported to {path} ({coo.nnz} entries)")


def assemble(space, problem, quad_order: Optional[int] = None) -> SparseSystem:
    """
    Assembles the Galerkin system on the free DOFs

    Steps:
    1. Compute local matrices in element order
    2. Apply the edge orientation signs
    3. Drop constrained rows and columns (homogeneous Dirichlet data)
    4. Sum duplicates into a CSR matrix
    """
    start = time.perf_counter()
    problem.check(space.mesh.vertices)
    if space.n_dofs == 0:
        logger.warning("Space has no free DOFs; assembling an empty system")
    rows, cols, vals = [], [], []
    rhs = np.zeros(space.n_dofs)
    for element in space.mesh.elements:
        local_matrix, local_load = element_matrix(element, space, problem, quad_order)
        dofs = space.dof_map[element.index]
        signs = space.signs[element.index]
        free = np.flatnonzero(dofs >= 0)
        if len(free) == 0:
            continue
        signed = local_matrix[np.ix_(free, free)] * np.outer(signs[free], signs[free])
        g = dofs[free]
        rows.append(np.repeat(g, len(g)))
        cols.append(np.tile(g, len(g)))
        vals.append(signed.ravel())
        np.add.at(rhs, g, local_load[free] * signs[free])

    if rows:
        matrix = coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                            shape=(space.n_dofs, space.n_dofs)).tocsr()
    else:
        matrix = csr_matrix((space.n_dofs, space.n_dofs))
    matrix.sum_duplicates()
    elapsed = time.perf_counter() - start
    logger.info(f"Assembled {space.n_dofs} x {space.n_dofs} system ({matrix.nnz} nonzeros) in {elapsed:.2f}s")
    return SparseSystem(matrix, rhs, elapsed)
