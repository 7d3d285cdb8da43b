from dataclasses import dataclass
from typing import Callable, Optional, Union
import logging

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.linalg import splu

from src.analysis.norms import cached_rule
from src.analysis.reference import ReferenceSolution
from src.analysis.transfer import CellLocator
from src.basis.shape import tensor_tables
from src.core.exceptions import SpaceError
from src.mesh.patterns import LARGE

logger = logging.getLogger(__name__)


@dataclass
class Projection:
    """
    Weighted L2 projection onto the restriction of the space to Omega_0

    dofs are free indices of the space whose functions do not vanish on Omega_0.
    """
    dofs: np.ndarray
    coeffs: np.ndarray
    matrix: object
    rhs: np.ndarray

    def residual(self) -> float:
        """
        Relative orthogonality residual max |(c (u - Pu), v_i)| / max |(c u, v_i)|
        """
        scale = np.max(np.abs(self.rhs)) if self.rhs.size else 0.0
        r = np.max(np.abs(self.matrix @ self.coeffs - self.rhs)) if self.rhs.size else 0.0
        return float(r / scale) if scale > 0 else float(r)

    def extend(self, base: np.ndarray) -> np.ndarray:
        """
        Coefficients equal to the projection on Omega_0 and to base elsewhere
        """
        out = np.array(base, dtype=float, copy=True)
        out[self.dofs] = self.coeffs
        return out


def _target_values(u, element, points: np.ndarray, space, locator) -> np.ndarray:
    if isinstance(u, ReferenceSolution):
        macro_points = element.reference_points(points)
        owner, local = locator.locate(element.macro_id, macro_points)
        values = np.zeros(len(points))
        for index in np.unique(owner):
            hit = owner == index
            values[hit], _ = u.space.evaluate_points(u.coeffs, int(index), local[hit])
        return values
    if isinstance(u, np.ndarray):
        values, _ = space.evaluate_points(u, element.index, points)
        return values
    return np.asarray(u(element.points(points)), dtype=float)


def weighted_l2_projection(space, u: Union[Callable, np.ndarray, ReferenceSolution],
                           reaction: Optional[Callable] = None, quad_order: Optional[int] = None) -> Projection:
    """
    Projection onto V_N restricted to Omega_0 (union of large elements) in the inner
    product (c u, v) over Omega_0

    u is a function of physical points, a coefficient vector of the space or a
    reference solution.
    """
    large = space.mesh.elements_with_tag(LARGE)
    if not large:
        raise SpaceError("Omega_0 is empty: the mesh has no large elements")
    if isinstance(u, np.ndarray) and u.shape != (space.n_dofs,):
        raise SpaceError(f"Coefficient vector has shape {u.shape}, expected ({space.n_dofs},)")
    if quad_order is None:
        quad_order = space.p + 4
        if isinstance(u, ReferenceSolution):
            quad_order = max(quad_order, u.p_ref + 2)
    locator = CellLocator(u.mesh) if isinstance(u, ReferenceSolution) else None
    points, weights = cached_rule(quad_order)
    values, _ = tensor_tables(space.p, points)

    dofs = np.unique(np.concatenate([space.dof_map[e.index][space.dof_map[e.index] >= 0] for e in large]))
    position = -np.ones(space.n_dofs, dtype=np.int64)
    position[dofs] = np.arange(len(dofs))

    rows, cols, vals = [], [], []
    rhs = np.zeros(len(dofs))
    for element in large:
        wdet = weights * np.linalg.det(element.jacobians(points))
        if reaction is not None:
            wdet = wdet * reaction(element.points(points))
        local_dofs = space.dof_map[element.index]
        free = np.flatnonzero(local_dofs >= 0)
        signs = space.signs[element.index, free]
        basis = values[:, free] * signs
        local_matrix = basis.T @ (basis * wdet[:, None])
        target = _target_values(u, element, points, space, locator)
        g = position[local_dofs[free]]
        rows.append(np.repeat(g, len(g)))
        cols.append(np.tile(g, len(g)))
        vals.append(local_matrix.ravel())
        np.add.at(rhs, g, basis.T @ (wdet * target))

    matrix = coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                        shape=(len(dofs), len(dofs))).tocsc()
    coeffs = splu(matrix).solve(rhs) if np.any(rhs) else np.zeros(len(dofs))
    projection = Projection(dofs, coeffs, matrix, rhs)
    logger.debug(f"Weighted L2 projection on Omega_0: {len(large)} elements, {len(dofs)} DOFs, "
                 f"residual {projection.residual():.2e}")
    return projection
