from dataclasses import dataclass
from typing import Optional
import logging
import os
import time

import numpy as np

from src.analysis.transfer import Evaluator, space_evaluator, transfer_evaluator
from src.core.exceptions import MeshError
from src.core.utils import ensure_directory, stable_hash
from src.mesh.refine import build_reference_mesh
from src.space.fe_space import FESpace, build_space
from src.system.assembly import assemble
from src.system.problem import EXAMPLES
from src.system.solver import solve

logger = logging.getLogger(__name__)


@dataclass
class ReferenceSolution:
    """
    Solution on a refinement of a study mesh, standing in for the exact solution

    Every element of mesh has its parent in base_mesh.
    """
    base_mesh: object
    mesh: object
    space: FESpace
    coeffs: np.ndarray
    p_ref: int
    key: str = ""
    from_cache: bool = False

    def evaluator(self) -> Evaluator:
        return space_evaluator(self.space, self.coeffs)

    def evaluator_on(self, mesh) -> Evaluator:
        """
        Evaluator of the reference solution on the elements of another mesh
        """
        if mesh is self.mesh:
            return self.evaluator()
        return transfer_evaluator(self.space, self.coeffs, mesh)

    def check_nesting(self) -> None:
        """
        Asserts that every fine cell lies inside its parent cell
        """
        for element in self.mesh.elements:
            parent = self.base_mesh.elements[element.parent]
            if element.macro_id != parent.macro_id:
                raise MeshError(f"Fine element {element.index} lies in another macro than its parent")
            local = parent.cell_map.inverse(element.cell)
            if np.any(local < -1e-9) or np.any(local > 1 + 1e-9):
                raise MeshError(f"Fine element {element.index} is not contained in parent {parent.index}")


def reference_key(base_mesh, problem, p_ref: int, corner_rings: int) -> str:
    return stable_hash({
        "example": problem.name,
        "eps": repr(problem.eps),
        "p_ref": p_ref,
        "mesh": base_mesh.params.to_dict(),
        "assignment": list(base_mesh.assignment),
        "corner_rings": corner_rings,
    })


def build_reference(base_mesh, problem, p_max: int, degree_factor: int = 2, corner_rings: int = 2,
                    cache_dir: Optional[str] = None, solver_options: Optional[dict] = None) -> ReferenceSolution:
    """
    Reference solution of degree degree_factor * p_max

    Steps:
    1. Refine the base mesh (second anisotropic layer, two more geometric layers at corners)
    2. Load the coefficients from the cache when present
    3. Otherwise assemble and solve, then store the coefficients
    """
    start = time.perf_counter()
    p_ref = degree_factor * p_max
    fine = build_reference_mesh(base_mesh, corner_rings=corner_rings)
    space = build_space(fine, p_ref)
    key = reference_key(base_mesh, problem, p_ref, corner_rings)

    cacheable = cache_dir is not None and problem.name in EXAMPLES
    path = os.path.join(cache_dir, f"reference_{key}.npz") if cacheable else None
    if path is not None and os.path.exists(path):
        try:
            with np.load(path) as data:
                coeffs = data["coeffs"]
                stored_key = str(data["key"])
            if stored_key == key and coeffs.shape == (space.n_dofs,):
                logger.info(f"Reference solution loaded from {path}")
                return ReferenceSolution(base_mesh, fine, space, coeffs, p_ref, key, from_cache=True)
            logger.warning(f"Ignoring stale reference cache {path}")
        except (OSError, KeyError, ValueError) as e:
            logger.warning(f"Failed to read reference cache {path}: {e}")

    options = solver_options or {}
    system = assemble(space, problem)
    coeffs = solve(system, **options)
    if path is not None:
        ensure_directory(cache_dir)
        np.savez(path, coeffs=coeffs, key=np.array(key))
        logger.info(f"Reference solution cached at {path}")
    logger.info(f"Reference solution: p_ref={p_ref}, {space.n_dofs} DOFs, "
                f"{time.perf_counter() - start:.1f}s")
    return ReferenceSolution(base_mesh, fine, space, coeffs, p_ref, key)
