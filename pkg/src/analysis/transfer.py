from typing import Callable, Dict, List, Tuple
import json
import logging

import numpy as np

from src.core.exceptions import MeshError

logger = logging.getLogger(__name__)

INSIDE_SLACK = 1e-10

# evaluator(element, xi) -> (values (N,), physical gradients (N, 2)) at local points of element
Evaluator = Callable[[object, np.ndarray], Tuple[np.ndarray, np.ndarray]]


def same_macro(mesh_a, mesh_b) -> bool:
    if mesh_a.macro is mesh_b.macro:
        return True
    va, vb = mesh_a.macro.vertices, mesh_b.macro.vertices
    return va.shape == vb.shape and np.allclose(va, vb, rtol=0.0, atol=1e-15)


def mesh_signature(mesh) -> Tuple:
    return json.dumps(mesh.params.to_dict(), sort_keys=True), mesh.assignment, len(mesh)


class CellLocator:
    """
    Finds the cell of a mesh containing points given in macro reference coordinates
    """

    def __init__(self, mesh):
        self.mesh = mesh
        self.by_macro: Dict[int, List[Tuple[int, np.ndarray, np.ndarray]]] = {}
        for element in mesh.elements:
            lo, hi = element.cell.min(axis=0), element.cell.max(axis=0)
            self.by_macro.setdefault(element.macro_id, []).append((element.index, lo, hi))

    def locate(self, macro_id: int, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """
        Element indices and local coordinates; points on shared edges go to the first cell found
        """
        points = np.atleast_2d(points)
        owner = np.full(len(points), -1, dtype=int)
        local = np.zeros_like(points)
        for index, lo, hi in self.by_macro.get(macro_id, []):
            todo = np.flatnonzero(owner < 0)
            if len(todo) == 0:
                break
            candidates = todo[np.all((points[todo] >= lo - INSIDE_SLACK) & (points[todo] <= hi + INSIDE_SLACK), axis=1)]
            if len(candidates) == 0:
                continue
            cell_map = self.mesh.elements[index].cell_map
            xi = cell_map.inverse(points[candidates])
            mapped = cell_map.points(xi)
            inside = np.all((xi >= -INSIDE_SLACK) & (xi <= 1.0 + INSIDE_SLACK), axis=1)
            inside &= np.linalg.norm(mapped - points[candidates], axis=1) <= INSIDE_SLACK * np.max(hi - lo) + 1e-14
            owner[candidates[inside]] = index
            local[candidates[inside]] = np.clip(xi[inside], 0.0, 1.0)
        if np.any(owner < 0):
            raise MeshError(f"{int(np.sum(owner < 0))} points of macro {macro_id} not covered by the mesh")
        return owner, local


def space_evaluator(space, coeffs) -> Evaluator:
    """
    Evaluator of a discrete function on the elements of its own mesh
    """
    def evaluate(element, xi):
        return space.evaluate_points(coeffs, element.index, xi)
    return evaluate


def transfer_evaluator(space, coeffs, target_mesh, nested: bool = False) -> Evaluator:
    """
    Evaluator of a discrete function on the elements of another mesh over the same macro-triangulation

    Points are carried through macro reference coordinates; with nested=True the parent
    of every target element is the containing cell.
    """
    if not same_macro(space.mesh, target_mesh):
        raise MeshError("Meshes are built on different macro-triangulations")
    locator = None if nested else CellLocator(space.mesh)

    def evaluate(element, xi):
        macro_points = element.reference_points(xi)
        if nested:
            parent = space.mesh.elements[element.parent]
            return space.evaluate_points(coeffs, parent.index, parent.cell_map.inverse(macro_points))
        owner, local = locator.locate(element.macro_id, macro_points)
        values = np.zeros(len(xi))
        grads = np.zeros((len(xi), 2))
        for index in np.unique(owner):
            hit = owner == index
            values[hit], grads[hit] = space.evaluate_points(coeffs, int(index), local[hit])
        return values, grads
    return evaluate


def difference(first: Evaluator, second: Evaluator) -> Evaluator:
    def evaluate(element, xi):
        u1, g1 = first(element, xi)
        u2, g2 = second(element, xi)
        return u1 - u2, g1 - g2
    return evaluate


def callable_evaluator(func: Callable[[np.ndarray], np.ndarray],
                       grad: Callable[[np.ndarray], np.ndarray] = None) -> Evaluator:
    """
    Evaluator of a function of physical points (gradient zero unless given)
    """
    def evaluate(element, xi):
        x = element.points(xi)
        values = np.asarray(func(x), dtype=float)
        grads = np.asarray(grad(x), dtype=float) if grad is not None else np.zeros((len(x), 2))
        return values, grads
    return evaluate
