from dataclasses import dataclass, field
from typing import Dict, Tuple
import logging

import numpy as np

from src.core.exceptions import DegenerateMapError, GeometryError

logger = logging.getLogger(__name__)

UNIT_SQUARE = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


def bilinear_points(corners: np.ndarray, xi: np.ndarray) -> np.ndarray:
    """
    Evaluates the bilinear map of a quadrilateral with corners ordered
    (0,0), (1,0), (1,1), (0,1) at reference points xi of shape (N, 2)
    """
    s = xi[:, 0:1]
    t = xi[:, 1:2]
    return (corners[0] * (1 - s) * (1 - t) + corners[1] * s * (1 - t)
            + corners[2] * s * t + corners[3] * (1 - s) * t)


def bilinear_jacobian(corners: np.ndarray, xi: np.ndarray) -> np.ndarray:
    """
    Jacobians of the bilinear map, shape (N, 2, 2) with columns d/ds, d/dt
    """
    s = xi[:, 0:1]
    t = xi[:, 1:2]
    d_s = (corners[1] - corners[0]) * (1 - t) + (corners[2] - corners[3]) * t
    d_t = (corners[3] - corners[0]) * (1 - s) + (corners[2] - corners[1]) * s
    return np.stack([d_s, d_t], axis=2)


def is_parallelogram(corners: np.ndarray, rtol: float = 1e-13) -> bool:
    twist = corners[0] - corners[1] + corners[2] - corners[3]
    scale = np.max(np.abs(corners[1:] - corners[0]))
    return bool(np.max(np.abs(twist)) <= rtol * max(scale, np.finfo(float).tiny))


def bilinear_inverse(corners: np.ndarray, points: np.ndarray, tol: float = 1e-15,
                     maxiter: int = 30) -> np.ndarray:
    """
    Inverts the bilinear map with Newton's method

    Steps:
    1. Start from the inverse of the affine part at the cell center
    2. Iterate xi <- xi - J^{-1} (F(xi) - x)
    3. Stop when the update is below tol in reference coordinates
    """
    points = np.atleast_2d(points)
    center = np.full((1, 2), 0.5)
    j0 = bilinear_jacobian(corners, center)[0]
    xi = np.linalg.solve(j0, (points - bilinear_points(corners, center)).T).T + 0.5
    if is_parallelogram(corners):
        return xi

    for _ in range(maxiter):
        residual = bilinear_points(corners, xi) - points
        jac = bilinear_jacobian(corners, xi)
        step = np.linalg.solve(jac, residual[..., None])[..., 0]
        xi = xi - step
        if np.max(np.abs(step)) <= tol:
            break
    return xi


@dataclass(frozen=True, eq=False)
class PatchMap:
    """
    Map from the reference square (0,1)^2 to a physical quadrilateral

    affine:   F(x) = matrix @ x + offset
    bilinear: F is the bilinear interpolation of the four corners
    """
    kind: str
    matrix: np.ndarray = field(default_factory=lambda: np.eye(2))
    offset: np.ndarray = field(default_factory=lambda: np.zeros(2))
    corners: np.ndarray = field(default_factory=lambda: UNIT_SQUARE.copy())

    def __post_init__(self):
        if self.kind not in ("affine", "bilinear"):
            raise GeometryError(f"Unknown map kind: {self.kind}")

    @classmethod
    def affine(cls, matrix, offset) -> "PatchMap":
        matrix = np.asarray(matrix, dtype=float).reshape(2, 2)
        offset = np.asarray(offset, dtype=float).reshape(2)
        corners = UNIT_SQUARE @ matrix.T + offset
        return cls("affine", matrix, offset, corners)

    @classmethod
    def from_corners(cls, corners) -> "PatchMap":
        corners = np.asarray(corners, dtype=float).reshape(4, 2)
        if is_parallelogram(corners):
            matrix = np.column_stack([corners[1] - corners[0], corners[3] - corners[0]])
            return cls("affine", matrix, corners[0].copy(), corners)
        return cls("bilinear", np.eye(2), np.zeros(2), corners)

    def points(self, xi: np.ndarray) -> np.ndarray:
        xi = np.atleast_2d(np.asarray(xi, dtype=float))
        if self.kind == "affine":
            return xi @ self.matrix.T + self.offset
        return bilinear_points(self.corners, xi)

    def jacobians(self, xi: np.ndarray) -> np.ndarray:
        xi = np.atleast_2d(np.asarray(xi, dtype=float))
        if self.kind == "affine":
            return np.broadcast_to(self.matrix, (xi.shape[0], 2, 2)).copy()
        return bilinear_jacobian(self.corners, xi)

    def inverse(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if self.kind == "affine":
            return np.linalg.solve(self.matrix, (x - self.offset).T).T
        return bilinear_inverse(self.corners, x)

    def area(self, order: int = 4) -> float:
        from src.basis.quadrature import tensor_rule
        rule_points, rule_weights = tensor_rule(order)
        return float(np.sum(rule_weights * np.linalg.det(self.jacobians(rule_points))))

    def to_dict(self) -> Dict:
        return {
            "kind": self.kind,
            "matrix": self.matrix.tolist(),
            "offset": self.offset.tolist(),
            "corners": self.corners.tolist(),
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "PatchMap":
        if data["kind"] == "affine":
            return cls.affine(data["matrix"], data["offset"])
        return cls("bilinear", np.eye(2), np.zeros(2), np.asarray(data["corners"], dtype=float))


def map_point(patch_map: PatchMap, xhat) -> np.ndarray:
    """
    Evaluates F(xhat) for a single point (returns shape (2,)) or a batch (N, 2)
    """
    xhat = np.asarray(xhat, dtype=float)
    result = patch_map.points(xhat)
    return result[0] if xhat.ndim == 1 else result


def map_jacobian(patch_map: PatchMap, xhat) -> Tuple[np.ndarray, np.ndarray]:
    """
    Returns the Jacobian matrix and its determinant at xhat

    Raises DegenerateMapError when the determinant is not strictly positive.
    """
    xhat = np.asarray(xhat, dtype=float)
    jac = patch_map.jacobians(xhat)
    det = np.linalg.det(jac)
    if np.any(det <= 0.0):
        raise DegenerateMapError(f"Element map is not orientation preserving (min det {np.min(det):.3e})")
    if xhat.ndim == 1:
        return jac[0], det[0]
    return jac, det
