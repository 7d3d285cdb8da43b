from dataclasses import dataclass
from functools import lru_cache
from typing import List, Tuple
import logging

import numpy as np

from src.core.exceptions import HPError

logger = logging.getLogger(__name__)


def _legendre_table(p: int, t: np.ndarray) -> np.ndarray:
    """
    Legendre polynomials P_0..P_p at points t in [-1,1], shape (p+1, len(t))
    """
    table = np.zeros((p + 1, len(t)))
    table[0] = 1.0
    if p >= 1:
        table[1] = t
    for k in range(2, p + 1):
        table[k] = ((2 * k - 1) * t * table[k - 1] - (k - 1) * table[k - 2]) / k
    return table


def shape_values_1d(p: int, points) -> Tuple[np.ndarray, np.ndarray]:
    """
    Hierarchic shape functions on (0,1) and their derivatives

    Functions 0 and 1 are the hats 1-x and x; function k >= 2 is the integrated
    Legendre polynomial (P_k - P_{k-2}) / sqrt(2(2k-1)) in t = 2x - 1, which vanishes
    at both endpoints and has parity (-1)^k under x -> 1-x.
    Returns two arrays of shape (p+1, len(points)).
    """
    if p < 1:
        raise HPError(f"Polynomial degree must be >= 1, got {p}")
    x = np.atleast_1d(np.asarray(points, dtype=float))
    t = 2.0 * x - 1.0
    table = _legendre_table(p, t)
    values = np.zeros((p + 1, len(x)))
    derivs = np.zeros((p + 1, len(x)))
    values[0] = 1.0 - x
    values[1] = x
    derivs[0] = -1.0
    derivs[1] = 1.0
    for k in range(2, p + 1):
        scale = 1.0 / np.sqrt(2.0 * (2 * k - 1))
        values[k] = scale * (table[k] - table[k - 2])
        # d/dx = 2 d/dt and (P_k - P_{k-2})' = (2k-1) P_{k-1}
        derivs[k] = 2.0 * scale * (2 * k - 1) * table[k - 1]
    return values, derivs


@dataclass(frozen=True, eq=False)
class Basis1D:
    p: int
    points: np.ndarray
    values: np.ndarray
    derivs: np.ndarray

    @classmethod
    def at(cls, p: int, points) -> "Basis1D":
        points = np.atleast_1d(np.asarray(points, dtype=float))
        values, derivs = shape_values_1d(p, points)
        return cls(p, points, values, derivs)


@lru_cache(maxsize=32)
def local_index_layout(p: int) -> Tuple[Tuple[int, int], ...]:
    """
    Ordering of the (p+1)^2 tensor functions phi_ij = phi_i(x) phi_j(y)

    Vertices first (0,0), (1,0), (1,1), (0,1); then edge modes k = 2..p for the
    bottom (k,0), right (1,k), top (k,1) and left (0,k) edges; then interior (i,j).
    """
    layout: List[Tuple[int, int]] = [(0, 0), (1, 0), (1, 1), (0, 1)]
    for k in range(2, p + 1):
        layout.append((k, 0))
    for k in range(2, p + 1):
        layout.append((1, k))
    for k in range(2, p + 1):
        layout.append((k, 1))
    for k in range(2, p + 1):
        layout.append((0, k))
    for j in range(2, p + 1):
        for i in range(2, p + 1):
            layout.append((i, j))
    return tuple(layout)


def tensor_tables(p: int, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Values (N, n_local) and reference gradients (N, n_local, 2) of the tensor basis
    in the local ordering of local_index_layout
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    vx, dx = shape_values_1d(p, points[:, 0])
    vy, dy = shape_values_1d(p, points[:, 1])
    layout = np.array(local_index_layout(p))
    ix, iy = layout[:, 0], layout[:, 1]
    values = (vx[ix] * vy[iy]).T
    grads = np.stack([(dx[ix] * vy[iy]).T, (vx[ix] * dy[iy]).T], axis=2)
    return values, grads


def tensor_shape_eval(p: int, xhat) -> Tuple[np.ndarray, np.ndarray]:
    """
    Values and gradients of the (p+1)^2 functions phi_ij at one reference point

    Returns arrays indexed [i, j] and [i, j, component].
    """
    xhat = np.asarray(xhat, dtype=float).reshape(2)
    vx, dx = shape_values_1d(p, [xhat[0]])
    vy, dy = shape_values_1d(p, [xhat[1]])
    values = np.outer(vx[:, 0], vy[:, 0])
    grads = np.stack([np.outer(dx[:, 0], vy[:, 0]), np.outer(vx[:, 0], dy[:, 0])], axis=2)
    return values, grads
