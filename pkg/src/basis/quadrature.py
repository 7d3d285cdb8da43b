from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple
import logging

import numpy as np
from numpy.polynomial import legendre

from src.core.exceptions import HPError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """
    Gauss-Legendre rule on (0,1): exact for polynomials of degree <= 2n-1
    """
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def n(self) -> int:
        return len(self.nodes)

    def integrate(self, func) -> float:
        return float(np.dot(self.weights, func(self.nodes)))


@lru_cache(maxsize=64)
def _gauss_cached(n: int) -> Tuple[np.ndarray, np.ndarray]:
    nodes, weights = legendre.leggauss(n)
    return 0.5 * (nodes + 1.0), 0.5 * weights


def gauss_rule(n: int) -> QuadratureRule:
    """
    Gauss-Legendre nodes and weights mapped to (0,1)
    """
    if n < 1:
        raise HPError(f"Quadrature needs at least one node, got {n}")
    nodes, weights = _gauss_cached(int(n))
    return QuadratureRule(nodes.copy(), weights.copy())


def tensor_rule(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Tensor Gauss rule on (0,1)^2: points of shape (n*n, 2) ordered with x fastest
    """
    rule = gauss_rule(n)
    x, y = np.meshgrid(rule.nodes, rule.nodes, indexing='xy')
    wx, wy = np.meshgrid(rule.weights, rule.weights, indexing='xy')
    points = np.column_stack([x.ravel(), y.ravel()])
    return points, (wx * wy).ravel()


def uniform_grid(n: int) -> np.ndarray:
    """
    Uniform n x n sample grid on [0,1]^2 including the boundary
    """
    ticks = np.linspace(0.0, 1.0, max(n, 2))
    x, y = np.meshgrid(ticks, ticks, indexing='xy')
    return np.column_stack([x.ravel(), y.ravel()])
