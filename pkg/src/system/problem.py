from dataclasses import dataclass, field
from typing import Callable, Dict
import logging

import numpy as np

from src.core.exceptions import ProblemError

logger = logging.getLogger(__name__)

PEAK_SHIFT = 0.15


def identity_diffusion(x: np.ndarray) -> np.ndarray:
    return np.broadcast_to(np.eye(2), (len(x), 2, 2)).copy()


def unit_reaction(x: np.ndarray) -> np.ndarray:
    return np.ones(len(x))


def constant_load(x: np.ndarray) -> np.ndarray:
    return np.ones(len(x))


def peak_load(x: np.ndarray) -> np.ndarray:
    return 1.0 / (x[:, 0] ** 2 + x[:, 1] ** 2 + PEAK_SHIFT)


def zero_load(x: np.ndarray) -> np.ndarray:
    return np.zeros(len(x))


@dataclass
class ProblemData:
    """
    Coefficients of -eps^2 div(A grad u) + c u = f with u = 0 on the boundary

    diffusion, reaction and load take points of shape (N, 2) and return (N, 2, 2), (N,)
    and (N,). quad_boost is added to p for the per-direction quadrature order.
    """
    eps: float
    load: Callable[[np.ndarray], np.ndarray] = constant_load
    diffusion: Callable[[np.ndarray], np.ndarray] = identity_diffusion
    reaction: Callable[[np.ndarray], np.ndarray] = unit_reaction
    alpha0: float = 1.0
    c0: float = 1.0
    name: str = "custom"
    quad_boost: int = 2
    metadata: Dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 <= self.eps <= 1.0:
            raise ProblemError(f"eps must lie in [0, 1], got {self.eps}")

    def scaled(self, factor: float) -> "ProblemData":
        load = self.load
        return ProblemData(self.eps, lambda x: factor * load(x), self.diffusion, self.reaction,
                           self.alpha0, self.c0, f"{self.name}*{factor:g}", self.quad_boost, dict(self.metadata))

    def check(self, points: np.ndarray) -> None:
        """
        Verifies symmetry and ellipticity of A and positivity of c at sample points
        """
        a = self.diffusion(points)
        if not np.allclose(a, np.transpose(a, (0, 2, 1)), rtol=1e-13, atol=1e-15):
            raise ProblemError("Diffusion matrix is not symmetric")
        smallest = float(np.min(np.linalg.eigvalsh(a)))
        if smallest < self.alpha0 * (1.0 - 1e-12):
            raise ProblemError(f"Diffusion matrix eigenvalue {smallest:.3e} below alpha0={self.alpha0}")
        c_min = float(np.min(self.reaction(points)))
        if c_min < self.c0 * (1.0 - 1e-12):
            raise ProblemError(f"Reaction coefficient {c_min:.3e} below c0={self.c0}")


EXAMPLES = {
    "constant": (constant_load, 2),
    "peak": (peak_load, 6),
    "zero": (zero_load, 2),
}


def example_problem(name: str, eps: float) -> ProblemData:
    """
    Built-in examples with A = I and c = 1: constant (f = 1), peak
    (f = 1/(x^2+y^2+0.15)) and zero (f = 0)
    """
    if name not in EXAMPLES:
        raise ProblemError(f"Unknown example: {name} (available: {', '.join(EXAMPLES)})")
    if not 0.0 < eps <= 1.0:
        raise ProblemError(f"eps must lie in (0, 1], got {eps}")
    load, boost = EXAMPLES[name]
    return ProblemData(eps=eps, load=load, name=name, quad_boost=boost)
