from dataclasses import dataclass, asdict
from functools import lru_cache
from typing import Dict, Iterable, Optional
import logging

import numpy as np

from src.basis.quadrature import tensor_rule, uniform_grid
from src.analysis.transfer import Evaluator, space_evaluator
from src.system.problem import identity_diffusion, unit_reaction

logger = logging.getLogger(__name__)


@dataclass
class NormSet:
    """
    Norms of one function: L2, H1 seminorm, energy (eps^2 (A grad, grad) + (c., .))^(1/2)
    and the sampled maximum
    """
    l2: float
    h1_semi: float
    energy: float
    linf: float
    eps: float

    @property
    def balanced_seminorm(self) -> float:
        return float(np.sqrt(self.eps) * self.h1_semi)

    @property
    def balanced(self) -> float:
        return self.balanced_seminorm + self.l2

    def to_dict(self) -> Dict[str, float]:
        data = asdict(self)
        data.update(balanced_seminorm=self.balanced_seminorm, balanced=self.balanced)
        return data


@lru_cache(maxsize=16)
def cached_rule(n: int):
    return tensor_rule(n)


def function_norms(mesh, evaluator: Evaluator, eps: float, quad_order: int, problem=None,
                   sample_points: Optional[int] = None, tags: Optional[Iterable[str]] = None) -> NormSet:
    """
    Integrates a function given elementwise on a mesh

    quad_order is the Gauss order per direction; the maximum is sampled on a uniform
    grid of sample_points^2 points per element (quad_order when omitted). tags restricts
    integration to elements with the given region tags.
    """
    diffusion = problem.diffusion if problem is not None else identity_diffusion
    reaction = problem.reaction if problem is not None else unit_reaction
    points, weights = cached_rule(quad_order)
    grid = uniform_grid(sample_points or quad_order)
    selected = set(tags) if tags is not None else None

    l2 = h1 = energy = 0.0
    linf = 0.0
    for element in mesh.elements:
        if selected is not None and element.tag not in selected:
            continue
        values, grads = evaluator(element, points)
        wdet = weights * np.linalg.det(element.jacobians(points))
        x = element.points(points)
        a = diffusion(x)
        c = reaction(x)
        l2 += float(np.sum(wdet * values ** 2))
        h1 += float(np.sum(wdet * np.sum(grads ** 2, axis=1)))
        energy += float(np.sum(wdet * (eps ** 2 * np.einsum('ni,nij,nj->n', grads, a, grads) + c * values ** 2)))
        sampled, _ = evaluator(element, grid)
        linf = max(linf, float(np.max(np.abs(sampled))))
    return NormSet(np.sqrt(l2), np.sqrt(h1), np.sqrt(max(energy, 0.0)), linf, eps)


def discrete_norms(space, coeffs, eps: float, problem=None, quad_order: Optional[int] = None,
                   tags: Optional[Iterable[str]] = None) -> NormSet:
    """
    Norms of a discrete function u_N of the space
    """
    n = quad_order if quad_order is not None else space.p + 2
    return function_norms(space.mesh, space_evaluator(space, coeffs), eps, n, problem,
                          sample_points=space.p + 2, tags=tags)
