from dataclasses import dataclass
import logging
import math

import numpy as np

from src.analysis.norms import function_norms
from src.analysis.projection import weighted_l2_projection
from src.analysis.reference import build_reference
from src.analysis.transfer import difference, transfer_evaluator
from src.mesh.patterns import ANISO, CORNER_LAYER
from src.space.fe_space import build_space
from src.system.assembly import assemble
from src.system.solver import solve

logger = logging.getLogger(__name__)

BOUND_FORM = ("eps^(1/2) |u - u_N|_H1 <= C [eps^(1/2) |u - Iu|_H1 "
              "+ eps^(-1/2) ||u - Iu||_L2(Omega \\ Omega_0)]")


@dataclass
class Lemma21Result:
    lhs: float
    rhs: float
    projection_residual: float
    n_dofs: int

    @property
    def degenerate(self) -> bool:
        return self.rhs == 0.0

    @property
    def ratio(self) -> float:
        return math.nan if self.degenerate else self.lhs / self.rhs


def lemma21_ratio(problem, mesh, p: int, p_ref: int, corner_rings: int = 2, solver_options: dict = None) -> Lemma21Result:
    """
    Compares the Galerkin error with the error of Iu in the balanced seminorm

    Iu is the weighted L2 projection of u on Omega_0 and u_N elsewhere; u is replaced by a
    reference solution of degree p_ref on the refinement of mesh.
    """
    options = solver_options or {}
    space = build_space(mesh, p)
    coeffs = solve(assemble(space, problem), **options)
    reference = build_reference(mesh, problem, p_ref, degree_factor=1, corner_rings=corner_rings,
                                solver_options=options)
    projection = weighted_l2_projection(space, reference, reaction=problem.reaction)
    interpolant = projection.extend(coeffs)

    eps = problem.eps
    n = p_ref + 2
    u_ref = reference.evaluator()
    galerkin = function_norms(reference.mesh, difference(u_ref, transfer_evaluator(space, coeffs, reference.mesh, nested=True)),
                              eps, n, problem)
    interp_eval = difference(u_ref, transfer_evaluator(space, interpolant, reference.mesh, nested=True))
    interp = function_norms(reference.mesh, interp_eval, eps, n, problem)
    outside = function_norms(reference.mesh, interp_eval, eps, n, problem, tags=(ANISO, CORNER_LAYER))

    root = np.sqrt(eps)
    lhs = root * galerkin.h1_semi
    rhs = root * interp.h1_semi + outside.l2 / root
    result = Lemma21Result(float(lhs), float(rhs), projection.residual(), space.n_dofs)
    if result.degenerate:
        logger.warning(f"Balanced-norm probe degenerate for p={p}, eps={eps:.1e} (both sides vanish)")
    return result
