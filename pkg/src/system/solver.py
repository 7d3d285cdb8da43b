import logging
import time

import numpy as np
from scipy.sparse import diags
from scipy.sparse.linalg import LinearOperator, cg, splu

from src.core.exceptions import SolverError
from src.system.assembly import SparseSystem

logger = logging.getLogger(__name__)

try:
    from sksparse.cholmod import cholesky as cholmod_cholesky, CholmodNotPositiveDefiniteError
    HAS_CHOLMOD = True
except ImportError:
    HAS_CHOLMOD = False

METHODS = ("cholesky", "cg")


def _direct(system: SparseSystem):
    matrix = system.matrix.tocsc()
    if HAS_CHOLMOD:
        try:
            factor = cholmod_cholesky(matrix)
        except CholmodNotPositiveDefiniteError as e:
            raise SolverError(f"Matrix is not positive definite: {e}")
        return factor
    lu = splu(matrix, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0, options={"SymmetricMode": True})
    if np.any(lu.U.diagonal() <= 0):
        raise SolverError("Matrix is not positive definite (non-positive pivot)")
    return lu.solve


def _jacobi_cg(system: SparseSystem, tol: float, maxiter: int) -> np.ndarray:
    diagonal = system.matrix.diagonal()
    inv_diag = diags(1.0 / diagonal)
    preconditioner = LinearOperator(system.matrix.shape, matvec=lambda v: inv_diag @ v)
    coeffs, info = cg(system.matrix, system.rhs, rtol=tol, atol=0.0, maxiter=maxiter, M=preconditioner)
    if info > 0:
        raise SolverError(f"CG did not converge in {maxiter} iterations", residual=system.residual(coeffs))
    if info < 0:
        raise SolverError("CG breakdown", residual=system.residual(coeffs))
    return coeffs


def solve(system: SparseSystem, tol: float = 1e-12, method: str = "cholesky", maxiter: int = 20000) -> np.ndarray:
    """
    Solves the SPD Galerkin system to relative residual tol

    The direct path factors once and applies iterative refinement steps until the
    residual contract holds. Jacobi-preconditioned CG is used on request or when the
    factorization runs out of memory.
    """
    if method not in METHODS:
        raise SolverError(f"Unknown solver method: {method}")
    if system.n_dofs == 0:
        return np.zeros(0)
    if np.any(system.matrix.diagonal() <= 0):
        raise SolverError("Matrix is not positive definite (non-positive diagonal entry)")
    if not np.any(system.rhs):
        return np.zeros(system.n_dofs)

    start = time.perf_counter()
    if method == "cholesky":
        try:
            factor = _direct(system)
        except MemoryError:
            logger.warning("Direct factorization ran out of memory; falling back to CG")
            method = "cg"
    if method == "cholesky":
        coeffs = factor(system.rhs)
        residual = system.residual(coeffs)
        for _ in range(3):
            if residual <= tol:
                break
            coeffs = coeffs + factor(system.rhs - system.matrix @ coeffs)
            residual = system.residual(coeffs)
    else:
        coeffs = _jacobi_cg(system, tol, maxiter)
        residual = system.residual(coeffs)

    if not np.all(np.isfinite(coeffs)):
        raise SolverError("Solver produced non-finite values")
    if residual > tol:
        raise SolverError(f"Residual {residual:.3e} above tolerance {tol:.1e}", residual=residual)
    logger.debug(f"Solved {system.n_dofs} DOFs with {method}: residual {residual:.3e}, "
                 f"{time.perf_counter() - start:.2f}s")
    return coeffs
