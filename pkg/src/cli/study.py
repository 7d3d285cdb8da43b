from dataclasses import dataclass, field
from typing import List, Optional, Sequence
import logging
import time

from tqdm import tqdm

from src.analysis.errors import ErrorReport, error_norms
from src.analysis.reference import ReferenceSolution, build_reference
from src.cli.config import StudyConfig, resolve_path
from src.core.exceptions import HPError
from src.geometry.macro import MacroTriangulation, build_lshape_macro
from src.mesh.generator import Mesh, generate_mesh, load_assignment
from src.mesh.params import MeshParams
from src.space.fe_space import build_space
from src.system.assembly import assemble
from src.system.problem import ProblemData, example_problem
from src.system.solver import solve

logger = logging.getLogger(__name__)


@dataclass
class StudyResult:
    config: StudyConfig
    reports: List[ErrorReport] = field(default_factory=list)

    def report(self, p: int, eps: float) -> Optional[ErrorReport]:
        for report in self.reports:
            if report.p == p and report.eps == eps:
                return report
        return None

    @property
    def failures(self) -> List[ErrorReport]:
        return [r for r in self.reports if r.status != "ok"]


class StudyRunner:
    """
    Runs the (p, eps) sweep: mesh with a lambda p eps wide layer strip, Galerkin solve and
    comparison with a reference solution
    """

    def __init__(self, config: StudyConfig, macro: Optional[MacroTriangulation] = None,
                 assignment: Optional[Sequence[str]] = None):
        self.config = config
        self.macro = macro or build_lshape_macro()
        if assignment is None and config.patterns_file:
            assignment = load_assignment(resolve_path(config.patterns_file))
        self.assignment = assignment

    def problem(self, eps: float) -> ProblemData:
        problem = example_problem(self.config.example, eps)
        boost = self.config.peak_quad_boost if self.config.example == "peak" else self.config.quad_boost
        if boost is not None:
            problem.quad_boost = int(boost)
        return problem

    def mesh(self, p: int, eps: float) -> Mesh:
        params = MeshParams.for_macro(self.macro, self.config.lam, p, eps, sigma=self.config.sigma,
                                       layers=self.config.layers, layers_offset=self.config.layers_offset)
        return generate_mesh(self.macro, self.assignment, params)

    def reference(self, base_mesh: Mesh, problem: ProblemData, p_max: int) -> ReferenceSolution:
        cache_dir = resolve_path(self.config.cache_dir) if self.config.cache_dir else None
        return build_reference(base_mesh, problem, p_max, degree_factor=self.config.reference_degree_factor,
                               corner_rings=self.config.corner_rings, cache_dir=cache_dir,
                               solver_options=self.config.solver_options)

    def solve_cell(self, p: int, eps: float, reference: Optional[ReferenceSolution]) -> ErrorReport:
        """
        One table cell: returns the error report of u_N for (p, eps)
        """
        start = time.perf_counter()
        problem = self.problem(eps)
        mesh = self.mesh(p, eps)
        space = build_space(mesh, p)
        system = assemble(space, problem)
        coeffs = solve(system, **self.config.solver_options)
        residual = system.residual(coeffs)
        rhs_energy = float(system.rhs @ coeffs)
        energy_gap = abs(system.energy(coeffs) - rhs_energy) / abs(rhs_energy) if rhs_energy else 0.0

        if self.config.reference_mode == "nested" and self.config.reference:
            reference = self.reference(mesh, problem, self.config.p_max)
        if reference is not None:
            report = error_norms(space, coeffs, reference, eps, problem, example=self.config.example)
        else:
            report = ErrorReport(p=p, eps=eps, n_dofs=space.n_dofs, example=self.config.example)
        report.wall_time = time.perf_counter() - start
        report.extra.update(residual=residual, energy_identity=energy_gap)
        return report

    def run(self) -> StudyResult:
        """
        Steps:
        1. For every eps build the reference solution once (on the refined p_max mesh)
        2. Solve every p and compare with the reference
        3. Record failures per cell and continue
        """
        result = StudyResult(self.config)
        cells = [(eps, p) for eps in self.config.eps_list for p in self.config.degrees]
        logger.info(f"Study '{self.config.example}': {len(self.config.degrees)} degrees x "
                    f"{len(self.config.eps_list)} eps values")
        if self.config.reference and self.config.reference_mode == "per_eps":
            logger.info(f"Row p={self.config.p_max} is measured against a reference nested in its own mesh "
                        f"and reads low; reference_mode 'nested' gives every row its own reference")
        reference: Optional[ReferenceSolution] = None
        reference_error: Optional[str] = None
        current_eps = None
        for eps, p in tqdm(cells, desc=f"study {self.config.example}"):
            if eps != current_eps:
                current_eps = eps
                reference, reference_error = self._per_eps_reference(eps)
            if reference_error is not None:
                result.reports.append(ErrorReport.failed(p, eps, self.config.example, reference_error))
                continue
            start = time.perf_counter()
            try:
                report = self.solve_cell(p, eps, reference)
            except HPError as e:
                logger.error(f"Cell p={p}, eps={eps:.1e} failed: {e}")
                report = ErrorReport.failed(p, eps, self.config.example, str(e), time.perf_counter() - start)
            result.reports.append(report)
        logger.info(f"Study finished: {len(result.reports)} cells, {len(result.failures)} failed")
        return result

    def _per_eps_reference(self, eps: float):
        if not self.config.reference or self.config.reference_mode != "per_eps":
            return None, None
        try:
            problem = self.problem(eps)
            base = self.mesh(self.config.p_max, eps)
            return self.reference(base, problem, self.config.p_max), None
        except HPError as e:
            logger.error(f"Reference solution for eps={eps:.1e} failed: {e}")
            return None, f"reference: {e}"


def run_study(config: StudyConfig, assignment: Optional[Sequence[str]] = None) -> StudyResult:
    return StudyRunner(config, assignment=assignment).run()
