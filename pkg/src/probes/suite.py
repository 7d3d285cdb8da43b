from typing import Dict, List, Optional, Sequence
import logging

import numpy as np
from tqdm import tqdm

from src.core.exceptions import ProbeError
from src.core.utils import config_section
from src.geometry.macro import build_lshape_macro
from src.mesh.generator import generate_mesh
from src.mesh.params import MeshParams
from src.probes.lemma import BOUND_FORM as LEMMA_BOUND, lemma21_ratio
from src.probes.polynomials import inverse_estimate_ratio, lift_ratios, markov_ratio, random_edge_polynomial
from src.probes.results import ProbeResult
from src.system.problem import example_problem

logger = logging.getLogger(__name__)


def markov_probes(degrees, trials: int, seed: int) -> List[ProbeResult]:
    return [
        ProbeResult("markov", f"p={p}", markov_ratio(p, trials, seed + p),
                    "||f'||_inf <= 2 p^2 ||f||_inf on (0,1)", trials=trials, seed=seed + p)
        for p in degrees
    ]


def lift_probes(degrees, trials: int, seed: int) -> List[ProbeResult]:
    results = []
    for p in degrees:
        if p < 2:
            continue
        rng = np.random.default_rng(seed + p)
        lift_max, grad_max = 0.0, 0.0
        for _ in range(trials):
            lift, grad = lift_ratios(random_edge_polynomial(p, rng))
            lift_max, grad_max = max(lift_max, lift), max(grad_max, grad)
        results.append(ProbeResult("lift_edge_triangle", f"p={p}", grad_max,
                                   "||grad L f||_inf <= C p^2 ||f||_inf, ||L f||_inf <= ||f||_inf",
                                   trials=trials, seed=seed + p, details={"sup_ratio": lift_max}))
    return results


def inverse_probes(degrees, sizes, trials: int, seed: int) -> List[ProbeResult]:
    results = []
    for shape in ("square", "triangle"):
        for p in degrees:
            for h_x in sizes:
                for h_y in sizes:
                    ratio, degenerate = inverse_estimate_ratio(p, h_x, h_y, trials, seed + p, shape)
                    results.append(ProbeResult(
                        f"inverse_estimate_{shape}", f"p={p},h_x={h_x:g},h_y={h_y:g}", ratio,
                        "||pi||_inf <= C p (h_y/h_x)^(1/2) ||d_y pi||_L2 + ||pi(.,0)||_inf",
                        trials=trials, degenerate=degenerate, seed=seed + p))
    return results


def lemma_probes(degrees, eps_values, study: Dict, mesh_section: Dict, solver_options: Dict,
                 assignment=None, reference_boost: int = 2) -> List[ProbeResult]:
    macro = build_lshape_macro()
    results = []
    for eps in eps_values:
        problem = example_problem(study.get('example', 'constant'), eps)
        for p in degrees:
            params = MeshParams.for_macro(macro, mesh_section.get('lambda', 1.0), p, eps,
                                           sigma=mesh_section.get('sigma', 0.5),
                                           layers_offset=mesh_section.get('layers_offset', 1))
            mesh = generate_mesh(macro, assignment, params)
            result = lemma21_ratio(problem, mesh, p, p_ref=p + reference_boost, solver_options=solver_options)
            results.append(ProbeResult(
                "lemma21", f"p={p},eps={eps:g}", result.ratio, LEMMA_BOUND, trials=1,
                degenerate=int(result.degenerate),
                details={"lhs": result.lhs, "rhs": result.rhs, "projection_residual": result.projection_residual}))
    return results


PROBE_NAMES = ("markov", "lift", "inverse", "lemma21")


def run_probes(config: Dict, include_lemma: bool = True, assignment=None,
               names: Optional[Sequence[str]] = None) -> List[ProbeResult]:
    """
    Runs the probe sweeps configured in the 'probes' section, restricted to names when given
    """
    unknown = set(names or ()) - set(PROBE_NAMES)
    if unknown:
        raise ProbeError(f"Unknown probes {sorted(unknown)} (available: {', '.join(PROBE_NAMES)})")
    probes = config_section(config, 'probes')
    seed = int(probes.get('seed', 1234))
    trials = int(probes.get('trials', 200))
    lift_trials = int(probes.get('lift_trials', 100))
    degrees = probes.get('markov_degrees', list(range(1, 9)))

    jobs = [
        ("markov", lambda: markov_probes(degrees, trials, seed)),
        ("lift", lambda: lift_probes(degrees, lift_trials, seed)),
        ("inverse", lambda: inverse_probes(probes.get('inverse_degrees', [1, 2, 4, 8]),
                                           probes.get('inverse_sizes', [1.0, 1e-2, 1e-4]),
                                           int(probes.get('inverse_trials', 100)), seed)),
    ]
    if include_lemma:
        jobs.append(("lemma21", lambda: lemma_probes(
            probes.get('lemma_degrees', [1, 2, 3, 4]), probes.get('lemma_eps', [1e-2, 1e-4, 1e-6]),
            config_section(config, 'study'), config_section(config, 'mesh'),
            config_section(config, 'solver'), assignment,
            int(probes.get('lemma_reference_boost', 2)))))

    if names:
        jobs = [(name, job) for name, job in jobs if name in names]

    results: List[ProbeResult] = []
    for name, job in tqdm(jobs, desc="probes"):
        found = job()
        worst = max((r.observed_max_ratio for r in found if np.isfinite(r.observed_max_ratio)), default=float('nan'))
        logger.info(f"Probe {name}: {len(found)} sweep points, max ratio {worst:.4g}")
        results.extend(found)
    return results
