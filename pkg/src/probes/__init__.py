from src.probes.results import ProbeResult
from src.probes.polynomials import (
    markov_ratio, markov_ratio_of, sup_norm, hierarchic_polynomial, chebyshev_on_unit,
    lift_edge_triangle, lift_edge_gradient, lift_ratios, edge_quotient, triangle_grid,
    random_edge_polynomial, inverse_estimate_ratio, inverse_estimate_ratio_of,
)
from src.probes.lemma import Lemma21Result, lemma21_ratio
from src.probes.suite import PROBE_NAMES, run_probes, markov_probes, lift_probes, inverse_probes, lemma_probes

__all__ = [
    "ProbeResult", "markov_ratio", "markov_ratio_of", "sup_norm", "hierarchic_polynomial",
    "chebyshev_on_unit", "lift_edge_triangle", "lift_edge_gradient", "lift_ratios", "edge_quotient",
    "triangle_grid", "random_edge_polynomial", "inverse_estimate_ratio", "inverse_estimate_ratio_of",
    "Lemma21Result", "lemma21_ratio", "run_probes", "markov_probes", "lift_probes", "inverse_probes",
    "lemma_probes", "PROBE_NAMES",
]
