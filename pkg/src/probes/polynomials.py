from typing import Tuple, Union
import logging

import numpy as np
from numpy.polynomial import Chebyshev, Polynomial

from src.basis.quadrature import gauss_rule
from src.basis.shape import shape_values_1d
from src.core.exceptions import ProbeError

logger = logging.getLogger(__name__)

UNIT_DOMAIN = [0.0, 1.0]


def hierarchic_polynomial(coeffs) -> Chebyshev:
    """
    Chebyshev series on (0,1) of sum_k coeffs[k] phi_k with the hierarchic shape functions
    """
    coeffs = np.asarray(coeffs, dtype=float)
    p = len(coeffs) - 1
    if p < 1:
        raise ProbeError("Need at least two coefficients")
    nodes = 0.5 * (1.0 - np.cos(np.pi * (np.arange(p + 1) + 0.5) / (p + 1)))
    values, _ = shape_values_1d(p, nodes)
    return Chebyshev.fit(nodes, coeffs @ values, p, domain=UNIT_DOMAIN)


def sup_norm(poly) -> float:
    """
    Maximum of |poly| on [0,1] from the endpoints and the critical points
    """
    candidates = [0.0, 1.0]
    if poly.degree() >= 2:
        roots = poly.deriv().roots()
        real = roots[np.abs(roots.imag) <= 1e-12].real
        candidates.extend(real[(real >= 0.0) & (real <= 1.0)])
    return float(np.max(np.abs(poly(np.array(candidates)))))


def markov_ratio_of(poly) -> float:
    """
    ||f'|| / (2 p^2 ||f||) on (0,1) with p the degree of f
    """
    p = poly.degree()
    norm = sup_norm(poly)
    if p < 1 or norm == 0.0:
        raise ProbeError("Markov ratio needs a non-constant polynomial")
    return sup_norm(poly.deriv()) / (2.0 * p ** 2 * norm)


def markov_ratio(p: int, trials: int = 200, seed: int = 0) -> float:
    """
    Largest Markov ratio over random polynomials of degree p (coefficients uniform on
    [-1, 1] in the hierarchic basis)
    """
    if p < 1:
        raise ProbeError(f"Degree must be >= 1, got {p}")
    rng = np.random.default_rng(seed)
    best = 0.0
    for _ in range(trials):
        poly = hierarchic_polynomial(rng.uniform(-1.0, 1.0, p + 1))
        if poly.degree() < 1 or sup_norm(poly) == 0.0:
            continue
        best = max(best, markov_ratio_of(poly))
    return best


def chebyshev_on_unit(p: int) -> Chebyshev:
    return Chebyshev.basis(p, domain=UNIT_DOMAIN)


def _as_polynomial(f) -> Polynomial:
    if isinstance(f, (Polynomial, Chebyshev)):
        return f.convert(kind=Polynomial, domain=[-1, 1], window=[-1, 1])
    return Polynomial(np.asarray(f, dtype=float))


def edge_quotient(f) -> Polynomial:
    """
    q = f / (1 - x) for a polynomial f with f(0) = f(1) = 0
    """
    poly = _as_polynomial(f)
    scale = max(float(np.max(np.abs(poly.coef))), 1.0)
    if abs(poly(0.0)) > 1e-12 * scale or abs(poly(1.0)) > 1e-12 * scale:
        raise ProbeError(f"Edge function must vanish at both endpoints (f(0)={poly(0.0):.3e}, f(1)={poly(1.0):.3e})")
    quotient, _ = divmod(poly, Polynomial([1.0, -1.0]))
    return quotient


def lift_edge_triangle(f, points: np.ndarray) -> np.ndarray:
    """
    Values of f(x) (1 - x - y) / (1 - x) at points of the reference triangle
    {x, y >= 0, x + y <= 1}; the quotient is formed by polynomial division
    """
    points = np.atleast_2d(points)
    q = edge_quotient(f)
    return q(points[:, 0]) * (1.0 - points[:, 0] - points[:, 1])


def lift_edge_gradient(f, points: np.ndarray) -> np.ndarray:
    points = np.atleast_2d(points)
    q = edge_quotient(f)
    x, y = points[:, 0], points[:, 1]
    return np.column_stack([q.deriv()(x) * (1.0 - x - y) - q(x), -q(x)])


def triangle_grid(n: int) -> np.ndarray:
    ticks = np.linspace(0.0, 1.0, n)
    x, y = np.meshgrid(ticks, ticks, indexing='xy')
    keep = x + y <= 1.0 + 1e-14
    return np.column_stack([x[keep], y[keep]])


def random_edge_polynomial(p: int, rng: np.random.Generator) -> Chebyshev:
    """
    Random polynomial of degree p vanishing at 0 and 1 (bubble modes only)
    """
    coeffs = np.zeros(p + 1)
    coeffs[2:] = rng.uniform(-1.0, 1.0, p - 1)
    return hierarchic_polynomial(coeffs)


def lift_ratios(f, grid_size: int = 201) -> Tuple[float, float]:
    """
    (sup|lift| / sup|f|, sup|grad lift| / (p^2 sup|f|)) with the gradient measured in
    the max norm over components, sampled on a triangle grid
    """
    poly = _as_polynomial(f)
    p = max(poly.degree(), 1)
    f_sup = sup_norm(Chebyshev.cast(poly, domain=UNIT_DOMAIN))
    if f_sup == 0.0:
        return 0.0, 0.0
    grid = triangle_grid(grid_size)
    lift = np.max(np.abs(lift_edge_triangle(poly, grid)))
    grad = np.max(np.abs(lift_edge_gradient(poly, grid)))
    return float(lift / f_sup), float(grad / (p ** 2 * f_sup))


def _tensor_values(coeffs: np.ndarray, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    p = coeffs.shape[0] - 1
    vx, _ = shape_values_1d(p, points[:, 0])
    vy, dy = shape_values_1d(p, points[:, 1])
    values = np.einsum('ij,in,jn->n', coeffs, vx, vy)
    d_y = np.einsum('ij,in,jn->n', coeffs, vx, dy)
    return values, d_y


def inverse_estimate_ratio_of(coeffs, h_x: float, h_y: float, shape: str = "square",
                              grid_size: int = 0) -> float:
    """
    (||pi||_inf - ||pi(., 0)||_inf)_+ / (p (h_y/h_x)^(1/2) ||d_y pi||_L2) for the tensor
    polynomial pi(x, y) = sum c_ij phi_i(x/h_x) phi_j(y/h_y) on
    S_h = (0,h_x) x (0,h_y) ("square") or T_h = conv{0, (h_x,0), (0,h_y)} ("triangle")

    Returns nan when d_y pi vanishes (the numerator is then zero).
    """
    if not (0.0 < h_x <= 1.0 and 0.0 < h_y <= 1.0):
        raise ProbeError(f"h_x, h_y must lie in (0, 1], got {h_x}, {h_y}")
    if shape not in ("square", "triangle"):
        raise ProbeError(f"Unknown shape: {shape}")
    coeffs = np.atleast_2d(np.asarray(coeffs, dtype=float))
    p = coeffs.shape[0] - 1
    n_grid = grid_size or 8 * p + 17
    ticks = np.linspace(0.0, 1.0, n_grid)
    gx, gy = np.meshgrid(ticks, ticks, indexing='xy')
    keep = np.ones_like(gx, dtype=bool) if shape == "square" else gx + gy <= 1.0 + 1e-14
    grid = np.column_stack([gx[keep], gy[keep]])
    values, _ = _tensor_values(coeffs, grid)
    edge = np.column_stack([ticks, np.zeros_like(ticks)])
    edge_values, _ = _tensor_values(coeffs, edge)

    rule = gauss_rule(p + 3)
    s, t = np.meshgrid(rule.nodes, rule.nodes, indexing='xy')
    w = np.outer(rule.weights, rule.weights)
    if shape == "square":
        quad = np.column_stack([s.ravel(), t.ravel()])
        weights = w.ravel()
    else:
        # collapsed map (s, t) -> (s, t (1 - s)) with Jacobian 1 - s
        quad = np.column_stack([s.ravel(), (t * (1.0 - s)).ravel()])
        weights = (w * (1.0 - s)).ravel()
    _, d_y = _tensor_values(coeffs, quad)
    # physical ||d_y pi||^2 = (h_x / h_y) * reference integral
    dy_norm = np.sqrt(h_x / h_y * float(np.sum(weights * d_y ** 2)))
    numerator = max(float(np.max(np.abs(values))) - float(np.max(np.abs(edge_values))), 0.0)
    scale = max(float(np.max(np.abs(values))), 1e-300)
    if dy_norm <= 1e-13 * scale:
        if numerator > 1e-12 * scale:
            raise ProbeError("d_y pi vanishes but pi differs from its trace on y = 0")
        return float('nan')
    return numerator / (p * np.sqrt(h_y / h_x) * dy_norm)


def inverse_estimate_ratio(p: int, h_x: float, h_y: float, trials: int = 100, seed: int = 0,
                           shape: str = "square") -> Tuple[float, int]:
    """
    Largest ratio over random tensor polynomials; returns (max ratio, degenerate count)
    """
    if p < 1:
        raise ProbeError(f"Degree must be >= 1, got {p}")
    rng = np.random.default_rng(seed)
    best, degenerate = 0.0, 0
    for _ in range(trials):
        ratio = inverse_estimate_ratio_of(rng.uniform(-1.0, 1.0, (p + 1, p + 1)), h_x, h_y, shape)
        if np.isnan(ratio):
            degenerate += 1
            continue
        best = max(best, ratio)
    return best, degenerate
