from src.basis.quadrature import QuadratureRule, gauss_rule, tensor_rule, uniform_grid
from src.basis.shape import Basis1D, shape_values_1d, tensor_shape_eval, tensor_tables, local_index_layout

__all__ = [
    "QuadratureRule", "gauss_rule", "tensor_rule", "uniform_grid",
    "Basis1D", "shape_values_1d", "tensor_shape_eval", "tensor_tables", "local_index_layout",
]
