from dataclasses import dataclass, field
from typing import Dict, Sequence, Tuple
import logging

from src.core.exceptions import MeshError

logger = logging.getLogger(__name__)

KAPPA_CAP = 0.5


def compute_kappa(lam: float, p: int, eps: float, mu: float = 1.0) -> float:
    """
    Reference layer width kappa = min(lambda * p * eps / mu, 1/2)

    mu is the stretching factor of the macro maps, so the physical strip is lambda * p * eps wide.
    """
    if lam <= 0:
        raise MeshError(f"lambda must be positive, got {lam}")
    if p < 1:
        raise MeshError(f"Polynomial degree must be >= 1, got {p}")
    if not 0.0 < eps <= 1.0:
        raise MeshError(f"eps must lie in (0, 1], got {eps}")
    if mu <= 0:
        raise MeshError(f"Layer scale must be positive, got {mu}")
    return min(lam * p * eps / mu, KAPPA_CAP)


@dataclass(frozen=True)
class MeshParams:
    """
    Parameters of a spectral boundary layer mesh T(kappa, L)

    layers holds the geometric refinement depth L of every macro element.
    """
    kappa: float
    sigma: float = 0.5
    layers: Tuple[int, ...] = field(default_factory=tuple)
    lam: float = 1.0
    p: int = 1
    eps: float = 1.0
    mu: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.kappa <= KAPPA_CAP:
            raise MeshError(f"kappa must lie in (0, 1/2], got {self.kappa}")
        if not 0.0 < self.sigma < 1.0:
            raise MeshError(f"sigma must lie in (0, 1), got {self.sigma}")
        if any(layer < 0 for layer in self.layers):
            raise MeshError(f"Geometric refinement depths must be >= 0, got {self.layers}")

    @classmethod
    def for_degree(cls, lam: float, p: int, eps: float, n_macro: int, sigma: float = 0.5,
                   layers: Sequence[int] = None, layers_offset: int = 1, mu: float = 1.0) -> "MeshParams":
        """
        Study mesh T(min(lambda p eps / mu, 1/2), L) with L = p + layers_offset on every macro
        unless an explicit layer vector is given
        """
        kappa = compute_kappa(lam, p, eps, mu)
        if layers is None:
            layers = (p + layers_offset,) * n_macro
        if len(layers) != n_macro:
            raise MeshError(f"Layer vector has {len(layers)} entries for {n_macro} macro elements")
        return cls(kappa=kappa, sigma=sigma, layers=tuple(int(v) for v in layers), lam=lam, p=p, eps=eps,
                   mu=mu)

    @classmethod
    def for_macro(cls, macro, lam: float, p: int, eps: float, sigma: float = 0.5,
                  layers: Sequence[int] = None, layers_offset: int = 1) -> "MeshParams":
        """
        Study mesh whose boundary layer strip is lambda * p * eps wide in physical coordinates
        """
        return cls.for_degree(lam, p, eps, len(macro), sigma=sigma, layers=layers,
                              layers_offset=layers_offset, mu=macro.layer_scale())

    def to_dict(self) -> Dict:
        return {
            "kappa": self.kappa, "sigma": self.sigma, "layers": list(self.layers),
            "lambda": self.lam, "p": self.p, "eps": self.eps, "mu": self.mu,
        }
