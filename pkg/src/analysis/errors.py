from dataclasses import dataclass, field
from typing import Dict, Optional
import logging
import math

from src.analysis.norms import NormSet, function_norms
from src.analysis.transfer import difference, mesh_signature, same_macro, transfer_evaluator
from src.core.exceptions import MeshError

logger = logging.getLogger(__name__)

CSV_COLUMNS = [
    "example", "p", "eps", "n_dofs", "l2_error", "balanced_h1semi_error", "energy_error",
    "linf_error", "seconds", "h1_semi_error", "balanced_error", "residual", "energy_identity", "status",
]


@dataclass
class ErrorReport:
    p: int
    eps: float
    n_dofs: int = 0
    l2_error: float = math.nan
    balanced_seminorm_error: float = math.nan
    energy_error: float = math.nan
    linf_error: float = math.nan
    wall_time: float = 0.0
    h1_semi_error: float = math.nan
    example: str = ""
    status: str = "ok"
    extra: Dict[str, float] = field(default_factory=dict)

    @property
    def balanced_error(self) -> float:
        return self.balanced_seminorm_error + self.l2_error

    @classmethod
    def failed(cls, p: int, eps: float, example: str, message: str, wall_time: float = 0.0) -> "ErrorReport":
        return cls(p=p, eps=eps, example=example, status=f"failed: {message}", wall_time=wall_time)

    @classmethod
    def from_norms(cls, norms: NormSet, p: int, n_dofs: int, example: str = "", wall_time: float = 0.0) -> "ErrorReport":
        return cls(
            p=p, eps=norms.eps, n_dofs=n_dofs, l2_error=norms.l2,
            balanced_seminorm_error=norms.balanced_seminorm, energy_error=norms.energy,
            linf_error=norms.linf, wall_time=wall_time, h1_semi_error=norms.h1_semi, example=example,
        )

    def metric(self, name: str) -> float:
        if name == "balanced_error":
            return self.balanced_error
        return float(getattr(self, name))

    def to_row(self) -> Dict:
        return {
            "example": self.example, "p": self.p, "eps": self.eps, "n_dofs": self.n_dofs,
            "l2_error": self.l2_error, "balanced_h1semi_error": self.balanced_seminorm_error,
            "energy_error": self.energy_error, "linf_error": self.linf_error,
            "seconds": round(self.wall_time, 3), "h1_semi_error": self.h1_semi_error,
            "balanced_error": self.balanced_error,
            "residual": self.extra.get("residual", math.nan),
            "energy_identity": self.extra.get("energy_identity", math.nan), "status": self.status,
        }


def error_norms(space, coeffs, reference, eps: float, problem=None, quad_order: Optional[int] = None,
                example: str = "", wall_time: float = 0.0) -> ErrorReport:
    """
    Errors of u_N against a reference solution, integrated on the reference mesh

    Uses Gauss order p_ref + 2 per direction and a (p_ref + 2)^2 sample grid per fine
    element for the maximum norm. u_N is carried to the fine mesh through macro
    reference coordinates (directly through the parent cell when the reference
    refines the mesh of u_N).
    """
    if not same_macro(space.mesh, reference.mesh):
        raise MeshError("u_N and the reference solution live on different macro-triangulations")
    nested = mesh_signature(space.mesh) == mesh_signature(reference.base_mesh)
    n = quad_order if quad_order is not None else reference.p_ref + 2
    u_n = transfer_evaluator(space, coeffs, reference.mesh, nested=nested)
    norms = function_norms(reference.mesh, difference(u_n, reference.evaluator()), eps, n, problem,
                           sample_points=reference.p_ref + 2)
    report = ErrorReport.from_norms(norms, space.p, space.n_dofs, example, wall_time)
    logger.debug(f"p={space.p} eps={eps:.1e}: L2 {report.l2_error:.3e}, "
                 f"balanced {report.balanced_seminorm_error:.3e} ({'nested' if nested else 'transferred'})")
    return report
