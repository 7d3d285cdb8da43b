from typing import Optional


class HPError(Exception):
    """
    Base class for all errors raised by the hp-FEM toolkit
    """


class ConfigError(HPError, ValueError):
    pass


class GeometryError(HPError, ValueError):
    pass


class DegenerateMapError(GeometryError):
    """
    Raised when an element map has a non-positive Jacobian determinant
    """


class MeshError(HPError, ValueError):
    pass


class AssignmentError(MeshError):
    """
    Raised when a pattern assignment violates the spectral boundary layer mesh rules
    """


class ConformityError(MeshError):
    pass


class ProblemError(HPError, ValueError):
    """Invalid coefficient data (ellipticity or positivity violated)"""


class SpaceError(HPError, ValueError):
    pass


class SolverError(HPError, RuntimeError):
    """
    Raised on solver breakdown, non-convergence or a non-SPD matrix
    """

    def __init__(self, message: str, residual: Optional[float] = None):
        super().__init__(message)
        self.residual = residual


class ProbeError(HPError, ValueError):
    pass
