from dataclasses import dataclass, field, asdict, replace
from typing import Dict, List, Optional
import logging
import os

from src.core.exceptions import ConfigError
from src.core.utils import DEFAULT_CONFIG_PATH, config_section
from src.system.problem import EXAMPLES

logger = logging.getLogger(__name__)

REPO_ROOT = os.path.abspath(os.path.join(os.path.dirname(DEFAULT_CONFIG_PATH), '..'))
FORMATS = ("csv", "markdown")
REFERENCE_MODES = ("per_eps", "nested")
LAYERS_RULES = ("p_plus_offset", "explicit")
MAX_DEGREE = 12


def resolve_path(path: Optional[str]) -> Optional[str]:
    """
    Returns path as given when it exists, otherwise relative to the repository root
    """
    if not path or os.path.isabs(path) or os.path.exists(path):
        return path
    candidate = os.path.join(REPO_ROOT, path)
    return candidate if os.path.exists(candidate) else path


@dataclass
class StudyConfig:
    """
    Parameters of one convergence study over the (p, eps) grid
    """
    example: str = "constant"
    eps_list: List[float] = field(default_factory=lambda: [10.0 ** -k for k in range(2, 9)])
    p_min: int = 1
    p_max: int = 7
    lam: float = 1.0
    sigma: float = 0.5
    layers_rule: str = "p_plus_offset"
    layers_offset: int = 1
    layers: Optional[List[int]] = None
    quad_boost: Optional[int] = None
    peak_quad_boost: Optional[int] = None
    format: str = "csv"
    output_dir: str = "results"
    reference: bool = True
    reference_mode: str = "per_eps"
    reference_degree_factor: int = 2
    corner_rings: int = 2
    cache_dir: Optional[str] = "data/reference_cache"
    solver_method: str = "cholesky"
    solver_tol: float = 1e-12
    solver_maxiter: int = 20000
    patterns_file: Optional[str] = "config/lshape_patterns.yaml"
    seed: int = 0
    quick: bool = False

    @classmethod
    def from_config(cls, config: Dict, quick: bool = False) -> "StudyConfig":
        """
        Builds the study configuration from the YAML sections mesh, quadrature, solver, study
        """
        mesh = config_section(config, 'mesh')
        quadrature = config_section(config, 'quadrature')
        solver = config_section(config, 'solver')
        study = config_section(config, 'study')
        defaults = cls()

        example = study.get('example', defaults.example)
        values = dict(
            example=example,
            eps_list=[float(e) for e in study.get('eps_list', defaults.eps_list)],
            p_min=int(study.get('p_min', defaults.p_min)),
            p_max=int(study.get('p_max', defaults.p_max)),
            lam=float(mesh.get('lambda', defaults.lam)),
            sigma=float(mesh.get('sigma', defaults.sigma)),
            layers_rule=mesh.get('layers_rule', defaults.layers_rule),
            layers_offset=int(mesh.get('layers_offset', defaults.layers_offset)),
            layers=mesh.get('layers'),
            quad_boost=quadrature.get('boost'),
            peak_quad_boost=quadrature.get('peak_boost'),
            format=study.get('format', defaults.format),
            output_dir=study.get('output_dir', defaults.output_dir),
            reference=bool(study.get('reference', defaults.reference)),
            reference_mode=study.get('reference_mode', defaults.reference_mode),
            reference_degree_factor=int(study.get('reference_degree_factor', defaults.reference_degree_factor)),
            corner_rings=int(study.get('reference_corner_rings', defaults.corner_rings)),
            cache_dir=study.get('cache_dir', defaults.cache_dir),
            solver_method=solver.get('method', defaults.solver_method),
            solver_tol=float(solver.get('tol', defaults.solver_tol)),
            solver_maxiter=int(solver.get('maxiter', defaults.solver_maxiter)),
            patterns_file=mesh.get('patterns_file', defaults.patterns_file),
            seed=int(study.get('seed', defaults.seed)),
        )
        result = cls(**values)
        if quick:
            result = result.with_quick(study.get('quick', {}))
        result.validate()
        return result

    def with_quick(self, preset: Optional[Dict] = None) -> "StudyConfig":
        preset = preset or {}
        return replace(
            self, quick=True,
            p_max=int(preset.get('p_max', 5)),
            eps_list=[float(e) for e in preset.get('eps_list', [1e-2, 1e-4, 1e-6])],
        )

    def override(self, **changes) -> "StudyConfig":
        """
        Copy with the non-None entries of changes applied (command-line flags)
        """
        updated = replace(self, **{k: v for k, v in changes.items() if v is not None})
        updated.validate()
        return updated

    def validate(self) -> None:
        if self.example not in EXAMPLES:
            raise ConfigError(f"Unknown example '{self.example}' (available: {', '.join(EXAMPLES)})")
        if not self.eps_list:
            raise ConfigError("eps_list is empty")
        bad = [e for e in self.eps_list if not 0.0 < e <= 1.0]
        if bad:
            raise ConfigError(f"eps values must lie in (0, 1], got {bad}")
        if not 1 <= self.p_max <= MAX_DEGREE:
            raise ConfigError(f"p_max must lie in [1, {MAX_DEGREE}], got {self.p_max}")
        if not 1 <= self.p_min <= self.p_max:
            raise ConfigError(f"p_min must lie in [1, p_max], got {self.p_min}")
        if self.lam <= 0:
            raise ConfigError(f"lambda must be positive, got {self.lam}")
        if not 0.0 < self.sigma < 1.0:
            raise ConfigError(f"sigma must lie in (0, 1), got {self.sigma}")
        if self.layers_rule not in LAYERS_RULES:
            raise ConfigError(f"Unknown layers rule '{self.layers_rule}' (available: {', '.join(LAYERS_RULES)})")
        if (self.layers_rule == "explicit") != bool(self.layers):
            raise ConfigError("mesh.layers must be given exactly when layers_rule is 'explicit'")
        if self.format not in FORMATS:
            raise ConfigError(f"Unknown output format '{self.format}' (csv or markdown)")
        if self.reference_mode not in REFERENCE_MODES:
            raise ConfigError(f"Unknown reference mode '{self.reference_mode}'")
        if self.reference_degree_factor < 1:
            raise ConfigError("reference_degree_factor must be >= 1")

    @property
    def degrees(self) -> List[int]:
        return list(range(self.p_min, self.p_max + 1))

    @property
    def solver_options(self) -> Dict:
        return {"method": self.solver_method, "tol": self.solver_tol, "maxiter": self.solver_maxiter}

    def to_dict(self) -> Dict:
        return asdict(self)
