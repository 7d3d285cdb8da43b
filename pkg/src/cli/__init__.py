from typing import List, Optional, Sequence
import logging
import os

import pandas as pd

from src.cli.config import StudyConfig, resolve_path, FORMATS, REFERENCE_MODES, MAX_DEGREE
from src.cli.study import StudyResult, StudyRunner, run_study
from src.cli.tables import METRICS, GAP_MARKER, emit_table, metric_frame, reports_frame, write_outputs
from src.core.utils import DEFAULT_CONFIG_PATH, config_section, ensure_directory, load_config, save_config
from src.geometry.macro import build_lshape_macro
from src.mesh.conformity import check_conformity
from src.mesh.generator import generate_mesh, load_assignment
from src.mesh.params import MeshParams
from src.probes.suite import run_probes

logger = logging.getLogger(__name__)


class HPStudy:
    """
    Main interface for meshes, convergence studies and probe sweeps
    """

    def __init__(self, config_path: str = DEFAULT_CONFIG_PATH):
        self.config_path = config_path
        self.config = load_config(config_path)
        self._assignment: Optional[List[str]] = None

    @property
    def assignment(self) -> Optional[List[str]]:
        if self._assignment is None:
            path = resolve_path(config_section(self.config, 'mesh').get('patterns_file'))
            if path and os.path.exists(path):
                self._assignment = load_assignment(path)
        return self._assignment

    def study_config(self, quick: bool = False, **overrides) -> StudyConfig:
        return StudyConfig.from_config(self.config, quick=quick).override(**overrides)

    def run(self, study: Optional[StudyConfig] = None, write: bool = True) -> StudyResult:
        """
        Runs the (p, eps) study and writes reports.csv, the metric tables and the
        effective configuration into the output directory
        """
        study = study or self.study_config()
        result = StudyRunner(study, assignment=self.assignment if study.patterns_file else None).run()
        if write:
            output_dir = study.output_dir
            write_outputs(result.reports, output_dir, study.example, study.format,
                          eps_order=study.eps_list, p_order=study.degrees)
            save_config(study.to_dict(), os.path.join(output_dir, "effective_config.yaml"))
        return result

    def build_mesh(self, p: int, eps: float, lam: Optional[float] = None, sigma: Optional[float] = None,
                   layers: Optional[Sequence[int]] = None):
        """
        Study mesh T(kappa, p + 1) of the L-shape with its conformity report

        The boundary layer strip is lambda p eps wide in physical coordinates.
        """
        mesh_section = config_section(self.config, 'mesh')
        macro = build_lshape_macro()
        if layers is not None and len(layers) == 1:
            layers = list(layers) * len(macro)
        params = MeshParams.for_macro(
            macro, lam if lam is not None else float(mesh_section.get('lambda', 1.0)), p, eps,
            sigma=sigma if sigma is not None else float(mesh_section.get('sigma', 0.5)),
            layers=layers, layers_offset=int(mesh_section.get('layers_offset', 1)))
        mesh = generate_mesh(macro, self.assignment, params, check=False)
        return mesh, check_conformity(mesh)

    def probes(self, names: Optional[Sequence[str]] = None, include_lemma: bool = True):
        return run_probes(self.config, include_lemma=include_lemma, assignment=self.assignment, names=names)

    @staticmethod
    def probes_frame(results) -> pd.DataFrame:
        return pd.DataFrame([r.to_row() for r in results])

    @classmethod
    def write_probes(cls, results, path: str) -> str:
        frame = cls.probes_frame(results)
        directory = os.path.dirname(path)
        if directory:
            ensure_directory(directory)
        frame.to_csv(path, index=False, lineterminator="\n")
        logger.info(f"Wrote {len(frame)} probe rows to {path}")
        return path


__all__ = [
    "HPStudy", "StudyConfig", "StudyResult", "StudyRunner", "run_study", "emit_table", "metric_frame",
    "reports_frame", "write_outputs", "resolve_path", "METRICS", "GAP_MARKER", "FORMATS",
    "REFERENCE_MODES", "MAX_DEGREE",
]
