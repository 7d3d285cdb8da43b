from typing import Dict, List, Optional, Sequence
import logging
import math
import os

import pandas as pd

from src.analysis.errors import CSV_COLUMNS, ErrorReport
from src.core.exceptions import ConfigError
from src.core.utils import ensure_directory, format_sci

logger = logging.getLogger(__name__)

GAP_MARKER = "--"
METRICS = ("l2_error", "balanced_seminorm_error", "energy_error", "linf_error", "balanced_error")
TITLES = {
    "l2_error": "L2 errors",
    "balanced_seminorm_error": "Balanced H1-seminorm errors",
    "energy_error": "Energy norm errors",
    "linf_error": "Sampled maximum norm errors",
    "balanced_error": "Balanced norm errors",
}


def eps_label(eps: float) -> str:
    return f"{eps:.0e}"


def _format(value) -> str:
    if value is None or (isinstance(value, float) and not math.isfinite(value)):
        return GAP_MARKER
    return format_sci(float(value))


def metric_frame(reports: Sequence[ErrorReport], metric: str, eps_order: Optional[Sequence[float]] = None,
                 p_order: Optional[Sequence[int]] = None) -> pd.DataFrame:
    """
    Table of formatted values with p as rows and eps as columns (input order)
    """
    if metric not in METRICS:
        raise ConfigError(f"Unknown metric '{metric}' (available: {', '.join(METRICS)})")
    rows = [{"p": r.p, "eps": r.eps, "value": r.metric(metric)} for r in reports]
    frame = pd.DataFrame(rows, columns=["p", "eps", "value"])
    if eps_order is None:
        eps_order = list(dict.fromkeys(frame["eps"]))
    if p_order is None:
        p_order = sorted(set(frame["p"]))
    if frame.empty:
        table = pd.DataFrame(index=list(p_order), columns=list(eps_order), dtype=float)
    else:
        table = frame.drop_duplicates(["p", "eps"]).set_index(["p", "eps"])["value"].unstack("eps")
    table = table.reindex(index=list(p_order), columns=list(eps_order))
    formatted = table.apply(lambda column: column.map(_format))
    formatted.columns = [eps_label(e) for e in eps_order]
    formatted.index.name = "p"
    return formatted


def _markdown(frame: pd.DataFrame, title: str) -> str:
    header = ["p"] + list(frame.columns)
    lines = [f"**{title}**", "", "| " + " | ".join(header) + " |",
             "|" + "|".join(["---"] * len(header)) + "|"]
    for p, row in frame.iterrows():
        lines.append("| " + " | ".join([str(p)] + list(row.values)) + " |")
    return "\n".join(lines) + "\n"


def emit_table(reports: Sequence[ErrorReport], metric: str, fmt: str = "csv",
               eps_order: Optional[Sequence[float]] = None, p_order: Optional[Sequence[int]] = None) -> str:
    """
    Renders one metric as CSV or markdown; missing or failed cells show the gap marker
    """
    frame = metric_frame(reports, metric, eps_order, p_order)
    if fmt == "csv":
        return frame.to_csv(lineterminator="\n")
    if fmt == "markdown":
        return _markdown(frame, TITLES[metric])
    raise ConfigError(f"Unknown output format '{fmt}'")


def reports_frame(reports: Sequence[ErrorReport]) -> pd.DataFrame:
    return pd.DataFrame([r.to_row() for r in reports], columns=CSV_COLUMNS)


def write_outputs(reports: Sequence[ErrorReport], output_dir: str, example: str, fmt: str = "csv",
                  eps_order: Optional[Sequence[float]] = None, p_order: Optional[Sequence[int]] = None,
                  metrics: Sequence[str] = METRICS) -> Dict[str, str]:
    """
    Writes reports.csv (long format, includes wall times) and one table per metric
    named <example>_<metric>.csv|md
    """
    ensure_directory(output_dir)
    written: Dict[str, str] = {}
    long_path = os.path.join(output_dir, "reports.csv")
    reports_frame(reports).to_csv(long_path, index=False, lineterminator="\n", float_format="%.6e")
    written["reports"] = long_path
    extension = "csv" if fmt == "csv" else "md"
    for metric in metrics:
        path = os.path.join(output_dir, f"{example}_{metric}.{extension}")
        with open(path, "w") as f:
            f.write(emit_table(reports, metric, fmt, eps_order, p_order))
        written[metric] = path
    logger.info(f"Wrote {len(written)} files to {output_dir}")
    return written
