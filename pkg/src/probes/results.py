from dataclasses import dataclass, field, asdict
from typing import Dict, Optional


@dataclass
class ProbeResult:
    """
    Largest observed ratio of one inequality over one parameter sweep point
    """
    name: str
    sweep: str
    observed_max_ratio: float
    bound_form: str
    trials: int = 0
    degenerate: int = 0
    seed: Optional[int] = None
    details: Dict[str, float] = field(default_factory=dict)

    def to_row(self) -> Dict:
        row = asdict(self)
        details = row.pop("details")
        row.update({f"detail_{k}": v for k, v in sorted(details.items())})
        return row
