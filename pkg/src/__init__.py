__version__ = "1.0.0"

from src.cli import HPStudy

__all__ = ["HPStudy"]
