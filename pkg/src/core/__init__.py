from src.core.utils import load_config, save_config, ensure_directory, stable_hash, format_sci
from src.core import exceptions

__all__ = ["load_config", "save_config", "ensure_directory", "stable_hash", "format_sci", "exceptions"]
