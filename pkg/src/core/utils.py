import yaml
import json
import os
import hashlib
from typing import Dict, Any
import logging

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

DEFAULT_CONFIG_PATH = os.path.join(os.path.dirname(__file__), '..', '..', 'config', 'study_config.yaml')


def load_config(config_path: str) -> Dict:
    """
    Loads configuration from YAML file
    """
    try:
        with open(config_path, 'r') as f:
            config = yaml.safe_load(f) or {}
        logger.info(f"Configuration loaded from {config_path}")
        return config
    except Exception as e:
        logger.error(f"Failed to load config from {config_path}: {e}")
        return {}


def save_config(config: Dict, config_path: str) -> bool:
    """
    Saves configuration to YAML file
    """
    try:
        directory = os.path.dirname(config_path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(config_path, 'w') as f:
            yaml.dump(config, f, default_flow_style=False)
        logger.info(f"Configuration saved to {config_path}")
        return True
    except Exception as e:
        logger.error(f"Failed to save config to {config_path}: {e}")
        return False


def ensure_directory(path: str) -> None:
    """
    Ensures directory exists
    """
    os.makedirs(path, exist_ok=True)


def config_section(config: Dict, section: str) -> Dict:
    """
    Returns a configuration section, empty when absent
    """
    value = config.get(section, {}) if config else {}
    return value or {}


def stable_hash(payload: Dict[str, Any]) -> str:
    """
    SHA-256 of a JSON-serializable dict with sorted keys
    """
    text = json.dumps(payload, sort_keys=True, default=repr)
    return hashlib.sha256(text.encode('utf-8')).hexdigest()[:16]


def format_sci(value: float) -> str:
    """
    Formats a number with three significant digits in scientific notation
    """
    return f"{value:.2e}"
