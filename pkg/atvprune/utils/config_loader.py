"""
Utility functions for loading configuration files and substituting environment variables.
"""

import os
import re
import yaml
from dotenv import load_dotenv
from typing import Any, Dict, Optional

_PLACEHOLDER = re.compile(r"\$\{([^}]+)\}")


def load_config(path: str = "config.yaml") -> Dict[str, Any]:
    """
    Load a YAML configuration file and substitute environment variables.

    Args:
        path (str): Path to the YAML config file. Defaults to "config.yaml" in the working directory.

    Returns:
        dict: The loaded configuration with environment variables substituted,
            or an empty dict when the file does not exist.
    """
    load_dotenv()

    if not os.path.isabs(path):
        path = os.path.join(os.getcwd(), path)

    if not os.path.isfile(path):
        return {}

    with open(path, "r") as file:
        config = yaml.safe_load(file) or {}

    return _substitute_env_vars(config)


def _substitute_env_vars(obj: Any) -> Any:
    """
    Replace ``${VAR}`` placeholders in every string of a parsed YAML tree.

    Placeholders naming an unset variable are left as they are.
    """
    if isinstance(obj, dict):
        return {key: _substitute_env_vars(value) for key, value in obj.items()}
    if isinstance(obj, list):
        return [_substitute_env_vars(item) for item in obj]
    if isinstance(obj, str):
        return _PLACEHOLDER.sub(
            lambda match: os.environ.get(match.group(1), match.group(0)), obj
        )
    return obj


def extract_command_config(command: str, config: Optional[dict]) -> Dict[str, Any]:
    """
    Merge the default section with the section of one CLI command.

    Unresolved ``${VAR}`` placeholders and empty values are dropped so the
    dataclass defaults apply.

    Args:
        command (str): Command name as used in config.yaml, e.g. "prune"
        config (dict): Configuration dictionary

    Returns:
        Flat dictionary of run options for the command
    """
    config = config or {}

    merged: Dict[str, Any] = {}
    default_config = config.get("default") or {}
    command_config = (config.get("commands") or {}).get(command) or {}
    for section in (default_config, command_config):
        for key, value in section.items():
            if value is None:
                continue
            if isinstance(value, str) and _PLACEHOLDER.fullmatch(value):
                continue
            merged[key] = value

    return merged
