"""Scenario configuration files: JSON, TOML or YAML.

A file is a key-value tree matching ScenarioConfig. Three extra top-level keys
are understood:

    preset      built-in setting loaded first; the file is deep-merged over it
    scenario    named scenario whose honesty policies replace the configured ones
    sigma, switch_pcc   scenario options

Lists are replaced, not merged.
"""
import json
import logging
import re
from pathlib import Path
from typing import Any, Dict, Optional, Union

import yaml
from pydantic import ValidationError

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from src.core.scenarios import build_scenario, load_preset
from src.exceptions import ConfigError
from src.models import ScenarioConfig

logger = logging.getLogger(__name__)

SUPPORTED_SUFFIXES = (".json", ".toml", ".yaml", ".yml")


def deep_merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    """Recursively merge `override` into a copy of `base`."""
    merged = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def parse_config_text(text: str, suffix: str, path: Optional[str] = None) -> Dict[str, Any]:
    """Parse raw file content into a dict, reporting the line of syntax errors."""
    suffix = suffix.lower()
    try:
        if suffix == ".json":
            data = json.loads(text)
        elif suffix == ".toml":
            data = tomllib.loads(text)
        elif suffix in (".yaml", ".yml"):
            data = yaml.safe_load(text)
        else:
            raise ConfigError(
                f"unsupported config format '{suffix}'; use one of {', '.join(SUPPORTED_SUFFIXES)}",
                path=path
            )
    except json.JSONDecodeError as e:
        raise ConfigError(e.msg, path=path, line=e.lineno) from e
    except tomllib.TOMLDecodeError as e:
        match = re.search(r"line (\d+)", str(e))
        raise ConfigError(str(e), path=path, line=int(match.group(1)) if match else None) from e
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        raise ConfigError(
            getattr(e, "problem", None) or str(e),
            path=path,
            line=mark.line + 1 if mark is not None else None
        ) from e

    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("top level must be a mapping", path=path)
    return data


def config_from_dict(data: Dict[str, Any], path: Optional[str] = None) -> ScenarioConfig:
    """Validate a parsed tree, applying `preset` and `scenario` keys."""
    data = dict(data)
    preset = data.pop("preset", None)
    scenario = data.pop("scenario", None)
    sigma = data.pop("sigma", None)
    switch_pcc = data.pop("switch_pcc", None)

    if preset is not None:
        try:
            base = load_preset(preset)
        except ConfigError as e:
            raise ConfigError(str(e), path=path, field="preset") from e
        data = deep_merge(base.model_dump(), data)

    try:
        config = ScenarioConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError.from_validation(e, path=path) from e

    if scenario is not None:
        try:
            config = build_scenario(preset=preset, scenario=scenario, sigma=sigma, switch_pcc=switch_pcc, base=config)
        except ConfigError as e:
            raise ConfigError(str(e), path=path, field=e.field) from e
    return config


def load_config(path: Union[str, Path]) -> ScenarioConfig:
    """
    Load and validate a scenario configuration file.

    Args:
        path: A .json, .toml, .yaml or .yml file

    Returns:
        Fully validated ScenarioConfig with defaults applied

    Raises:
        ConfigError: Unreadable file, syntax error (with line) or validation error (with field path)
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config: {e.strerror or e}", path=str(path)) from e

    data = parse_config_text(text, path.suffix, path=str(path))
    config = config_from_dict(data, path=str(path))
    logger.info(f"Loaded config {path}: '{config.name}', N={config.n_providers}, M={config.n_clients}")
    return config
