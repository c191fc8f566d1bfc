import logging
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, Optional
import yaml

from src.utils.error_handler import InputError
from src.utils.logger import get_logger

logger = get_logger("config")

DEFAULT_CONFIG_PATH = "config.yaml"


@dataclass
class LoggingSettings:
    level: str = "INFO"
    file: Optional[str] = None


@dataclass
class OutputSettings:
    default_format: str = "structured"


@dataclass
class OracleSettings:
    max_tree_taxa: int = 7
    max_completion_edges: int = 12
    max_compat_taxa: int = 5
    max_compat_characters: int = 4
    widen_max_edges: int = 6
    random_instances: int = 200
    random_max_characters: int = 4
    random_min_taxa: int = 4
    random_max_taxa: int = 5
    seed: int = 0


@dataclass
class RefinementSettings:
    max_polytomy_degree: int = 6


@dataclass
class Settings:
    logging: LoggingSettings = field(default_factory=LoggingSettings)
    output: OutputSettings = field(default_factory=OutputSettings)
    oracle: OracleSettings = field(default_factory=OracleSettings)
    refinement: RefinementSettings = field(default_factory=RefinementSettings)


def _fill_section(section_cls, name: str, raw: Any):
    if raw is None:
        return section_cls()
    if not isinstance(raw, dict):
        raise InputError(f"config section '{name}' must be a mapping")

    known = {f.name: f for f in fields(section_cls)}
    values: Dict[str, Any] = {}
    for key, value in raw.items():
        if key not in known:
            logger.warning(f"⚠️ Unknown config key '{name}.{key}' ignored")
            continue
        default = getattr(section_cls(), key)
        if default is not None and value is not None and not isinstance(value, type(default)):
            raise InputError(
                f"config key '{name}.{key}' expects {type(default).__name__}, got {type(value).__name__}"
            )
        values[key] = value
    return section_cls(**values)


def settings_from_dict(data: Dict[str, Any]) -> Settings:
    sections = {f.name: f.default_factory for f in fields(Settings)}
    built = {}
    for key, value in data.items():
        if key not in sections:
            logger.warning(f"⚠️ Unknown config section '{key}' ignored")
            continue
        built[key] = _fill_section(sections[key], key, value)
    settings = Settings(**built)

    if settings.output.default_format not in ("structured", "dot"):
        raise InputError(f"output.default_format must be 'structured' or 'dot', got '{settings.output.default_format}'")
    if not isinstance(logging.getLevelName(settings.logging.level.upper()), int):
        raise InputError(f"logging.level '{settings.logging.level}' is not a logging level")
    return settings


def load_config(config_path: Optional[str] = None) -> Settings:
    if config_path is None:
        if not Path(DEFAULT_CONFIG_PATH).exists():
            return Settings()
        config_path = DEFAULT_CONFIG_PATH
    elif not Path(config_path).exists():
        raise InputError(f"config file not found: {config_path}")

    with open(config_path, 'r', encoding='utf-8') as f:
        try:
            data = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise InputError(f"config file {config_path} is not valid YAML: {e}") from e

    if data is None:
        return Settings()
    if not isinstance(data, dict):
        raise InputError(f"config file {config_path} must contain a mapping")

    logger.debug(f"Loaded configuration from {config_path}")
    return settings_from_dict(data)
