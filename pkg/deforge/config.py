"""
Engine Configuration.

Settings come from config.yaml (optional) and ``DEFORGE_<SECTION>_<KEY>``
environment variables, which win over the file. Sections are validated by the
pydantic models in ``deforge.schemas`` before an engine run reads them.
"""

import logging
import os
import sys
from pathlib import Path
from typing import Any, Optional

import yaml
from pydantic import BaseModel, ValidationError

from deforge import DeforgeError
from deforge.constants import DEFAULT_CONFIG_FILE, DEFAULT_LOG_LEVEL, ENV_PREFIX, LOG_FORMAT
from deforge.schemas.config_schemas import (
    EngineSettings,
    FuzzSettings,
    PositivitySettings,
    ReportSettings,
    validate_settings,
)
from deforge.utils.singleton import SingletonMeta

logger = logging.getLogger(__name__)

_MISSING = object()


class ConfigurationError(DeforgeError):
    """Configuration file or override failed validation."""


def env_var_name(key: str) -> str:
    """``engine.tolerance`` -> ``DEFORGE_ENGINE_TOLERANCE``."""
    return ENV_PREFIX + key.upper().replace(".", "_")


class Config(metaclass=SingletonMeta):
    """Process-wide engine settings.

    A missing config.yaml is not an error: every key has a built-in default.
    An explicitly named file must exist.
    """

    def __init__(self, config_file: Optional[str] = None):
        self.config_file = config_file or self._find_config_file()
        self.config: dict[str, Any] = {}
        self.load_config()

    def _find_config_file(self) -> Optional[str]:
        """First config.yaml in the working directory, its parent, or the project root."""
        project_root = Path(__file__).resolve().parent.parent
        candidates = (Path(DEFAULT_CONFIG_FILE), Path("..") / DEFAULT_CONFIG_FILE)
        for candidate in (*candidates, project_root / DEFAULT_CONFIG_FILE):
            if candidate.is_file():
                return str(candidate)
        return None

    def load_config(self) -> None:
        """Read the YAML file into ``self.config``.

        Raises:
            ConfigurationError: If the file is missing, not valid YAML or not a mapping.
        """
        self.config = {}
        if self.config_file is None:
            logger.debug("No config.yaml found, running on built-in defaults")
            return

        path = Path(self.config_file)
        if not path.is_file():
            raise ConfigurationError(f"Configuration file not found: {path}")
        logger.info(f"Loading engine settings from {path}")
        try:
            loaded = yaml.safe_load(path.read_text(encoding="utf-8"))
        except yaml.YAMLError as e:
            logger.error(f"Cannot parse {path}: {e}")
            raise ConfigurationError(f"Invalid YAML in {path}: {e}") from e

        if loaded is None:
            logger.warning(f"{path} is empty, using defaults")
            return
        if not isinstance(loaded, dict):
            raise ConfigurationError(f"{path} must contain a mapping, got {type(loaded).__name__}")
        self.config = loaded

    def _from_environment(self, key: str) -> Any:
        raw = os.environ.get(env_var_name(key))
        if raw is None:
            return _MISSING
        logger.debug(f"{key} overridden by {env_var_name(key)}")
        try:
            return yaml.safe_load(raw)
        except yaml.YAMLError:
            return raw

    def get(self, key: str, default: Any = None) -> Any:
        """Dotted lookup (``"engine.tolerance"``); the environment wins over the file.

        Override strings are parsed as YAML scalars, so ``"500"`` becomes 500.
        """
        override = self._from_environment(key)
        if override is not _MISSING:
            return override

        node: Any = self.config
        for part in key.split("."):
            if not isinstance(node, dict) or part not in node:
                return default
            node = node[part]
        return node

    def get_section(self, section: str) -> dict[str, Any]:
        return self.config.get(section) or {}

    def settings(self, section: str, schema: type[BaseModel]) -> BaseModel:
        """Validate a section, environment overrides applied, against ``schema``.

        Raises:
            ConfigurationError: If validation fails.
        """
        data = dict(self.get_section(section))
        for name in schema.model_fields:
            override = self._from_environment(f"{section}.{name}")
            if override is not _MISSING:
                data[name] = override
        try:
            return validate_settings(data, schema)
        except ValidationError as e:
            raise ConfigurationError(f"Invalid '{section}' configuration: {e}") from e

    def engine(self) -> EngineSettings:
        return self.settings("engine", EngineSettings)

    def positivity(self) -> PositivitySettings:
        return self.settings("positivity", PositivitySettings)

    def fuzz(self) -> FuzzSettings:
        return self.settings("fuzz", FuzzSettings)

    def report(self) -> ReportSettings:
        return self.settings("report", ReportSettings)

    def reload(self) -> None:
        logger.info(f"Reloading engine settings from {self.config_file}")
        self.load_config()


def _attach(root: logging.Logger, handler: logging.Handler, level: int) -> None:
    handler.setLevel(level)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    root.addHandler(handler)


def init_logging() -> None:
    """Configure the root logger from ``general.log_level`` and ``general.log_file``.

    Console output goes to stderr; stdout carries only the JSON report.
    """
    config = Config()
    level_name = str(config.get("general.log_level", DEFAULT_LOG_LEVEL)).upper()
    level = getattr(logging, level_name, logging.WARNING)

    root = logging.getLogger()
    root.setLevel(level)
    for handler in list(root.handlers):
        root.removeHandler(handler)
    _attach(root, logging.StreamHandler(sys.stderr), level)

    log_file = config.get("general.log_file")
    if log_file:
        Path(log_file).parent.mkdir(parents=True, exist_ok=True)
        _attach(root, logging.FileHandler(log_file), level)

    logger.info(f"Logging initialized at level {level_name}")
