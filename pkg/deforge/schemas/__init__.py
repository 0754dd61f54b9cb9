"""
Configuration Schemas Module.

Pydantic schemas for engine settings and parsed commands.
"""

from deforge.schemas.config_schemas import (
    Backend,
    CommandConfig,
    ConstructKind,
    EngineSettings,
    FuzzSettings,
    LemmaChoice,
    PositivitySettings,
    ReportSettings,
    Structure,
    Subcommand,
    Theory,
    validate_settings,
)

__all__ = [
    "Backend",
    "CommandConfig",
    "ConstructKind",
    "EngineSettings",
    "FuzzSettings",
    "LemmaChoice",
    "PositivitySettings",
    "ReportSettings",
    "Structure",
    "Subcommand",
    "Theory",
    "validate_settings",
]
