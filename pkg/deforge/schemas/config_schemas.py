"""
Command and Engine Schemas.

Pydantic models validating the engine settings read from config.yaml and the
parsed command line before any computation starts.
"""

from enum import Enum
from typing import Any

from pydantic import BaseModel, ConfigDict, Field

from deforge.constants import (
    DEFAULT_BACKEND,
    DEFAULT_EXTREMAL_RETRIES,
    DEFAULT_FUZZ_CASES,
    DEFAULT_MARGIN,
    DEFAULT_ORDER,
    DEFAULT_REFINE_ROUNDS,
    DEFAULT_REPORT_INDENT,
    DEFAULT_SAMPLES,
    DEFAULT_SEED,
    DEFAULT_TOLERANCE,
)

# =============================================================================
# Engine Settings
# =============================================================================


class Backend(str, Enum):
    """Scalar backend."""

    EXACT = "exact"
    FLOAT = "float"


class EngineSettings(BaseModel):
    """The ``engine`` section of config.yaml."""

    model_config = ConfigDict(extra="forbid")

    backend: Backend = Field(default=Backend(DEFAULT_BACKEND), description="Scalar backend")
    tolerance: float = Field(
        default=DEFAULT_TOLERANCE, gt=0, lt=1, description="Zero tolerance of the float backend"
    )
    threads: int = Field(default=0, ge=0, description="Worker threads (0 = cpu count)")


class PositivitySettings(BaseModel):
    """The ``positivity`` section of config.yaml."""

    model_config = ConfigDict(extra="forbid")

    samples: int = Field(default=DEFAULT_SAMPLES, ge=1, description="Grassmannian samples")
    margin: float = Field(
        default=DEFAULT_MARGIN, ge=0, description="Minimum sampled value counted as transverse"
    )
    refine_rounds: int = Field(default=DEFAULT_REFINE_ROUNDS, ge=0, description="Descent rounds")
    extremal_retries: int = Field(
        default=DEFAULT_EXTREMAL_RETRIES, ge=1, description="Random bases tried per construction"
    )


class FuzzSettings(BaseModel):
    """The ``fuzz`` section of config.yaml."""

    model_config = ConfigDict(extra="forbid")

    cases: int = Field(default=DEFAULT_FUZZ_CASES, ge=1, description="Random cases per identity")


class ReportSettings(BaseModel):
    """The ``report`` section of config.yaml."""

    model_config = ConfigDict(extra="forbid")

    indent: int = Field(default=DEFAULT_REPORT_INDENT, ge=0, le=8, description="JSON indentation")


# =============================================================================
# Command Schemas
# =============================================================================


class Subcommand(str, Enum):
    COHOMOLOGY = "cohomology"
    LEMMA = "lemma"
    CLASSIFY = "classify"
    KURANISHI = "kuranishi"
    EXTEND = "extend"
    POSITIVITY = "positivity"
    FUZZ = "fuzz"
    MAJORANT = "majorant"


class Theory(str, Enum):
    """Cohomology theory."""

    DOLBEAULT = "dolbeault"
    DEL = "del"
    BC = "bc"
    AEPPLI = "aeppli"


class LemmaChoice(str, Enum):
    """Lemma kinds as spelled on the command line."""

    MILD = "mild"
    DUAL_MILD = "dual-mild"
    WEAK = "weak"
    STRONG = "strong"
    FULL = "full"

    @property
    def kind_value(self) -> str:
        return self.value.replace("-", "_")


class Structure(str, Enum):
    """Special metric structure to extend."""

    KAHLER = "kahler"
    BALANCED = "balanced"
    DCLOSED = "dclosed"


class ConstructKind(str, Enum):
    EXACT_INDEX = "exact-index"
    NEGATIVE_INDEX = "negative-index"


class CommandConfig(BaseModel):
    """A fully parsed command line."""

    model_config = ConfigDict(extra="forbid")

    subcommand: Subcommand
    source: str | None = Field(default=None, description="Builtin name or structure file path")
    backend: Backend = Field(default=Backend.EXACT, description="Scalar backend")
    order: int = Field(default=DEFAULT_ORDER, ge=0, description="Truncation order N")
    seed: int = Field(default=DEFAULT_SEED, ge=0, description="Random seed")
    output: str | None = Field(default=None, description="Report path (stdout when omitted)")
    threads: int | None = Field(default=None, ge=1, description="Worker thread cap")
    options: dict[str, Any] = Field(
        default_factory=dict, description="Subcommand-specific arguments"
    )


def validate_settings(config: dict[str, Any], schema: type[BaseModel]) -> BaseModel:
    """Validate a configuration section against a schema.

    Raises:
        pydantic.ValidationError: If validation fails.
    """
    return schema.model_validate(config)
