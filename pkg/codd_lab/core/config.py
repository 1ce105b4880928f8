"""
Configuration management for the CoDD lab.

Ambient settings (logging) are a pydantic-settings model built from explicit
values only: neither the environment nor a .env file is read. Experiment
parameters are plain pydantic models filled from command-line flags, so a run
never depends on the environment it happens to start in.
"""

from fractions import Fraction
from pathlib import Path
from typing import Optional
from pydantic import BaseModel, Field, ValidationError, field_validator
from pydantic_settings import BaseSettings, PydanticBaseSettingsSource, SettingsConfigDict

from codd_lab.core.exceptions import ConfigurationError
from codd_lab.core.constants import (
    CONCENTRATION_DELTA,
    DEFAULT_FLIP_MAX,
    DEFAULT_SEED,
    DEFAULT_TRACE_ALPHABET,
    MAX_CORRELATION_BITS,
    MAX_INPUT_BITS,
)

SEED_MAX = (1 << 64) - 1


def _unit_rational(value: str) -> str:
    try:
        number = Fraction(value)
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"{value!r} is not a rational number")
    if not 0 <= number <= 1:
        raise ValueError(f"{value} is not in [0, 1]")
    return value


class LoggingConfig(BaseModel):
    """Configuration for logging."""

    log_file: Optional[Path] = None
    console_level: str = Field(default="INFO", pattern="^(DEBUG|INFO|WARNING|ERROR|CRITICAL)$")
    file_level: str = Field(default="DEBUG", pattern="^(DEBUG|INFO|WARNING|ERROR|CRITICAL)$")


class CorrelationConfig(BaseModel):
    """Parameters of a syntax-semantics correlation run."""

    n: int = Field(default=4, ge=1, le=MAX_CORRELATION_BITS)
    pairs: int = Field(default=200, ge=1)
    seed: int = Field(default=DEFAULT_SEED, ge=0, le=SEED_MAX)
    schemes: tuple[str, ...] = ("entropy", "depth")
    flip_max: str = str(DEFAULT_FLIP_MAX)
    decay: str = "1/2"

    @field_validator("schemes")
    @classmethod
    def _known_schemes(cls, value: tuple[str, ...]) -> tuple[str, ...]:
        unknown = [s for s in value if s not in ("entropy", "depth")]
        if unknown or not value:
            raise ValueError(f"unknown edit cost schemes: {unknown}")
        return value

    @field_validator("flip_max", "decay")
    @classmethod
    def _rational_in_unit_interval(cls, value: str) -> str:
        return _unit_rational(value)


class GrowthConfig(BaseModel):
    """Parameters of a single random growth trace."""

    n: int = Field(default=6, ge=1, le=MAX_INPUT_BITS)
    steps: int = Field(default=1000, ge=0)
    seed: int = Field(default=DEFAULT_SEED, ge=0, le=SEED_MAX)
    alphabet: int = Field(default=DEFAULT_TRACE_ALPHABET, ge=1)


class EnsembleConfig(BaseModel):
    """Parameters of a size-versus-entropy ensemble."""

    n: int = Field(default=6, ge=1, le=MAX_INPUT_BITS)
    sizes: tuple[int, ...] = tuple(range(1, 51))
    samples: int = Field(default=20, ge=1)
    seed: int = Field(default=DEFAULT_SEED, ge=0, le=SEED_MAX)
    # None means one label per input of the space
    alphabet: Optional[int] = Field(default=None, ge=1)

    @field_validator("sizes")
    @classmethod
    def _nonnegative_sizes(cls, value: tuple[int, ...]) -> tuple[int, ...]:
        if not value or min(value) < 0:
            raise ValueError("sizes must be a non-empty list of non-negative integers")
        return value

    def resolved_alphabet(self) -> int:
        return self.alphabet if self.alphabet is not None else 2 ** self.n


class ProfileConfig(BaseModel):
    """Parameters of a fixed-size entropy concentration profile."""

    n: int = Field(default=6, ge=1, le=MAX_INPUT_BITS)
    size: int = Field(default=30, ge=0)
    samples: int = Field(default=1000, ge=1)
    seed: int = Field(default=DEFAULT_SEED, ge=0, le=SEED_MAX)
    alphabet: Optional[int] = Field(default=None, ge=1)
    delta: str = str(CONCENTRATION_DELTA)

    @field_validator("delta")
    @classmethod
    def _delta_in_unit_interval(cls, value: str) -> str:
        return _unit_rational(value)

    def resolved_alphabet(self) -> int:
        return self.alphabet if self.alphabet is not None else 2 ** self.n


class Settings(BaseSettings):
    """Ambient settings: logging only."""

    model_config = SettingsConfigDict(case_sensitive=False, extra="ignore")

    logging: LoggingConfig = Field(default_factory=LoggingConfig)

    # Paths
    project_root: Path = Field(default_factory=lambda: Path(__file__).parent.parent)

    @property
    def log_file_path(self) -> Optional[Path]:
        """Get the full log file path, or None when file logging is off."""
        if self.logging.log_file is None:
            return None
        if self.logging.log_file.is_absolute():
            return self.logging.log_file
        return self.project_root / self.logging.log_file

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> tuple[PydanticBaseSettingsSource, ...]:
        return (init_settings,)


# Global settings instance (singleton pattern)
_settings: Optional[Settings] = None


def get_settings() -> Settings:
    """
    Get the global settings instance.

    Raises:
        ConfigurationError: if the settings hold invalid values
    """
    global _settings
    if _settings is None:
        try:
            _settings = Settings()
        except ValidationError as e:
            raise ConfigurationError(f"Invalid configuration: {e}")
    return _settings


def reset_settings() -> None:
    """Reset settings (useful for testing)."""
    global _settings
    _settings = None
