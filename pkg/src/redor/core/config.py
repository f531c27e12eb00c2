"""Configuration Pydantic models for redor runtime settings."""

from typing import Any

from pydantic import BaseModel, Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class RuntimeSettings(BaseSettings):
    """Process-wide settings; each field can also come from a ``REDOR_*`` env var."""

    model_config = SettingsConfigDict(env_prefix="REDOR_", extra="ignore")

    verbose: bool = Field(default=True, description="Report progress through the formatter")
    debug: bool = Field(default=False, description="Append tracebacks to error messages")
    threads: int = Field(
        default=0,
        ge=0,
        description="Upper bound on worker processes (0 = one per core, REDOR_THREADS)",
    )


class Config(BaseModel):
    runtime: RuntimeSettings = Field(
        default_factory=RuntimeSettings, description="Runtime configuration"
    )


# Sections are appended by `redor.core.config_builder.add_config` as modules are imported.
DEFAULT_CONFIG: Any = Config()
