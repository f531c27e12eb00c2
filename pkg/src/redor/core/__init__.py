"""Shared configuration, errors, output formatting and helpers."""

from redor.core.config import DEFAULT_CONFIG, Config, RuntimeSettings
from redor.core.config_builder import add_config, build_config
from redor.core.formatter import Formatter
from redor.core.redor_error import (
    DatasetFormatError,
    DatasetValidationError,
    DimensionMismatchError,
    MissingCheckpointError,
    ProbeGuardError,
    RedorError,
    SingularSystemError,
    UsageError,
)
from redor.core.simple_formatter import SimpleFormatter

__all__ = [
    "Config",
    "DEFAULT_CONFIG",
    "DatasetFormatError",
    "DatasetValidationError",
    "DimensionMismatchError",
    "Formatter",
    "MissingCheckpointError",
    "ProbeGuardError",
    "RedorError",
    "RuntimeSettings",
    "SimpleFormatter",
    "SingularSystemError",
    "UsageError",
    "add_config",
    "build_config",
]
