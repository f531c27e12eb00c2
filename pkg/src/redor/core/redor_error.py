"""Exception hierarchy for redor contract and runtime failures."""

import traceback

from redor.core import config as config_module


class RedorError(ValueError):
    def __init__(self, message: str):
        super().__init__(message)
        self._message = message

    @property
    def message(self) -> str:
        return self._message

    def __str__(self) -> str:
        runtime = getattr(config_module.DEFAULT_CONFIG, "runtime", None)
        extra = traceback.format_exc() if runtime is not None and runtime.debug else ""
        if extra.startswith("NoneType: None"):
            extra = ""
        return f"REDOR Error: {self._message}\n{extra}".rstrip("\n")


class DimensionMismatchError(RedorError):
    """Array shapes disagree with the declared dimensions."""


class SingularSystemError(RedorError):
    """A linear system has no unique solution; retry with a positive ridge term."""


class DatasetFormatError(RedorError):
    """A dataset or artifact file could not be parsed."""

    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class DatasetValidationError(RedorError):
    """A parsed trajectory is inconsistent with its dataset header."""

    def __init__(self, message: str, trajectory_index: int):
        super().__init__(f"trajectory {trajectory_index}: {message}")
        self.trajectory_index = trajectory_index


class MissingCheckpointError(RedorError):
    """A requested checkpoint round is not in the store."""


class ProbeGuardError(RedorError):
    """A probe instance is outside the size the probe can handle exactly."""


class UsageError(RedorError):
    """Bad command-line usage or configuration."""
