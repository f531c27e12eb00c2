"""Abstract formatter interface for progress, status and table output."""

from abc import ABC, abstractmethod
from collections.abc import Sequence


class Formatter(ABC):
    @abstractmethod
    def print_status(self, message: str) -> None:
        """Print a status message."""
        pass

    @abstractmethod
    def print_error(self, message: str) -> None:
        """Print an error message."""
        pass

    @abstractmethod
    def print_warning(self, message: str) -> None:
        """Print a warning message."""
        pass

    @abstractmethod
    def print_table(
        self, title: str, columns: Sequence[str], rows: Sequence[Sequence[object]]
    ) -> None:
        """Print a titled table of rows."""
        pass
