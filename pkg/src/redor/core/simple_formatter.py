"""Simple formatter implementation using Rich for terminal output."""

import sys
from collections.abc import Sequence

from rich import box
from rich.console import Console
from rich.table import Table

from redor.core import config as config_module
from redor.core.formatter import Formatter


def _cell(value: object) -> str:
    if isinstance(value, float):
        return f"{value:.4g}"
    return str(value)


class SimpleFormatter(Formatter):
    def __init__(self, verbose: bool | None = None) -> None:
        self.color = sys.stdout.isatty()
        self._console = Console() if self.color else None
        self._stderr_console = Console(stderr=True) if self.color else None
        if verbose is None:
            runtime = getattr(config_module.DEFAULT_CONFIG, "runtime", None)
            verbose = bool(runtime.verbose) if runtime is not None else True
        self.verbose = verbose

    def print_status(self, message: str) -> None:
        if not self.verbose:
            return
        if self._console:
            self._console.print(message, style="green")
        else:
            print(message)

    def print_error(self, message: str) -> None:
        if self._stderr_console:
            self._stderr_console.print(message, style="red")
        else:
            print(message, file=sys.stderr)

    def print_warning(self, message: str) -> None:
        if self._console:
            self._console.print(message, style="yellow")
        else:
            print(message)

    def print_table(
        self, title: str, columns: Sequence[str], rows: Sequence[Sequence[object]]
    ) -> None:
        if self._console:
            table = Table(title=title, box=box.SIMPLE_HEAVY)
            for column in columns:
                table.add_column(column)
            for row in rows:
                table.add_row(*(_cell(v) for v in row))
            self._console.print(table)
        else:
            print(f"# {title}")
            print("\t".join(columns))
            for row in rows:
                print("\t".join(_cell(v) for v in row))
