"""Evaluation metrics as CSV rows, and per-method summaries."""

import csv
from collections.abc import Sequence
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from redor.core.redor_error import DatasetFormatError, RedorError

METRICS_COLUMNS = (
    "method",
    "seed",
    "step",
    "mean_return",
    "std_return",
    "subset_size",
    "subset_fraction",
    "selection_wall_time_ms",
)
COLUMN_TYPES = (str, int, int, float, float, int, float, float)


@dataclass(frozen=True)
class MetricsRow:
    """One evaluation point of one (method, seed) run."""

    method: str
    seed: int
    step: int
    mean_return: float
    std_return: float
    subset_size: int
    subset_fraction: float
    selection_wall_time_ms: float


@dataclass(frozen=True)
class MethodSummary:
    method: str
    runs: int
    mean_final_return: float
    std_final_return: float
    mean_subset_size: float
    mean_wall_time_ms: float


def _cell(value: object) -> str:
    # repr() keeps floats round-trippable
    return repr(value) if isinstance(value, float) else str(value)


def export_metrics(rows: Sequence[MetricsRow], path: str | Path, append: bool = False) -> Path:
    """Write ``rows`` as CSV with a header; ``append`` adds to an existing file instead."""
    path = Path(path)
    if not path.parent.is_dir():
        raise RedorError(f"output directory does not exist: {path.parent}")
    extend = append and path.is_file() and path.stat().st_size > 0
    if extend:
        with path.open(newline="", encoding="utf-8") as handle:
            header = next(csv.reader(handle), [])
        if tuple(header) != METRICS_COLUMNS:
            raise DatasetFormatError(f"{path} has columns {header}, expected {METRICS_COLUMNS}", 1)
    try:
        with path.open("a" if extend else "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            if not extend:
                writer.writerow(METRICS_COLUMNS)
            for row in rows:
                writer.writerow([_cell(v) for v in asdict(row).values()])
    except OSError as e:
        raise RedorError(f"cannot write {path}: {e}") from e
    return path


def read_metrics(path: str | Path) -> list[MetricsRow]:
    """Parse a metrics file back into rows."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise RedorError(f"cannot read {path}: {e}") from e
    reader = csv.reader(text.splitlines())
    header = next(reader, None)
    if header is None or tuple(header) != METRICS_COLUMNS:
        raise DatasetFormatError(f"expected header {','.join(METRICS_COLUMNS)}", 1)
    rows = []
    for line_number, values in enumerate(reader, start=2):
        if len(values) != len(METRICS_COLUMNS):
            raise DatasetFormatError(f"expected {len(METRICS_COLUMNS)} columns", line_number)
        try:
            converted = [convert(v) for convert, v in zip(COLUMN_TYPES, values)]
        except ValueError as e:
            raise DatasetFormatError(str(e), line_number) from e
        rows.append(MetricsRow(*converted))  # type: ignore[arg-type]
    return rows


def summarize(rows: Sequence[MetricsRow]) -> list[MethodSummary]:
    """Per method: mean and population std of each seed's last evaluation, in first-seen order."""
    finals: dict[str, dict[int, MetricsRow]] = {}
    for row in rows:
        per_seed = finals.setdefault(row.method, {})
        if row.seed not in per_seed or row.step >= per_seed[row.seed].step:
            per_seed[row.seed] = row
    summaries = []
    for method, per_seed in finals.items():
        last = list(per_seed.values())
        returns = np.array([r.mean_return for r in last])
        summaries.append(
            MethodSummary(
                method=method,
                runs=len(last),
                mean_final_return=float(returns.mean()),
                std_final_return=float(returns.std()),
                mean_subset_size=float(np.mean([r.subset_size for r in last])),
                mean_wall_time_ms=float(np.mean([r.selection_wall_time_ms for r in last])),
            )
        )
    return summaries
