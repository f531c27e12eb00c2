"""Selection files: a header, one line per round, then one line per chosen trajectory."""

from pathlib import Path

import numpy as np

from redor.core.redor_error import DatasetFormatError, RedorError
from redor.envdata.io import dumps_line, parse_field, read_records, require_keys, write_lines
from redor.selector.omp import Selection
from redor.selector.redor import ReducedDataset

FORMAT_VERSION = 1
HEADER_KEYS = ("format_version", "method", "dataset_size", "round_count", "subset_size")


def write_selection(reduced: ReducedDataset, path: str | Path) -> Path:
    header = {
        "format_version": FORMAT_VERSION,
        "method": reduced.method,
        "dataset_size": reduced.dataset_size,
        "round_count": len(reduced.rounds),
        "subset_size": len(reduced),
        "config": reduced.config,
        "wall_time_ms": reduced.wall_time_ms,
    }
    lines = [dumps_line(header)]
    for selection in reduced.rounds:
        lines.append(
            dumps_line(
                {
                    "round": selection.round_index,
                    "ids": list(selection.ids),
                    "weights": selection.weights.tolist(),
                    "residual_history": list(selection.residual_history),
                }
            )
        )
    for i, w in zip(reduced.ids, reduced.weights.tolist()):
        lines.append(dumps_line({"id": i, "weight": w}))
    return write_lines(path, lines)


def read_selection(path: str | Path) -> ReducedDataset:
    """Load a selection file, re-checking weights and residual histories.

    Raises:
        DatasetFormatError: Malformed lines, wrong counts, negative weights or
            an increasing residual history (reported with its line number).
    """
    records = read_records(path)
    header_line, header = records[0]
    require_keys(header, HEADER_KEYS, header_line)
    if header["format_version"] != FORMAT_VERSION:
        raise DatasetFormatError(f"unsupported format_version {header['format_version']}", 1)
    round_count = parse_field(header, "round_count", int, header_line)
    subset_size = parse_field(header, "subset_size", int, header_line)
    body = records[1:]
    if len(body) != round_count + subset_size:
        raise DatasetFormatError(
            f"expected {round_count} round and {subset_size} item lines, found {len(body)}",
            (body[-1][0] if body else header_line) + 1,
        )

    rounds = []
    for line_number, record in body[:round_count]:
        require_keys(record, ("round", "ids", "weights", "residual_history"), line_number)
        try:
            rounds.append(
                Selection(
                    tuple(record["ids"]),
                    np.array(record["weights"], dtype=np.float64),
                    tuple(record["residual_history"]),
                    int(record["round"]),
                )
            )
        except (RedorError, TypeError, ValueError) as e:
            raise DatasetFormatError(f"invalid round record: {e}", line_number) from e

    ids, weights = [], []
    for line_number, record in body[round_count:]:
        require_keys(record, ("id", "weight"), line_number)
        ids.append(parse_field(record, "id", int, line_number))
        weights.append(parse_field(record, "weight", float, line_number))
    dataset_size = parse_field(header, "dataset_size", int, header_line)
    optional = {"config": None, "wall_time_ms": 0.0} | header
    config = parse_field(optional, "config", lambda v: dict(v or {}), header_line)
    wall_time_ms = parse_field(optional, "wall_time_ms", float, header_line)
    try:
        return ReducedDataset(
            method=str(header["method"]),
            ids=tuple(ids),
            weights=np.array(weights),
            rounds=tuple(rounds),
            dataset_size=dataset_size,
            config=config,
            wall_time_ms=wall_time_ms,
        )
    except RedorError as e:
        line_number = body[round_count][0] if subset_size else header_line
        raise DatasetFormatError(f"invalid subset: {e.message}", line_number) from e
