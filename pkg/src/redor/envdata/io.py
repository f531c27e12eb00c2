"""Line-delimited JSON dataset files.

Line 1 is a header object; each following line is one trajectory
``{"states", "actions", "rewards", "terminal"}`` with ``K + 1`` states. Floats
are written with Python's shortest round-trip repr, so reading back a written
dataset reproduces every number bit for bit.
"""

import json
import os
from collections.abc import Callable
from pathlib import Path
from typing import Any, TypeVar

import numpy as np

from redor.core.redor_error import (
    DatasetFormatError,
    DatasetValidationError,
    RedorError,
)
from redor.envdata.dataset import OfflineDataset, Provenance, Trajectory
from redor.envdata.envs import EnvSpec
from redor.envdata.policies import PolicyMixEntry

FORMAT_VERSION = 1
HEADER_KEYS = (
    "format_version",
    "env",
    "obs_dim",
    "act_dim",
    "horizon",
    "action_low",
    "action_high",
    "gamma",
    "r_max",
    "trajectory_count",
)
TRAJECTORY_KEYS = ("states", "actions", "rewards", "terminal")

T = TypeVar("T")


def dumps_line(record: dict[str, Any]) -> str:
    """One compact JSON line; rejects NaN and Inf."""
    try:
        return json.dumps(record, separators=(",", ":"), allow_nan=False) + "\n"
    except ValueError as e:
        raise RedorError(f"cannot serialize non-finite value: {e}") from e


def write_lines(path: str | Path, lines: list[str]) -> Path:
    """Write ``lines`` to ``path`` through a temporary file, leaving nothing behind on failure."""
    path = Path(path)
    if not path.parent.is_dir():
        raise RedorError(f"output directory does not exist: {path.parent}")
    tmp = path.with_name(f".{path.name}.tmp")
    try:
        with tmp.open("w", encoding="utf-8") as handle:
            handle.writelines(lines)
        os.replace(tmp, path)
    except OSError as e:
        tmp.unlink(missing_ok=True)
        raise RedorError(f"cannot write {path}: {e}") from e
    return path


def read_records(path: str | Path) -> list[tuple[int, dict[str, Any]]]:
    """Parse every non-empty line of a JSON-lines file as an object, with its line number."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise RedorError(f"cannot read {path}: {e}") from e
    records = []
    for number, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as e:
            raise DatasetFormatError(f"invalid JSON: {e.msg}", number) from e
        if not isinstance(record, dict):
            raise DatasetFormatError("expected a JSON object", number)
        records.append((number, record))
    if not records:
        raise DatasetFormatError("file is empty", 1)
    return records


def require_keys(record: dict[str, Any], keys: tuple[str, ...], line_number: int) -> None:
    missing = [k for k in keys if k not in record]
    if missing:
        raise DatasetFormatError(f"missing fields {', '.join(missing)}", line_number)


def parse_field(
    record: dict[str, Any], key: str, convert: Callable[[Any], T], line_number: int
) -> T:
    """``convert(record[key])``, with a bad value reported against ``line_number``."""
    try:
        return convert(record[key])
    except (TypeError, ValueError) as e:
        raise DatasetFormatError(f"bad {key}: {e}", line_number) from e


def _header(dataset: OfflineDataset) -> dict[str, Any]:
    spec = dataset.env
    return {
        "format_version": FORMAT_VERSION,
        "env": spec.name,
        "obs_dim": spec.obs_dim,
        "act_dim": spec.act_dim,
        "horizon": spec.horizon,
        "action_low": list(spec.action_low),
        "action_high": list(spec.action_high),
        "gamma": dataset.gamma,
        "r_max": spec.r_max,
        "trajectory_count": len(dataset),
        "seed": dataset.provenance.seed,
        "policy_mix": [[e.policy, e.count, e.noise] for e in dataset.provenance.policy_mix],
    }


def write_dataset(dataset: OfflineDataset, path: str | Path) -> Path:
    """Write ``dataset`` to ``path``; the file appears only once fully written."""
    lines = [dumps_line(_header(dataset))]
    for trajectory in dataset.trajectories:
        lines.append(
            dumps_line(
                {
                    "states": trajectory.states.tolist(),
                    "actions": trajectory.actions.tolist(),
                    "rewards": trajectory.rewards.tolist(),
                    "terminal": trajectory.terminal,
                }
            )
        )
    return write_lines(path, lines)


def _parse_header(record: dict[str, Any], line_number: int) -> tuple[EnvSpec, float, Provenance]:
    require_keys(record, HEADER_KEYS, line_number)
    if record["format_version"] != FORMAT_VERSION:
        raise DatasetFormatError(
            f"unsupported format_version {record['format_version']}", line_number
        )
    try:
        spec = EnvSpec(
            name=str(record["env"]),
            obs_dim=int(record["obs_dim"]),
            act_dim=int(record["act_dim"]),
            horizon=int(record["horizon"]),
            action_low=tuple(float(v) for v in record["action_low"]),
            action_high=tuple(float(v) for v in record["action_high"]),
            r_max=float(record["r_max"]),
        )
        mix = tuple(
            PolicyMixEntry(str(p), int(c), float(n)) for p, c, n in record.get("policy_mix", [])
        )
        seed = record.get("seed")
        provenance = Provenance(None if seed is None else int(seed), mix)
        gamma = float(record["gamma"])
    except (TypeError, ValueError) as e:
        raise DatasetFormatError(f"bad header: {e}", line_number) from e
    return spec, gamma, provenance


def _as_matrix(value: Any, columns: int, what: str, index: int, line_number: int) -> np.ndarray:
    if not isinstance(value, list) or any(
        not isinstance(row, list) or len(row) != columns for row in value
    ):
        raise DatasetValidationError(f"every {what} row must have length {columns}", index)
    try:
        return np.array(value, dtype=np.float64).reshape(len(value), columns)
    except (TypeError, ValueError) as e:
        raise DatasetFormatError(f"bad {what} value: {e}", line_number) from e


def read_dataset(path: str | Path) -> OfflineDataset:
    """Load a dataset file written by `write_dataset`.

    Raises:
        DatasetFormatError: Unparseable line, missing fields, or a trajectory
            count that disagrees with the header (e.g. a truncated file).
        DatasetValidationError: A trajectory's dimensions disagree with the header.
    """
    records = read_records(path)
    header_line, header = records[0]
    spec, gamma, provenance = _parse_header(header, header_line)
    expected = parse_field(header, "trajectory_count", int, header_line)
    body = records[1:]
    if len(body) != expected:
        last_line = body[-1][0] if body else header_line
        raise DatasetFormatError(
            f"header declares {expected} trajectories but the file holds {len(body)}",
            last_line + 1 if len(body) < expected else body[expected][0],
        )

    trajectories = []
    for index, (line_number, record) in enumerate(body):
        require_keys(record, TRAJECTORY_KEYS, line_number)
        try:
            rewards = np.array(record["rewards"], dtype=np.float64)
        except (TypeError, ValueError) as e:
            raise DatasetFormatError(f"bad rewards: {e}", line_number) from e
        states = _as_matrix(record["states"], spec.obs_dim, "state", index, line_number)
        actions = _as_matrix(record["actions"], spec.act_dim, "action", index, line_number)
        if not isinstance(record["terminal"], bool):
            raise DatasetFormatError("terminal must be true or false", line_number)
        try:
            trajectory = Trajectory(states, actions, rewards, gamma, record["terminal"])
        except RedorError as e:
            raise DatasetValidationError(e.message, index) from e
        trajectories.append(trajectory)
    return OfflineDataset(spec, gamma, tuple(trajectories), provenance)
