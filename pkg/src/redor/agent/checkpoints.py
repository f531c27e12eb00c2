"""Checkpoint store for multi-round selection, and its on-disk form.

Each round is one JSON-lines file ``checkpoint_XXX.jsonl``: a header with the
round, training step, layer sizes and action bounds, then one line per network.
"""

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from redor.agent.params import AgentParams
from redor.core.redor_error import DatasetFormatError, MissingCheckpointError, RedorError
from redor.envdata.io import dumps_line, parse_field, read_records, require_keys, write_lines
from redor.numcore.mlp import MlpParams

FORMAT_VERSION = 1
NETWORKS = ("critic", "actor", "critic_target", "actor_target")
CHECKPOINT_GLOB = "checkpoint_*.jsonl"
HEADER_KEYS = (
    "format_version",
    "round",
    "step",
    "critic_layers",
    "actor_layers",
    "action_low",
    "action_high",
)


def checkpoint_filename(round_index: int) -> str:
    return f"checkpoint_{round_index:03d}.jsonl"


def checkpoint_schedule(total_steps: int, rounds: int) -> dict[int, list[int]]:
    """Map training step -> rounds snapshotted there; round ``t`` lands on ``ceil(G*t/T)``."""
    if total_steps < 1 or rounds < 1:
        raise RedorError(f"need at least one step and one round, got G={total_steps}, T={rounds}")
    schedule: dict[int, list[int]] = {}
    for t in range(1, rounds + 1):
        schedule.setdefault(math.ceil(total_steps * t / rounds), []).append(t)
    return schedule


@dataclass
class CheckpointStore:
    """Saved parameters keyed by round index, added in non-decreasing step order."""

    entries: dict[int, tuple[int, AgentParams]] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, round_index: object) -> bool:
        return round_index in self.entries

    @property
    def rounds(self) -> list[int]:
        return sorted(self.entries)

    def put(self, round_index: int, step: int, params: AgentParams) -> None:
        if round_index < 1:
            raise RedorError(f"round indices start at 1, got {round_index}")
        if round_index in self.entries:
            raise RedorError(f"round {round_index} is already stored")
        last_step = max((s for s, _ in self.entries.values()), default=-1)
        if step < last_step:
            raise RedorError(f"round {round_index} at step {step} precedes step {last_step}")
        self.entries[round_index] = (step, params)

    def get(self, round_index: int) -> AgentParams:
        if round_index not in self.entries:
            raise MissingCheckpointError(f"checkpoint round {round_index} is not stored")
        return self.entries[round_index][1]

    def step_of(self, round_index: int) -> int:
        self.get(round_index)
        return self.entries[round_index][0]

    def require_rounds(self, rounds: int) -> None:
        missing = [t for t in range(1, rounds + 1) if t not in self.entries]
        if missing:
            raise MissingCheckpointError(
                f"checkpoint rounds {missing[:5]}{'...' if len(missing) > 5 else ''} "
                f"missing from a store holding {len(self)} rounds"
            )


def _network_record(name: str, params: MlpParams) -> dict[str, Any]:
    return {
        "network": name,
        "weights": [w.tolist() for w in params.weights],
        "biases": [b.tolist() for b in params.biases],
    }


def write_checkpoint(params: AgentParams, round_index: int, step: int, path: str | Path) -> Path:
    header = {
        "format_version": FORMAT_VERSION,
        "round": round_index,
        "step": step,
        "agent_step": params.step,
        "critic_layers": list(params.critic.layer_sizes),
        "actor_layers": list(params.actor.layer_sizes),
        "action_low": list(params.action_low),
        "action_high": list(params.action_high),
    }
    lines = [dumps_line(header)]
    lines += [dumps_line(_network_record(name, getattr(params, name))) for name in NETWORKS]
    return write_lines(path, lines)


def _parse_network(
    record: dict[str, Any], layer_sizes: tuple[int, ...], line_number: int
) -> MlpParams:
    require_keys(record, ("network", "weights", "biases"), line_number)
    try:
        network = MlpParams(
            tuple(np.array(w, dtype=np.float64) for w in record["weights"]),
            tuple(np.array(b, dtype=np.float64) for b in record["biases"]),
        )
    except (RedorError, TypeError, ValueError) as e:
        raise DatasetFormatError(f"bad {record['network']} parameters: {e}", line_number) from e
    if network.layer_sizes != layer_sizes:
        raise DatasetFormatError(
            f"{record['network']} has layers {network.layer_sizes}, header says {layer_sizes}",
            line_number,
        )
    return network


def _int_tuple(value: Any) -> tuple[int, ...]:
    return tuple(int(n) for n in value)


def _float_tuple(value: Any) -> tuple[float, ...]:
    return tuple(float(x) for x in value)


def read_checkpoint(path: str | Path) -> tuple[int, int, AgentParams]:
    """Load one checkpoint file as ``(round, step, params)``."""
    records = read_records(path)
    header_line, header = records[0]
    require_keys(header, HEADER_KEYS, header_line)
    if header["format_version"] != FORMAT_VERSION:
        raise DatasetFormatError(f"unsupported format_version {header['format_version']}", 1)
    if len(records) != 1 + len(NETWORKS):
        raise DatasetFormatError(
            f"expected {len(NETWORKS)} network lines, found {len(records) - 1}",
            records[-1][0] + 1,
        )

    layers = {
        "critic": parse_field(header, "critic_layers", _int_tuple, header_line),
        "actor": parse_field(header, "actor_layers", _int_tuple, header_line),
    }
    round_index = parse_field(header, "round", int, header_line)
    step = parse_field(header, "step", int, header_line)
    agent_step = parse_field({"agent_step": step} | header, "agent_step", int, header_line)
    action_low = parse_field(header, "action_low", _float_tuple, header_line)
    action_high = parse_field(header, "action_high", _float_tuple, header_line)

    networks: dict[str, MlpParams] = {}
    for line_number, record in records[1:]:
        name = record.get("network")
        if name not in NETWORKS or name in networks:
            raise DatasetFormatError(f"unexpected network '{name}'", line_number)
        sizes = layers["critic"] if name.startswith("critic") else layers["actor"]
        networks[name] = _parse_network(record, sizes, line_number)
    params = AgentParams(
        critic=networks["critic"],
        actor=networks["actor"],
        critic_target=networks["critic_target"],
        actor_target=networks["actor_target"],
        action_low=action_low,
        action_high=action_high,
        step=agent_step,
    )
    return round_index, step, params


def write_checkpoint_store(store: CheckpointStore, directory: str | Path) -> list[Path]:
    """Write one file per stored round into ``directory``."""
    directory = Path(directory)
    if not directory.is_dir():
        raise RedorError(f"checkpoint directory does not exist: {directory}")
    return [
        write_checkpoint(params, t, step, directory / checkpoint_filename(t))
        for t, (step, params) in sorted(store.entries.items())
    ]


def read_checkpoint_store(directory: str | Path) -> CheckpointStore:
    """Load every checkpoint file in ``directory``, ordered by training step."""
    directory = Path(directory)
    if not directory.is_dir():
        raise MissingCheckpointError(f"checkpoint directory does not exist: {directory}")
    loaded = [read_checkpoint(path) for path in sorted(directory.glob(CHECKPOINT_GLOB))]
    store = CheckpointStore()
    for round_index, step, params in sorted(loaded, key=lambda item: (item[1], item[0])):
        store.put(round_index, step, params)
    return store
