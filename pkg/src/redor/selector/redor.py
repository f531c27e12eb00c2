"""Multi-round dataset reduction: filter, gradients and OMP at every checkpoint."""

from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from redor.agent.checkpoints import CheckpointStore
from redor.core.formatter import Formatter
from redor.core.redor_error import RedorError
from redor.core.utils import config_section
from redor.envdata.dataset import OfflineDataset
from redor.numcore.linalg import RealVector
from redor.selector.config import SelectorConfig
from redor.selector.gradients import build_gradient_table, top_return_filter
from redor.selector.omp import Selection, omp_select


@dataclass(frozen=True, eq=False)
class ReducedDataset:
    """Final weighted subset of a dataset plus the per-round selections behind it.

    ``wall_time_ms`` is the measured selection time; it takes no part in equality.
    """

    method: str
    ids: tuple[int, ...]
    weights: RealVector
    rounds: tuple[Selection, ...]
    dataset_size: int
    config: dict[str, object] = field(default_factory=dict)
    wall_time_ms: float = 0.0

    def __post_init__(self) -> None:
        # Reuse Selection's checks on the merged subset.
        merged = Selection(self.ids, self.weights)
        object.__setattr__(self, "ids", merged.ids)
        object.__setattr__(self, "weights", merged.weights)
        object.__setattr__(self, "rounds", tuple(self.rounds))
        bad = [i for i in self.ids if not 0 <= i < self.dataset_size]
        if bad:
            raise RedorError(f"ids {bad} out of range for {self.dataset_size} trajectories")

    def __len__(self) -> int:
        return len(self.ids)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ReducedDataset):
            return NotImplemented
        return (
            self.method == other.method
            and self.ids == other.ids
            and np.array_equal(self.weights, other.weights)
            and self.rounds == other.rounds
            and self.dataset_size == other.dataset_size
            and self.config == other.config
        )

    @classmethod
    def from_selection(
        cls,
        method: str,
        selection: Selection,
        dataset_size: int,
        config: dict[str, object] | None = None,
    ) -> "ReducedDataset":
        return cls(
            method, selection.ids, selection.weights, (selection,), dataset_size, config or {}
        )

    @property
    def fraction(self) -> float:
        return len(self.ids) / self.dataset_size


def merge_selections(selections: Sequence[Selection]) -> tuple[tuple[int, ...], RealVector]:
    """Union of the ids; each weight is its mean over the rounds that picked it."""
    totals: dict[int, float] = {}
    counts: dict[int, int] = {}
    for selection in selections:
        for i, w in selection.as_dict().items():
            totals[i] = totals.get(i, 0.0) + w
            counts[i] = counts.get(i, 0) + 1
    ids = tuple(sorted(totals))
    return ids, np.array([totals[i] / counts[i] for i in ids])


def redor(
    dataset: OfflineDataset,
    checkpoints: CheckpointStore,
    cfg: SelectorConfig | None = None,
    formatter: Formatter | None = None,
) -> ReducedDataset:
    """Select one OMP subset per checkpoint round ``1..T`` and merge them.

    Raises:
        MissingCheckpointError: A round in ``1..T`` is not in ``checkpoints``.
    """
    if cfg is None:
        section = config_section("select")
        cfg = section if section is not None else SelectorConfig()
    checkpoints.require_rounds(cfg.rounds)
    candidates = top_return_filter(dataset, cfg.top_percent)
    budget = cfg.budget_for(len(dataset))
    selections = []
    for t in range(1, cfg.rounds + 1):
        table = build_gradient_table(
            dataset, candidates, checkpoints.get(t), t, cfg.target_mode
        )
        selection = omp_select(table, cfg, budget=budget)
        selections.append(selection)
        if formatter is not None:
            residual = selection.final_residual or 0.0
            formatter.print_status(
                f"round {t}/{cfg.rounds}: {len(selection)} trajectories, residual {residual:.4g}"
            )
    ids, weights = merge_selections(selections)
    if not ids:
        raise RedorError("every round selected an empty subset; the full gradient is zero")
    return ReducedDataset(
        method="redor",
        ids=ids,
        weights=weights,
        rounds=tuple(selections),
        dataset_size=len(dataset),
        config=cfg.model_dump(mode="json"),
    )
