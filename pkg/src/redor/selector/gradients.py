"""Per-trajectory critic gradients and return-constrained candidate filtering."""

import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Literal

import numpy as np

from redor.agent.config import TrainConfig
from redor.agent.losses import mc_critic_loss_grad, regression_loss_grad, td_targets
from redor.agent.params import AgentParams
from redor.core.redor_error import DimensionMismatchError, RedorError
from redor.envdata.dataset import OfflineDataset
from redor.numcore.linalg import RealMatrix, RealVector

TargetMode = Literal["mc", "td"]


def _frozen(array: np.ndarray) -> np.ndarray:
    copy = np.array(array, dtype=np.float64)
    copy.setflags(write=False)
    return copy


@dataclass(frozen=True, eq=False)
class GradientTable:
    """Gradient dictionary for one checkpoint round.

    Attributes:
        round_index: Checkpoint round ``t``.
        candidate_ids: Ascending trajectory ids allowed into the subset.
        candidate_grads: One mean-per-step gradient row per candidate.
        full_grad: Gradient of the loss over every transition of the dataset.
        all_grads: Mean-per-step gradient row of every trajectory in the dataset.
        lengths: Transition count of every trajectory in the dataset.
    """

    round_index: int
    candidate_ids: tuple[int, ...]
    candidate_grads: RealMatrix
    full_grad: RealVector
    all_grads: RealMatrix
    lengths: np.ndarray

    def __post_init__(self) -> None:
        ids = tuple(int(i) for i in self.candidate_ids)
        if list(ids) != sorted(set(ids)):
            raise RedorError("candidate ids must be unique and ascending")
        object.__setattr__(self, "candidate_ids", ids)
        for name in ("candidate_grads", "full_grad", "all_grads"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        object.__setattr__(self, "lengths", np.asarray(self.lengths, dtype=np.int64))
        dim = self.full_grad.shape[0] if self.full_grad.ndim == 1 else -1
        for name in ("candidate_grads", "all_grads"):
            matrix = getattr(self, name)
            if matrix.ndim != 2 or matrix.shape[1] != dim:
                raise DimensionMismatchError(
                    f"{name} has shape {matrix.shape}, expected rows of length {dim}"
                )
        if self.candidate_grads.shape[0] != len(ids):
            raise DimensionMismatchError(
                f"{self.candidate_grads.shape[0]} candidate rows for {len(ids)} ids"
            )
        if self.lengths.shape != (self.all_grads.shape[0],):
            raise DimensionMismatchError("one length per trajectory gradient is required")

    def __len__(self) -> int:
        return len(self.candidate_ids)

    @property
    def dim(self) -> int:
        return int(self.full_grad.shape[0])

    def rows_for(self, ids: Sequence[int]) -> RealMatrix:
        """Candidate gradient rows for the given trajectory ids."""
        position = {c: i for i, c in enumerate(self.candidate_ids)}
        try:
            return self.candidate_grads[[position[int(i)] for i in ids]]
        except KeyError as e:
            raise RedorError(f"trajectory {e.args[0]} is not a candidate") from e

    def recomputed_full_grad(self) -> RealVector:
        """Transition-count-weighted mean of the per-trajectory rows."""
        result: RealVector = self.lengths @ self.all_grads / self.lengths.sum()
        return result

    @classmethod
    def from_columns(
        cls,
        grads: np.ndarray,
        full_grad: np.ndarray,
        ids: Sequence[int] | None = None,
        round_index: int = 1,
    ) -> "GradientTable":
        """Table over a synthetic dictionary where every row is also a candidate.

        Rows are reordered so that candidate ids ascend.
        """
        grads = np.atleast_2d(np.asarray(grads, dtype=np.float64))
        ids = list(range(grads.shape[0])) if ids is None else [int(i) for i in ids]
        order = np.argsort(ids, kind="stable")
        rows = grads[order]
        return cls(
            round_index=round_index,
            candidate_ids=tuple(ids[i] for i in order),
            candidate_grads=rows,
            full_grad=np.asarray(full_grad, dtype=np.float64),
            all_grads=rows,
            lengths=np.ones(len(ids), dtype=np.int64),
        )


def top_return_filter(dataset: OfflineDataset, m: float) -> list[int]:
    """Ids of the ``ceil(m% * N)`` highest-return trajectories, ascending.

    Ties in return go to the lower id.
    """
    if not 0.0 < m <= 100.0:
        raise RedorError(f"top-return percent must be in (0, 100], got {m}")
    returns = dataset.total_returns
    count = math.ceil(round(m * len(returns) / 100.0, 9))
    ranked = sorted(range(len(returns)), key=lambda i: (-returns[i], i))
    return sorted(ranked[:count])


def trajectory_gradient(
    params: AgentParams,
    dataset: OfflineDataset,
    trajectory_id: int,
    target_mode: TargetMode = "mc",
    cfg: TrainConfig | None = None,
) -> RealVector:
    """Mean over the trajectory's steps of the per-step critic-loss gradient."""
    batch = dataset.transition_batch([trajectory_id])
    if target_mode == "mc":
        return mc_critic_loss_grad(params, batch).grad
    if target_mode == "td":
        return regression_loss_grad(params.critic, batch, td_targets(params, batch, cfg)).grad
    raise RedorError(f"unknown target mode '{target_mode}'; valid: mc, td")


def build_gradient_table(
    dataset: OfflineDataset,
    candidates: Sequence[int],
    params: AgentParams,
    round_index: int = 1,
    target_mode: TargetMode = "mc",
    cfg: TrainConfig | None = None,
) -> GradientTable:
    """Gradient rows for every trajectory at checkpoint ``params``.

    The full gradient covers the whole dataset; ``candidates`` only restricts
    which rows may be selected.
    """
    if params.obs_dim != dataset.env.obs_dim or params.act_dim != dataset.env.act_dim:
        raise DimensionMismatchError(
            f"checkpoint expects obs/act dims {params.obs_dim}/{params.act_dim}, dataset has "
            f"{dataset.env.obs_dim}/{dataset.env.act_dim}"
        )
    ids = sorted(set(dataset.check_ids(candidates)))
    if not ids:
        raise RedorError("the candidate set is empty")
    all_grads = np.stack(
        [trajectory_gradient(params, dataset, i, target_mode, cfg) for i in range(len(dataset))]
    )
    lengths = np.array([len(t) for t in dataset.trajectories], dtype=np.int64)
    return GradientTable(
        round_index=round_index,
        candidate_ids=tuple(ids),
        candidate_grads=all_grads[ids],
        full_grad=lengths @ all_grads / lengths.sum(),
        all_grads=all_grads,
        lengths=lengths,
    )
